"""Genus-four spectral curves of minimal Lagrangian tori and their elliptic quotients.

Two families of curves ``X`` are handled, written in the coordinates
``(x, lambda)``:

* type I:  ``lambda^2 - 2 b(x) + x^3 lambda^-2 = 0`` with
  ``b(x) = b0 + b1 x + conj(b1) x^2 + conj(b0) x^3``;
* type II: ``k lambda^2 - 2 b(x) + k^-1 lambda^-2 = 0`` with real cubic ``b``
  and ``|k| = 1``.

Their quotients ``Y`` are hyperelliptic (``w^2 = b^2 - x^3`` and
``w^2 = b^2 - 1``), and for type II the relevant Prym variety splits up to
isogeny into the elliptic curves ``w^2 = b(x) + 1`` and ``w^2 = b(x) - 1``.

Polynomials are stored as coefficient sequences in ascending order,
``c[0] + c[1] x + ...``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational

import numpy as np
from numpy.polynomial import polynomial as P

from ._validation import check_positive, check_unimodular
from .exceptions import (
    DegenerateCurveError,
    DegenerateCurveWarning,
    DomainError,
    NumericalError,
)

__all__ = [
    "CurveTypeI",
    "CurveTypeII",
    "EllipticCurveModel",
    "HyperellipticModel",
    "CommensurabilityReport",
    "ScanRow",
    "admissible",
    "admissible_mask",
    "lemma_margin",
    "circle_branch_check",
    "circle_branch_mask",
    "cubic_discriminant",
    "polynomial_discriminant",
    "hyperelliptic_model",
    "elliptic_split",
    "elliptic_periods",
    "reduce_tau",
    "same_lattice",
    "commensurability_probe",
    "scan_region",
]

MIN_GAP = 4.0 ** (1.0 / 3.0)
ZERO_BAND = 1e-12


# --- exact arithmetic over Q(i) ----------------------------------------------


@dataclass(frozen=True)
class _QI:
    """Gaussian rational ``re + i im`` with exact Fraction parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    @classmethod
    def of(cls, z) -> _QI:
        if isinstance(z, _QI):
            return z
        if isinstance(z, Rational):
            return cls(Fraction(z))
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise DomainError("coefficients must be finite")
        return cls(Fraction(z.real), Fraction(z.imag))

    def __add__(self, o):
        return _QI(self.re + o.re, self.im + o.im)

    def __sub__(self, o):
        return _QI(self.re - o.re, self.im - o.im)

    def __mul__(self, o):
        return _QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    def __truediv__(self, o):
        n = o.re * o.re + o.im * o.im
        return _QI((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))


def _exact_det(rows: list[list[_QI]]) -> _QI:
    a = [list(r) for r in rows]
    n = len(a)
    det = _QI(Fraction(1))
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return _QI(Fraction(0))
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = _QI(-det.re, -det.im)
        det = det * a[col][col]
        for r in range(col + 1, n):
            if a[r][col]:
                factor = a[r][col] / a[col][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return det


def _trim(coeffs) -> list[_QI]:
    c = [_QI.of(z) for z in coeffs]
    while c and not c[-1]:
        c.pop()
    return c


def _is_exact_input(coeffs) -> bool:
    return all(isinstance(z, Rational) for z in coeffs)


def polynomial_discriminant(coeffs) -> complex | Fraction:
    """Exact discriminant of ``sum coeffs[j] x^j``.

    Floating point coefficients are taken at their exact binary values, so the
    result is the discriminant of the polynomial as stored. Returns a
    :class:`Fraction` for rational real input, else a complex float.
    """
    c = _trim(coeffs)
    n = len(c) - 1
    if n < 1:
        raise DomainError("discriminant needs a polynomial of degree at least 1")
    if n == 1:
        return Fraction(1) if _is_exact_input(coeffs) else 1.0 + 0j
    dc = [c[j] * _QI(Fraction(j)) for j in range(1, n + 1)]
    # Sylvester matrix of p and p', rows in descending powers
    p_desc, d_desc = c[::-1], dc[::-1]
    size = 2 * n - 1
    zero = _QI(Fraction(0))
    rows = []
    for i in range(n - 1):
        rows.append([zero] * i + p_desc + [zero] * (size - i - len(p_desc)))
    for i in range(n):
        rows.append([zero] * i + d_desc + [zero] * (size - i - len(d_desc)))
    res = _exact_det(rows)
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    disc = res / c[-1]
    disc = _QI(sign * disc.re, sign * disc.im)
    if _is_exact_input(coeffs) and disc.im == 0:
        return disc.re
    return complex(disc)


def _root_scale(coeffs) -> float:
    c = np.asarray(coeffs, dtype=complex)
    n = len(c) - 1
    lead = abs(c[-1])
    return max([1.0] + [(abs(c[k]) / lead) ** (1.0 / (n - k)) for k in range(n) if c[k] != 0])


def cubic_discriminant(coeffs) -> float | Fraction:
    """Discriminant of a cubic ``c0 + c1 x + c2 x^2 + c3 x^3`` (exact, see above).

    Positive for three distinct real roots of a real cubic, negative for one
    real root and a complex pair, zero for a repeated root.
    """
    if len(coeffs) != 4 or coeffs[3] == 0:
        raise DomainError("cubic_discriminant needs four coefficients with c3 != 0")
    disc = polynomial_discriminant(coeffs)
    if isinstance(disc, complex) and abs(disc.imag) <= ZERO_BAND * abs(disc.real):
        return disc.real
    return disc


def _is_degenerate(coeffs, disc) -> bool:
    if disc == 0:
        return True
    if _is_exact_input(coeffs):
        return False
    n = len(coeffs) - 1
    lead = abs(complex(coeffs[-1]))
    scale = lead ** (2 * n - 2) * _root_scale(coeffs) ** (n * (n - 1))
    return abs(complex(disc)) <= ZERO_BAND * scale


# --- curves ------------------------------------------------------------------


@dataclass(frozen=True)
class CurveTypeI:
    """Type I curve; ``b(x) = b0 + b1 x + conj(b1) x^2 + conj(b0) x^3``."""

    b0: complex
    b1: complex

    @property
    def b(self) -> tuple[complex, complex, complex, complex]:
        b0, b1 = complex(self.b0), complex(self.b1)
        return (b0, b1, b1.conjugate(), b0.conjugate())

    @classmethod
    def from_coefficients(cls, b, tol: float = 1e-12) -> CurveTypeI:
        """Build from ``[c0, c1, c2, c3]`` after checking ``c3 = conj(c0)``, ``c2 = conj(c1)``."""
        c = [complex(z) for z in b]
        if len(c) != 4:
            raise DomainError("type I curves need four coefficients")
        defect = max(abs(c[3] - c[0].conjugate()), abs(c[2] - c[1].conjugate()))
        if defect > tol * max(1.0, max(abs(z) for z in c)):
            raise DomainError(
                f"coefficients are not conjugate-palindromic (defect {defect:.3e})"
            )
        return cls(c[0], c[1])


@dataclass(frozen=True)
class CurveTypeII:
    """Type II curve with real cubic ``b`` (ascending coefficients) and ``|k| = 1``.

    ``critical`` optionally records the data ``(u, v, w)`` with
    ``b(x) = x^3 - 3/2 (u + v) x^2 + 3 u v x + w``.
    """

    b: tuple[float, float, float, float]
    k: complex = 1.0
    critical: tuple[float, float, float] | None = None

    def __post_init__(self):
        b = tuple(float(c) for c in self.b)
        if len(b) != 4 or b[3] == 0 or not all(math.isfinite(c) for c in b):
            raise DomainError("b must be a real cubic given by four finite coefficients, c3 != 0")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "k", check_unimodular(self.k, "k"))
        if self.critical is not None:
            expected = _critical_cubic(*self.critical)
            if max(abs(x - y) for x, y in zip(expected, b)) > 1e-12 * max(1.0, *map(abs, b)):
                raise DomainError("b does not match the recorded critical data (u, v, w)")

    @classmethod
    def from_critical(cls, u: float, v: float, w: float, k: complex = 1.0) -> CurveTypeII:
        return cls(_critical_cubic(u, v, w), k, (float(u), float(v), float(w)))

    def __call__(self, x):
        return P.polyval(x, self.b)

    def monic(self) -> CurveTypeII:
        """Same curve after the rescaling ``x -> x / c3^{1/3}`` that makes ``b`` monic."""
        s = np.cbrt(self.b[3])
        return CurveTypeII(tuple(c / s**j for j, c in enumerate(self.b)), self.k)

    def critical_data(self) -> tuple[float, float, float] | None:
        """``(u, v, w)`` of the monic rescaling, or None if ``b'`` has no two real roots."""
        if self.critical is not None:
            return self.critical
        c0, c1, c2, _ = self.monic().b
        # b' = 3x^2 + 2 c2 x + c1 = 3 (x - u)(x - v)
        disc = c2 * c2 - 3.0 * c1
        if disc <= 0:
            return None
        r = math.sqrt(disc)
        return ((-c2 - r) / 3.0, (-c2 + r) / 3.0, c0)


def _critical_cubic(u: float, v: float, w: float) -> tuple[float, float, float, float]:
    return (float(w), 3.0 * u * v, -1.5 * (u + v), 1.0)


# --- admissibility -------------------------------------------------------------


def lemma_margin(u, v, w):
    """Signed distance to the admissibility boundary (positive inside).

    The minimum of ``v - u - 4^{1/3}``, ``w - (1 + u^2 (u - 3v)/2)`` and
    ``(v^2 (v - 3u)/2 - 1) - w``; broadcasts over arrays.
    """
    u, v, w = (np.asarray(a, dtype=float) for a in (u, v, w))
    lower = 1.0 + 0.5 * u**2 * (u - 3.0 * v)
    upper = 0.5 * v**2 * (v - 3.0 * u) - 1.0
    return np.minimum(np.minimum(v - u - MIN_GAP, w - lower), upper - w)


def admissible(u: float, v: float, w: float) -> bool:
    """Whether ``(u, v, w)`` satisfies the strict spectral-data inequalities."""
    u, v, w = float(u), float(v), float(w)
    if not u < v:
        raise DomainError(f"admissible needs u < v, got u={u!r}, v={v!r}")
    return bool(lemma_margin(u, v, w) > 0)


def admissible_mask(u, v, w) -> np.ndarray:
    """Vectorised :func:`admissible`; entries with ``u >= v`` are False."""
    u, v, w = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (u, v, w)))
    return (u < v) & (lemma_margin(u, v, w) > 0)


def _thetas(samples: int) -> np.ndarray:
    if int(samples) != samples or samples < 16:
        raise DomainError(f"samples must be an integer >= 16, got {samples!r}")
    return 2.0 * np.pi * np.arange(int(samples)) / int(samples)


def _shifted_cubic_discriminant(c0, c1, c2, c3, shift):
    """Float discriminant of ``b(x) - shift`` for broadcastable coefficient arrays."""
    a, b, c, d = c3, c2, c1, c0 - shift
    return 18 * a * b * c * d - 4 * b**3 * d + b**2 * c**2 - 4 * a * c**3 - 27 * a**2 * d**2


def circle_branch_check(curve: CurveTypeII, samples: int = 256) -> bool:
    """True iff ``b(x) - cos(theta)`` has three distinct real roots at every sample.

    ``theta`` runs over ``2 pi j / samples``; the discriminant test is
    independent of the closed-form inequalities in :func:`admissible`.
    """
    cos = np.cos(_thetas(samples))
    c0, c1, c2, c3 = curve.b
    return bool(np.all(_shifted_cubic_discriminant(c0, c1, c2, c3, cos) > 0))


def circle_branch_mask(u, v, w, samples: int = 256) -> np.ndarray:
    """Vectorised :func:`circle_branch_check` for the critical-point family."""
    cos = np.cos(_thetas(samples))
    u, v, w = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (u, v, w)))
    c0, c1, c2 = w[..., None], (3.0 * u * v)[..., None], (-1.5 * (u + v))[..., None]
    out = np.ones(u.shape, dtype=bool)
    for chunk in np.array_split(cos, max(1, len(cos) // 32)):
        out &= np.all(_shifted_cubic_discriminant(c0, c1, c2, 1.0, chunk) > 0, axis=-1)
    return out


# --- hyperelliptic and elliptic models ------------------------------------------


@dataclass(frozen=True, eq=False)
class HyperellipticModel:
    """Right-hand side ``w^2 = coeffs(x)`` of the quotient curve ``Y``."""

    coeffs: np.ndarray
    discriminant: complex | Fraction
    distinct_roots: bool

    @property
    def degree(self) -> int:
        nz = np.nonzero(self.coeffs)[0]
        return int(nz[-1]) if nz.size else -1

    def roots(self) -> np.ndarray:
        return P.polyroots(self.coeffs[: self.degree + 1])


def hyperelliptic_model(curve: CurveTypeI | CurveTypeII) -> HyperellipticModel:
    """Sextic model of the quotient: ``b^2 - x^3`` (type I) or ``b^2 - 1`` (type II).

    Emits :class:`DegenerateCurveWarning` unless the sextic has six distinct
    roots (a drop in degree counts as roots at infinity).
    """
    if isinstance(curve, CurveTypeI):
        b = list(curve.b)
        sub = [0, 0, 0, 1]
    elif isinstance(curve, CurveTypeII):
        b = list(curve.b)
        sub = [1]
    else:
        raise DomainError(f"expected a type I or type II curve, got {type(curve).__name__}")
    exact = [_QI.of(c) for c in b]
    sq = [_QI(Fraction(0))] * 7
    for i, x in enumerate(exact):
        for j, y in enumerate(exact):
            sq[i + j] = sq[i + j] + x * y
    for j, c in enumerate(sub):
        sq[j] = sq[j] - _QI(Fraction(c))
    as_complex = np.array([complex(z) for z in sq])
    coeffs = as_complex.real if isinstance(curve, CurveTypeII) else as_complex
    if not sq[6]:
        disc, ok = 0.0, False
    else:
        disc = polynomial_discriminant(sq)
        ok = not _is_degenerate(list(coeffs), disc)
    if not ok:
        warnings.warn(
            "sextic model has a repeated root or reduced degree; the quotient curve is singular",
            DegenerateCurveWarning,
            stacklevel=2,
        )
    return HyperellipticModel(coeffs=coeffs, discriminant=disc, distinct_roots=ok)


@dataclass(frozen=True, eq=False)
class EllipticCurveModel:
    """Elliptic curve ``w^2 = c(x)`` with a real cubic ``c``; periods of ``dx/w`` on demand."""

    cubic: tuple[float, float, float, float]
    label: str = ""

    def __post_init__(self):
        c = tuple(float(x) for x in self.cubic)
        if len(c) != 4 or c[3] == 0:
            raise DomainError("elliptic model needs a real cubic with nonzero leading term")
        object.__setattr__(self, "cubic", c)
        disc = cubic_discriminant(c)
        if _is_degenerate(c, disc):
            raise DegenerateCurveError(
                f"cubic {_format_poly(c)} has a repeated root (discriminant {float(disc):.3e})"
            )

    @cached_property
    def periods(self) -> tuple[complex, complex]:
        return elliptic_periods(self)

    @property
    def tau(self) -> complex:
        w1, w2 = self.periods
        return w2 / w1

    def roots(self) -> np.ndarray:
        return _sorted_roots(self.cubic)


def _format_poly(c) -> str:
    terms = [f"{a:+.6g}*x^{j}" for j, a in enumerate(c) if a]
    return " ".join(reversed(terms)) or "0"


def elliptic_split(curve: CurveTypeII) -> tuple[EllipticCurveModel, EllipticCurveModel]:
    """The elliptic factors ``w^2 = b(x) + 1`` and ``w^2 = b(x) - 1``.

    Raises :class:`DegenerateCurveError` naming the offending factor when
    either cubic has a repeated root.
    """
    if not isinstance(curve, CurveTypeII):
        raise DomainError("elliptic_split applies to type II curves")
    b = curve.b
    plus = (b[0] + 1.0, b[1], b[2], b[3])
    minus = (b[0] - 1.0, b[1], b[2], b[3])
    models = []
    for label, c in (("E1", plus), ("E2", minus)):
        try:
            models.append(EllipticCurveModel(c, label))
        except DegenerateCurveError as exc:
            raise DegenerateCurveError(f"{label} is singular: {exc}") from None
    return models[0], models[1]


# --- periods -------------------------------------------------------------------


def _sorted_roots(c) -> np.ndarray:
    r = P.polyroots(np.asarray(c, dtype=float)).astype(complex)
    # real roots snapped to the axis, then ordered (descending real part)
    r = np.where(np.abs(r.imag) <= 1e-14 * np.max(np.abs(r)), r.real + 0j, r)
    return r[np.lexsort((-r.imag, -r.real))]


def _agm(a: complex, b: complex, max_iter: int = 60) -> complex:
    """Optimal complex arithmetic-geometric mean (right choice of square root each step)."""
    gap = np.inf
    for _ in range(max_iter):
        new_gap = abs(a - b)
        if new_gap <= 4 * np.finfo(float).eps * abs(a) or new_gap >= gap:
            return 0.5 * (a + b)
        gap = new_gap
        g = np.sqrt(a * b)
        if abs(a - g) > abs(a + g):
            g = -g
        a, b = 0.5 * (a + b), g
    raise NumericalError("AGM failed to converge")


def _periods_agm(c) -> tuple[complex, complex]:
    """Lattice basis of ``dx/w`` via the AGM (works for real or complex roots)."""
    e1, e2, e3 = _sorted_roots(c)
    a = np.sqrt(e1 - e3)
    b = np.sqrt(e1 - e2)
    if abs(a - b) > abs(a + b):
        b = -b
    cc = np.sqrt(e2 - e3)
    if abs(cc - 1j * b) > abs(cc + 1j * b):
        cc = -cc
    # lattice of y^2 = 4 (x - e1)(x - e2)(x - e3); rescale to w^2 = c3 (x - e1)...
    scale = 2.0 / np.sqrt(complex(c[3]))
    return scale * np.pi / _agm(a, b), scale * np.pi / _agm(cc, 1j * b)


def _gauss_panels(func, panels: int, nodes: np.ndarray, weights: np.ndarray) -> complex:
    edges = np.linspace(-0.5 * np.pi, 0.5 * np.pi, panels + 1)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * (edges[1:] - edges[:-1])
    phi = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    vals = func(phi)
    return complex(np.sum(vals * np.tile(weights, panels) * np.repeat(half, len(nodes))))


def _cycle_period(c3: float, ra: complex, rb: complex, r3: complex, tol: float) -> complex:
    """``2 * integral dx/w`` along the segment ``ra -> rb`` (a closed cycle on the curve).

    With ``x = m + h sin(phi)`` the square-root singularities cancel and the
    integrand becomes ``1 / sqrt(-c3 (x - r3))``, continued along the path.
    """
    m, h = 0.5 * (ra + rb), 0.5 * (rb - ra)
    nodes, weights = np.polynomial.legendre.leggauss(20)

    def integrand(phi):
        s = np.sqrt(-c3 * (m + h * np.sin(phi) - r3))
        # follow one branch continuously: phi is increasing along the array
        flips = np.abs(s[1:] - s[:-1]) > np.abs(s[1:] + s[:-1])
        sign = np.concatenate([[1.0], np.where(np.cumsum(flips) % 2, -1.0, 1.0)])
        return sign / s

    panels, prev = 4, None
    for _ in range(12):
        val = 2.0 * _gauss_panels(integrand, panels, nodes, weights)
        if prev is not None and abs(val - prev) <= tol * abs(val):
            return val
        prev, panels = val, 2 * panels
    raise NumericalError(f"period quadrature did not converge to {tol:g}")


def _periods_quadrature(c, tol: float) -> tuple[complex, complex]:
    e = _sorted_roots(c)
    if np.all(e.imag == 0):
        e = np.sort(e.real).astype(complex)
        w1 = _cycle_period(c[3], e[0], e[1], e[2], tol)
        w2 = _cycle_period(c[3], e[1], e[2], e[0], tol)
    else:
        real = e[np.argmin(np.abs(e.imag))]
        upper = e[np.argmax(e.imag)]
        lower = e[np.argmin(e.imag)]
        w1 = _cycle_period(c[3], lower, real, upper, tol)
        w2 = _cycle_period(c[3], real, upper, lower, tol)
    return w1, w2


def _orient(w1: complex, w2: complex) -> tuple[complex, complex]:
    if abs((w2 / w1).imag) < 1e-14:
        raise NumericalError("computed periods are R-dependent")
    return (w1, w2) if (w2 / w1).imag > 0 else (w1, -w2)


def reduce_tau(tau: complex, tol: float = 1e-12) -> complex:
    """Representative of ``tau`` (upper half plane) in the standard SL2(Z) domain.

    Boundary points are normalised to ``Re tau >= 0``, so the square lattice
    gives ``i`` and the hexagonal one ``exp(i pi / 3)``.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise DomainError("tau must lie in the upper half plane")
    for _ in range(1000):
        tau -= round(tau.real)
        if abs(tau) < 1.0 - tol:
            tau = -1.0 / tau
        else:
            break
    if abs(tau.real + 0.5) <= tol:
        tau += 1.0
    if abs(abs(tau) - 1.0) <= tol and tau.real < 0:
        tau = -tau.conjugate()
    return tau


def _basis_change(basis_a, basis_b) -> np.ndarray:
    """Real 2x2 matrix ``C`` with ``basis_b[i] = sum_j C[i, j] basis_a[j]``."""
    A = np.array([[z.real for z in basis_a], [z.imag for z in basis_a]])
    B = np.array([[z.real for z in basis_b], [z.imag for z in basis_b]])
    return np.linalg.solve(A, B).T


def same_lattice(basis_a, basis_b, tol: float = 1e-10) -> bool:
    """Whether two bases generate the same lattice (integer unimodular change of basis)."""
    C = _basis_change(basis_a, basis_b)
    return bool(
        np.max(np.abs(C - np.round(C))) <= tol * max(1.0, np.abs(C).max())
        and abs(abs(round(np.linalg.det(np.round(C)))) - 1) == 0
    )


def elliptic_periods(
    E: EllipticCurveModel, tol: float = 1e-10, method: str = "quadrature", verify: bool = True
) -> tuple[complex, complex]:
    """A basis ``(O1, O2)`` of the period lattice of ``dx/w`` with ``Im(O2/O1) > 0``.

    ``method`` is ``"quadrature"`` (Gauss-Legendre along segments between
    branch points, with the branch of ``w`` followed along each path) or
    ``"agm"``. With ``verify`` the other method is run as well and
    :class:`NumericalError` is raised if the two lattices differ beyond ``tol``.
    """
    tol = check_positive(tol, "tol")
    if method not in ("quadrature", "agm"):
        raise DomainError(f"method must be 'quadrature' or 'agm', got {method!r}")
    c = E.cubic
    quad = _orient(*_periods_quadrature(c, 0.01 * tol)) if (method == "quadrature" or verify) else None
    agm = _orient(*_periods_agm(c)) if (method == "agm" or verify) else None
    if verify and not same_lattice(quad, agm, tol):
        raise NumericalError(
            f"period algorithms disagree: quadrature {quad}, AGM {agm}"
        )
    return quad if method == "quadrature" else agm


# --- commensurability ----------------------------------------------------------


@dataclass(frozen=True)
class CommensurabilityReport:
    """Heuristic rational-approximation data for two period lattices.

    ``coupling`` holds the real coordinates of each lattice's basis in the
    other's (two 2x2 blocks). ``residual`` is the smallest value, over
    denominators ``q <= max_denominator``, of ``max_i |q c_i - round(q c_i)|``
    across all eight numbers; it is 0 for commensurable lattices. Small values
    suggest, but never certify, commensurability.
    """

    coupling: tuple[tuple[float, ...], tuple[float, ...]]
    best_denominator: int
    residual: float
    convergents: tuple[tuple[Fraction, float], ...]
    max_denominator: int
    heuristic: bool = field(default=True)

    def to_dict(self) -> dict:
        return {
            "coupling_12": list(self.coupling[0]),
            "coupling_21": list(self.coupling[1]),
            "best_denominator": self.best_denominator,
            "residual": self.residual,
            "convergents": [[f"{fr.numerator}/{fr.denominator}", err] for fr, err in self.convergents],
            "max_denominator": self.max_denominator,
            "heuristic": True,
        }


def commensurability_probe(
    E1: EllipticCurveModel, E2: EllipticCurveModel, tol: float = 1e-10, max_denominator: int = 10_000
) -> CommensurabilityReport:
    """Probe whether the period lattices of ``E1`` and ``E2`` are commensurable."""
    tol = check_positive(tol, "tol")
    if max_denominator < 1:
        raise DomainError("max_denominator must be positive")
    p1, p2 = E1.periods, E2.periods
    c12 = _basis_change(p1, p2).ravel()
    c21 = _basis_change(p2, p1).ravel()
    values = np.concatenate([c12, c21])
    q = np.arange(1, max_denominator + 1, dtype=float)[:, None]
    scaled = q * values[None, :]
    dist = np.max(np.abs(scaled - np.round(scaled)), axis=1)
    # snap values that are integers to within tol so exact cases report 0
    dist = np.where(dist <= tol * np.maximum(1.0, q[:, 0] * np.abs(values).max()), 0.0, dist)
    best = int(np.argmin(dist))
    convergents = []
    for x in values:
        fr = Fraction(float(x)).limit_denominator(max_denominator)
        convergents.append((fr, float(abs(x - fr))))
    return CommensurabilityReport(
        coupling=(tuple(float(x) for x in c12), tuple(float(x) for x in c21)),
        best_denominator=best + 1,
        residual=float(dist[best]),
        convergents=tuple(convergents),
        max_denominator=int(max_denominator),
    )


# --- region scan -----------------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    u: float
    v: float
    w: float
    admissible: bool
    circle_check: bool
    split_ok: bool
    tau1: complex | None = None
    tau2: complex | None = None


def scan_region(u_values, v_values, w_values, samples: int = 256, periods: bool = False) -> list[ScanRow]:
    """Evaluate admissibility, the circle oracle and splitting over a box.

    Cells with ``u >= v`` are skipped (the family is symmetric under swapping
    ``u`` and ``v``). With ``periods`` the reduced period ratios of both
    elliptic factors are included for cells that split.
    """
    U, V, W = np.meshgrid(
        np.asarray(u_values, float), np.asarray(v_values, float), np.asarray(w_values, float),
        indexing="ij",
    )
    keep = U < V
    U, V, W = U[keep], V[keep], W[keep]
    adm = admissible_mask(U, V, W)
    circ = circle_branch_mask(U, V, W, samples)
    rows = []
    for u, v, w, a, cc in zip(U, V, W, adm, circ):
        curve = CurveTypeII.from_critical(u, v, w)
        tau1 = tau2 = None
        try:
            E1, E2 = elliptic_split(curve)
            ok = True
            if periods:
                tau1, tau2 = reduce_tau(E1.tau), reduce_tau(E2.tau)
        except DegenerateCurveError:
            ok = False
        rows.append(ScanRow(float(u), float(v), float(w), bool(a), bool(cc), ok, tau1, tau2))
    return rows
