"""Tzitzeica equation ``u_{z zbar} = exp(-2u) - exp(u)`` on flat tori.

The doubly periodic problem is solved by a spectral Newton method with a
Fourier-preconditioned GMRES inner solve. Solutions depending on ``x`` only
reduce to the ODE ``u'' / 4 = exp(-2u) - exp(u)`` with first integral
``H = u'^2 / 8 + V(u)``, ``V(u) = exp(-2u) / 2 + exp(u)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.sparse.linalg import LinearOperator, gmres

from . import spectral
from ._validation import check_positive, check_resolution
from .exceptions import BifurcationError, ConvergenceError, DomainError

log = logging.getLogger(__name__)

__all__ = [
    "Lattice",
    "ScalarField",
    "EquivariantOrbit",
    "NewtonInfo",
    "residual",
    "solve_periodic",
    "turning_points",
    "period",
    "time_of_flight",
    "solve_equivariant",
    "potential",
]

MIN_ENERGY = 1.5
BIFURCATION_THRESHOLD = 1e-8


@dataclass(frozen=True)
class Lattice:
    """Period lattice ``Z omega1 + Z omega2`` with ``Im(omega2 / omega1) > 0``."""

    omega1: complex
    omega2: complex

    def __post_init__(self):
        w1, w2 = complex(self.omega1), complex(self.omega2)
        if not (np.isfinite(w1) and np.isfinite(w2)) or w1 == 0 or w2 == 0:
            raise DomainError("lattice periods must be finite and nonzero")
        if (w2 / w1).imag <= 0:
            raise DomainError(
                f"lattice requires Im(omega2/omega1) > 0, got {(w2 / w1).imag:.6g}"
            )
        object.__setattr__(self, "omega1", w1)
        object.__setattr__(self, "omega2", w2)

    @property
    def area(self) -> float:
        return float((self.omega1.conjugate() * self.omega2).imag)

    def scaled(self, factor: complex) -> Lattice:
        return Lattice(self.omega1 * factor, self.omega2 * factor)

    def grid(self, nx: int, ny: int) -> np.ndarray:
        """Complex coordinates of the grid points, shape ``(nx, ny)``."""
        s = np.arange(nx)[:, None] / nx
        t = np.arange(ny)[None, :] / ny
        return s * self.omega1 + t * self.omega2


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real samples ``values[j, k] = u((j/nx) omega1 + (k/ny) omega2)``."""

    lattice: Lattice
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise DomainError("field values must be a 2-D array")
        check_resolution(values.shape[0], "nx")
        check_resolution(values.shape[1], "ny")
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def with_values(self, values) -> ScalarField:
        return ScalarField(self.lattice, values)

    def shifted(self, dj: int, dk: int) -> ScalarField:
        """Translate by the lattice-grid vector ``(dj/nx) omega1 + (dk/ny) omega2``."""
        return self.with_values(np.roll(self.values, (-dj, -dk), axis=(0, 1)))

    @classmethod
    def constant(cls, lattice: Lattice, c: float, nx: int = 64, ny: int | None = None):
        return cls(lattice, np.full((nx, ny or nx), float(c)))

    @classmethod
    def from_function(cls, lattice: Lattice, func, nx: int = 64, ny: int | None = None):
        """Sample ``func(z)`` (complex argument, real result) on the grid."""
        return cls(lattice, np.real(func(lattice.grid(nx, ny or nx))))

    def laplacian(self) -> np.ndarray:
        return spectral.laplacian(self.values, self.lattice.omega1, self.lattice.omega2)

    def dz(self) -> np.ndarray:
        return spectral.dz(self.values, self.lattice.omega1, self.lattice.omega2)


def _nonlinearity(u: np.ndarray) -> np.ndarray:
    return np.exp(u) - np.exp(-2.0 * u)


def residual(u: ScalarField) -> ScalarField:
    """Pointwise ``Delta u / 4 - exp(-2u) + exp(u)``."""
    return u.with_values(0.25 * u.laplacian() + _nonlinearity(u.values))


@dataclass
class NewtonInfo:
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)
    step_lengths: list[float] = field(default_factory=list)
    min_singular_estimate: float = np.inf
    converged: bool = False


def _sup(r: np.ndarray) -> float:
    return float(np.max(np.abs(r)))


def _translation_modes(u: np.ndarray, lattice: Lattice) -> np.ndarray:
    """Orthonormal basis of span(u_x, u_y), the near-kernel created by translations."""
    ux, uy = spectral.gradient(u, lattice.omega1, lattice.omega2)
    cols = [g.ravel() for g in (ux, uy) if np.linalg.norm(g) > 1e-8 * np.sqrt(g.size)]
    if not cols:
        return np.zeros((u.size, 0))
    Q, Rr = np.linalg.qr(np.column_stack(cols))
    keep = np.abs(np.diag(Rr)) > 1e-8 * np.abs(Rr).max()
    return Q[:, keep]


def solve_periodic(
    lattice: Lattice,
    u0: ScalarField,
    tol: float = 1e-10,
    max_iter: int = 50,
    full_output: bool = False,
):
    """Newton's method for the periodic Tzitzeica equation.

    The Jacobian ``Delta/4 + 2 exp(-2u) + exp(u)`` is applied matrix-free and
    inverted by GMRES, preconditioned with the constant-coefficient operator
    at the mean of ``2 exp(-2u) + exp(u)``. Steps are kept orthogonal to
    ``u_x`` and ``u_y``: translations of a solution are solutions, so these
    directions are (near-)kernel and fixing them pins the phase. Each step is globalised by halving
    the step (up to 20 times) until the residual 2-norm decreases.

    Raises :class:`BifurcationError` when the constant-coefficient estimate of
    the Jacobian's smallest singular value drops below 1e-8, and
    :class:`ConvergenceError` (carrying the residual history) otherwise.
    """
    tol = check_positive(tol, "tol")
    if u0.lattice != lattice:
        raise DomainError("initial guess is sampled on a different lattice")
    nx, ny = u0.shape
    kx, ky = spectral.wavevectors(lattice.omega1, lattice.omega2, nx, ny)
    lap_symbol = -0.25 * (kx**2 + ky**2)

    u = u0.values.copy()
    r = residual(u0).values
    info = NewtonInfo(residual_history=[_sup(r)])
    log.debug("newton start: |r|_inf = %.3e", info.residual_history[-1])

    while info.residual_history[-1] > tol:
        if info.iterations >= max_iter:
            raise ConvergenceError(
                f"Newton did not reach tol={tol:g} in {max_iter} iterations",
                info.residual_history,
            )
        coeff = 2.0 * np.exp(-2.0 * u) + np.exp(u)
        symbol = lap_symbol + coeff.mean()
        sigma_min = float(np.min(np.abs(symbol)))
        info.min_singular_estimate = min(info.min_singular_estimate, sigma_min)
        if sigma_min < BIFURCATION_THRESHOLD:
            raise BifurcationError(
                f"linearised operator is singular (estimate {sigma_min:.3e})", sigma_min
            )

        Q = _translation_modes(u, lattice)

        def project(v, Q=Q):
            return v - Q @ (Q.T @ v) if Q.size else v

        def matvec(v, coeff=coeff):
            v = project(v).reshape(nx, ny)
            lap = np.fft.ifft2(lap_symbol * np.fft.fft2(v)).real
            return project((lap + coeff * v).ravel())

        def precond(v, symbol=symbol):
            return project(np.fft.ifft2(np.fft.fft2(v.reshape(nx, ny)) / symbol).real.ravel())

        J = LinearOperator((nx * ny, nx * ny), matvec=matvec, dtype=float)
        M = LinearOperator((nx * ny, nx * ny), matvec=precond, dtype=float)
        rhs = project(-r.ravel())
        delta, status = gmres(
            J, rhs, M=M, rtol=1e-12, atol=0.01 * tol, restart=60, maxiter=20
        )
        if status != 0 and np.linalg.norm(matvec(delta) - rhs) > 0.5 * np.linalg.norm(rhs):
            raise ConvergenceError("inner GMRES solve failed", info.residual_history)
        delta = project(delta).reshape(nx, ny)

        norm0 = np.linalg.norm(r)
        step = 1.0
        for _ in range(21):
            trial = u0.with_values(u + step * delta)
            r_trial = residual(trial).values
            if np.linalg.norm(r_trial) < norm0 or _sup(r_trial) <= tol:
                break
            step *= 0.5
        else:
            floor = np.finfo(float).eps * (np.abs(lap_symbol).max() * np.abs(u).max() + coeff.max())
            raise ConvergenceError(
                f"line search failed to reduce the residual (|r|_inf = {_sup(r):.3e}; "
                f"rounding floor on this grid is about {floor:.1e})",
                info.residual_history,
            )
        u = trial.values.copy()
        r = r_trial
        info.iterations += 1
        info.step_lengths.append(step)
        info.residual_history.append(_sup(r))
        log.debug(
            "newton %d: step %.3g, |r|_inf = %.3e", info.iterations, step, info.residual_history[-1]
        )

    info.converged = True
    result = u0.with_values(u)
    return (result, info) if full_output else result


# --- equivariant reduction -------------------------------------------------


def potential(u):
    """``V(u) = exp(-2u)/2 + exp(u)``; strictly convex with minimum ``V(0) = 3/2``."""
    return 0.5 * np.exp(-2.0 * u) + np.exp(u)


def _excess(u):
    # V(u) - 3/2 without cancellation near u = 0
    return 0.5 * np.expm1(-2.0 * u) + np.expm1(u)


def _check_energy(H: float) -> float:
    H = float(H)
    if not np.isfinite(H) or H <= MIN_ENERGY:
        raise DomainError(
            f"energy must exceed 3/2 (H = 3/2 is the constant solution u = 0), got {H!r}"
        )
    return H


def turning_points(H: float) -> tuple[float, float]:
    """The roots ``u_minus < 0 < u_plus`` of ``V(u) = H``."""
    H = _check_energy(H)
    excess = H - MIN_ENERGY

    def g(u):
        return _excess(u) - excess

    hi = np.log(H) + 1.0
    lo = -0.5 * np.log(2.0 * H) - 1.0
    u_plus = optimize.brentq(g, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    u_minus = optimize.brentq(g, lo, 0.0, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(u_minus), float(u_plus)


def _rhs(_x, y):
    u, up = y
    return [up, 4.0 * (np.exp(-2.0 * u) - np.exp(u))]


def _expm1_ratio(x: float) -> float:
    return 1.0 if x == 0.0 else np.expm1(x) / x


def period(H: float, epsabs: float = 1e-14) -> float:
    """Period ``2 int_{u-}^{u+} du / sqrt(8 (H - V(u)))`` by quadrature.

    The substitution ``u = m + h sin(phi)`` cancels the inverse square-root
    endpoint singularities.
    """
    H = _check_energy(H)
    u_minus, u_plus = turning_points(H)
    mid = 0.5 * (u_plus + u_minus)
    half = 0.5 * (u_plus - u_minus)

    def integrand(phi):
        sn, c2 = np.sin(phi), np.cos(phi) ** 2
        u = mid + half * sn
        # H - V(u) = V(u_end) - V(u) written through d = |u_end - u| = half c2 / (1 +- sn)
        if sn >= 0:
            d_over = half / (1.0 + sn)
            d = d_over * c2
            bracket = np.exp(u) * _expm1_ratio(d) - np.exp(-2.0 * u) * _expm1_ratio(-2.0 * d)
        else:
            d_over = half / (1.0 - sn)
            d = d_over * c2
            bracket = np.exp(-2.0 * u) * _expm1_ratio(2.0 * d) - np.exp(u) * _expm1_ratio(-d)
        return half / np.sqrt(8.0 * d_over * bracket)

    val, _ = integrate.quad(integrand, -np.pi / 2, np.pi / 2, epsabs=epsabs, epsrel=1e-13, limit=200)
    return 2.0 * val


def time_of_flight(H: float, rtol: float = 1e-13) -> float:
    """Period measured by integrating the ODE from ``u_plus`` to the next maximum."""
    H = _check_energy(H)
    _, u_plus = turning_points(H)

    def at_minimum(_x, y):
        return y[1]

    at_minimum.direction = 1.0
    at_minimum.terminal = True
    T_guess = max(period(H), 1.0)
    sol = integrate.solve_ivp(
        _rhs, (0.0, 4.0 * T_guess), [u_plus, 0.0], method="DOP853",
        rtol=rtol, atol=1e-15, events=at_minimum, first_step=1e-8,
    )
    if not sol.t_events[0].size:
        raise ConvergenceError("no turning point found while integrating the orbit")
    return 2.0 * float(sol.t_events[0][0])


@dataclass(frozen=True, eq=False)
class EquivariantOrbit:
    """One period of the ``x``-dependent solution with energy ``H``.

    ``profile[j] = u(x_j)`` and ``slope[j] = u'(x_j)`` at
    ``x_j = j * period / len(profile)``, starting from the maximum ``u_plus``.
    """

    energy: float
    period: float
    profile: np.ndarray
    slope: np.ndarray
    turning_points: tuple[float, float]

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.profile.size) * self.period / self.profile.size

    def first_integral(self) -> np.ndarray:
        return self.slope**2 / 8.0 + potential(self.profile)

    def to_field(self, width: float | None = None, ny: int | None = None) -> ScalarField:
        """Extend constantly in ``y`` on the rectangular lattice ``(period, i * width)``."""
        width = self.period if width is None else width
        ny = ny or self.profile.size
        lattice = Lattice(complex(self.period), complex(0.0, width))
        return ScalarField(lattice, np.repeat(self.profile[:, None], ny, axis=1))


def solve_equivariant(H: float, tol: float = 1e-10, samples: int = 256) -> EquivariantOrbit:
    """Closed orbit of the reduced ODE with first integral ``H``.

    The period comes from quadrature; the profile from an 8th-order
    Dormand-Prince integration started at the maximum. Raises
    :class:`ConvergenceError` if ``H`` drifts by more than ``tol``.
    """
    H = _check_energy(H)
    tol = check_positive(tol, "tol")
    samples = check_resolution(samples, "samples")
    u_minus, u_plus = turning_points(H)
    T = period(H)
    x = np.arange(samples) * T / samples
    sol = integrate.solve_ivp(
        _rhs, (0.0, T), [u_plus, 0.0], method="DOP853",
        rtol=1e-13, atol=1e-14, t_eval=x, first_step=1e-8,
    )
    u, up = sol.y
    orbit = EquivariantOrbit(
        energy=H, period=T, profile=u, slope=up, turning_points=(u_minus, u_plus)
    )
    drift = float(np.max(np.abs(orbit.first_integral() - H)))
    if drift > tol:
        raise ConvergenceError(f"first integral drifted by {drift:.3e} > tol={tol:g}")
    return orbit
