"""Toda frames, minimal Legendrian tori in S^5 and their cones.

For a solution ``u`` of the Tzitzeica equation put ``s1 = exp(u/2)``. The
extended frame ``F`` solves ``F_z = F A``, ``F_zbar = F B`` with

    A = diag(0, u_z/2, -u_z/2) + zeta [[0, 0, s1], [s1, 0, 0], [0, s1^-2, 0]]
    B = -A^H        (|zeta| = 1)

and its first column ``f`` is a minimal Legendrian immersion into S^5 with
``|f_z|^2 = exp(u)`` and Hopf differential ``<f_zzz, f> = zeta^3``.

Frames are integrated with a Magnus (Lie group) method, sixth order by
default and fourth order on request, whose steps are exact matrix
exponentials of anti-Hermitian matrices followed by polar reprojection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from scipy.linalg import schur

from . import fdiff, liecore, spectral
from ._validation import check_unimodular, check_unitary, unitarity_defect
from .exceptions import DomainError, IntegrationError
from .tzsolve import Lattice, ScalarField

__all__ = [
    "ConnectionCoefficient",
    "FrameField",
    "LegendrianSurface",
    "ReportItem",
    "VerificationReport",
    "Mesh",
    "connection",
    "connection_field",
    "connection_pair",
    "flatness_defect",
    "integrate_frame",
    "monodromy",
    "legendrian_surface",
    "verify_legendrian",
    "verify_frame",
    "hopf_project",
    "fubini_study_factor",
    "cone_mesh",
    "CYCLIC",
]

#: the cyclic permutation matrix e1 -> e2 -> e3 -> e1
CYCLIC = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=complex)
CYCLIC.setflags(write=False)

DRIFT_TOL = 1e-8
FLATNESS_TOL = 1e-6


# --- connection -------------------------------------------------------------


def connection_pair(u_z, s1, zeta: complex) -> tuple[np.ndarray, np.ndarray]:
    """``(A, B)``: coefficients of ``dz`` and ``dzbar`` in ``alpha_zeta``.

    Broadcasts over arrays ``u_z`` and ``s1``. ``zeta`` may be any nonzero
    complex number; for ``|zeta| = 1`` one has ``B = -A^H``.
    """
    u_z = np.asarray(u_z, dtype=complex)
    s1 = np.asarray(s1, dtype=float)
    shape = np.broadcast(u_z, s1).shape
    k_part = np.zeros(shape + (3, 3), dtype=complex)
    k_part[..., 1, 1] = 0.5 * u_z
    k_part[..., 2, 2] = -0.5 * u_z
    p_part = np.zeros(shape + (3, 3), dtype=complex)
    p_part[..., 0, 2] = s1
    p_part[..., 1, 0] = s1
    p_part[..., 2, 1] = s1**-2
    k_bar = -np.conj(np.swapaxes(k_part, -1, -2))
    p_bar = -np.conj(np.swapaxes(p_part, -1, -2))
    return k_part + zeta * p_part, k_bar + p_bar / zeta


@dataclass(frozen=True, eq=False)
class ConnectionCoefficient:
    """``A = alpha_zeta(d/dz)`` at one grid point."""

    A: np.ndarray
    zeta: complex

    @property
    def k_part(self) -> np.ndarray:
        return np.diag(np.diag(self.A))

    @property
    def p_part(self) -> np.ndarray:
        return self.A - self.k_part

    @property
    def dzbar(self) -> np.ndarray:
        return -np.conj(self.A.T)


def _u_z_and_s1(u: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    return u.dz(), np.exp(0.5 * u.values)


def connection_field(u: ScalarField, zeta: complex) -> np.ndarray:
    """``A`` at every grid point, shape ``(nx, ny, 3, 3)``."""
    zeta = check_unimodular(zeta)
    u_z, s1 = _u_z_and_s1(u)
    return connection_pair(u_z, s1, zeta)[0]


def connection(u: ScalarField, at: tuple[int, int], zeta: complex) -> ConnectionCoefficient:
    zeta = check_unimodular(zeta)
    j, k = at
    A = connection_field(u, zeta)[j % u.nx, k % u.ny]
    return ConnectionCoefficient(A=A, zeta=zeta)


# --- Magnus transport --------------------------------------------------------


def _expm_skew(Omega: np.ndarray) -> np.ndarray:
    """Exponential of a stack of anti-Hermitian matrices (exactly unitary)."""
    Hm = 1j * Omega
    Hm = 0.5 * (Hm + np.conj(np.swapaxes(Hm, -1, -2)))
    lam, V = np.linalg.eigh(Hm)
    return (V * np.exp(-1j * lam)[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))


def _directional(A: np.ndarray, step: complex) -> np.ndarray:
    # alpha(step . d) = step A + conj(step) B with B = -A^H
    return step * A - np.conj(step) * np.conj(np.swapaxes(A, -1, -2))


def _comm(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    # transports act by right multiplication, which reverses commutators
    # relative to the usual left-multiplication Magnus formulas
    return Y @ X - X @ Y


_GAUSS_OFFSET = np.sqrt(15.0) / 10.0
SCHEMES = ("magnus4", "magnus6")


def _stage_generators(u: ScalarField, zeta: complex, axis: int, step: complex, offsets):
    lat = u.lattice
    vals = u.values
    ux, uy = spectral.gradient(vals, lat.omega1, lat.omega2)
    out = []
    for c in offsets:
        if c == 0.0:
            su, sx, sy = vals, ux, uy
        else:
            su, sx, sy = (spectral.fractional_shift(a, axis, c) for a in (vals, ux, uy))
        A = connection_pair(0.5 * (sx - 1j * sy), np.exp(0.5 * su), zeta)[0]
        out.append(_directional(A, step))
    return out


def _edge_transports(
    u: ScalarField, zeta: complex, scheme: str = "magnus6"
) -> tuple[np.ndarray, np.ndarray]:
    """Parallel transports across every grid edge.

    ``Gs[j, k]`` carries a frame from node ``(j, k)`` to ``(j+1, k)`` and
    ``Gt[j, k]`` from ``(j, k)`` to ``(j, k+1)`` (indices mod the grid), via
    ``F_next = F @ G``. ``"magnus4"`` uses Simpson nodes (end points and the
    midpoint); ``"magnus6"`` the three Gauss-Legendre nodes.
    """
    if scheme not in SCHEMES:
        raise DomainError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    lat = u.lattice
    nx, ny = u.shape
    out = []
    for axis, step in ((0, lat.omega1 / nx), (1, lat.omega2 / ny)):
        if scheme == "magnus4":
            X0, Xm = _stage_generators(u, zeta, axis, step, (0.0, 0.5))
            X1 = np.roll(X0, -1, axis=axis)
            Omega = (X0 + 4.0 * Xm + X1) / 6.0 - _comm(X0, X1) / 12.0
        else:
            X1, X2, X3 = _stage_generators(
                u, zeta, axis, step, (0.5 - _GAUSS_OFFSET, 0.5, 0.5 + _GAUSS_OFFSET)
            )
            a1 = X2
            a2 = (np.sqrt(15.0) / 3.0) * (X3 - X1)
            a3 = (10.0 / 3.0) * (X3 - 2.0 * X2 + X1)
            C1 = _comm(a1, a2)
            C2 = -_comm(a1, 2.0 * a3 + C1) / 60.0
            Omega = a1 + a3 / 12.0 + _comm(-20.0 * a1 - a3 + C1, a2 + C2) / 240.0
        out.append(_expm_skew(Omega))
    return out[0], out[1]


def flatness_defect(u: ScalarField, zeta: complex = 1.0, scheme: str = "magnus6") -> float:
    """Largest holonomy defect ``|G_s G_t' - G_t G_s'|_F`` over grid plaquettes.

    Zero for an exactly flat connection; of order ``h^2`` times the curvature
    when ``u`` does not solve the equation.
    """
    zeta = check_unimodular(zeta)
    Gs, Gt = _edge_transports(u, zeta, scheme)
    route_st = Gs @ np.roll(Gt, -1, axis=0)
    route_ts = Gt @ np.roll(Gs, -1, axis=1)
    return float(np.max(np.linalg.norm(route_st - route_ts, axis=(-2, -1))))


# --- frames ------------------------------------------------------------------


GHOST = 5


@dataclass(frozen=True, eq=False)
class FrameField:
    """Frames on the grid, padded with ``ghost`` extra layers on every side.

    ``padded[ghost + j, ghost + k]`` is the frame at
    ``(j/nx) omega1 + (k/ny) omega2`` for ``-ghost <= j <= nx + ghost`` and
    likewise for ``k``. The halo lets local difference stencils run without
    relying on the (only approximately exact) monodromy of a numerical frame.
    ``drift`` is the largest unitarity defect seen before reprojection.
    """

    lattice: Lattice
    padded: np.ndarray
    zeta: complex
    F0: np.ndarray
    ghost: int = GHOST
    order: str = "xy"
    drift: float = 0.0
    scheme: str = "magnus6"

    @property
    def nx(self) -> int:
        return self.padded.shape[0] - 2 * self.ghost - 1

    @property
    def ny(self) -> int:
        return self.padded.shape[1] - 2 * self.ghost - 1

    @property
    def extended(self) -> np.ndarray:
        """Frames for ``0 <= j <= nx``, ``0 <= k <= ny`` (closing row and column included)."""
        g = self.ghost
        return self.padded[g : g + self.nx + 1, g : g + self.ny + 1]

    @property
    def frames(self) -> np.ndarray:
        g = self.ghost
        return self.padded[g : g + self.nx, g : g + self.ny]


def integrate_frame(
    u: ScalarField,
    zeta: complex = 1.0,
    F0=None,
    order: str = "xy",
    flatness_tol: float | None = FLATNESS_TOL,
    ghost: int = GHOST,
    scheme: str = "magnus6",
) -> FrameField:
    """Integrate ``F^{-1} dF = alpha_zeta`` from ``F(0) = F0``.

    ``order="xy"`` integrates along the ``omega1`` axis first and then along
    every ``omega2`` column; ``"yx"`` does the reverse. Raises
    :class:`IntegrationError` if the connection's flatness defect exceeds
    ``flatness_tol`` or if a step drifts off the unitary group.
    """
    zeta = check_unimodular(zeta)
    F0 = np.eye(3, dtype=complex) if F0 is None else check_unitary(F0, "F0")
    if order not in ("xy", "yx"):
        raise DomainError(f"order must be 'xy' or 'yx', got {order!r}")
    ghost = int(ghost)
    if ghost < 0:
        raise DomainError("ghost must be non-negative")
    if flatness_tol is not None:
        defect = flatness_defect(u, zeta, scheme)
        if defect > flatness_tol:
            raise IntegrationError(
                f"connection is not flat: plaquette defect {defect:.3e} > {flatness_tol:g}"
            )
    nx, ny = u.shape
    Gs, Gt = _edge_transports(u, zeta, scheme)
    # padded index J sits at grid index J - ghost
    js = (np.arange(nx + 2 * ghost + 1) - ghost) % nx
    ks = (np.arange(ny + 2 * ghost + 1) - ghost) % ny
    Gs = Gs[js[:-1]][:, ks]
    Gt = Gt[js][:, ks[:-1]]
    F = np.empty((nx + 2 * ghost + 1, ny + 2 * ghost + 1, 3, 3), dtype=complex)
    g0 = ghost
    F[g0, g0] = F0
    worst = [0.0]

    def step(current, G, forward):
        nxt = current @ (G if forward else np.conj(np.swapaxes(G, -1, -2)))
        drift = unitarity_defect(nxt)
        worst[0] = max(worst[0], drift)
        if drift > DRIFT_TOL:
            raise IntegrationError(f"frame drifted off U(3) by {drift:.3e}")
        return liecore.nearest_unitary(nxt)

    def sweep(axis, fixed):
        # transport along ``axis`` away from the origin layer; ``fixed`` selects the line
        n_ax = F.shape[axis]
        G = Gs if axis == 0 else Gt
        for J in range(g0, n_ax - 1):
            idx_from = (J, fixed) if axis == 0 else (fixed, J)
            idx_to = (J + 1, fixed) if axis == 0 else (fixed, J + 1)
            F[idx_to] = step(F[idx_from], G[idx_from], True)
        for J in range(g0, 0, -1):
            idx_from = (J, fixed) if axis == 0 else (fixed, J)
            idx_to = (J - 1, fixed) if axis == 0 else (fixed, J - 1)
            F[idx_to] = step(F[idx_from], G[idx_to], False)

    if order == "xy":
        sweep(0, g0)
        sweep(1, slice(None))
    else:
        sweep(1, g0)
        sweep(0, slice(None))
    F.setflags(write=False)
    return FrameField(
        lattice=u.lattice, padded=F, zeta=zeta, F0=np.array(F0), ghost=ghost,
        order=order, drift=worst[0], scheme=scheme,
    )


def _generator_monodromy(frames: FrameField, which: str) -> np.ndarray:
    F = frames.extended
    end = F[frames.nx, 0] if which == "omega1" else F[0, frames.ny]
    return end @ np.linalg.inv(F[0, 0])


def monodromy(frames: FrameField, generator) -> tuple[np.ndarray, float]:
    """Monodromy ``M = F(z0 + omega) F(z0)^{-1}`` and its distance to the centre.

    ``generator`` is ``"omega1"``, ``"omega2"`` or an integer pair ``(m, n)``
    meaning ``m omega1 + n omega2``. The distance is
    ``min_c |M - c I|_F`` over the cube roots of unity ``c``.
    """
    if isinstance(generator, str):
        if generator not in ("omega1", "omega2"):
            raise DomainError(f"unknown generator {generator!r}")
        M = _generator_monodromy(frames, generator)
    else:
        m, n = (int(c) for c in generator)
        M = np.eye(3, dtype=complex)
        for power, name in ((m, "omega1"), (n, "omega2")):
            if power:
                M = M @ np.linalg.matrix_power(_generator_monodromy(frames, name), power)
    centre = [liecore.EPS**k for k in range(3)]
    dist = min(float(np.linalg.norm(M - c * np.eye(3))) for c in centre)
    return M, dist


# --- surfaces ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LegendrianSurface:
    """Grid of unit vectors ``f`` in C^3 with its quasi-periodicity data.

    ``f(z + omega1) = monodromy1 @ f(z)`` and likewise for ``omega2``.
    ``padded`` optionally carries ``ghost`` extra layers of samples around the
    grid; when present, derivatives use local difference stencils, otherwise
    spectral differentiation twisted by the monodromies.
    """

    lattice: Lattice
    points: np.ndarray
    zeta: complex = 1.0
    monodromy1: np.ndarray = field(default_factory=lambda: np.eye(3, dtype=complex))
    monodromy2: np.ndarray = field(default_factory=lambda: np.eye(3, dtype=complex))
    padded: np.ndarray | None = None
    ghost: int = 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.points.shape[:2]

    def transformed(self, G) -> LegendrianSurface:
        """Image under a constant unitary ``G`` (monodromies conjugated)."""
        G = check_unitary(G, "G")
        Gi = np.conj(G.T)
        return LegendrianSurface(
            self.lattice, self.points @ G.T, self.zeta,
            G @ self.monodromy1 @ Gi, G @ self.monodromy2 @ Gi,
            None if self.padded is None else self.padded @ G.T, self.ghost,
        )

    def derivatives(self, orders) -> list[np.ndarray]:
        """Wirtinger derivatives ``d^p/dz^p d^q/dzbar^q f`` on the grid."""
        return _grid_derivatives(
            self.points, self.padded, self.ghost, self.lattice,
            self.monodromy1, self.monodromy2, orders,
        )


def legendrian_surface(frames: FrameField) -> LegendrianSurface:
    """First frame column, with the frame's monodromies and halo attached."""
    M1, _ = monodromy(frames, "omega1")
    M2, _ = monodromy(frames, "omega2")
    return LegendrianSurface(
        frames.lattice, frames.frames[..., :, 0].copy(), frames.zeta, M1, M2,
        frames.padded[..., :, 0].copy(), frames.ghost,
    )


def _simultaneous_phases(M1: np.ndarray, M2: np.ndarray):
    """Common eigenbasis ``Q`` of commuting unitaries and their eigen-angles."""
    _, Q = schur(M1 + (0.7071 + 0.3183j) * M2, output="complex")
    th1 = np.angle(np.diag(np.conj(Q.T) @ M1 @ Q))
    th2 = np.angle(np.diag(np.conj(Q.T) @ M2 @ Q))
    return Q, th1, th2


def _spectral_derivatives(
    values: np.ndarray, lattice: Lattice, M1, M2, orders
) -> list[np.ndarray]:
    """Wirtinger derivatives of a quasi-periodic C^3-valued grid function.

    ``values`` has shape ``(nx, ny, 3, ...)``; the monodromies act on axis 2.
    """
    Q, th1, th2 = _simultaneous_phases(M1, M2)
    g = np.einsum("ab,jkb...->jka...", np.conj(Q.T), values)
    out = [np.empty_like(g) for _ in orders]
    trailing = g.shape[3:]
    for a in range(3):
        for idx in np.ndindex(*trailing):
            sl = (slice(None), slice(None), a) + idx
            ders = spectral.quasi_periodic_derivatives(
                g[sl], lattice.omega1, lattice.omega2, (th1[a], th2[a]), orders
            )
            for o, d in zip(out, ders):
                o[sl] = d
    return [np.einsum("ab,jkb...->jka...", Q, o) for o in out]


def _grid_derivatives(values, padded, ghost, lattice, M1, M2, orders) -> list[np.ndarray]:
    nx, ny = values.shape[:2]
    if padded is not None and ghost >= 2:
        return fdiff.wirtinger(padded, ghost, lattice.omega1, lattice.omega2, nx, ny, orders)
    return _spectral_derivatives(values, lattice, M1, M2, orders)


def _herm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise ``<a, b> = sum a_i conj(b_i)`` over the last axis."""
    return np.sum(a * np.conj(b), axis=-1)


@dataclass(frozen=True)
class ReportItem:
    name: str
    max_deviation: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_deviation) and self.max_deviation <= self.threshold)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "max_deviation": self.max_deviation,
            "threshold": self.threshold,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class VerificationReport:
    items: tuple[ReportItem, ...]
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    def __getitem__(self, name: str) -> ReportItem:
        for item in self.items:
            if item.name == name:
                return item
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [item.name for item in self.items]

    def to_json(self) -> list[dict]:
        return [item.to_dict() for item in self.items]

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


LEGENDRIAN_THRESHOLDS = {
    "unit_norm": 1e-7,
    "horizontality": 1e-7,
    "isotropy": 1e-7,
    "conformal_factor": 1e-6,
    "hopf_differential": 1e-6,
}


def verify_legendrian(
    f: LegendrianSurface, u: ScalarField, thresholds: dict | None = None
) -> VerificationReport:
    """Check the defining relations of a minimal Legendrian surface.

    Items: ``unit_norm`` (max ||f| - 1|), ``horizontality`` (max |<f_z, f>|),
    ``isotropy`` (max |<f_z, f_zbar>|), ``conformal_factor``
    (max ||f_z|^2 - e^u| / e^u) and ``hopf_differential`` (stddev / |mean| of
    ``Q = <f_zzz, f>``). Derivatives use the ghost halo when the surface carries
    one and otherwise spectral differentiation twisted by the monodromies, so
    surfaces that only close up to a unitary still work.
    """
    limits = dict(LEGENDRIAN_THRESHOLDS, **(thresholds or {}))
    pts = f.points
    f_z, f_zb, f_zzz = f.derivatives(((1, 0), (0, 1), (3, 0)))
    eu = np.exp(u.values)
    Q = _herm(f_zzz, pts)
    Q_mean = complex(Q.mean())
    Q_spread = float(np.std(Q) / abs(Q_mean)) if Q_mean != 0 else np.inf
    items = (
        ReportItem("unit_norm", float(np.max(np.abs(np.linalg.norm(pts, axis=-1) - 1.0))), limits["unit_norm"]),
        ReportItem("horizontality", float(np.max(np.abs(_herm(f_z, pts)))), limits["horizontality"]),
        ReportItem("isotropy", float(np.max(np.abs(_herm(f_z, f_zb)))), limits["isotropy"]),
        ReportItem(
            "conformal_factor",
            float(np.max(np.abs(np.sum(np.abs(f_z) ** 2, axis=-1) - eu) / eu)),
            limits["conformal_factor"],
        ),
        ReportItem("hopf_differential", Q_spread, limits["hopf_differential"]),
    )
    return VerificationReport(items, data={"Q_mean": [Q_mean.real, Q_mean.imag]})


FRAME_THRESHOLDS = {
    "frame_symmetries": 1e-12,
    "primitivity": 1e-8,
    "path_independence": 1e-8,
    "determinant": 1e-10,
    "lagrangian_phase": 1e-8,
}


def tangent_frame(f: LegendrianSurface) -> np.ndarray:
    """``(f, f_x/|f_x|, f_y/|f_y|)`` as a grid of column matrices."""
    f_z, f_zb = f.derivatives(((1, 0), (0, 1)))
    fx = f_z + f_zb
    fy = 1j * (f_z - f_zb)
    fx = fx / np.linalg.norm(fx, axis=-1, keepdims=True)
    fy = fy / np.linalg.norm(fy, axis=-1, keepdims=True)
    return np.stack([f.points, fx, fy], axis=-1)


def verify_frame(
    frames: FrameField,
    u: ScalarField,
    n_zeta: int = 50,
    seed: int = 0,
    thresholds: dict | None = None,
) -> VerificationReport:
    """Structural checks on an integrated frame field.

    Items: ``frame_symmetries`` (the nu, mu and reality relations of the
    extended connection at ``n_zeta`` random unimodular ``zeta``),
    ``primitivity`` (distance of the non-diagonal part of ``F^{-1} F_z`` to
    g_1), ``path_independence`` (x-first versus y-first integration),
    ``determinant`` (spread of ``det F``) and ``lagrangian_phase`` (spread of
    the phase of ``(f, f_x/|f_x|, f_y/|f_y|)``).
    """
    limits = dict(FRAME_THRESHOLDS, **(thresholds or {}))
    rng = np.random.default_rng(seed)
    u_z, s1 = _u_z_and_s1(u)
    sym = 0.0
    for zeta in np.exp(2j * np.pi * rng.random(n_zeta)):
        A, _ = connection_pair(u_z, s1, zeta)
        A_eps, _ = connection_pair(u_z, s1, liecore.EPS * zeta)
        A_neg, _ = connection_pair(u_z, s1, -zeta)
        _, B_refl = connection_pair(u_z, s1, 1.0 / np.conj(zeta))
        sym = max(
            sym,
            float(np.max(np.abs(liecore.algebra_automorphism(A, "nu") - A_eps))),
            float(np.max(np.abs(liecore.algebra_automorphism(A, "mu") - A_neg))),
            float(np.max(np.abs(-np.conj(np.swapaxes(A, -1, -2)) - B_refl))),
        )

    F = frames.frames
    M1, _ = monodromy(frames, "omega1")
    M2, _ = monodromy(frames, "omega2")
    (F_z,) = _grid_derivatives(
        F, frames.padded, frames.ghost, frames.lattice, M1, M2, ((1, 0),)
    )
    mc = np.conj(np.swapaxes(F, -1, -2)) @ F_z
    diag = np.einsum("...ii->...i", mc)
    off = mc - diag[..., None] * np.eye(3)
    prim = float(np.max(np.linalg.norm(off - liecore.project_g1(off), axis=(-2, -1))))

    other = integrate_frame(
        u, frames.zeta, frames.F0, "yx" if frames.order == "xy" else "xy",
        flatness_tol=None, ghost=frames.ghost, scheme=frames.scheme,
    )
    path = float(np.max(np.abs(other.padded - frames.padded)))

    dets = np.linalg.det(F)
    det_spread = float(np.max(np.abs(dets - dets[0, 0])))

    V = tangent_frame(legendrian_surface(frames))
    ph = np.angle(np.linalg.det(V))
    mean_phase = np.angle(np.mean(np.exp(1j * ph)))
    phase_spread = float(np.max(np.abs(np.angle(np.exp(1j * (ph - mean_phase))))))

    items = (
        ReportItem("frame_symmetries", sym, limits["frame_symmetries"]),
        ReportItem("primitivity", prim, limits["primitivity"]),
        ReportItem("path_independence", path, limits["path_independence"]),
        ReportItem("determinant", det_spread, limits["determinant"]),
        ReportItem("lagrangian_phase", phase_spread, limits["lagrangian_phase"]),
    )
    det0 = complex(dets[0, 0])
    return VerificationReport(
        items,
        data={
            "det": [det0.real, det0.imag],
            "phase": float(mean_phase % (2 * np.pi)),
        },
    )


# --- projection and meshing --------------------------------------------------


def hopf_project(f: LegendrianSurface, tol: float = 1e-12) -> np.ndarray:
    """Unit representatives in C^3 of the points ``pi(f)`` of CP^2.

    Each representative is rescaled by a phase so that its first coordinate
    of modulus above ``tol`` is real and positive.
    """
    pts = f.points / np.linalg.norm(f.points, axis=-1, keepdims=True)
    big = np.abs(pts) > tol
    first = np.argmax(big, axis=-1)
    lead = np.take_along_axis(pts, first[..., None], axis=-1)
    return pts * (np.abs(lead) / lead)


def fubini_study_factor(reps: np.ndarray, lattice: Lattice, M1=None, M2=None) -> np.ndarray:
    """Conformal factor ``tr(Pi_z Pi_zbar) / 2`` of the projector ``Pi = p p^H``.

    This is ``(|p_z|^2 - |<p_z, p>|^2 + |p_zbar|^2 - |<p_zbar, p>|^2) / 2``
    for any smooth unit lift ``p``, and ``|f_z|^2`` for a horizontal lift with
    ``|f_z| = |f_zbar|``. Only the points of CP^2 enter, so the phase chosen
    for each representative (continuous or not) is irrelevant.
    ``M1``/``M2`` describe quasi-periodicity of the lift (identity if closed).
    """
    eye = np.eye(3, dtype=complex)
    M1 = eye if M1 is None else np.asarray(M1, dtype=complex)
    M2 = eye if M2 is None else np.asarray(M2, dtype=complex)
    Q, th1, th2 = _simultaneous_phases(M1, M2)
    # entries of Q^H Pi Q pick up the phase differences of the monodromies
    rot = np.einsum("ab,jkb->jka", np.conj(Q.T), reps)
    Pi = rot[..., :, None] * np.conj(rot[..., None, :])
    d_z = np.empty_like(Pi)
    d_zb = np.empty_like(Pi)
    for a in range(3):
        for b in range(3):
            d_z[..., a, b], d_zb[..., a, b] = spectral.quasi_periodic_derivatives(
                Pi[..., a, b], lattice.omega1, lattice.omega2,
                (th1[a] - th1[b], th2[a] - th2[b]), ((1, 0), (0, 1)),
            )
    return 0.5 * np.einsum("...ab,...ba->...", d_z, d_zb).real


@dataclass(frozen=True, eq=False)
class Mesh:
    """Cone vertices in C^3 (``vertices[i]``) and quad faces (vertex indices)."""

    vertices: np.ndarray
    quads: np.ndarray

    def real_coordinates(self) -> np.ndarray:
        """``(Re w1, Re w2, Re w3, Im w1, Im w2, Im w3)`` per vertex."""
        return np.hstack([self.vertices.real, self.vertices.imag])

    def write_csv(self, path) -> None:
        header = "re_w1,re_w2,re_w3,im_w1,im_w2,im_w3"
        np.savetxt(path, self.real_coordinates(), delimiter=",", header=header,
                   comments="", fmt="%.17g")

    def write_obj(self, path, projection=None) -> None:
        """Wavefront OBJ of a projection R^6 -> R^3, quads split into triangles.

        ``projection`` is a 6x3 matrix with orthonormal columns acting on
        :meth:`real_coordinates`; the default keeps ``(Re w1, Re w2, Re w3)``.
        """
        P = np.eye(6)[:, :3] if projection is None else np.asarray(projection, dtype=float)
        if P.shape != (6, 3) or not np.allclose(P.T @ P, np.eye(3), atol=1e-10):
            raise DomainError("projection must be a 6x3 matrix with orthonormal columns")
        xyz = self.real_coordinates() @ P
        lines = [f"v {a:.17g} {b:.17g} {c:.17g}" for a, b, c in xyz]
        for q in self.quads + 1:
            lines.append(f"f {q[0]} {q[1]} {q[2]}")
            lines.append(f"f {q[0]} {q[2]} {q[3]}")
        Path(path).write_text("\n".join(lines) + "\n")


def cone_mesh(f: LegendrianSurface, radii, wrap: bool = True) -> Mesh:
    """Mesh of the cone ``{r f(z)}`` sampled at the given radii.

    Vertices are ordered radius-major then grid row-major, so there are
    ``nx * ny * len(radii)`` of them; each radius contributes the quads of the
    scaled link (periodically wrapped when ``wrap``).
    """
    radii = np.asarray(list(radii), dtype=float)
    if radii.size == 0:
        raise DomainError("cone_mesh needs at least one radius")
    if np.any(~np.isfinite(radii)) or np.any(radii <= 0):
        raise DomainError("radii must be positive")
    nx, ny = f.shape
    verts = (radii[:, None, None, None] * f.points[None]).reshape(-1, 3)
    idx = np.arange(nx * ny).reshape(nx, ny)
    jmax, kmax = (nx, ny) if wrap else (nx - 1, ny - 1)
    j, k = np.meshgrid(np.arange(jmax), np.arange(kmax), indexing="ij")
    j1, k1 = (j + 1) % nx, (k + 1) % ny
    base = np.stack([idx[j, k], idx[j1, k], idx[j1, k1], idx[j, k1]], axis=-1).reshape(-1, 4)
    quads = np.concatenate([base + i * nx * ny for i in range(radii.size)])
    return Mesh(vertices=verts, quads=quads)
