"""Linear algebra of su(3) adapted to the 6-symmetric spaces SU3/S^1 and SU3/SO2.

Group and algebra elements are plain ``(3, 3)`` complex numpy arrays. Two
families of maps are provided:

* :func:`apply_automorphism` acts on group elements,
  e.g. ``mu(g) = T g^{-1 t} T^{-1}``;
* :func:`algebra_automorphism` is its differential on ``sl(3, C)``,
  e.g. ``mu(X) = -T X^t T^{-1}`` (complex linear).

The order-six automorphism ``sigma = mu nu`` has eigenvalues ``(-eps)**j`` on
``sl(3, C)``, ``eps = exp(2 pi i / 3)``; :func:`grade_decompose` splits a
traceless matrix into these six eigenspaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from ._validation import (
    DEFAULT_TOL,
    check_matrix3,
    check_traceless,
    check_unitary,
)
from .exceptions import DomainError

__all__ = [
    "EPS",
    "S",
    "T",
    "R",
    "U",
    "AUTOMORPHISMS",
    "GradedDecomposition",
    "FlagPoint",
    "apply_automorphism",
    "algebra_automorphism",
    "grade_decompose",
    "project_g1",
    "primitivity_residual",
    "phi_map",
    "special_lagrangian_phase",
    "random_su3",
    "random_traceless",
    "random_g1",
    "nearest_unitary",
    "same_oriented_plane",
]

_SQRT3_2 = sqrt(3.0) / 2.0
_INV_SQRT2 = 1.0 / sqrt(2.0)

#: primitive cube root of unity exp(2 pi i / 3)
EPS = complex(-0.5, _SQRT3_2)

S = np.diag([1.0, EPS, EPS.conjugate()]).astype(complex)
T = np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)
# Counter-clockwise rotation by pi/3 in the (e2, e3) plane; equals U^{-1} T S^{-1} U^{-1 t}.
R = np.array(
    [[1.0, 0.0, 0.0], [0.0, 0.5, -_SQRT3_2], [0.0, _SQRT3_2, 0.5]], dtype=complex
)
U = np.array(
    [
        [1.0, 0.0, 0.0],
        [0.0, _INV_SQRT2, -1j * _INV_SQRT2],
        [0.0, -_INV_SQRT2, -1j * _INV_SQRT2],
    ],
    dtype=complex,
)

_S_INV = np.conj(S)
_R_INV = R.T.copy()
for _m in (S, T, R, U, _S_INV, _R_INV):
    _m.setflags(write=False)

AUTOMORPHISMS = ("nu", "mu", "sigma", "sigma_hat")
ORDERS = {"nu": 3, "mu": 2, "sigma": 6, "sigma_hat": 6}


def _check_which(which: str) -> str:
    if which not in AUTOMORPHISMS:
        raise DomainError(f"unknown automorphism {which!r}; expected one of {AUTOMORPHISMS}")
    return which


def _group_action(g: np.ndarray, which: str) -> np.ndarray:
    # g is unitary, so g^{-1 t} = conj(g)
    if which == "nu":
        return S @ g @ _S_INV
    if which == "mu":
        return T @ np.conj(g) @ T
    if which == "sigma":
        return T @ np.conj(S @ g @ _S_INV) @ T
    return R @ np.conj(g) @ _R_INV


def apply_automorphism(g, which: str, times: int = 1, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Apply one of ``nu``, ``mu``, ``sigma``, ``sigma_hat`` to a unitary matrix.

    ``times`` repeats the map; the input is validated once.
    """
    which = _check_which(which)
    g = check_unitary(g, "g", tol)
    for _ in range(times):
        g = _group_action(g, which)
    return g


def algebra_automorphism(X, which: str, times: int = 1) -> np.ndarray:
    """Differential of :func:`apply_automorphism` acting on ``sl(3, C)``.

    Works on stacks of matrices (shape ``(..., 3, 3)``) as well.
    """
    which = _check_which(which)
    X = np.asarray(X, dtype=complex)
    for _ in range(times):
        Xt = np.swapaxes(X, -1, -2)
        if which == "nu":
            X = S @ X @ _S_INV
        elif which == "mu":
            X = -(T @ Xt @ T)
        elif which == "sigma":
            X = -(T @ (_S_INV @ Xt @ S) @ T)
        else:
            X = -(R @ Xt @ _R_INV)
    return X


@dataclass(frozen=True)
class GradedDecomposition:
    """Components ``X_0..X_5`` of a matrix in the eigenspaces of sigma."""

    parts: np.ndarray
    order: int = 6

    def __getitem__(self, j: int) -> np.ndarray:
        return self.parts[j % self.order]

    def total(self) -> np.ndarray:
        return self.parts.sum(axis=0)


def _character_projections(X: np.ndarray) -> np.ndarray:
    # P_j X = 1/6 sum_k (-eps)^{-jk} sigma^k(X); works on stacks
    orbit = [X]
    for _ in range(5):
        orbit.append(algebra_automorphism(orbit[-1], "sigma"))
    orbit = np.stack(orbit)
    w = -EPS
    parts = []
    for j in range(6):
        coeffs = np.array([w ** (-j * k) for k in range(6)])
        parts.append(np.tensordot(coeffs, orbit, axes=1) / 6.0)
    return np.stack(parts)


def grade_decompose(X, tol: float = DEFAULT_TOL) -> GradedDecomposition:
    """Split a traceless matrix as ``X = sum_j X_j`` with ``sigma(X_j) = (-eps)^j X_j``."""
    X = check_traceless(X, "X", tol)
    return GradedDecomposition(parts=_character_projections(X))


def project_g1(X) -> np.ndarray:
    """Component of ``X`` (or a stack of matrices) in the primitive eigenspace g_1."""
    X = np.asarray(X, dtype=complex)
    return _character_projections(X)[1]


def primitivity_residual(Az, tol: float = DEFAULT_TOL) -> float:
    """Frobenius distance from ``Az`` to the eigenspace g_1."""
    Az = check_traceless(Az, "Az", tol)
    return float(np.linalg.norm(Az - project_g1(Az)))


@dataclass(frozen=True)
class FlagPoint:
    """A point ``(w, W)`` of FL2: unit vector ``w`` in the complex plane ``W = span(w, w1)``."""

    w: np.ndarray
    w1: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex).reshape(3)
        w1 = np.asarray(self.w1, dtype=complex).reshape(3)
        gram = np.array([[np.vdot(a, b) for b in (w, w1)] for a in (w, w1)])
        defect = float(np.max(np.abs(gram - np.eye(2))))
        if defect > DEFAULT_TOL:
            raise DomainError(f"flag vectors are not orthonormal (defect {defect:.3e})")
        w.setflags(write=False)
        w1.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "w1", w1)


def phi_map(p: FlagPoint, w2, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Isomorphism FL2 -> FL1.

    ``(w, w1, w2)`` must be a unitary basis with determinant ``i``. Returns
    ``(v, V)`` where ``V`` holds the columns ``(v, v1, v2) = (w, w1, w2) U``;
    ``det V = 1`` and the real span of the columns is special Lagrangian.
    """
    W = np.column_stack([p.w, p.w1, np.asarray(w2, dtype=complex).reshape(3)])
    W = check_unitary(W, "(w, w1, w2)", tol)
    det = np.linalg.det(W)
    if abs(det - 1j) > tol:
        raise DomainError(f"det(w, w1, w2) must equal i, got {det:.12g}")
    V = W @ U
    return V[:, 0].copy(), V


def special_lagrangian_phase(V, tol: float = 1e-8) -> float:
    """Phase in ``[0, 2 pi)`` of an oriented special Lagrangian 3-plane.

    ``V`` holds three column vectors that are orthonormal over R and mutually
    symplectically orthogonal; the phase is ``arg det V``.
    """
    V = check_matrix3(V, "V")
    gram = np.conj(V.T) @ V
    metric_defect = float(np.max(np.abs(gram.real - np.eye(3))))
    symplectic_defect = float(np.max(np.abs(gram.imag)))
    if metric_defect > tol:
        raise DomainError(f"columns are not orthonormal over R (defect {metric_defect:.3e})")
    if symplectic_defect > tol:
        raise DomainError(
            f"columns do not span a Lagrangian plane (symplectic defect {symplectic_defect:.3e})"
        )
    phase = float(np.angle(np.linalg.det(V)))
    return phase % (2 * np.pi) if phase < 0 else phase


def same_oriented_plane(V1, V2, tol: float = 1e-10) -> bool:
    """Whether two real triples in C^3 span the same oriented real 3-plane."""
    A = _realify(np.asarray(V1, dtype=complex))
    B = _realify(np.asarray(V2, dtype=complex))
    coeffs, *_ = np.linalg.lstsq(A, B, rcond=None)
    if np.max(np.abs(A @ coeffs - B)) > tol:
        return False
    return bool(np.linalg.det(coeffs) > 0)


def _realify(V: np.ndarray) -> np.ndarray:
    return np.vstack([V.real, V.imag])


def nearest_unitary(g: np.ndarray) -> np.ndarray:
    """Polar projection onto the unitary group (stacked input allowed)."""
    W, _, Vh = np.linalg.svd(g)
    return W @ Vh


def random_su3(rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random SU(3) matrices via QR with phase correction."""
    shape = (3, 3) if size is None else (size, 3, 3)
    Z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    Q, Rr = np.linalg.qr(Z)
    d = np.diagonal(Rr, axis1=-2, axis2=-1)
    Q = Q * (d / np.abs(d))[..., None, :]
    det = np.linalg.det(Q)
    return Q * np.exp(-1j * np.angle(det) / 3.0)[..., None, None]


def random_traceless(rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    shape = (3, 3) if size is None else (size, 3, 3)
    X = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    tr = np.trace(X, axis1=-2, axis2=-1)
    return X - tr[..., None, None] * np.eye(3) / 3.0


def random_g1(rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Random elements of g_1, i.e. ``[[0, 0, a], [a, 0, 0], [0, b, 0]]``."""
    n = 1 if size is None else size
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    Y = np.zeros((n, 3, 3), dtype=complex)
    Y[:, 0, 2] = a
    Y[:, 1, 0] = a
    Y[:, 2, 1] = b
    return Y[0] if size is None else Y
