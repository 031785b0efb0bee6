"""Input validation helpers.

Each ``check_*`` function returns the validated (possibly converted) value or
raises :class:`~slcone.exceptions.DomainError` naming the violated invariant.
"""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import DomainError

DEFAULT_TOL = 1e-10


def check_matrix3(X, name: str = "matrix") -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.shape != (3, 3):
        raise DomainError(f"{name} must be 3x3, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError(f"{name} has non-finite entries")
    return X


def unitarity_defect(g: np.ndarray) -> float:
    g = np.asarray(g)
    eye = np.eye(g.shape[-1])
    return float(np.max(np.abs(np.conj(np.swapaxes(g, -1, -2)) @ g - eye)))


def check_unitary(g, name: str = "g", tol: float = DEFAULT_TOL) -> np.ndarray:
    g = check_matrix3(g, name)
    defect = unitarity_defect(g)
    if defect > tol:
        raise DomainError(f"{name} is not unitary: max|g^H g - I| = {defect:.3e} > {tol:g}")
    return g


def check_traceless(X, name: str = "X", tol: float = DEFAULT_TOL) -> np.ndarray:
    X = check_matrix3(X, name)
    tr = abs(np.trace(X))
    if tr > tol * max(1.0, np.linalg.norm(X)):
        raise DomainError(f"{name} must be traceless, |tr| = {tr:.3e}")
    return X


def check_unimodular(zeta, name: str = "zeta", tol: float = 1e-12) -> complex:
    zeta = complex(zeta)
    if not np.isfinite(zeta) or abs(abs(zeta) - 1.0) > tol:
        raise DomainError(f"{name} must lie on the unit circle, |{name}| = {abs(zeta)!r}")
    return zeta


def check_positive(x, name: str) -> float:
    if not isinstance(x, numbers.Real) or not np.isfinite(x) or x <= 0:
        raise DomainError(f"{name} must be a positive finite real, got {x!r}")
    return float(x)


def check_resolution(n, name: str, minimum: int = 8) -> int:
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {n!r}")
    return int(n)
