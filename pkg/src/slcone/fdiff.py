"""High-order central differences on lattice grids padded with ghost layers.

Weights are computed in exact rational arithmetic, so the moment conditions
(e.g. a third-derivative stencil annihilating constants) hold exactly in
floating point up to the final rounding of each weight.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exceptions import DomainError


@lru_cache(maxsize=None)
def fornberg_weights(order: int, half_width: int) -> tuple[Fraction, ...]:
    """Central weights for ``d^order/dx^order`` on offsets ``-half_width..half_width``."""
    if order < 0 or half_width < 1 or 2 * half_width < order:
        raise DomainError(f"no central stencil of half-width {half_width} for order {order}")
    xs = [Fraction(o) for o in range(-half_width, half_width + 1)]
    n = len(xs)
    c = [[[Fraction(0)] * (order + 1) for _ in range(n)] for _ in range(n)]
    c[0][0][0] = Fraction(1)
    c1 = Fraction(1)
    for i in range(1, n):
        c2 = Fraction(1)
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            for k in range(min(i, order), -1, -1):
                lower = k * c[i - 1][j][k - 1] if k else 0
                c[i][j][k] = (xs[i] * c[i - 1][j][k] - lower) / c3
        for k in range(min(i, order), -1, -1):
            lower = k * c[i - 1][i - 1][k - 1] if k else 0
            c[i][i][k] = c1 / c2 * (lower - xs[i - 1] * c[i - 1][i - 1][k])
        c1 = c2
    return tuple(c[n - 1][j][order] for j in range(n))


def _apply(values: np.ndarray, axis: int, order: int, ghost: int, n: int) -> np.ndarray:
    """Stencil along ``axis`` (in index units); trims ``ghost`` cells from both ends."""
    if order == 0:
        sl = [slice(None)] * values.ndim
        sl[axis] = slice(ghost, ghost + n)
        return values[tuple(sl)]
    out = 0
    for off, w in zip(range(-ghost, ghost + 1), fornberg_weights(order, ghost)):
        if w == 0:
            continue
        sl = [slice(None)] * values.ndim
        sl[axis] = slice(ghost + off, ghost + off + n)
        out = out + float(w) * values[tuple(sl)]
    return out


def _poly_mul(p: list, q: list) -> list:
    out = [0j] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def wirtinger(
    padded: np.ndarray,
    ghost: int,
    omega1: complex,
    omega2: complex,
    nx: int,
    ny: int,
    orders: tuple[tuple[int, int], ...],
) -> list[np.ndarray]:
    """``d^p/dz^p d^q/dzbar^q`` of a grid function carrying ``ghost`` extra layers.

    ``padded[ghost + j, ghost + k, ...]`` is the value at
    ``(j / nx) omega1 + (k / ny) omega2``; results are returned on the
    ``nx x ny`` interior. Mixed derivatives use tensor products of the 1D
    stencils, so corner ghost cells are needed too.
    """
    if padded.shape[0] < nx + 2 * ghost or padded.shape[1] < ny + 2 * ghost:
        raise DomainError("padded array is smaller than the grid plus its ghost layers")
    h1, h2 = omega1 / nx, omega2 / ny
    jac = np.array([[h1.real, h2.real], [h1.imag, h2.imag]])
    jinv_t = np.linalg.inv(jac).T
    # d/dz = a d/dj + b d/dk
    a = 0.5 * (jinv_t[0, 0] - 1j * jinv_t[1, 0])
    b = 0.5 * (jinv_t[0, 1] - 1j * jinv_t[1, 1])
    cache: dict[tuple[int, int], np.ndarray] = {}

    def mixed(m: int, n: int) -> np.ndarray:
        if (m, n) not in cache:
            along_j = _apply(padded, 0, m, ghost, nx)
            cache[(m, n)] = _apply(along_j, 1, n, ghost, ny)
        return cache[(m, n)]

    results = []
    for p, q in orders:
        # coefficients of (a X + b Y)^p (conj(a) X + conj(b) Y)^q in powers of X
        poly = [1 + 0j]
        for _ in range(p):
            poly = _poly_mul(poly, [b, a])
        for _ in range(q):
            poly = _poly_mul(poly, [np.conj(b), np.conj(a)])
        total = sum(
            coeff * mixed(m, p + q - m) for m, coeff in enumerate(poly) if coeff != 0
        )
        results.append(np.asarray(total, dtype=complex))
    return results
