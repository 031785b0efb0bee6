"""Fourier calculus on a (possibly oblique) periodic lattice.

Grid point ``(j, k)`` of an ``nx x ny`` grid sits at
``z = (j / nx) omega1 + (k / ny) omega2``. A mode
``exp(2 pi i (m s + n t))`` in the unit-square coordinates ``(s, t)`` is the
plane wave ``exp(i kvec . (x, y))`` with ``kvec = 2 pi J^{-T} (m, n)``, where
``J`` is the real Jacobian of ``(s, t) -> (x, y)``.
"""

from __future__ import annotations

import numpy as np


def lattice_jacobian(omega1: complex, omega2: complex) -> np.ndarray:
    return np.array([[omega1.real, omega2.real], [omega1.imag, omega2.imag]])


def wavevectors(
    omega1: complex,
    omega2: complex,
    nx: int,
    ny: int,
    shift: tuple[float, float] = (0.0, 0.0),
    zero_nyquist: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Physical wave numbers ``(kx, ky)`` on the FFT grid.

    ``shift`` adds fractional offsets to the integer mode numbers, which is how
    quasi-periodic functions ``g(s + 1) = exp(2 pi i shift_0) g(s)`` are
    differentiated.
    """
    m = np.fft.fftfreq(nx, d=1.0 / nx) + shift[0]
    n = np.fft.fftfreq(ny, d=1.0 / ny) + shift[1]
    M, N = np.meshgrid(m, n, indexing="ij")
    Jinv_t = np.linalg.inv(lattice_jacobian(omega1, omega2)).T
    kx = 2 * np.pi * (Jinv_t[0, 0] * M + Jinv_t[0, 1] * N)
    ky = 2 * np.pi * (Jinv_t[1, 0] * M + Jinv_t[1, 1] * N)
    if zero_nyquist:
        mask = np.ones((nx, ny), dtype=bool)
        if nx % 2 == 0:
            mask[nx // 2, :] = False
        if ny % 2 == 0:
            mask[:, ny // 2] = False
        kx = np.where(mask, kx, 0.0)
        ky = np.where(mask, ky, 0.0)
    return kx, ky


def laplacian(values: np.ndarray, omega1: complex, omega2: complex) -> np.ndarray:
    """Spectral Laplacian of a real periodic grid function."""
    nx, ny = values.shape
    kx, ky = wavevectors(omega1, omega2, nx, ny)
    return np.fft.ifft2(-(kx**2 + ky**2) * np.fft.fft2(values)).real


def gradient(values: np.ndarray, omega1: complex, omega2: complex) -> tuple[np.ndarray, np.ndarray]:
    """Spectral ``(d/dx, d/dy)`` of a real periodic grid function."""
    nx, ny = values.shape
    kx, ky = wavevectors(omega1, omega2, nx, ny, zero_nyquist=True)
    uh = np.fft.fft2(values)
    return np.fft.ifft2(1j * kx * uh).real, np.fft.ifft2(1j * ky * uh).real


def dz(values: np.ndarray, omega1: complex, omega2: complex) -> np.ndarray:
    """``d/dz = (d/dx - i d/dy) / 2`` of a real periodic grid function."""
    ux, uy = gradient(values, omega1, omega2)
    return 0.5 * (ux - 1j * uy)


def fractional_shift(values: np.ndarray, axis: int, offset: float) -> np.ndarray:
    """Trigonometric interpolant of a real periodic array, ``offset`` cells along ``axis``.

    The Nyquist mode of an even-length axis is dropped, since its interpolant
    off the grid is ambiguous.
    """
    n = values.shape[axis]
    m = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        m[n // 2] = 0.0
    phase = np.exp(2j * np.pi * m * offset / n)
    if n % 2 == 0:
        phase[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    return np.fft.ifft(np.fft.fft(values, axis=axis) * phase.reshape(shape), axis=axis).real


def half_shift(values: np.ndarray, axis: int) -> np.ndarray:
    """Interpolant at half-cell offsets along ``axis`` (see :func:`fractional_shift`)."""
    return fractional_shift(values, axis, 0.5)


def quasi_periodic_derivatives(
    values: np.ndarray,
    omega1: complex,
    omega2: complex,
    theta: tuple[float, float],
    orders: tuple[tuple[int, int], ...],
) -> list[np.ndarray]:
    """Wirtinger derivatives of a complex quasi-periodic grid function.

    ``values(s + 1, t) = exp(i theta_0) values(s, t)`` and likewise for ``t``
    with ``theta_1``. Each entry ``(p, q)`` of ``orders`` requests
    ``d^p/dz^p d^q/dzbar^q``.
    """
    nx, ny = values.shape
    s = np.arange(nx)[:, None] / nx
    t = np.arange(ny)[None, :] / ny
    ramp = np.exp(1j * (theta[0] * s + theta[1] * t))
    shift = (theta[0] / (2 * np.pi), theta[1] / (2 * np.pi))
    kx, ky = wavevectors(omega1, omega2, nx, ny, shift=shift, zero_nyquist=False)
    # Nyquist modes are ambiguous for complex data; drop them.
    mask = np.ones((nx, ny))
    if nx % 2 == 0:
        mask[nx // 2, :] = 0.0
    if ny % 2 == 0:
        mask[:, ny // 2] = 0.0
    gh = np.fft.fft2(values / ramp) * mask
    dz_sym = 0.5 * (1j * kx + ky)  # symbol of d/dz
    dzb_sym = 0.5 * (1j * kx - ky)  # symbol of d/dzbar
    out = []
    for p, q in orders:
        out.append(np.fft.ifft2(dz_sym**p * dzb_sym**q * gh) * ramp)
    return out
