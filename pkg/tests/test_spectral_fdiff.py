from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slcone import fdiff, spectral
from slcone.exceptions import DomainError

OM1, OM2 = complex(2.0, 0.1), complex(0.7, 1.6)


def _st_coords(z, om1, om2):
    J = spectral.lattice_jacobian(om1, om2)
    st_ = np.linalg.solve(J, np.stack([np.ravel(z.real), np.ravel(z.imag)]))
    return st_[0].reshape(np.shape(z)), st_[1].reshape(np.shape(z))


def _periodic(z):
    s, t = _st_coords(z, OM1, OM2)
    return np.exp(np.sin(2 * np.pi * s)) * np.cos(2 * np.pi * t + 0.3) + np.sin(4 * np.pi * (s - t))


def _grid(n):
    s = np.arange(n)[:, None] / n
    t = np.arange(n)[None, :] / n
    return s * OM1 + t * OM2


def _fd_xy(f, z, h=1e-3):
    """Fourth-order finite-difference oracle for (f_x, f_y, Laplacian) at points z."""
    def d1(e):
        return (-f(z + 2 * h * e) + 8 * f(z + h * e) - 8 * f(z - h * e) + f(z - 2 * h * e)) / (12 * h)

    def d2(e):
        return (-f(z + 2 * h * e) + 16 * f(z + h * e) - 30 * f(z) + 16 * f(z - h * e) - f(z - 2 * h * e)) / (12 * h**2)

    return d1(1), d1(1j), d2(1) + d2(1j)


def test_laplacian_and_dz_against_finite_differences():
    z = _grid(48)
    u = _periodic(z)
    fx, fy, lap = _fd_xy(_periodic, z)
    assert np.abs(spectral.laplacian(u, OM1, OM2) - lap).max() < 1e-6
    assert np.abs(spectral.dz(u, OM1, OM2) - 0.5 * (fx - 1j * fy)).max() < 1e-8


def test_fractional_shift_is_exact_on_trigonometric_polynomials():
    n = 32
    x = np.arange(n) / n
    f = lambda y: np.sin(2 * np.pi * 3 * y) + 0.5 * np.cos(2 * np.pi * 7 * y + 1.0)  # noqa: E731
    vals = np.tile(f(x)[:, None], (1, 3))
    for off in (0.5, 0.3, -0.2113):
        shifted = spectral.fractional_shift(vals, 0, off)
        assert np.abs(shifted[:, 0] - f(x + off / n)).max() < 1e-13
    assert np.allclose(spectral.half_shift(vals, 0), spectral.fractional_shift(vals, 0, 0.5))


@given(st.floats(-3, 3), st.floats(-3, 3), st.booleans())
def test_quasi_periodic_derivatives_of_unimodular_waves(ar, ai, reduce):
    a = complex(ar, ai)
    n = 16
    z = _grid(n)
    g = np.exp(a * z - np.conj(a) * np.conj(z))
    theta = np.array([2 * (a * OM1).imag, 2 * (a * OM2).imag])
    if reduce:
        theta = np.angle(np.exp(1j * theta))
    d = spectral.quasi_periodic_derivatives(g, OM1, OM2, tuple(theta), ((1, 0), (0, 1), (3, 0), (1, 1)))
    b = -np.conj(a)
    scale = max(1.0, abs(a) ** 3)
    for got, want in zip(d, (a * g, b * g, a**3 * g, a * b * g)):
        assert np.abs(got - want).max() < 1e-11 * scale


# --- finite differences -------------------------------------------------------


def test_fornberg_known_stencils():
    F = Fraction
    assert fdiff.fornberg_weights(1, 1) == (F(-1, 2), F(0), F(1, 2))
    assert fdiff.fornberg_weights(2, 1) == (F(1), F(-2), F(1))
    assert fdiff.fornberg_weights(1, 2) == (F(1, 12), F(-2, 3), F(0), F(2, 3), F(-1, 12))


@pytest.mark.parametrize("order,hw", [(1, 5), (2, 5), (3, 5), (3, 2), (4, 4)])
def test_fornberg_moments_are_exact(order, hw):
    w = fdiff.fornberg_weights(order, hw)
    for k in range(2 * hw + 1):
        moment = sum(c * Fraction(j) ** k for c, j in zip(w, range(-hw, hw + 1)))
        assert moment == (factorial(order) if k == order else 0)


def test_fornberg_rejects_short_stencils():
    with pytest.raises(DomainError):
        fdiff.fornberg_weights(3, 1)


def _padded_exponential(a, b, n, ghost):
    idx = np.arange(-ghost, n + ghost + 1)
    z = idx[:, None] / n * OM1 + idx[None, :] / n * OM2
    return np.exp(a * z + b * np.conj(z)), z[ghost : ghost + n, ghost : ghost + n]


def test_wirtinger_on_exponentials():
    a, b = 0.8 - 0.4j, -0.3 + 0.5j
    n, g = 64, 5
    padded, z = _padded_exponential(a, b, n, g)
    f = np.exp(a * z + b * np.conj(z))
    orders = ((1, 0), (0, 1), (3, 0), (1, 1), (2, 1))
    h = abs(OM1) / n
    for (p, q), got in zip(orders, fdiff.wirtinger(padded, g, OM1, OM2, n, n, orders)):
        # rounding grows like eps / h^order
        tol = 1e-13 * np.abs(f).max() * max(1.0, h ** -(p + q))
        assert np.abs(got - a**p * b**q * f).max() < tol


def test_wirtinger_convergence_order():
    a, b = 1.1 + 0.2j, 0.4 - 0.9j
    errs = []
    for n in (16, 32):
        padded, z = _padded_exponential(a, b, n, 2)
        (got,) = fdiff.wirtinger(padded, 2, OM1, OM2, n, n, ((1, 0),))
        errs.append(np.abs(got - a * np.exp(a * z + b * np.conj(z))).max())
    assert np.log2(errs[0] / errs[1]) > 3.8


def test_wirtinger_needs_the_halo():
    with pytest.raises(DomainError):
        fdiff.wirtinger(np.zeros((10, 10)), 2, OM1, OM2, 8, 8, ((1, 0),))
