import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from slcone import framerec, tzsolve

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def record(label: str, ok: bool, detail: str) -> None:
    line = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def sheared_field(orbit: tzsolve.EquivariantOrbit, height: float, ny: int) -> tzsolve.ScalarField:
    """The orbit on the lattice ``(T, T + i height)``; needs ``nx`` divisible by ``ny``."""
    nx = orbit.profile.size
    T = orbit.period
    j = np.arange(nx)[:, None]
    k = np.arange(ny)[None, :]
    values = orbit.profile[(j + (nx // ny) * k) % nx]
    return tzsolve.ScalarField(tzsolve.Lattice(complex(T), complex(T, height)), values)


@pytest.fixture(scope="session")
def orbit2():
    return tzsolve.solve_equivariant(2.0, samples=128)


@pytest.fixture(scope="session")
def torus2(orbit2):
    """Newton-polished H = 2 solution on the rectangle ``(T, 1.3 i T)``."""
    u0 = orbit2.to_field(width=1.3 * orbit2.period, ny=64)
    return tzsolve.solve_periodic(u0.lattice, u0, tol=1e-10)


@pytest.fixture(scope="session")
def frames2(torus2):
    return framerec.integrate_frame(torus2)


@pytest.fixture(scope="session")
def sheared2(orbit2):
    u0 = sheared_field(orbit2, 1.3 * orbit2.period, 64)
    return tzsolve.solve_periodic(u0.lattice, u0, tol=1e-10)


@pytest.fixture(scope="session")
def flat_lattice():
    return tzsolve.Lattice(complex(2 * np.pi / np.sqrt(3)), complex(np.pi / np.sqrt(3), np.pi))
