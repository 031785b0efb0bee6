import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from slcone import framerec, liecore, tzsolve
from slcone.exceptions import DomainError, IntegrationError

EPS = liecore.EPS
P = framerec.CYCLIC
GENERIC = tzsolve.Lattice(complex(2.0), complex(0.3, 1.7))


def _smooth_random(lattice, n, seed, amp=0.4):
    rng = np.random.default_rng(seed)
    m = np.fft.fftfreq(n, d=1.0 / n)
    low = (np.abs(m)[:, None] <= 3) & (np.abs(m)[None, :] <= 3)
    spec = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * low
    values = np.fft.ifft2(spec).real
    return tzsolve.ScalarField(lattice, amp * values / np.abs(values).max())


@pytest.fixture(scope="module")
def flat_frames(flat_lattice):
    return framerec.integrate_frame(tzsolve.ScalarField.constant(flat_lattice, 0.0, 64))


# --- connection -------------------------------------------------------------------


def test_connection_at_zero_is_the_cyclic_matrix():
    u = tzsolve.ScalarField.constant(GENERIC, 0.0, 16)
    c = framerec.connection(u, (3, 5), 1.0)
    assert np.array_equal(c.A, P)
    assert np.array_equal(c.dzbar, -P.T)


def test_connection_structure():
    u = _smooth_random(GENERIC, 32, 1)
    zeta = np.exp(0.7j)
    c = framerec.connection(u, (4, 9), zeta)
    uz = u.dz()[4, 9]
    s1 = np.exp(0.5 * u.values[4, 9])
    assert np.allclose(c.k_part, np.diag([0, uz / 2, -uz / 2]))
    assert np.allclose(c.p_part, zeta * np.array([[0, 0, s1], [s1, 0, 0], [0, s1**-2, 0]]))
    assert liecore.primitivity_residual(c.p_part) < 1e-14


@given(st.integers(0, 10_000), st.floats(0, 2 * np.pi))
@settings(max_examples=25)
def test_connection_symmetries(seed, angle):
    u = _smooth_random(GENERIC, 16, seed)
    zeta = np.exp(1j * angle)
    A = framerec.connection_field(u, zeta)
    nu = liecore.algebra_automorphism(A, "nu")
    mu = liecore.algebra_automorphism(A, "mu")
    assert np.abs(nu - framerec.connection_field(u, EPS * zeta)).max() < 1e-12
    assert np.abs(mu - framerec.connection_field(u, -zeta)).max() < 1e-12


@given(st.complex_numbers(min_magnitude=0.2, max_magnitude=5.0))
@settings(max_examples=40)
def test_reality_off_the_circle(zeta):
    u_z, s1 = 0.3 - 0.8j, 1.4
    A, _ = framerec.connection_pair(u_z, s1, zeta)
    _, B = framerec.connection_pair(u_z, s1, 1 / np.conj(zeta))
    assert np.abs(B + A.conj().T).max() < 1e-12


def test_connection_rejects_non_unimodular_zeta():
    u = tzsolve.ScalarField.constant(GENERIC, 0.0, 16)
    with pytest.raises(DomainError):
        framerec.connection(u, (0, 0), 2.0)


# --- flatness ------------------------------------------------------------------------


def test_flatness_of_zero():
    u = tzsolve.ScalarField.constant(GENERIC, 0.0, 16)
    assert framerec.flatness_defect(u) <= 1e-12
    assert framerec.flatness_defect(u, scheme="magnus4") <= 1e-12


def test_flatness_of_a_non_solution_scales_like_h_squared():
    lat = tzsolve.Lattice(complex(1.0), 1j)
    ratios = []
    for c in (0.2, -0.3, 0.5):
        defects = []
        for n in (16, 32, 64):
            d = framerec.flatness_defect(tzsolve.ScalarField.constant(lat, c, n))
            defects.append(d)
            ratios.append(d / ((1.0 / n) ** 2 * abs(np.exp(c) - np.exp(-2 * c))))
        slopes = np.log2(np.array(defects[:-1]) / np.array(defects[1:]))
        assert np.all(np.abs(slopes - 2) < 0.05)
    # the lower bound C h^2 |e^c - e^{-2c}| holds with one constant for all c
    assert min(ratios) > 0.5 * max(ratios)


def test_flatness_order_on_a_solution():
    defects = []
    for n in (32, 64, 128):
        u = tzsolve.solve_equivariant(2.0, samples=n).to_field(width=1.3 * tzsolve.period(2.0), ny=n)
        defects.append(framerec.flatness_defect(u, scheme="magnus4"))
    assert np.log(defects[0] / defects[2]) / np.log(4) >= 3.8


def test_non_flat_input_is_rejected():
    u = tzsolve.ScalarField.constant(GENERIC, 0.5, 16)
    with pytest.raises(IntegrationError, match="not flat"):
        framerec.integrate_frame(u)


# --- frames ---------------------------------------------------------------------------


def test_closed_form_and_contract(flat_frames, flat_lattice):
    z = flat_lattice.grid(64, 64)
    closed = np.array([[expm(w * P - np.conj(w) * P.T) for w in row] for row in z])
    assert np.abs(flat_frames.frames - closed).max() < 1e-9
    assert np.array_equal(flat_frames.frames[0, 0], np.eye(3))
    F = flat_frames.padded
    gram = np.conj(np.swapaxes(F, -1, -2)) @ F
    assert np.abs(gram - np.eye(3)).max() <= 1e-10


def test_basepoint_and_left_invariance(torus2, frames2):
    G = liecore.random_su3(np.random.default_rng(3))
    other = framerec.integrate_frame(torus2, F0=G)
    assert np.array_equal(other.frames[0, 0], G)
    assert np.abs(other.frames - G @ frames2.frames).max() < 1e-12


def test_schemes_agree(torus2, frames2):
    m4 = framerec.integrate_frame(torus2, scheme="magnus4")
    assert np.abs(m4.frames - frames2.frames).max() < 1e-7


def test_monodromy_of_flat_tori(flat_frames):
    for gen in ("omega1", "omega2"):
        M, dist = framerec.monodromy(flat_frames, gen)
        assert np.abs(M - np.eye(3)).max() < 1e-8 and dist < 1e-8
    M, dist = framerec.monodromy(flat_frames, (0, 0))
    assert np.array_equal(M, np.eye(3)) and dist == 0.0
    M, _ = framerec.monodromy(flat_frames, (2, -1))
    assert np.abs(M - np.eye(3)).max() < 1e-8
    with pytest.raises(DomainError):
        framerec.monodromy(flat_frames, "omega3")


def test_monodromy_of_unit_period_is_not_central():
    u = tzsolve.ScalarField.constant(tzsolve.Lattice(complex(1.0), 1j), 0.0, 32)
    frames = framerec.integrate_frame(u)
    M, dist = framerec.monodromy(frames, "omega1")
    # eigenvalue oracle: exp(w P - conj(w) P^2) has eigenvalues exp(w e - conj(w e)), e^3 = 1
    oracle = sorted(np.angle(np.exp(2j * (EPS**j).imag)) for j in range(3))
    assert np.allclose(sorted(np.angle(np.linalg.eigvals(M))), oracle, atol=1e-10)
    assert dist > 0.5


def test_monodromies_of_a_solution_commute(frames2):
    # the surface is only quasi-periodic on a generic lattice, but pi_1 of the torus is abelian
    M1, _ = framerec.monodromy(frames2, "omega1")
    M2, _ = framerec.monodromy(frames2, "omega2")
    assert np.abs(M1 @ M2 - M2 @ M1).max() < 1e-10
    assert np.abs(M1.conj().T @ M1 - np.eye(3)).max() < 1e-12
    M11, _ = framerec.monodromy(frames2, (1, 1))
    assert np.abs(M11 - M1 @ M2).max() < 1e-12


def test_verify_frame(torus2, frames2):
    rep = framerec.verify_frame(frames2, torus2, n_zeta=10)
    assert rep.passed, rep.to_json()
    assert rep.names == list(framerec.FRAME_THRESHOLDS)
    det = complex(*rep.data["det"])
    assert abs(det - 1) < 1e-10
    assert rep.data["phase"] == pytest.approx(np.pi / 2, abs=1e-8)


def test_phase_of_flat_torus_matches_closed_form(flat_frames, flat_lattice):
    # at z = 0: f = e1, f_x/|f_x| = (e2 - e3)/sqrt2, f_y/|f_y| = i (e2 + e3)/sqrt2
    r = 1 / np.sqrt(2)
    V = np.array([[1, 0, 0], [0, r, 1j * r], [0, -r, 1j * r]])
    assert liecore.special_lagrangian_phase(V) == pytest.approx(np.pi / 2)
    V_num = framerec.tangent_frame(framerec.legendrian_surface(flat_frames))[0, 0]
    assert np.abs(V_num - V).max() < 1e-9


# --- Legendrian surface -------------------------------------------------------------


def test_flat_surface_invariants(flat_frames, flat_lattice):
    u = tzsolve.ScalarField.constant(flat_lattice, 0.0, 64)
    f = framerec.legendrian_surface(flat_frames)
    rep = framerec.verify_legendrian(f, u)
    assert all(item.max_deviation <= 1e-9 for item in rep.items)
    assert complex(*rep.data["Q_mean"]) == pytest.approx(1.0, abs=1e-9)
    # spectral route, without the halo
    bare = framerec.LegendrianSurface(f.lattice, f.points, f.zeta, f.monodromy1, f.monodromy2)
    rep2 = framerec.verify_legendrian(bare, u)
    assert all(item.max_deviation <= 1e-9 for item in rep2.items)


def test_report_is_invariant_under_unitary_maps(torus2, frames2):
    f = framerec.legendrian_surface(frames2)
    G = liecore.random_su3(np.random.default_rng(8))
    a = framerec.verify_legendrian(f, torus2)
    b = framerec.verify_legendrian(f.transformed(G), torus2)
    for x, y in zip(a.items, b.items):
        assert x.name == y.name
        assert y.max_deviation == pytest.approx(x.max_deviation, rel=1e-3, abs=1e-13)
    assert np.allclose(a.data["Q_mean"], b.data["Q_mean"], atol=1e-12)


@pytest.mark.parametrize("lam", [2.0, 0.5 + 0.5j])
def test_hopf_differential_scales_by_cube(torus2, frames2, lam):
    f = framerec.legendrian_surface(frames2)
    g = framerec.LegendrianSurface(
        f.lattice.scaled(1 / lam), f.points, f.zeta, f.monodromy1, f.monodromy2, f.padded, f.ghost
    )
    v = tzsolve.ScalarField(g.lattice, torus2.values + 2 * np.log(abs(lam)))
    a = framerec.verify_legendrian(f, torus2)
    b = framerec.verify_legendrian(g, v)
    assert b.passed
    Qa, Qb = complex(*a.data["Q_mean"]), complex(*b.data["Q_mean"])
    assert Qb == pytest.approx(lam**3 * Qa, rel=1e-9)


def test_hopf_differential_equals_zeta_cubed(torus2):
    zeta = np.exp(0.4j)
    f = framerec.legendrian_surface(framerec.integrate_frame(torus2, zeta=zeta))
    rep = framerec.verify_legendrian(f, torus2)
    assert complex(*rep.data["Q_mean"]) == pytest.approx(zeta**3, abs=1e-9)


# --- projection and meshes -------------------------------------------------------------


def test_hopf_projection_is_gauge_invariant(frames2):
    f = framerec.legendrian_surface(frames2)
    reps = framerec.hopf_project(f)
    rotated = framerec.LegendrianSurface(f.lattice, np.exp(0.9j) * f.points)
    assert np.abs(framerec.hopf_project(rotated) - reps).max() < 1e-14
    assert np.abs(np.linalg.norm(reps, axis=-1) - 1).max() < 1e-14
    first = reps[..., 0]
    assert np.all(first.real > 0) and np.abs(first.imag).max() < 1e-15


def test_fubini_study_factor_of_flat_torus(flat_frames, flat_lattice):
    reps = framerec.hopf_project(framerec.legendrian_surface(flat_frames))
    fs = framerec.fubini_study_factor(reps, flat_lattice)
    assert np.abs(fs - 1.0).max() < 1e-9


def test_fubini_study_factor_of_quasi_periodic_torus(torus2, frames2):
    f = framerec.legendrian_surface(frames2)
    fs = framerec.fubini_study_factor(framerec.hopf_project(f), f.lattice, f.monodromy1, f.monodromy2)
    eu = np.exp(torus2.values)
    assert np.abs(fs - eu).max() / eu.min() < 1e-6


def test_cone_mesh(frames2, tmp_path):
    f = framerec.legendrian_surface(frames2)
    nx, ny = f.shape
    link = framerec.cone_mesh(f, [1.0])
    assert np.abs(np.linalg.norm(link.vertices, axis=-1) - 1).max() < 1e-12
    mesh = framerec.cone_mesh(f, [0.5, 1.0, 2.0])
    assert mesh.vertices.shape == (nx * ny * 3, 3)
    assert mesh.quads.shape == (nx * ny * 3, 4) and mesh.quads.max() < len(mesh.vertices)
    scaled = framerec.cone_mesh(f, [1.5, 3.0, 6.0])
    assert np.allclose(scaled.vertices, 3.0 * mesh.vertices)
    assert len(framerec.cone_mesh(f, [1.0], wrap=False).quads) == (nx - 1) * (ny - 1)
    with pytest.raises(DomainError):
        framerec.cone_mesh(f, [])
    with pytest.raises(DomainError):
        framerec.cone_mesh(f, [1.0, -1.0])

    mesh.write_csv(tmp_path / "m.csv")
    data = np.loadtxt(tmp_path / "m.csv", delimiter=",", skiprows=1)
    assert np.array_equal(data, mesh.real_coordinates())
    assert (tmp_path / "m.csv").read_text().startswith("re_w1,re_w2,re_w3,im_w1,im_w2,im_w3\n")

    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((6, 3)))
    mesh.write_obj(tmp_path / "m.obj", projection=Q)
    lines = (tmp_path / "m.obj").read_text().splitlines()
    verts = np.array([[float(x) for x in ln.split()[1:]] for ln in lines if ln.startswith("v ")])
    faces = [ln for ln in lines if ln.startswith("f ")]
    assert np.allclose(verts, mesh.real_coordinates() @ Q)
    assert len(faces) == 2 * len(mesh.quads)
    with pytest.raises(DomainError):
        mesh.write_obj(tmp_path / "bad.obj", projection=np.ones((6, 3)))
