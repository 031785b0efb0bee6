import csv
import json

import numpy as np
import pytest

from slcone import io, speccurve, tzsolve
from slcone.cli import main

FLAT = ["3.6275987284684357", "1.8137993642342178+3.141592653589793i"]
LEGENDRIAN = ["unit_norm", "horizontality", "isotropy", "conformal_factor", "hopf_differential"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def flat_field(tmp_path, capsys):
    path = tmp_path / "flat.csv"
    assert run(capsys, "solve", "--lattice", *FLAT, "--resolution", 16, "--out", path)[0] == 0
    return path


# --- exit codes -------------------------------------------------------------------


def test_solve_zero(flat_field, capsys):
    u = io.read_field(flat_field)
    assert u.shape == (16, 16) and np.all(u.values == 0)
    log = json.loads(flat_field.with_suffix(".log.json").read_text())
    assert log["converged"] and log["iterations"] == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--lattice", "1", "2", "--out", "x.csv"],
        ["solve", "--lattice", *FLAT, "--resolution", "24", "--out", "x.csv"],
        ["solve", "--lattice", *FLAT, "--tol", "-1", "--out", "x.csv"],
        ["solve", "--equivariant", "--out", "x.csv"],
        ["solve", "--equivariant", "--energy", "1.2", "--out", "x.csv"],
        ["solve", "--bogus"],
        ["curve", "check"],
        ["curve", "scan", "--u-range", "0", "1", "2"],
        ["frame", "--field", "missing.csv", "--out-dir", "f"],
    ],
)
def test_invalid_input_exits_2(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert run(capsys, *argv)[0] == 2


def test_resonant_lattice_exits_3(tmp_path, capsys):
    # the hexagonal lattice carries |k|^2 = 12 modes in the kernel at u = 0
    argv = ["solve", "--lattice", *FLAT, "--resolution", 16, "--init", "random", "--seed", 3,
            "--amplitude", 0.01, "--out", tmp_path / "r.csv"]
    code, _, err = run(capsys, *argv)
    assert code == 3 and "singular" in err


def test_zeta_off_the_circle(flat_field, tmp_path, capsys):
    code, _, err = run(capsys, "frame", "--field", flat_field, "--zeta", "2", "--out-dir", tmp_path / "f")
    assert code == 2 and "unit circle" in err


def test_singular_split_exits_3(capsys):
    # b - 1 = x^3 - 12 x + 14 has a double root at x = 2
    code, _, err = run(capsys, "curve", "split", "-u", -2, "-v", 2, "-w", 15)
    assert code == 3 and "singular" in err


def test_failed_check_exits_3(tmp_path, capsys):
    path = tmp_path / "coarse.csv"
    run(capsys, "solve", "--lattice", "6.28", "0+6.28i", "--resolution", 16, "--out", path)
    code, out, _ = run(capsys, "frame", "--field", path, "--out-dir", tmp_path / "f")
    assert code == 3 and "FAIL" in out
    assert (tmp_path / "f" / "verification.json").exists()


# --- frame, verify, export -----------------------------------------------------------


def test_frame_outputs(flat_field, tmp_path, capsys):
    out = tmp_path / "f"
    code, text, _ = run(capsys, "frame", "--field", flat_field, "--out-dir", out, "--obj", tmp_path / "m.obj")
    assert code == 0
    report = json.loads((out / "verification.json").read_text())
    assert [r["name"] for r in report] == LEGENDRIAN
    assert all(r["pass"] for r in report)
    checks = json.loads((out / "frame_checks.json").read_text())
    assert "lagrangian_phase" in [r["name"] for r in checks]
    mono = json.loads((out / "monodromy.json").read_text())
    M = np.array(mono["omega1"]["matrix"])
    assert np.abs(M[..., 0] + 1j * M[..., 1] - np.eye(3)).max() < 1e-10
    assert "lagrangian phase: 1.570796326795" in text
    assert (tmp_path / "m.obj").read_text().startswith("v ")


def test_no_frame_checks(flat_field, tmp_path, capsys):
    code, text, _ = run(capsys, "frame", "--field", flat_field, "--out-dir", tmp_path / "f", "--no-frame-checks")
    assert code == 0 and not (tmp_path / "f" / "frame_checks.json").exists()
    assert "lagrangian phase" not in text


def test_verify_and_export(flat_field, tmp_path, capsys):
    code, text, _ = run(capsys, "verify", "--field", flat_field, "--out", tmp_path / "v.json")
    assert code == 0
    names = [r["name"] for r in json.loads((tmp_path / "v.json").read_text())]
    assert names == ["tzitzeica_residual", "flatness_defect"] + LEGENDRIAN
    code, text, _ = run(capsys, "export", "--field", flat_field, "--radii", 1, 2, "--mesh-csv", tmp_path / "m.csv")
    assert code == 0 and "mesh:" in text
    assert run(capsys, "export", "--field", flat_field)[0] == 2


# --- options ---------------------------------------------------------------------------


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lattice": FLAT, "resolution": 32, "max-iter": 7}))
    out = tmp_path / "a.csv"
    assert run(capsys, "solve", "--config", cfg, "--out", out)[0] == 0
    assert io.read_field(out).shape == (32, 32)
    assert run(capsys, "solve", "--config", cfg, "--resolution", 16, "--out", out)[0] == 0
    assert io.read_field(out).shape == (16, 16)


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lattice": FLAT, "colour": "red"}))
    code, _, err = run(capsys, "solve", "--config", cfg, "--out", tmp_path / "a.csv")
    assert code == 2 and "colour" in err
    cfg.write_text("[1, 2]")
    assert run(capsys, "solve", "--config", cfg, "--out", tmp_path / "a.csv")[0] == 2
    assert run(capsys, "solve", "--config", tmp_path / "none.json", "--out", tmp_path / "a.csv")[0] == 2


def test_outputs_are_byte_identical(tmp_path, capsys):
    blobs = []
    for run_dir in ("r1", "r2"):
        d = tmp_path / run_dir
        d.mkdir()
        field = d / "u.csv"
        argv = ["solve", "--lattice", "2", "0.3+1.7i", "--resolution", 16, "--init", "random", "--seed", 3,
                "--amplitude", 0.01, "--out", field]
        assert run(capsys, *argv)[0] == 0
        # the coarse grid fails some thresholds; the files must still agree byte for byte
        run(capsys, "frame", "--field", field, "--out-dir", d / "f")
        names = ["u.csv", "u.log.json", "f/verification.json", "f/frame_checks.json", "f/monodromy.json"]
        blobs.append([(d / n).read_bytes() for n in names])
    assert blobs[0] == blobs[1]


# --- equivariant solve and curves -----------------------------------------------------


def test_equivariant_solve(tmp_path, capsys):
    out = tmp_path / "orbit.csv"
    code, text, _ = run(capsys, "solve", "--equivariant", "--energy", 2, "--samples", 64,
                        "--field-out", tmp_path / "strip.csv", "--width", 0.8, "--ny", 16, "--out", out)
    assert code == 0
    meta = json.loads(out.with_suffix(".period.json").read_text())
    assert meta["period"] == pytest.approx(tzsolve.period(2.0), abs=1e-12)
    assert meta["period_gap"] < 1e-8
    assert out.read_text().splitlines()[0] == "x,u,du_dx"
    strip = io.read_field(tmp_path / "strip.csv")
    assert np.abs(tzsolve.residual(strip).values).max() <= 1e-10


def test_curve_check_and_split(tmp_path, capsys):
    code, text, _ = run(capsys, "curve", "check", "-u", -2, "-v", 2, "-w", 0)
    assert code == 0 and "admissible: true" in text.splitlines()
    code, text, _ = run(capsys, "curve", "check", "-u", -1, "-v", 1, "-w", 5)
    assert code == 0 and "admissible: false" in text.splitlines()
    code, text, _ = run(capsys, "curve", "split", "-u", -1, "-v", 1, "-w", 0, "--out", tmp_path / "s.json")
    assert code == 0
    split = json.loads((tmp_path / "s.json").read_text())
    assert split == {"E1": [1.0, -3.0, 0.0, 1.0], "E2": [-1.0, -3.0, 0.0, 1.0]}


def test_curve_from_file(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"type": "I", "b": [[1, 0], [0, 0], [0, 0], [1, 0]]}))
    code, text, _ = run(capsys, "curve", "check", "--curve", path)
    assert code == 0 and text.startswith("type: I")
    assert run(capsys, "curve", "split", "--curve", path)[0] == 2


def test_curve_periods(tmp_path, capsys):
    out = tmp_path / "p.csv"
    code, text, _ = run(capsys, "curve", "periods", "-u", -2, "-v", 2, "-w", 0, "--out", out)
    assert code == 0 and "algorithms agree: true" in text
    rows = list(csv.DictReader(out.open()))
    assert [(r["curve"], r["method"]) for r in rows] == [
        ("E1", "quadrature"), ("E1", "agm"), ("E2", "quadrature"), ("E2", "agm")
    ]
    assert "best_denominator" in json.loads(out.with_suffix(".probe.json").read_text())


def test_curve_scan(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    code, text, _ = run(capsys, "curve", "scan", "--u-range", -3, 1, 5, "--v-range", -1, 3, 5,
                        "--w-range", -4, 4, 5, "--out", out)
    assert code == 0 and "mismatches: 0" in text
    rows = list(csv.DictReader(out.open()))
    assert rows and list(rows[0]) == io.SCAN_HEADER
    for r in rows:
        u, v, w = float(r["u"]), float(r["v"]), float(r["w"])
        assert u < v
        assert r["admissible"] == str(speccurve.admissible(u, v, w)).lower()
        if abs(float(speccurve.lemma_margin(u, v, w))) > 1e-9:
            assert r["admissible"] == r["circle_check"]
