import csv
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slcone import io, speccurve, tzsolve
from slcone.exceptions import DomainError

LAT = tzsolve.Lattice(complex(2.0, 0.1), complex(0.3, 1.7))


def _random_field(seed, nx=16, ny=8):
    rng = np.random.default_rng(seed)
    return tzsolve.ScalarField(LAT, rng.standard_normal((nx, ny)) * 10.0 ** rng.integers(-12, 3))


@pytest.mark.parametrize("suffix", [".csv", ".json"])
@given(seed=st.integers(0, 10_000))
def test_field_round_trip_is_exact(tmp_path_factory, suffix, seed):
    u = _random_field(seed)
    path = tmp_path_factory.mktemp("f") / f"u{suffix}"
    io.write_field(u, path)
    back = io.read_field(path)
    assert back.lattice == u.lattice
    assert np.array_equal(back.values, u.values)


def test_field_csv_layout(tmp_path):
    u = _random_field(1, 16, 8)
    io.write_field(u, tmp_path / "u.csv")
    rows = list(csv.reader((tmp_path / "u.csv").open()))
    assert rows[0] == io.FIELD_HEADER
    assert rows[1][:2] == ["16", "8"]
    assert len(rows) == 2 + 16 and all(len(r) == 8 for r in rows[2:])


def test_field_errors(tmp_path):
    with pytest.raises(DomainError):
        io.read_field(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(DomainError, match="header"):
        io.read_field(bad)
    u = _random_field(2)
    io.write_field(u, tmp_path / "u.csv")
    lines = (tmp_path / "u.csv").read_text().splitlines()
    (tmp_path / "short.csv").write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(DomainError, match="shape"):
        io.read_field(tmp_path / "short.csv")
    data = io.field_to_dict(u)
    del data["omega2"]
    with pytest.raises(DomainError, match="missing"):
        io.field_from_dict(data)


def test_parse_complex():
    assert io.parse_complex("6.28") == 6.28
    assert io.parse_complex("0+6.28i") == 6.28j
    assert io.parse_complex("1.5 - 2j") == complex(1.5, -2)
    with pytest.raises(DomainError):
        io.parse_complex("two")


def test_curve_dict_forms():
    c = io.curve_from_dict({"type": "II", "u": -2, "v": 2, "w": 0})
    assert isinstance(c, speccurve.CurveTypeII) and c.critical == (-2.0, 2.0, 0.0)
    d = io.curve_from_dict({"type": "II", "b": [0, -12, 0, 1], "k": "1"})
    assert d.b == c.b
    t1 = io.curve_from_dict({"type": "I", "b": ["1+2i", [0.5, -1.0], [0.5, 1.0], "1-2i"]})
    assert isinstance(t1, speccurve.CurveTypeI) and t1.b1 == 0.5 - 1j
    for curve in (c, d, t1):
        again = io.curve_from_dict(json.loads(json.dumps(io.curve_to_dict(curve))))
        assert type(again) is type(curve) and np.allclose(again.b, curve.b)


def test_curve_dict_errors(tmp_path):
    for bad in ({"type": "III"}, {"type": "I"}, {"type": "I", "b": [1, 0, 0, 2]}, {"type": "II", "u": 1}, {"type": "II", "b": ["1+1i", 0, 0, 1]}):
        with pytest.raises(DomainError):
            io.curve_from_dict(bad)
    with pytest.raises(DomainError):
        io.read_curve(tmp_path / "none.json")


def test_write_scan(tmp_path):
    rows = [
        speccurve.ScanRow(-2.0, 2.0, 0.0, True, True, True, 0.5 + 1j, 1j),
        speccurve.ScanRow(-1.0, 0.5, 3.0, False, False, True),
    ]
    io.write_scan(rows, tmp_path / "scan.csv")
    lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert lines[0].split(",") == io.SCAN_HEADER
    first = lines[1].split(",")
    assert first[3:6] == ["true", "true", "true"] and float(first[6]) == 0.5
    assert lines[2].split(",")[3:] == ["false", "false", "true", "", "", "", ""]


def test_dump_json_handles_numpy(tmp_path):
    io.dump_json({"a": np.float64(0.1), "b": np.arange(3), "c": np.bool_(True), "z": 1 + 2j}, tmp_path / "x.json")
    assert json.loads((tmp_path / "x.json").read_text()) == {"a": 0.1, "b": [0, 1, 2], "c": True, "z": [1.0, 2.0]}
