"""Reading and writing fields, curves and verification reports.

Floats are written with 17 significant digits so that files round-trip
exactly. Output never contains timestamps or other run-dependent data.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .exceptions import DomainError
from .speccurve import CurveTypeI, CurveTypeII, ScanRow
from .tzsolve import Lattice, ScalarField

FIELD_HEADER = ["nx", "ny", "omega1_re", "omega1_im", "omega2_re", "omega2_im"]


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _parse_complex(value, what: str) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", "").replace("i", "j"))
        except ValueError:
            pass
    raise DomainError(f"cannot read {what} as a complex number: {value!r}")


def parse_complex(text: str) -> complex:
    """Parse ``"6.28"``, ``"0+6.28i"`` or ``"1.5-2j"``."""
    return _parse_complex(text, "value")


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return _complex_pair(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


# --- scalar fields -------------------------------------------------------------


def field_to_dict(u: ScalarField) -> dict:
    return {
        "nx": u.nx,
        "ny": u.ny,
        "omega1": _complex_pair(u.lattice.omega1),
        "omega2": _complex_pair(u.lattice.omega2),
        "values": u.values.tolist(),
    }


def field_from_dict(data: dict) -> ScalarField:
    try:
        nx, ny = int(data["nx"]), int(data["ny"])
        lattice = Lattice(
            _parse_complex(data["omega1"], "omega1"), _parse_complex(data["omega2"], "omega2")
        )
        values = np.asarray(data["values"], dtype=float)
    except KeyError as exc:
        raise DomainError(f"field file is missing key {exc}") from None
    if values.shape != (nx, ny):
        raise DomainError(f"values have shape {values.shape}, header says {(nx, ny)}")
    return ScalarField(lattice, values)


def write_field(u: ScalarField, path) -> None:
    """Write CSV (header row, one values row, then ``nx`` rows) or JSON, by extension."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        dump_json(field_to_dict(u), path)
        return
    lat = u.lattice
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIELD_HEADER)
        w.writerow(
            [u.nx, u.ny]
            + [fmt(x) for x in (lat.omega1.real, lat.omega1.imag, lat.omega2.real, lat.omega2.imag)]
        )
        for row in u.values:
            w.writerow([fmt(x) for x in row])


def read_field(path) -> ScalarField:
    path = Path(path)
    if not path.exists():
        raise DomainError(f"field file {path} does not exist")
    if path.suffix.lower() == ".json":
        return field_from_dict(json.loads(path.read_text()))
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2 or rows[0] != FIELD_HEADER:
        raise DomainError(f"{path} does not start with the header {','.join(FIELD_HEADER)}")
    head = rows[1]
    nx, ny = int(head[0]), int(head[1])
    o1 = complex(float(head[2]), float(head[3]))
    o2 = complex(float(head[4]), float(head[5]))
    values = np.array([[float(x) for x in r] for r in rows[2:] if r], dtype=float)
    if values.shape != (nx, ny):
        raise DomainError(f"{path}: values have shape {values.shape}, header says {(nx, ny)}")
    return ScalarField(Lattice(o1, o2), values)


# --- curves --------------------------------------------------------------------


def curve_from_dict(data: dict) -> CurveTypeI | CurveTypeII:
    """``{type: "I", b: [...]}``, ``{type: "II", k, b: [...]}`` or ``{type: "II", u, v, w, k}``."""
    kind = str(data.get("type", "")).upper()
    k = _parse_complex(data.get("k", [1.0, 0.0]), "k")
    if kind == "I":
        if "b" not in data:
            raise DomainError("type I curve needs coefficients 'b'")
        return CurveTypeI.from_coefficients([_parse_complex(c, "b") for c in data["b"]])
    if kind == "II":
        if all(key in data for key in ("u", "v", "w")):
            return CurveTypeII.from_critical(float(data["u"]), float(data["v"]), float(data["w"]), k)
        if "b" not in data:
            raise DomainError("type II curve needs 'b' or the critical data 'u', 'v', 'w'")
        b = [_parse_complex(c, "b") for c in data["b"]]
        if any(abs(c.imag) > 0 for c in b):
            raise DomainError("type II coefficients must be real")
        return CurveTypeII(tuple(c.real for c in b), k)
    raise DomainError(f"curve type must be 'I' or 'II', got {data.get('type')!r}")


def curve_to_dict(curve) -> dict:
    if isinstance(curve, CurveTypeI):
        return {"type": "I", "b": [_complex_pair(c) for c in curve.b]}
    out = {"type": "II", "k": _complex_pair(curve.k), "b": list(curve.b)}
    if curve.critical is not None:
        out.update(zip(("u", "v", "w"), curve.critical))
    return out


def read_curve(path) -> CurveTypeI | CurveTypeII:
    path = Path(path)
    if not path.exists():
        raise DomainError(f"curve file {path} does not exist")
    return curve_from_dict(json.loads(path.read_text()))


SCAN_HEADER = [
    "u", "v", "w", "admissible", "circle_check", "split_ok",
    "tau1_re", "tau1_im", "tau2_re", "tau2_im",
]


def write_scan(rows: list[ScanRow], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_HEADER)
        for r in rows:
            taus = []
            for t in (r.tau1, r.tau2):
                taus += ["", ""] if t is None else [fmt(t.real), fmt(t.imag)]
            w.writerow(
                [fmt(r.u), fmt(r.v), fmt(r.w), str(r.admissible).lower(),
                 str(r.circle_check).lower(), str(r.split_ok).lower()] + taus
            )
