"""Command-line interface.

Subcommands: ``solve``, ``frame``, ``curve {check,split,scan,periods}``,
``verify`` and ``export``. Every subcommand accepts ``--config FILE.json``
whose keys are the long option names (dashes or underscores); options given
on the command line take precedence.

Exit codes: 0 success (all enabled checks pass), 2 invalid input,
3 numerical failure or a failed check.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import framerec, io, speccurve, tzsolve
from .exceptions import DegenerateCurveError, DomainError, NumericalError, SLConeError

log = logging.getLogger("slcone")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class CheckFailed(SLConeError):
    """A verification item exceeded its threshold."""


# --- option handling -----------------------------------------------------------

DEFAULTS = {
    "solve": {
        "resolution": 64, "init": "zero", "seed": 0, "tol": 1e-10, "max_iter": 50,
        "amplitude": 1e-3, "samples": 256, "width": None, "ny": 64, "period_tol": 1e-8,
    },
    "frame": {"zeta": "1", "radii": [1.0], "frame_checks": True},
    "curve": {"samples": 256, "tol": 1e-10, "k": "1", "max_denominator": 10_000},
    "verify": {"tol": 1e-10, "flatness_tol": 1e-6, "zeta": "1"},
    "export": {"zeta": "1", "radii": [1.0]},
}


def _merge(args: argparse.Namespace, command: str) -> argparse.Namespace:
    config = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise DomainError(f"config file {path} does not exist")
        try:
            config = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DomainError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(config, dict):
            raise DomainError("config file must hold a JSON object")
        config = {k.replace("-", "_"): v for k, v in config.items()}
    merged = dict(DEFAULTS.get(command, {}))
    for key, value in config.items():
        if not hasattr(args, key):
            raise DomainError(f"unknown config key {key!r} for '{command}'")
        merged[key] = value
    for key, value in vars(args).items():
        if value is not None:
            merged[key] = value
        else:
            merged.setdefault(key, None)
    return argparse.Namespace(**merged)


def _resolution(n, name: str = "resolution") -> int:
    if isinstance(n, bool) or int(n) != n or n < 16 or int(n) & (int(n) - 1):
        raise DomainError(f"{name} must be a power of two >= 16, got {n!r}")
    return int(n)


def _positive(x, name: str) -> float:
    x = float(x)
    if not np.isfinite(x) or x <= 0:
        raise DomainError(f"{name} must be positive, got {x!r}")
    return x


def _zeta(text) -> complex:
    z = io.parse_complex(str(text)) if not isinstance(text, (list, tuple)) else complex(*text)
    if abs(abs(z) - 1.0) > 1e-12:
        raise DomainError(f"zeta must lie on the unit circle, |zeta| = {abs(z)!r}")
    return z


def _lattice(values) -> tzsolve.Lattice:
    if values is None or len(values) != 2:
        raise DomainError("--lattice needs two complex periods")
    o1, o2 = (io.parse_complex(str(v)) for v in values)
    return tzsolve.Lattice(o1, o2)


def _report_line(item) -> str:
    status = "pass" if item.passed else "FAIL"
    return f"{item.name}: {item.max_deviation:.3e} (threshold {item.threshold:g}) {status}"


def _emit(report: framerec.VerificationReport, path: Path | None) -> None:
    for item in report.items:
        print(_report_line(item))
    if path is not None:
        report.write(path)


def _require(report: framerec.VerificationReport, what: str) -> None:
    if not report.passed:
        failed = ", ".join(i.name for i in report.items if not i.passed)
        raise CheckFailed(f"{what}: failed checks {failed}")


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- solve ----------------------------------------------------------------------


def cmd_solve(a: argparse.Namespace) -> int:
    tol = _positive(a.tol, "tol")
    if a.equivariant:
        if a.energy is None:
            raise DomainError("--equivariant needs --energy")
        return _solve_equivariant(a, tol)
    lattice = _lattice(a.lattice)
    n = _resolution(a.resolution)
    if a.init == "zero":
        u0 = tzsolve.ScalarField.constant(lattice, 0.0, n)
    elif a.init == "random":
        rng = np.random.default_rng(int(a.seed))
        u0 = tzsolve.ScalarField(lattice, float(a.amplitude) * rng.standard_normal((n, n)))
    else:
        u0 = io.read_field(a.init)
        if u0.lattice != lattice:
            raise DomainError("initial field was sampled on a different lattice")
    u, info = tzsolve.solve_periodic(lattice, u0, tol=tol, max_iter=int(a.max_iter), full_output=True)
    final = info.residual_history[-1]
    io.write_field(u, a.out)
    log_path = Path(a.log) if a.log else Path(a.out).with_suffix(".log.json")
    io.dump_json(
        {
            "iterations": info.iterations,
            "residual_history": info.residual_history,
            "step_lengths": info.step_lengths,
            "min_singular_estimate": info.min_singular_estimate,
            "converged": info.converged,
        },
        log_path,
    )
    print(f"iterations: {info.iterations}")
    print(f"residual: {final:.3e} (tol {tol:g})")
    return EXIT_OK


def _solve_equivariant(a: argparse.Namespace, tol: float) -> int:
    H = float(a.energy)
    orbit = tzsolve.solve_equivariant(H, tol=tol, samples=int(a.samples))
    flight = tzsolve.time_of_flight(H)
    gap = abs(flight - orbit.period)
    out = Path(a.out)
    with out.open("w") as fh:
        fh.write("x,u,du_dx\n")
        for x, u, du in zip(orbit.x, orbit.profile, orbit.slope):
            fh.write(f"{io.fmt(x)},{io.fmt(u)},{io.fmt(du)}\n")
    meta = {
        "energy": H,
        "period": orbit.period,
        "period_time_of_flight": flight,
        "period_gap": gap,
        "turning_points": list(orbit.turning_points),
        "first_integral_drift": float(np.max(np.abs(orbit.first_integral() - H))),
    }
    io.dump_json(meta, out.with_suffix(".period.json"))
    if a.field_out:
        ny = _resolution(a.ny, "ny")
        _resolution(int(a.samples), "samples")
        u0 = orbit.to_field(a.width, ny)
        u = tzsolve.solve_periodic(u0.lattice, u0, tol=tol)
        io.write_field(u, a.field_out)
    print(f"period: {orbit.period:.17g}")
    print(f"time of flight: {flight:.17g} (gap {gap:.3e})")
    if gap > float(a.period_tol):
        raise CheckFailed(f"period estimates differ by {gap:.3e} > {a.period_tol:g}")
    return EXIT_OK


# --- frame / verify / export ------------------------------------------------------


def _frames_for(path, zeta) -> tuple[tzsolve.ScalarField, framerec.FrameField]:
    u = io.read_field(path)
    return u, framerec.integrate_frame(u, zeta)


def _matrix_json(M: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def cmd_frame(a: argparse.Namespace) -> int:
    zeta = _zeta(a.zeta)
    if a.field is None:
        raise DomainError("frame needs --field")
    u, frames = _frames_for(a.field, zeta)
    out = _out_dir(a.out_dir)
    surface = framerec.legendrian_surface(frames)
    np.savez(out / "frames.npz", frames=frames.extended, surface=surface.points)
    mono = {}
    for gen in ("omega1", "omega2"):
        M, dist = framerec.monodromy(frames, gen)
        mono[gen] = {"matrix": _matrix_json(M), "distance_to_center": dist}
        print(f"monodromy {gen}: distance to centre {dist:.3e}")
    mono["unitarity_drift"] = frames.drift
    io.dump_json(mono, out / "monodromy.json")

    report = framerec.verify_legendrian(surface, u)
    _emit(report, out / "verification.json")
    reports = [report]
    if a.frame_checks:
        frame_report = framerec.verify_frame(frames, u)
        _emit(frame_report, out / "frame_checks.json")
        print(f"lagrangian phase: {frame_report.data['phase']:.12f}")
        reports.append(frame_report)
    if a.obj or a.mesh_csv:
        _write_mesh(surface, a)
    for r in reports:
        _require(r, "frame verification")
    return EXIT_OK


def _projection(path):
    if not path:
        return None
    data = json.loads(Path(path).read_text())
    return np.asarray(data, dtype=float)


def _write_mesh(surface, a) -> None:
    radii = [_positive(r, "radius") for r in a.radii]
    mesh = framerec.cone_mesh(surface, radii)
    if a.obj:
        mesh.write_obj(a.obj, _projection(a.projection))
    if a.mesh_csv:
        mesh.write_csv(a.mesh_csv)
    print(f"mesh: {len(mesh.vertices)} vertices, {len(mesh.quads)} quads")


def cmd_export(a: argparse.Namespace) -> int:
    zeta = _zeta(a.zeta)
    if a.field is None:
        raise DomainError("export needs --field")
    if not (a.obj or a.mesh_csv):
        raise DomainError("export needs --obj and/or --mesh-csv")
    _, frames = _frames_for(a.field, zeta)
    _write_mesh(framerec.legendrian_surface(frames), a)
    return EXIT_OK


def cmd_verify(a: argparse.Namespace) -> int:
    zeta = _zeta(a.zeta)
    tol = _positive(a.tol, "tol")
    if a.field is None:
        raise DomainError("verify needs --field")
    u = io.read_field(a.field)
    res = float(np.max(np.abs(tzsolve.residual(u).values)))
    flat = framerec.flatness_defect(u, zeta)
    items = [
        framerec.ReportItem("tzitzeica_residual", res, tol),
        framerec.ReportItem("flatness_defect", flat, float(a.flatness_tol)),
    ]
    if all(i.passed for i in items):
        frames = framerec.integrate_frame(u, zeta)
        items += framerec.verify_legendrian(framerec.legendrian_surface(frames), u).items
    report = framerec.VerificationReport(tuple(items))
    _emit(report, Path(a.out) if a.out else None)
    _require(report, "verify")
    return EXIT_OK


# --- curve ----------------------------------------------------------------------


def _curve_from(a: argparse.Namespace):
    if a.curve:
        return io.read_curve(a.curve)
    if None in (a.u, a.v, a.w):
        raise DomainError("give --curve FILE or all of -u, -v, -w")
    return speccurve.CurveTypeII.from_critical(float(a.u), float(a.v), float(a.w), _zeta(a.k))


def cmd_curve(a: argparse.Namespace) -> int:
    action = a.action
    if action == "scan":
        return _curve_scan(a)
    curve = _curve_from(a)
    if action == "check":
        return _curve_check(curve, a)
    if action == "split":
        return _curve_split(curve, a)
    return _curve_periods(curve, a)


def _curve_check(curve, a) -> int:
    if isinstance(curve, speccurve.CurveTypeI):
        model = speccurve.hyperelliptic_model(curve)
        print("type: I (no admissibility criterion available)")
        print(f"sextic distinct roots: {str(model.distinct_roots).lower()}")
        return EXIT_OK
    crit = curve.critical_data()
    verdict = crit is not None and crit[0] < crit[1] and speccurve.admissible(*crit)
    circle = speccurve.circle_branch_check(curve, int(a.samples))
    print(f"admissible: {str(verdict).lower()}")
    print(f"circle_check: {str(circle).lower()}")
    model = speccurve.hyperelliptic_model(curve)
    print(f"sextic distinct roots: {str(model.distinct_roots).lower()}")
    if verdict != circle:
        margin = float(speccurve.lemma_margin(*crit)) if crit else float("nan")
        if not abs(margin) <= 1e-9:
            raise CheckFailed("admissibility and circle check disagree away from the boundary")
    return EXIT_OK


def _curve_split(curve, a) -> int:
    if not isinstance(curve, speccurve.CurveTypeII):
        raise DomainError("split applies to type II curves")
    E1, E2 = speccurve.elliptic_split(curve)
    for E in (E1, E2):
        c = E.cubic
        print(f"{E.label}: w^2 = {io.fmt(c[3])} x^3 + {io.fmt(c[2])} x^2 + {io.fmt(c[1])} x + {io.fmt(c[0])}")
    if a.out:
        io.dump_json({E.label: list(E.cubic) for E in (E1, E2)}, a.out)
    return EXIT_OK


def _curve_periods(curve, a) -> int:
    if not isinstance(curve, speccurve.CurveTypeII):
        raise DomainError("periods apply to type II curves")
    tol = _positive(a.tol, "tol")
    E1, E2 = speccurve.elliptic_split(curve)
    rows = []
    for E in (E1, E2):
        quad = speccurve.elliptic_periods(E, tol, method="quadrature", verify=False)
        agm = speccurve.elliptic_periods(E, tol, method="agm", verify=False)
        agree = speccurve.same_lattice(quad, agm, tol)
        tau = speccurve.reduce_tau(quad[1] / quad[0])
        rows.append((E.label, quad, agm, tau, agree))
        print(f"{E.label}: tau = {tau.real:.15g}{tau.imag:+.15g}i, algorithms agree: {str(agree).lower()}")
    probe = speccurve.commensurability_probe(E1, E2, tol, int(a.max_denominator))
    print(f"commensurability residual (heuristic): {probe.residual:.3e} at q = {probe.best_denominator}")
    if a.out:
        with Path(a.out).open("w") as fh:
            fh.write("curve,method,omega1_re,omega1_im,omega2_re,omega2_im\n")
            for label, quad, agm, _, _ in rows:
                for name, (w1, w2) in (("quadrature", quad), ("agm", agm)):
                    fh.write(",".join([label, name] + [io.fmt(x) for x in (w1.real, w1.imag, w2.real, w2.imag)]) + "\n")
        io.dump_json(probe.to_dict(), Path(a.out).with_suffix(".probe.json"))
    if not all(r[4] for r in rows):
        raise CheckFailed("period algorithms disagree")
    return EXIT_OK


def _axis(spec, name: str) -> np.ndarray:
    if spec is None or len(spec) != 3:
        raise DomainError(f"--{name} needs START STOP COUNT")
    start, stop, count = float(spec[0]), float(spec[1]), int(float(spec[2]))
    if count < 1:
        raise DomainError(f"--{name} count must be positive")
    return np.linspace(start, stop, count)


def _curve_scan(a) -> int:
    U, V, W = _axis(a.u_range, "u-range"), _axis(a.v_range, "v-range"), _axis(a.w_range, "w-range")
    rows = speccurve.scan_region(U, V, W, int(a.samples), periods=bool(a.periods))
    if not a.out:
        raise DomainError("scan needs --out")
    io.write_scan(rows, a.out)
    mismatched = [
        r for r in rows
        if r.admissible != r.circle_check and abs(float(speccurve.lemma_margin(r.u, r.v, r.w))) > 1e-9
    ]
    print(f"rows: {len(rows)}, admissible: {sum(r.admissible for r in rows)}, "
          f"split failures: {sum(not r.split_ok for r in rows)}, mismatches: {len(mismatched)}")
    if mismatched:
        raise CheckFailed(f"{len(mismatched)} rows where admissibility and circle check disagree")
    return EXIT_OK


# --- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slcone", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file of option values (flags win)")

    s = sub.add_parser("solve", help="solve the Tzitzeica equation")
    common(s)
    s.add_argument("--lattice", nargs=2, metavar=("OMEGA1", "OMEGA2"))
    s.add_argument("--resolution", type=int)
    s.add_argument("--init", help="zero, random or a field file")
    s.add_argument("--seed", type=int)
    s.add_argument("--amplitude", type=float, help="size of a random initial guess")
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--equivariant", action="store_true", default=None)
    s.add_argument("--energy", type=float)
    s.add_argument("--samples", type=int, help="profile samples per period")
    s.add_argument("--width", type=float, help="lattice height for --field-out")
    s.add_argument("--ny", type=int)
    s.add_argument("--field-out", help="also write the profile as a 2D field")
    s.add_argument("--period-tol", type=float)
    s.add_argument("--out", required=True)
    s.add_argument("--log")

    f = sub.add_parser("frame", help="integrate frames and verify the Legendrian surface")
    common(f)
    f.add_argument("--field")
    f.add_argument("--zeta")
    f.add_argument("--out-dir", required=True)
    f.add_argument("--no-frame-checks", dest="frame_checks", action="store_false", default=None)
    f.add_argument("--obj")
    f.add_argument("--mesh-csv")
    f.add_argument("--radii", nargs="+", type=float)
    f.add_argument("--projection", help="JSON 6x3 matrix with orthonormal columns")

    c = sub.add_parser("curve", help="spectral curve tools")
    common(c)
    c.add_argument("action", choices=["check", "split", "scan", "periods"])
    c.add_argument("--curve", help="curve JSON file")
    c.add_argument("-u", type=float)
    c.add_argument("-v", type=float)
    c.add_argument("-w", type=float)
    c.add_argument("-k")
    c.add_argument("--u-range", nargs=3)
    c.add_argument("--v-range", nargs=3)
    c.add_argument("--w-range", nargs=3)
    c.add_argument("--samples", type=int)
    c.add_argument("--periods", action="store_true", default=None)
    c.add_argument("--tol", type=float)
    c.add_argument("--max-denominator", type=int)
    c.add_argument("--out")

    v = sub.add_parser("verify", help="check a field file end to end")
    common(v)
    v.add_argument("--field")
    v.add_argument("--zeta")
    v.add_argument("--tol", type=float)
    v.add_argument("--flatness-tol", type=float)
    v.add_argument("--out")

    e = sub.add_parser("export", help="write a cone mesh")
    common(e)
    e.add_argument("--field")
    e.add_argument("--zeta")
    e.add_argument("--radii", nargs="+", type=float)
    e.add_argument("--obj")
    e.add_argument("--mesh-csv")
    e.add_argument("--projection")
    return p


COMMANDS = {
    "solve": cmd_solve,
    "frame": cmd_frame,
    "curve": cmd_curve,
    "verify": cmd_verify,
    "export": cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        merged = _merge(args, args.command)
        return COMMANDS[args.command](merged)
    except (DegenerateCurveError, NumericalError, CheckFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
