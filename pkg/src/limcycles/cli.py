"""Command-line front end.

Exit codes: 0 success, 1 violated precondition, 2 internal inconsistency,
64 usage error.  Relative ``--out`` paths are resolved against
``$LIMCYCLES_OUT`` when it is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import re
import sys
import time

import numpy as np

from . import criteria
from .cycles import DEDUP_TOL, RESIDUAL_TOL, InconsistentStabilityError, scan_cycles
from .expr import ParseError
from .field import FieldError, TransformError, conti_filippov, field_from_json
from .gallery import NAMES, GallerySystem, gallery, get_system
from .integrate import integrate
from .operators import OPERATORS, SingularityError, sign_scan

log = logging.getLogger("limcycles")

EX_OK, EX_PRECONDITION, EX_INCONSISTENT, EX_USAGE = 0, 1, 2, 64
OUT_ENV = "LIMCYCLES_OUT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


def _floats(text: str, sep: str, n: int | None = None) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(sep))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers separated by {sep!r}: {text!r}")
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} values separated by {sep!r}: {text!r}")
    return vals


def _point(text):
    return _floats(text, ",", 2)


def _coef(text):
    return _floats(text, ",", 4)


def _range(text):
    return _floats(text, ":", 2)


def _region(text):
    return _floats(text, ":", 4)


def _system_args(p):
    g = p.add_argument_group("system")
    g.add_argument("--system", choices=NAMES, help="gallery system")
    g.add_argument("--eps", type=float, default=1.0, help="vdp parameter")
    g.add_argument("--coef", type=_coef, help="cubic coefficients a,b,c,d")
    g.add_argument("--spec", help="JSON system description")


def _tol_args(p, rtol, atol):
    p.add_argument("--rtol", type=float, default=rtol)
    p.add_argument("--atol", type=float, default=atol)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="limcycles", description="Limit cycles of planar polynomial systems.")
    p.add_argument("--self-test", action="store_true", help="run the gallery self-test and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    _system_args(s)
    s.add_argument("--from", dest="p0", type=_point, required=True, help="initial point x,y")
    s.add_argument("--t", type=float, default=50.0, help="final time (negative integrates backwards)")
    s.add_argument("--out")
    _tol_args(s, 1e-9, 1e-12)

    s = sub.add_parser("cycles", help="detect limit cycles on the positive y-axis")
    _system_args(s)
    s.add_argument("--y-range", type=_range, help="seed range ymin:ymax")
    s.add_argument("--seeds", type=int)
    s.add_argument("--dedup-tol", type=float, default=DEDUP_TOL)
    s.add_argument("--residual-tol", type=float, default=RESIDUAL_TOL)
    s.add_argument("--no-samples", action="store_true", help="omit cycle samples from JSON")
    s.add_argument("--out")
    _tol_args(s, 1e-12, 1e-14)

    s = sub.add_parser("check", help="check uniqueness-theorem hypotheses")
    _system_args(s)
    s.add_argument("--theorem", action="append", choices=["thm1", "thm2", "thm3", "thm4", "thm5", "thm6", "cor1"])
    s.add_argument("--all", action="store_true", help="every applicable checker")
    s.add_argument("--region", type=_region)
    s.add_argument("--resolution", type=int, default=101)
    s.add_argument("--out")

    s = sub.add_parser("operators", help="grid sign scans of stability operators")
    _system_args(s)
    s.add_argument("--operator", action="append", choices=OPERATORS)
    s.add_argument("--region", type=_region)
    s.add_argument("--resolution", type=int, default=101)
    s.add_argument("--grid-csv", help="write the grid values of the (single) operator")
    s.add_argument("--out")

    s = sub.add_parser("transform", help="Conti-Filippov table export")
    _system_args(s)
    s.add_argument("--x-max", type=float, default=3.0)
    s.add_argument("--n", type=int, default=201)
    s.add_argument("--out")

    s = sub.add_parser("portrait", help="vector-field grid CSV")
    _system_args(s)
    s.add_argument("--region", type=_region)
    s.add_argument("--resolution", type=int, default=41)
    s.add_argument("--out")

    sub.add_parser("self-test", help="run every gallery entry against its expectations")
    return p


# ---------------------------------------------------------------------------


def _resolve(args) -> GallerySystem:
    if args.spec:
        with open(args.spec) as fh:
            obj = json.load(fh)
        fld, spec = field_from_json(obj)
        return GallerySystem(name=obj.get("label", "custom"), field=fld, spec=spec)
    if not args.system:
        raise UsageError("one of --system or --spec is required")
    return get_system(args.system, eps=args.eps, coef=args.coef)


def _out_path(path: str | None) -> str | None:
    if path is None:
        return None
    base = os.environ.get(OUT_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _emit_json(obj, path):
    text = json.dumps(obj, indent=2, allow_nan=False)
    path = _out_path(path)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")
        log.info("wrote %s", path)


def _emit_rows(header, rows, path):
    path = _out_path(path)
    fh = io.StringIO() if path is None else open(path, "w", newline="")
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) for v in r])
        if path is None:
            sys.stdout.write(fh.getvalue())
    finally:
        fh.close()


def cmd_simulate(args) -> int:
    sysm = _resolve(args)
    fld = sysm.field if args.t >= 0 else sysm.field.reversed()
    traj = integrate(fld, args.p0, abs(args.t), rtol=args.rtol, atol=args.atol)
    rows = traj.samples
    if args.t < 0:
        rows[:, 0] *= -1.0
    _emit_rows(["t", "x", "y"], rows, args.out)
    if traj.reason != "t_end":
        sys.stderr.write(f"integration stopped early: {traj.reason} at t={traj.t[-1]:.6g}\n")
    return EX_OK


def _scan(sysm, y_range, seeds, **kw):
    lo, hi = y_range or sysm.seed_range
    return scan_cycles(sysm.field, lo, hi, seeds or sysm.n_seeds, **kw)


def cmd_cycles(args) -> int:
    sysm = _resolve(args)
    t0 = time.perf_counter()
    scan = _scan(sysm, args.y_range, args.seeds, rtol=args.rtol, atol=args.atol, dedup_tol=args.dedup_tol, residual_tol=args.residual_tol)
    out = {
        "system": sysm.field.label or sysm.name,
        "field": sysm.field.to_json(),
        "seed_range": list(args.y_range or sysm.seed_range),
        "n_seeds": len(scan.seeds),
        "count": len(scan.cycles),
        "center_regions": [list(r) for r in scan.center_regions],
        "skipped_seeds": scan.skipped,
        "cycles": [dict(c.to_json(not args.no_samples), mean_radius=float(np.mean(c.radii)), radius_std=float(np.std(c.radii)), amplitude=c.amplitude) for c in scan.cycles],
        "elapsed_s": time.perf_counter() - t0,
    }
    _emit_json(out, args.out)
    return EX_OK


def _run_checks(sysm: GallerySystem, which, region, resolution) -> dict:
    region = region or sysm.region
    spec = sysm.spec
    results = {}
    for name in which:
        if name in ("thm1", "thm2", "thm3", "thm4", "thm5"):
            if spec is None:
                results[name] = criteria.not_applicable_report(name, "system is a Lienard equation", "no Lienard form supplied", criteria._CONCLUSIONS[name])
            else:
                results[name] = getattr(criteria, f"check_{name}")(spec)
        elif name == "thm6":
            results[name] = criteria.check_thm6(sysm.field, region, resolution=resolution)
        elif name == "cor1":
            if sysm.family is None:
                results[name] = criteria.not_applicable_report(name, "system belongs to the homogeneous family", "no family decomposition supplied", criteria._CONCLUSIONS[name])
            else:
                results[name] = criteria.check_cor1(sysm.family)
    return results


def cmd_check(args) -> int:
    sysm = _resolve(args)
    which = ["thm1", "thm2", "thm3", "thm4", "thm5", "thm6", "cor1"] if args.all or not args.theorem else args.theorem
    results = _run_checks(sysm, which, args.region, args.resolution)
    _emit_json({"system": sysm.field.label or sysm.name, "reports": {k: r.to_json() for k, r in results.items()}}, args.out)
    return EX_OK


def cmd_operators(args) -> int:
    sysm = _resolve(args)
    ops = args.operator or list(OPERATORS)
    region = args.region or sysm.region
    reps = {op: sign_scan(sysm.field, op, region, args.resolution) for op in ops}
    if args.grid_csv:
        if len(ops) != 1:
            raise UsageError("--grid-csv needs exactly one --operator")
        reps[ops[0]].to_csv(_out_path(args.grid_csv))
    _emit_json({"system": sysm.field.label or sysm.name, "scans": {k: r.to_json() for k, r in reps.items()}}, args.out)
    return EX_OK


def cmd_transform(args) -> int:
    sysm = _resolve(args)
    if sysm.spec is None:
        raise FieldError("transform needs a Liénard system")
    tr = conti_filippov(sysm.spec, x_max=args.x_max, n=args.n)
    sys.stderr.write(f"normalization: {tr.normalization}\n")
    _emit_rows(["u", "x", "F_hat", "phi"], tr.rows(), args.out)
    return EX_OK


def cmd_portrait(args) -> int:
    sysm = _resolve(args)
    xmin, xmax, ymin, ymax = args.region or sysm.region
    X, Y = np.meshgrid(np.linspace(xmin, xmax, args.resolution), np.linspace(ymin, ymax, args.resolution))
    P, Q = sysm.field.rhs_array(X, Y)
    _emit_rows(["x", "y", "P", "Q"], zip(X.ravel(), Y.ravel(), P.ravel(), Q.ravel()), args.out)
    return EX_OK


# ---------------------------------------------------------------------------


def self_test(stream=None) -> int:
    """Check every gallery entry; returns the number of mismatches."""
    stream = stream or sys.stdout
    failures = 0

    def line(ok, name, what, detail=""):
        nonlocal failures
        failures += not ok
        stream.write(f"[{'PASS' if ok else 'FAIL'}] {name}: {what} {detail}\n")

    for s in gallery():
        scan = _scan(s, None, None)
        cyc = scan.cycles
        if s.expected_cycles is not None:
            line(len(cyc) == s.expected_cycles, s.name, "cycle count", f"found {len(cyc)}, expected {s.expected_cycles}")
        if s.expected_center:
            line(scan.continuum, s.name, "center region", str(scan.center_regions))
        if s.expected_radii is not None and len(cyc) == len(s.expected_radii):
            radii = sorted(float(np.mean(c.radii)) for c in cyc)
            ok = all(abs(a - b) < 1e-6 for a, b in zip(radii, s.expected_radii))
            line(ok, s.name, "radii", " ".join(f"{r:.9f}" for r in radii))
        if s.expected_stability is not None and len(cyc) == len(s.expected_stability):
            st = [c.stability for c in sorted(cyc, key=lambda c: np.mean(c.radii))]
            line(st == s.expected_stability, s.name, "stability", ",".join(st))
        reps = _run_checks(s, list(s.expected_checks), None, 101)
        for thm, want in s.expected_checks.items():
            r = reps.get(thm)
            got = None if r is None else (r.conclusion if want == "not_applicable" else r.status)
            line(got == want, s.name, thm, f"got {got}, expected {want}")
    stream.write(f"self-test: {failures} mismatch(es)\n")
    return failures


_TUPLE_FLAGS = ("--from", "--region", "--y-range", "--coef")
_NUMERIC = re.compile(r"^-\.?\d")


def _join_negative_values(argv):
    """Let ``--region -2:2:-2:2`` through; argparse would read it as a flag."""
    out, it = [], iter(argv)
    for a in it:
        if a in _TUPLE_FLAGS:
            nxt = next(it, None)
            if nxt is not None and _NUMERIC.match(nxt):
                out.append(f"{a}={nxt}")
                continue
            out.append(a)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(a)
    return out


def run(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except UsageError:
        return EX_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.self_test or args.command == "self-test":
        return EX_OK if self_test() == 0 else EX_PRECONDITION
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EX_USAGE
    handler = globals()[f"cmd_{args.command}"]
    try:
        return handler(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"limcycles: error: {e}\n")
        return EX_USAGE
    except (InconsistentStabilityError, criteria.FamilyMismatchError) as e:
        sys.stderr.write(f"limcycles: inconsistency: {e}\n")
        return EX_INCONSISTENT
    except (FieldError, TransformError, ParseError, SingularityError, criteria.FamilyError, ValueError, KeyError, OSError) as e:
        sys.stderr.write(f"limcycles: {type(e).__name__}: {e}\n")
        return EX_PRECONDITION


def main() -> None:
    sys.exit(run())
