"""Command-line interface.

Every command emits one table: CSV (header row, LF endings, 9 significant
digits) or a JSON object ``{inputs, regime, result, verification}``.
Exit codes: 0 success, 1 usage error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from .extremals import (
    ThreeControlExtremal,
    TwoControlExtremal,
    controls,
    costate,
    propagate_costate,
    verify_pmp,
)
from .frontline import critical_curve, frontline_sample
from .oracle import brute_diameter, brute_min_time, verify_solution
from .solver import diagonal_min_time, diagonal_target, diameter, min_time, swap_min_time, trajectory_xy
from .su2 import DiskPoint, Mode, ModelParams

REFERENCE_DIAMETERS = [
    ("three", 3.0, 1.0, 2.0 * math.pi / 3.0),
    ("three", 1.0, 1.0, 2.0 * math.pi),
    ("three", 1.0, 3.0, 4.0 * math.pi / 3.0),
    ("two", 3.0, 1.0, 2.0 * math.pi / 3.0),
    ("two", 1.0, 1.2, 4.8 * math.pi / 2.44),
    ("two", 1.0, 2.0, 0.5 * math.pi * (1.0 + math.sqrt(5.0))),
]


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# formatting --------------------------------------------------------------


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return format(float(v) + 0.0, ".9g")  # no "-0"
    if v is None:
        return ""
    return str(v)


def jsonable(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {k: jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    return v


def render(args, columns, rows, regime=None, verification=None) -> str:
    if args.format == "json":
        doc = {
            "inputs": jsonable({k: v for k, v in vars(args).items() if k not in ("func", "out", "format")}),
            "regime": regime,
            "result": [jsonable(dict(zip(columns, r))) for r in rows],
            "verification": jsonable(verification),
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def emit(args, text: str):
    if args.out in (None, "-"):
        sys.stdout.write(text)
        return
    # write-then-rename so a partial file never appears at the target path
    d = os.path.dirname(os.path.abspath(args.out))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".su2time-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, args.out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# argument parsing --------------------------------------------------------


def model(args) -> ModelParams:
    try:
        return ModelParams(args.omega0, args.gamma, args.mode)
    except ValueError as e:
        raise UsageError(str(e)) from None


def parse_target(spec: str) -> tuple[str, DiskPoint, float | None]:
    """Returns (kind, point, lambda); kind is 'point', 'diag' or 'swap'."""
    s = spec.strip().lower()
    try:
        if s == "swap":
            return "swap", DiskPoint(0.0, 0.0), None
        if s.startswith("diag:"):
            lam = float(s[5:])
            return "diag", diagonal_target(lam), lam
        if s.startswith("polar:"):
            r, psi = (float(v) for v in s[6:].split(","))
            if not 0.0 <= r <= 1.0:
                raise ValueError("radius must lie in [0, 1]")
            return "point", DiskPoint.polar(r, psi), None
        x, y = (float(v) for v in s.split(","))
        return "point", DiskPoint(x, y), None
    except ValueError as e:
        raise UsageError(f"bad target {spec!r}: {e}") from None


def parse_range(spec: str) -> np.ndarray:
    parts = spec.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) == 3:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError("count must be >= 1")
            return np.linspace(lo, hi, n)
    except ValueError as e:
        raise UsageError(f"bad range {spec!r}: {e}") from None
    raise UsageError(f"bad range {spec!r}: expected VALUE or LO:HI:N")


# commands ----------------------------------------------------------------


def cmd_solve(args) -> int:
    mp = model(args)
    kind, target, lam = parse_target(args.target)
    if kind == "swap":
        sol = swap_min_time(mp)
    elif kind == "diag":
        sol = diagonal_min_time(lam, mp)
    else:
        sol = min_time(target, mp)
    rep = verify_solution(sol, target, mp)
    cols = ["t_f", "param", "phi", "regime", "residual", "closed_form_residual",
            "replay_residual", "oracle_t_hat", "verified"]
    row = [sol.t_f, sol.param, sol.phi, sol.regime.value, sol.residual, rep.closed_form_residual,
           rep.replay_residual, rep.oracle_t_hat, rep.passed]
    emit(args, render(args, cols, [row], mp.regime.value, rep.as_dict()))
    if not rep.passed:
        print("verification failed: " + ", ".join(rep.failed), file=sys.stderr)
        return 2
    return 0


def cmd_diameter(args) -> int:
    mp = model(args)
    d = diameter(mp)
    cols = ["t_max", "worst_x", "worst_y", "worst_param", "regime", "open_limit"]
    row = [d.t_max, d.worst_point.x, d.worst_point.y, d.worst_param, d.regime.value, d.open_limit]
    emit(args, render(args, cols, [row], mp.regime.value))
    return 0


def cmd_frontline(args) -> int:
    mp = model(args)
    if args.time is None or args.time < 0.0:
        raise UsageError("--time must be given and non-negative")
    fl = frontline_sample(mp, args.time, args.n, full=not args.admissible_only)
    rows = [[p, x, y, bool(f)] for p, x, y, f in zip(fl.params, fl.x, fl.y, fl.flags)]
    emit(args, render(args, ["param", "x", "y", "admissible"], rows, mp.regime.value))
    return 0


def cmd_trajectory(args) -> int:
    mp = model(args)
    if args.param is None:
        raise UsageError("--param is required")
    if args.time is None or args.time < 0.0:
        raise UsageError("--time must be given and non-negative")
    try:
        if mp.mode is Mode.THREE:
            e = ThreeControlExtremal(args.param, args.phi)
        else:
            e = TwoControlExtremal(args.param, args.phi)
    except ValueError as err:
        raise UsageError(str(err)) from None
    ts = np.linspace(0.0, args.time, args.n)
    xs, ys = trajectory_xy(e.alpha if mp.mode is Mode.THREE else e.omega, mp, ts)
    rows = []
    for t, x, y in zip(ts, np.broadcast_to(xs, ts.shape), np.broadcast_to(ys, ts.shape)):
        u = controls(e, mp, float(t))
        rows.append([t, x, y, u.ux, u.uy, u.uz])
    emit(args, render(args, ["t", "x", "y", "ux", "uy", "uz"], rows, mp.regime.value))
    return 0


def cmd_sweep(args) -> int:
    gammas = parse_range(args.gamma_range)
    omegas = parse_range(args.omega0_range)
    rows = []
    for g in gammas:
        for w in omegas:
            try:
                mp = ModelParams(float(w), float(g), args.mode)
            except ValueError as e:
                raise UsageError(str(e)) from None
            rows.append([g, w, mp.regime.value, sweep_value(mp, args.quantity)])
    emit(args, render(args, ["gamma", "omega0", "regime", args.quantity], rows))
    return 0


def sweep_value(mp: ModelParams, quantity: str) -> float:
    if quantity == "diameter":
        return diameter(mp).t_max
    curve = critical_curve(mp)
    if curve is None:
        return math.nan
    return curve.t_domain[1] if quantity == "tc" else curve.param_c


# verification suites -----------------------------------------------------


def suite_table1():
    out = []
    for mode, g, w, ref in REFERENCE_DIAMETERS:
        mp = ModelParams(w, g, mode)
        tag = f"{mode},{g:g},{w:g}"
        t = diameter(mp).t_max
        out.append(("table1", f"closed_form[{tag}]", t, ref, 1e-12, abs(t - ref) <= 1e-12))
        tb = brute_diameter(mp)
        out.append(("table1", f"oracle[{tag}]", tb, ref, 0.02, abs(tb - ref) <= 0.02))
    return out


def suite_examples():
    out = []
    cases = [
        ("swap", "two", 1.0, 0.0, "swap", math.pi, 1e-8),
        # lambda is truncated at 8 digits; t_f moves by about 1e-7 per 1e-7 in lambda
        ("diag", "two", 1.0, 0.0, "diag:1.5707963", 5.44139809, 1e-7),
        # exact collapse point; the 7-digit rounding lies inside the disk and is reached earlier
        ("point", "three", 3.0, 1.0, "-0.5,0.86602540378443865", 2.09439510, 1e-8),
    ]
    for _, mode, g, w, spec, ref, tol in cases:
        mp = ModelParams(w, g, mode)
        kind, target, lam = parse_target(spec)
        sol = {"swap": lambda: swap_min_time(mp), "diag": lambda: diagonal_min_time(lam, mp)}.get(
            kind, lambda: min_time(target, mp))()
        rep = verify_solution(sol, target, mp)
        out.append(("examples", f"solve[{mode},{g:g},{w:g},{spec}]", sol.t_f, ref, tol,
                    abs(sol.t_f - ref) <= tol and rep.passed))
    for mode, g, w, ref in [("three", 1.0, 3.0, 4.18879020), ("two", 1.0, 2.0, 5.08320369),
                            ("two", 1.0, 1.2, 4.8 * math.pi / 2.44)]:
        t = diameter(ModelParams(w, g, mode)).t_max
        out.append(("examples", f"diameter[{mode},{g:g},{w:g}]", t, ref, 1e-8, abs(t - ref) <= 1e-8))
    hit = brute_min_time(DiskPoint(-0.5, 0.866025), ModelParams(1.0, 3.0, "three"))
    out.append(("examples", "oracle[three,3,1,(-0.5,0.866025)]", hit.t_hat, 2.0944, 0.002,
                abs(hit.t_hat - 2.0944) <= 0.002))
    hit = brute_min_time(DiskPoint(0.0, 0.0), ModelParams(2.0, 1.0, "two"))
    out.append(("examples", "oracle[two,1,2,(0,0)]", hit.t_hat, math.pi, 0.002,
                abs(hit.t_hat - math.pi) <= 0.002 and abs(hit.param_hat - 2.0) <= 0.05))
    return out


def suite_pmp(n: int = 100, seed: int = 7):
    rng = np.random.default_rng(seed)
    out = []
    for mode in ("three", "two"):
        worst_law = worst_bz = 0.0
        for _ in range(n):
            g = float(rng.uniform(0.5, 3.0))
            w = float(rng.uniform(-3.0, 3.0))
            mp = ModelParams(w, g, mode)
            if mode == "three":
                e = ThreeControlExtremal(float(rng.uniform(-0.99, 0.99)), float(rng.uniform(0, 2 * math.pi)))
            else:
                e = TwoControlExtremal(w + float(rng.uniform(-4.0, 4.0)), float(rng.uniform(0, 2 * math.pi)))
            t_end = 2.0 * math.pi / g
            worst_law = max(worst_law, verify_pmp(e, mp, np.linspace(0.0, t_end, 50)))
            c = costate(e, mp, 0.0)
            traj = propagate_costate((c.bx, c.by, c.bz), mp, t_end, 2000)
            worst_bz = max(worst_bz, float(np.max(np.abs(traj[:, 2] - c.bz))))
        out.append(("pmp", f"control_law[{mode}]", worst_law, 0.0, 1e-9, worst_law <= 1e-9))
        out.append(("pmp", f"bz_constant[{mode}]", worst_bz, 0.0, 1e-12, worst_bz <= 1e-12))
    return out


SUITES = {"table1": suite_table1, "examples": suite_examples, "pmp": suite_pmp}


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    rows = []
    for name in names:
        rows.extend(SUITES[name]())
    cols = ["suite", "check", "value", "expected", "tolerance", "passed"]
    ok = all(r[-1] for r in rows)
    summary = {"passed": ok, "failed": [r[1] for r in rows if not r[-1]]}
    emit(args, render(args, cols, [list(r) for r in rows], None, summary))
    return 0 if ok else 2


# entry point -------------------------------------------------------------


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--out", metavar="PATH", help="output file (default: standard output)")

    model_args = Parser(add_help=False)
    model_args.add_argument("--gamma", type=float, required=True, help="control bound")
    model_args.add_argument("--omega0", type=float, required=True, help="drift frequency")
    model_args.add_argument("--mode", choices=[m.value for m in Mode], required=True)

    p = Parser(prog="su2time", description="Minimum-time control on SU(2).")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    s = sub.add_parser("solve", parents=[model_args, common], help="minimum time to reach a target")
    s.add_argument("--target", required=True,
                   help='"x,y", "polar:r,psi", "diag:LAMBDA" or "swap"')
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("diameter", parents=[model_args, common], help="worst-case minimum time")
    s.set_defaults(func=cmd_diameter)

    s = sub.add_parser("frontline", parents=[model_args, common], help="front line at a given time")
    s.add_argument("--time", type=float, required=True)
    s.add_argument("--n", type=int, default=201)
    s.add_argument("--admissible-only", action="store_true",
                   help="sample only the optimal part instead of flagging the whole curve")
    s.set_defaults(func=cmd_frontline)

    s = sub.add_parser("trajectory", parents=[model_args, common], help="extremal trajectory and controls")
    s.add_argument("--param", type=float, required=True, help="alpha (three) or omega (two)")
    s.add_argument("--phi", type=float, default=0.0)
    s.add_argument("--time", type=float, required=True)
    s.add_argument("--n", type=int, default=201)
    s.set_defaults(func=cmd_trajectory)

    s = sub.add_parser("verify", parents=[common], help="run verification suites")
    s.add_argument("--suite", choices=["table1", "examples", "pmp", "all"], default="all")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", parents=[common], help="regime maps over parameter ranges")
    s.add_argument("--gamma", dest="gamma_range", required=True, metavar="LO:HI:N")
    s.add_argument("--omega0", dest="omega0_range", required=True, metavar="LO:HI:N")
    s.add_argument("--mode", choices=[m.value for m in Mode], required=True)
    s.add_argument("--quantity", choices=["diameter", "tc", "wc"], default="diameter")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", 2) < 2:
        parser.error("--n must be >= 2")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"su2time: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
