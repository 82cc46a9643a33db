"""Command-line interface.

Every subcommand builds an :class:`~starshare.io.OutputTable` whose
metadata echoes the full effective configuration, so a run can be
repeated with ``--config`` pointing at that echo.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import experiments, model
from .experiments import Axis, SweepSpec, parse_angle
from .io import OutputTable, emit_table, render_heatmap, render_table
from .model import DomainError, ProtocolConfig
from .noise import NoiseModel
from .oracle import MAX_TENSOR_BRANCHES, full_tensor_S, oracle_S

log = logging.getLogger("starshare")

COMMANDS = ("threshold", "sequence", "svalue", "max-rounds", "sweep", "compare", "tradeoff", "verify")
FORMATS = ("csv", "json", "svg")
# never echoed into metadata: they name files, not computations
_NOT_ECHOED = {"out", "config", "command"}


class UsageError(Exception):
    pass


def _angle(text):
    try:
        return parse_angle(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def _int_range(text):
    try:
        lo, hi = (int(v) for v in str(text).split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    return f"{lo}:{hi}"


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("output and configuration")
    g.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    g.add_argument("--format", choices=FORMATS, default="csv", help="output format (default: csv)")
    g.add_argument("--seed", type=int, default=42, help="random seed (default: 42)")
    g.add_argument("--config", metavar="PATH", help="JSON file of option values; flags override it")
    g.add_argument("--convention", choices=("pi2", "pi4"), default="pi2",
                   help="canonical Bob angle: 2theta+delta = pi/2 (pi2) or pi/4 (pi4)")
    g.add_argument("--tolerance", type=float, default=model.VIOLATION_TOL,
                   help="relative tolerance on S-2 for counting a violation (default: 1e-12)")
    return common


def _state_options(p: argparse.ArgumentParser, *, many: bool = False) -> None:
    p.add_argument("--theta", type=_angle, help="state angle in (0, pi/4]; accepts pi notation")
    p.add_argument("--concurrence", type=float, nargs="+" if many else None,
                   help="concurrence sin(2theta), alternative to --theta")
    p.add_argument("--delta", type=_angle, help="Bob's angle (default: canonical for --convention)")
    p.add_argument("--epsilon", type=float, default=model.DEFAULT_EPSILON, help="slack (default: 1e-10)")
    p.add_argument("--alpha1", type=float, default=model.DEFAULT_ALPHA1,
                   help="initial coin bias (default: 1e-10)")
    p.add_argument("--noise", default="none", choices=("none", "depolarizing", "damping"),
                   help="noise on the initial states (default: none)")
    p.add_argument("--p", type=float, default=0.0, help="noise strength (default: 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starshare",
        description="Sequential nonlocality sharing in n-star quantum networks.",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = _common()

    p = sub.add_parser("threshold", parents=[common], help="threshold concurrence C(k)")
    p.add_argument("--k", type=int, nargs="+", default=[2], help="target rounds (default: 2)")
    p.add_argument("--concurrence", type=float, nargs="+",
                   help="instead report the largest k with C > C(k)")

    p = sub.add_parser("sequence", parents=[common], help="coin-bias sequence alpha_j")
    _state_options(p)
    p.add_argument("--k", type=int, default=5, help="rounds to construct (default: 5)")

    p = sub.add_parser("svalue", parents=[common], help="Bell value S_n^{m,j}")
    _state_options(p)
    p.add_argument("--n", type=int, default=2, help="branches (default: 2)")
    p.add_argument("--m", type=int, help="shared branches (default: n)")
    p.add_argument("--j", type=int, default=1, help="round (default: 1)")
    p.add_argument("--alphas", type=float, nargs="+", help="explicit coin biases instead of the construction")
    p.add_argument("--oracle", action="store_true", help="also evaluate the density-matrix oracle")

    p = sub.add_parser("max-rounds", parents=[common], help="rounds shared on every branch")
    _state_options(p, many=True)
    p.add_argument("--cap", type=int, default=10, help="largest round examined (default: 10)")

    p = sub.add_parser("sweep", parents=[common], help="grid of maximum sharing rounds")
    _state_options(p)
    p.add_argument("--axis1", default=f"theta:0.3:0.785:{experiments.DEFAULT_ANGLE_POINTS}",
                   help="NAME:START:STOP:COUNT (default: theta:0.3:0.785:181)")
    p.add_argument("--axis2", default=f"delta:0:pi/4:{experiments.DEFAULT_ANGLE_POINTS}",
                   help="second axis or 'none' (default: delta:0:pi/4:181)")
    p.add_argument("--cap", type=int, default=experiments.DEFAULT_ROUND_CAP,
                   help=f"round cap (default: {experiments.DEFAULT_ROUND_CAP})")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    p.add_argument("--both-conventions", action="store_true",
                   help="write pi2 and pi4 variants next to --out")

    p = sub.add_parser("compare", parents=[common], help="PPM against unsharp measurements")
    p.add_argument("--theta", type=_angle, default=math.pi / 4 - 0.01, help="default: pi/4 - 0.01")
    p.add_argument("--epsilon", type=float, default=1e-2, help="default: 1e-2")
    p.add_argument("--alpha1", type=float, default=1e-10, help="default: 1e-10")
    p.add_argument("--omega", type=_angle, default=math.pi / 4 * 1e-7, help="default: (pi/4) * 1e-7")
    p.add_argument("--k", type=int, default=5, help="default: 5")

    p = sub.add_parser("tradeoff", parents=[common], help="depth-breadth trade-off table")
    p.add_argument("--n-range", type=_int_range, default="2:6", help="LO:HI inclusive (default: 2:6)")
    p.add_argument("--k-range", type=_int_range, default="2:5", help="LO:HI inclusive (default: 2:5)")
    p.add_argument("--epsilon", type=float, default=model.DEFAULT_EPSILON, help="default: 1e-10")
    p.add_argument("--alpha1", type=float, default=1e-8, help="default: 1e-8")

    p = sub.add_parser("verify", parents=[common], help="closed forms against the oracle")
    p.add_argument("--samples", type=int, default=200, help="samples per noise model (default: 200)")
    return parser


def _load_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse_invocation(argv=None) -> argparse.Namespace:
    """Parse and validate; usage errors exit with status 2."""
    parser = build_parser()
    args = parser.parse_args(argv)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    if args.config:
        try:
            config = _load_config(args.config)
        except UsageError as exc:
            subparser.error(str(exc))
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(config) - known)
        if unknown:
            subparser.error(f"unknown config keys: {', '.join(unknown)}")
        config.pop("config", None)
        subparser.set_defaults(**config)
        args = parser.parse_args(argv)
    if args.format == "svg" and args.command != "sweep":
        subparser.error("--format svg is only available for sweep")
    if args.format == "svg" and not args.out:
        subparser.error("--format svg needs --out")
    if getattr(args, "both_conventions", False) and not args.out:
        subparser.error("--both-conventions needs --out")
    return args


def effective_config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED and k != "verbose"}


def _metadata(args, **extra) -> dict:
    meta = {"command": args.command, "config": effective_config(args)}
    meta.update(extra)
    return meta


def _theta_of(args) -> float:
    conc = args.concurrence
    if isinstance(conc, list):
        conc = conc[0]
    if args.theta is not None and conc is not None:
        raise UsageError("give --theta or --concurrence, not both")
    if conc is not None:
        return model.theta_for_concurrence(conc)
    if args.theta is None:
        raise UsageError("--theta or --concurrence is required")
    return args.theta


def _delta_of(args, theta) -> float:
    if args.delta is not None:
        return args.delta
    return model.canonical_delta(theta, args.convention)


def _noise_of(args) -> NoiseModel:
    return NoiseModel.parse(args.noise, args.p)


# ---------------------------------------------------------------------------
# subcommands


def cmd_threshold(args) -> OutputTable:
    if args.concurrence:
        rows = []
        for c in args.concurrence:
            k = model.max_supported_rounds(c)
            rows.append((c, "unbounded" if k == model.UNBOUNDED else k))
        return OutputTable(("concurrence", "max_supported_rounds"), rows, _metadata(args))
    rows = [(k, model.threshold_concurrence(k)) for k in args.k]
    return OutputTable(("k", "C"), rows, _metadata(args))


def cmd_sequence(args) -> OutputTable:
    theta = _theta_of(args)
    delta = _delta_of(args, theta)
    noise = _noise_of(args)
    seq = model.build_alpha_sequence(theta, delta, args.epsilon, args.alpha1, args.k, noise)
    rows = []
    for j in range(1, args.k + 1):
        bound = model.alpha_lower_bound(j, theta, delta, seq.survival(j), noise,
                                        log_p=seq.log_survival(j))
        rows.append((j, seq.alpha(j), seq.survival(j), bound.value, j <= seq.feasible_through))
    meta = _metadata(args, theta=theta, delta=delta, feasible_through=seq.feasible_through)
    return OutputTable(("j", "alpha", "P", "lower_bound", "feasible"), rows, meta)


def cmd_svalue(args) -> OutputTable:
    theta = _theta_of(args)
    delta = _delta_of(args, theta)
    noise = _noise_of(args)
    m = args.n if args.m is None else args.m
    if args.alphas:
        seq = model.AlphaSequence.from_alphas(args.alphas)
    else:
        seq = model.build_alpha_sequence(theta, delta, args.epsilon, args.alpha1, args.j, noise)
    value = model.closed_form_S(args.n, m, args.j, theta, delta, seq, noise)
    columns = ["n", "m", "j", "S", "I_n", "J_n", "excess", "violates"]
    row = [args.n, m, args.j, value.s, value.i_n, value.j_n, value.excess, value.violates(args.tolerance)]
    if args.oracle:
        cfg = ProtocolConfig(args.n, m, max(args.j, 1), theta, delta, noise=noise)
        columns.append("S_oracle")
        row.append(oracle_S(cfg, seq, args.j).s)
        if args.n <= MAX_TENSOR_BRANCHES:
            columns.append("S_full_tensor")
            row.append(full_tensor_S(cfg, seq, args.j).s)
    return OutputTable(tuple(columns), [tuple(row)], _metadata(args, theta=theta, delta=delta))


def cmd_max_rounds(args) -> OutputTable:
    concs = args.concurrence or [None]
    if args.theta is not None and args.concurrence:
        raise UsageError("give --theta or --concurrence, not both")
    if args.theta is None and not args.concurrence:
        raise UsageError("--theta or --concurrence is required")
    noise = _noise_of(args)
    rows = []
    for c in concs:
        theta = args.theta if c is None else model.theta_for_concurrence(c)
        delta = _delta_of(args, theta)
        rounds = model.max_rounds(theta, delta, args.epsilon, args.alpha1, noise, args.cap, args.tolerance)
        conc = model.concurrence_pure(theta)
        supported = model.max_supported_rounds(conc)
        rows.append((conc, theta, delta, rounds,
                     "unbounded" if supported == model.UNBOUNDED else supported))
    columns = ("concurrence", "theta", "delta", "max_rounds", "threshold_rounds")
    return OutputTable(columns, rows, _metadata(args))


def sweep_spec(args, convention=None) -> SweepSpec:
    axis2 = None if str(args.axis2).lower() == "none" else Axis.parse(args.axis2)
    return SweepSpec(
        axis1=Axis.parse(args.axis1),
        axis2=axis2,
        noise=args.noise,
        theta=args.theta,
        delta=args.delta,
        p=args.p,
        epsilon=args.epsilon,
        alpha1=args.alpha1,
        convention=convention or args.convention,
        cap=args.cap,
        tol=args.tolerance,
    )


def sweep_table(spec: SweepSpec, records, meta) -> OutputTable:
    cap = spec.cap
    columns = list(spec.axis_names) + ["max_rounds"]
    columns += [f"S_{j}" for j in range(1, cap + 1)]
    columns += [f"excess_{j}" for j in range(1, cap + 1)]
    columns.append("note")
    rows = [
        (*r.coords, r.max_rounds, *r.s_per_round, *r.excess_per_round, r.note)
        for r in records
    ]
    return OutputTable(tuple(columns), rows, meta)


def _variant_path(out: str, convention: str) -> Path:
    path = Path(out)
    return path.with_name(f"{path.stem}.{convention}{path.suffix}")


def cmd_sweep(args):
    conventions = ("pi2", "pi4") if args.both_conventions else (args.convention,)
    outputs = []
    for conv in conventions:
        spec = sweep_spec(args, conv)
        log.info("sweeping %d cells (%s)", len(experiments.grid_cells(spec)), conv)
        records = experiments.sweep_max_rounds(spec, workers=args.workers)
        meta = _metadata(args, sweep=spec.describe())
        path = _variant_path(args.out, conv) if args.both_conventions else args.out
        if args.format == "svg":
            labels = spec.axis_names + ("",) * (2 - len(spec.axis_names))
            render_heatmap(records, path, labels,
                           title=f"max sharing rounds, noise={spec.noise}, {conv}")
            outputs.append((path, None))
        else:
            outputs.append((path, sweep_table(spec, records, meta)))
    return outputs


def cmd_compare(args) -> OutputTable:
    result = experiments.compare_protocols(args.theta, args.epsilon, args.alpha1, args.omega, args.k,
                                           args.tolerance)
    rows = [(r.j, r.s_ppm, r.s_unsharp, r.excess_ppm, r.excess_unsharp,
             r.ppm_violates, r.unsharp_violates) for r in result.records]
    columns = ("j", "S_ppm", "S_unsharp", "excess_ppm", "excess_unsharp",
               "ppm_violates", "unsharp_violates")
    if result.note:
        log.warning(result.note)
    return OutputTable(columns, rows, _metadata(args, note=result.note))


def cmd_tradeoff(args) -> OutputTable:
    n_lo, n_hi = (int(v) for v in args.n_range.split(":"))
    k_lo, k_hi = (int(v) for v in args.k_range.split(":"))
    report = experiments.tradeoff_report(range(n_lo, n_hi + 1), range(k_lo, k_hi + 1),
                                         args.epsilon, args.alpha1)
    rows = []
    for block in report.blocks:
        for pt in block.points:
            rows.append((block.n, block.k, pt.m, pt.j, pt.achievable, pt.s, pt.excess,
                         (pt.m, pt.j) in block.boundary))
    columns = ("n", "k", "m", "j", "achievable", "S", "excess", "boundary")
    return OutputTable(columns, rows, _metadata(args, shape_ok=report.shape_ok))


def cmd_verify(args) -> OutputTable:
    report = experiments.verify_closed_forms(args.seed, args.samples)
    rows = [(r.noise, r.samples, r.max_closed_vs_oracle, r.tensor_samples, r.max_oracle_vs_tensor)
            for r in report.rows]
    columns = ("noise", "samples", "max_closed_vs_oracle", "tensor_samples", "max_oracle_vs_tensor")
    meta = _metadata(args, passed=report.passed, closed_tol=report.closed_tol,
                     tensor_tol=report.tensor_tol)
    return OutputTable(columns, rows, meta)


HANDLERS = {
    "threshold": cmd_threshold,
    "sequence": cmd_sequence,
    "svalue": cmd_svalue,
    "max-rounds": cmd_max_rounds,
    "compare": cmd_compare,
    "tradeoff": cmd_tradeoff,
    "verify": cmd_verify,
}


def _write(table: OutputTable, fmt: str, out) -> None:
    if out:
        emit_table(table, fmt, out)
    else:
        sys.stdout.write(render_table(table, fmt))


def run(args) -> int:
    if args.command == "sweep":
        for path, table in cmd_sweep(args):
            if table is not None:
                _write(table, args.format, path)
            log.info("wrote %s", path)
        return 0
    table = HANDLERS[args.command](args)
    _write(table, args.format, args.out)
    if args.command == "verify" and not table.metadata["passed"]:
        print("verification FAILED", file=sys.stderr)
        return 1
    if args.command == "tradeoff" and not table.metadata["shape_ok"]:
        print("trade-off boundary does not satisfy m + j = n + k - 1", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    args = parse_invocation(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return run(args)
    except (UsageError, DomainError) as exc:
        print(f"starshare {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"starshare {args.command}: {exc}", file=sys.stderr)
        return 1
