"""Command-line front end.

Every subcommand prints JSON (default) or CSV on standard output.  Progress
messages go to standard error.  Exit status is 2 for bad flags and 1 for
computational failures such as an infeasible graph or a size limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import analysis
from .chain import coupling_time_test, exact_theta_moments, max_correlation
from .counting import count_matchings, log_count_matchings
from .graph import BandSpec, GraphFormatError, SizeLimitError, permanent_ryser, read_graph
from .optprob import solve_opt_probs, table3
from .sampler import SAMPLERS, NoPerfectMatchingError, estimate_count
from .states import enumerate_states

EXACT_DECIMAL_MAX_N = 20_000


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _add_band(p: argparse.ArgumentParser, n: bool = True, required: bool = True) -> None:
    p.add_argument("--s", type=_positive, required=required, help="left band width")
    p.add_argument("--t", type=_positive, required=required, help="right band width")
    if n:
        p.add_argument("--n", type=_positive, required=required, help="number of vertices per side")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--workers", type=_positive, default=1, help="worker processes")
    common.add_argument("--seed", type=_seed, default=0, help="64-bit seed (default 0)")

    parser = argparse.ArgumentParser(prog="bandsis", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", parents=[common], help="exact number of perfect matchings")
    _add_band(p, required=False)
    p.add_argument("--graph", metavar="FILE", help="general bipartite graph (uses the permanent)")

    p = sub.add_parser("estimate", parents=[common], help="importance-sampling estimate")
    _add_band(p, required=False)
    p.add_argument("--graph", metavar="FILE", help="general bipartite graph")
    p.add_argument("--sampler", choices=SAMPLERS, default="uniform")
    p.add_argument("--samples", type=_positive, default=10_000)

    p = sub.add_parser("moments", parents=[common], help="exact moments of log rho")
    _add_band(p)

    p = sub.add_parser("optprobs", parents=[common], help="optimal forward probabilities")
    p.add_argument("--t", type=_positive, help="number of probabilities")
    p.add_argument("--table", action="store_true", help="all rows t = 1..9")

    p = sub.add_parser("tables", parents=[common], help="reference tables")
    p.add_argument("--which", choices=("1", "2", "3", "mcmc"), required=True)
    p.add_argument("--n-big", type=_positive, default=2048, help="differencing size for table 1")

    p = sub.add_parser("clt", parents=[common], help="normality check of the forced-move count")
    _add_band(p)
    p.add_argument("--samples", type=_positive, default=100_000)

    p = sub.add_parser("diag", parents=[common], help="chain diagnostics")
    p.add_argument("what", choices=("corr", "states", "coupling", "crossover", "naive"))
    _add_band(p, required=False)
    p.add_argument("--trials", type=_positive, default=1000, help="coupling trials")
    return parser


# -- output ----------------------------------------------------------------------


def _cell(v):
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v)
    return v


def render(payload, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2)
    rows = payload if isinstance(payload, list) else [payload]
    header: list[str] = []
    for r in rows:
        header += [k for k in r if k not in header]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _cell(v) for k, v in r.items()})
    return buf.getvalue().rstrip("\n")


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


# -- subcommands -------------------------------------------------------------------


def _band(args, parser) -> BandSpec:
    missing = [f"--{k}" for k in ("s", "t", "n") if getattr(args, k, None) is None]
    if missing:
        parser.error(f"{args.command}: missing {', '.join(missing)}")
    return BandSpec(args.s, args.t, args.n)


def _target(args, parser):
    if args.graph is not None:
        if any(getattr(args, k) is not None for k in ("s", "t", "n")):
            parser.error("--graph cannot be combined with --s/--t/--n")
        return read_graph(args.graph)
    return _band(args, parser)


def cmd_count(args, parser):
    target = _target(args, parser)
    if isinstance(target, BandSpec):
        if target.n > EXACT_DECIMAL_MAX_N:
            raise SizeLimitError(f"exact count limited to n <= {EXACT_DECIMAL_MAX_N}")
        count = count_matchings(target)
        head = {"s": target.s, "t": target.t, "n": target.n}
    else:
        count = permanent_ryser(target)
        head = {"s": None, "t": None, "n": target.n_left}
    log_count = math.log(count) if count else -math.inf
    return head | {"count_decimal": str(count), "log_count": log_count}


def cmd_estimate(args, parser):
    target = _target(args, parser)
    _progress(f"drawing {args.samples} samples with {args.workers} worker(s)")
    est = estimate_count(args.sampler, target, args.samples, args.seed, args.workers)
    if isinstance(target, BandSpec):
        head = {"s": target.s, "t": target.t, "n": target.n}
    else:
        head = {"s": None, "t": None, "n": target.n_left}
    return head | {"sampler": args.sampler, "seed": args.seed} | est.to_json()


def cmd_moments(args, parser):
    return exact_theta_moments(_band(args, parser)).to_json()


def _opt_row(t: int) -> dict:
    probs = solve_opt_probs(t)
    return {"t": t} | {f"p{k + 1}": v for k, v in enumerate(probs.p)}


def cmd_optprobs(args, parser):
    if args.table:
        return [{"t": t} | {f"p{k + 1}": v for k, v in enumerate(row)} for t, row in enumerate(table3(), 1)]
    if args.t is None:
        parser.error("optprobs: give --t T or --table")
    return _opt_row(args.t)


def cmd_tables(args, parser):
    if args.which == "1":
        _progress("computing growth constants")
        return [
            {"s": s, "t": t, "c": c, "d": d}
            for s, t, c, d in analysis.table1(n_big=args.n_big)
        ]
    if args.which == "2":
        _progress("computing sample-size table")
        return [vars(r) | {} for r in analysis.table2().rows]
    if args.which == "3":
        return cmd_optprobs(argparse.Namespace(table=True), parser)
    return [{"n": n, "log_mcmc_reference": analysis.mcmc_reference(n)} for n in analysis.TABLE2_N]


def cmd_clt(args, parser):
    spec = _band(args, parser)
    _progress(f"drawing {args.samples} uniform matchings")
    return analysis.clt_check(spec, args.samples, args.seed, args.workers).to_json()


def cmd_diag(args, parser):
    if args.what == "states":
        if args.s is None or args.t is None:
            parser.error("diag states: missing --s/--t")
        return enumerate_states(args.s, args.t).to_json()
    if args.what == "crossover":
        if args.s is None or args.t is None:
            parser.error("diag crossover: missing --s/--t")
        return analysis.crossover_N_star((args.s, args.t)).to_json()
    spec = _band(args, parser)
    if args.what == "corr":
        return max_correlation(spec).to_json()
    if args.what == "naive":
        log_naive, log_el = analysis.naive_variance_comparison(spec)
        return {"s": spec.s, "t": spec.t, "n": spec.n, "log_N_naive": log_naive, "log_N_eL": log_el}
    rep = coupling_time_test(spec, args.seed, args.trials)
    return {
        "s": spec.s,
        "t": spec.t,
        "n": spec.n,
        "trials": len(rep.delays),
        "mean_square": rep.mean_square,
        "bound": rep.bound,
        "epsilon_kernel": rep.epsilon_kernel,
        "tail_probability": rep.tail_probability,
    }


COMMANDS = {
    "count": cmd_count,
    "estimate": cmd_estimate,
    "moments": cmd_moments,
    "optprobs": cmd_optprobs,
    "tables": cmd_tables,
    "clt": cmd_clt,
    "diag": cmd_diag,
}

COMPUTATIONAL_ERRORS = (
    ValueError,
    ArithmeticError,
    OSError,
    GraphFormatError,
    NoPerfectMatchingError,
    SizeLimitError,
)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        payload = COMMANDS[args.command](args, parser)
    except SystemExit as exc:  # argparse reports flag errors this way
        return int(exc.code or 0)
    except COMPUTATIONAL_ERRORS as exc:
        print(f"bandsis: error: {exc}", file=sys.stderr)
        return 1
    print(render(payload, args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
