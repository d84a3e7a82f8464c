"""Command-line entry point: ``tezos-reorg {estimate,sweep,compare,simulate,health}``.

Primary output (JSON / CSV / JSON lines) goes to stdout or ``--out``; it is
byte-identical for identical flags regardless of ``--threads``. A run
manifest with the resolved configuration and wall-clock time is written to
stderr and, when ``--out`` is given, next to it as ``<out>.manifest.json``.

Exit status: 0 on success, 2 on usage errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass
from typing import Optional

from . import __version__
from .estimators import METHODS, EnumerationBudgetExceeded, estimate
from .health import DEFAULT_WINDOW, InsufficientHistory, health_trace, read_records, write_events, write_records
from .protocol import ProtocolParams
from .simulation import simulate_chain
from .state import SamplingConfig
from .sweep import IntRange, SweepGrid, compare_designs, read_csv, run_sweep, smooth_grid, write_csv


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seed: Optional[int]
    version: str
    duration_s: float


class UsageError(Exception):
    pass


# -- argument types ------------------------------------------------------------


def _params(text: str) -> ProtocolParams:
    try:
        return ProtocolParams.from_string(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2^64), got {value}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _candidates(text: str) -> list[tuple[int, int, int]]:
    try:
        return [ProtocolParams.from_string(part).design for part in text.split(";") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_range(text: str) -> list[float]:
    parts = [float(p) for p in text.split(":")]
    if len(parts) == 1:
        return parts
    if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
        raise argparse.ArgumentTypeError(f"expected LO:HI:STEP, got {text!r}")
    lo, hi, step = parts
    count = int(round((hi - lo) / step)) + 1
    return [round(lo + i * step, 10) for i in range(count)]


def _grid(text: str) -> dict[str, IntRange]:
    out = {}
    for part in text.split(","):
        key, _, bounds = part.partition("=")
        key = key.strip()
        if key not in ("ei", "de", "dp") or not bounds:
            raise argparse.ArgumentTypeError(f"grid entries look like ei=LO:HI:STEP, got {part!r}")
        try:
            out[key] = IntRange.parse(bounds)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return out


def _check_alpha(alpha: float, allow_zero: bool = False) -> None:
    lo_ok = alpha >= 0.0 if allow_zero else alpha > 0.0
    if not (lo_ok and alpha < 0.5):
        bound = "[0, 0.5)" if allow_zero else "(0, 0.5)"
        raise UsageError(f"--alpha must lie in {bound}, got {alpha}")


# -- subcommands -------------------------------------------------------------


def cmd_estimate(args, out) -> dict:
    _check_alpha(args.alpha)
    if args.alpha_q is not None and args.method != "is":
        raise UsageError("--alpha-q only applies to --method is")
    if args.alpha_q is not None and not args.alpha <= args.alpha_q < 0.5:
        raise UsageError(f"--alpha-q must lie in [alpha, 0.5), got {args.alpha_q}")
    if args.method == "is" and args.target == "mean-cost":
        raise UsageError("--target mean-cost is not available with --method is")
    cfg = SamplingConfig(args.alpha, seed=args.seed)
    res = estimate(
        args.params,
        cfg,
        args.length,
        method=args.method,
        samples=args.samples,
        target=args.target,
        alpha_q=args.alpha_q,
        threads=args.threads,
    )
    out.write(json.dumps(res.to_dict()) + "\n")
    return {"alpha": args.alpha, "length": args.length, "samples": args.samples, "method": args.method,
            "target": args.target, "alpha_q": res.alpha_q, "params": str(args.params)}


def cmd_sweep(args, out) -> dict:
    _check_alpha(args.alpha)
    if not 0.0 <= args.beta <= 1.0:
        raise UsageError(f"--beta must lie in [0, 1], got {args.beta}")
    ranges = {"ei": IntRange(0, 32, 4), "de": IntRange(4, 20, 4), "dp": IntRange(0, 60, 10)}
    ranges.update(args.grid or {})
    if ranges["ei"].lo < 0 or ranges["ei"].hi > 32:
        raise UsageError("ei range must stay within [0, 32]")
    grid = SweepGrid(
        alpha=args.alpha,
        beta=args.beta,
        ei_range=ranges["ei"],
        de_range=ranges["de"],
        dp_range=ranges["dp"],
        n1=args.n1,
        n2=args.n2,
        samples_per_cell=args.samples,
        seed=args.seed,
        extra_points=tuple(args.include or ()),
    )
    cells = run_sweep(grid, threads=args.threads)
    smoothed = None
    if args.smooth is not None:
        if args.include:
            raise UsageError("--smooth needs a rectangular grid; drop --include")
        smoothed = smooth_grid(cells, args.smooth)
    write_csv(cells, out, smoothed)
    return {"alpha": args.alpha, "beta": args.beta, "n1": args.n1, "n2": args.n2, "samples": args.samples,
            "grid": {k: asdict(v) for k, v in ranges.items()}, "include": args.include, "smooth": args.smooth}


def cmd_compare(args, out) -> dict:
    with open(args.from_path) as fh:
        cells = read_csv(fh)
    try:
        report = compare_designs(cells, args.candidates, args.beta_list)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["beta", "candidate", "ratio"])
    for cmp in report:
        for cand, ratio in cmp.ratios.items():
            writer.writerow([f"{cmp.beta:.10g}", "{},{},{}".format(*cand), f"{ratio:.10g}"])
    return {"from": args.from_path, "candidates": args.candidates, "betas": args.beta_list}


def cmd_simulate(args, out) -> dict:
    _check_alpha(args.alpha, allow_zero=True)
    max_attack = args.max_attack if args.max_attack is not None else min(32, args.window - 1)
    try:
        res = simulate_chain(args.params, args.alpha, args.blocks, args.min_attack, max_attack, args.seed, args.window)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_records(res.records, out)
    if args.events:
        with open(args.events, "w") as fh:
            write_events(res.events, fh)
    if args.trace:
        with open(args.trace, "w") as fh:
            _write_trace(res.trace, fh)
    return {"alpha": args.alpha, "blocks": args.blocks, "min_attack": args.min_attack, "max_attack": max_attack,
            "window": args.window, "params": str(args.params), "events": len(res.events)}


def _write_trace(trace, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["slot", "health"])
    for slot, value in trace:
        writer.writerow([slot, repr(float(f"{value:.10g}"))])


def cmd_health(args, out) -> dict:
    if args.window < 2:
        raise UsageError("--window must be >= 2")
    with open(args.chain) as fh:
        records = read_records(fh)
    if len(records) < 2:
        raise InsufficientHistory("health needs at least two chain records")
    _write_trace(health_trace(args.params, records, args.window), out)
    return {"chain": args.chain, "window": args.window, "params": str(args.params), "records": len(records)}


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tezos-reorg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", type=_params, default=ProtocolParams(), metavar="EI,DE,DP",
                        help="protocol design tuple (default 24,8,40)")
    common.add_argument("--threads", type=_positive, default=None, help="worker threads (default: all cores)")
    common.add_argument("--out", default=None, help="write primary output here instead of stdout")

    p = sub.add_parser("estimate", parents=[common], help="probability of a feasible / profitable reorg")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--length", type=_positive, required=True, help="fork length n (blocks on the attacker fork)")
    p.add_argument("--samples", type=_positive, default=10**6)
    p.add_argument("--method", choices=METHODS, default="mc")
    p.add_argument("--target", choices=("feasible", "profitable", "mean-cost"), default="feasible")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--alpha-q", type=float, default=None, help="IS proposal stake (default: heuristic)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", parents=[common], help="objective over a grid of protocol parameters")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--n1", type=_positive, default=20)
    p.add_argument("--n2", type=_positive, default=3)
    p.add_argument("--grid", type=_grid, default=None, metavar="ei=LO:HI:STEP,de=...,dp=...")
    p.add_argument("--include", type=_candidates, default=None, metavar="EI,DE,DP;...",
                   help="extra parameter tuples evaluated on top of the grid")
    p.add_argument("--samples", type=_positive, default=10**5)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--smooth", type=float, default=None, metavar="SIGMA")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", parents=[common], help="ratio of grid optimum to candidate designs")
    p.add_argument("--from", dest="from_path", required=True)
    p.add_argument("--candidates", type=_candidates, required=True)
    p.add_argument("--beta-list", type=_float_range, default=_float_range("0.1:0.9:0.1"))
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", parents=[common], help="simulate a chain with a reorg attacker")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--min-attack", type=int, default=8)
    p.add_argument("--max-attack", type=int, default=None)
    p.add_argument("--blocks", type=_positive, default=968)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--events", default=None, help="write attack events (JSON lines) here")
    p.add_argument("--trace", default=None, help="write the per-block health trace (CSV) here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("health", parents=[common], help="health trace of a chain record file")
    p.add_argument("--chain", required=True)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.set_defaults(func=cmd_health)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    start = time.perf_counter()
    try:
        # buffer file output so a failed run never truncates an existing file
        out = io.StringIO() if args.out else sys.stdout
        config = args.func(args, out)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(out.getvalue())
    except UsageError as exc:
        parser.error(str(exc))
    except (EnumerationBudgetExceeded, InsufficientHistory, OSError, ValueError, KeyError) as exc:
        print(f"tezos-reorg: error: {exc}", file=sys.stderr)
        return 1
    manifest = RunManifest(
        subcommand=args.command,
        config=config,
        seed=getattr(args, "seed", None),
        version=__version__,
        duration_s=round(time.perf_counter() - start, 3),
    )
    text = json.dumps(asdict(manifest))
    print(f"manifest: {text}", file=sys.stderr)
    if args.out:
        with open(args.out + ".manifest.json", "w") as fh:
            fh.write(text + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
