"""Coarse parameter sweep and comparison of two designs across beta.

Writes the sweep CSV and prints, per beta, the grid optimum and the ratio of
the optimum to each candidate's objective (1.0 = optimal on the grid).

    python3 scripts/design_sweep.py --out sweep.csv
"""

import argparse
import sys

from tezos_reorg.protocol import ProtocolParams
from tezos_reorg.sweep import IntRange, SweepGrid, compare_designs, run_sweep, write_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.45)
    ap.add_argument("--ei", type=IntRange.parse, default=IntRange(0, 32, 4))
    ap.add_argument("--de", type=IntRange.parse, default=IntRange(4, 20, 4))
    ap.add_argument("--dp", type=IntRange.parse, default=IntRange(0, 60, 10))
    ap.add_argument("--samples", type=int, default=10**5)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--candidates", default="24,8,40;15,5,8")
    ap.add_argument("--out", default="sweep.csv")
    args = ap.parse_args()

    cands = [ProtocolParams.from_string(c).design for c in args.candidates.split(";")]
    grid = SweepGrid(args.alpha, ei_range=args.ei, de_range=args.de, dp_range=args.dp,
                     samples_per_cell=args.samples, seed=args.seed, extra_points=tuple(cands))
    total = len(grid.points())
    done = 0

    def progress(cell):
        nonlocal done
        done += 1
        print(f"\r{done}/{total} {cell.design}", end="", file=sys.stderr, flush=True)

    cells = run_sweep(grid, progress=progress)
    print(file=sys.stderr)
    with open(args.out, "w") as fh:
        write_csv(cells, fh)

    betas = [round(0.1 * i, 1) for i in range(1, 10)]
    print("beta,argmin,min_objective," + ",".join("ratio_" + "_".join(map(str, c)) for c in cands))
    for cmp in compare_designs(cells, cands, betas):
        ratios = ",".join(f"{cmp.ratios[c]:.4f}" for c in cands)
        print(f"{cmp.beta},\"{cmp.argmin}\",{cmp.minimum:.4e},{ratios}")


if __name__ == "__main__":
    main()
