"""Feasibility of short forks: exact enumeration next to Monte Carlo.

    python3 scripts/reproduce_table.py --length 2 --samples 10000000
"""

import argparse

from tezos_reorg.estimators import enumerate_probability, mc_estimate
from tezos_reorg.protocol import ProtocolParams
from tezos_reorg.state import SamplingConfig

ALPHAS = (0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=2)
    ap.add_argument("--samples", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--params", type=ProtocolParams.from_string, default=ProtocolParams())
    args = ap.parse_args()

    print("alpha,exact,truncated_mass,mc,mc_lo,mc_hi")
    for alpha in ALPHAS:
        exact = enumerate_probability(args.params, SamplingConfig(alpha), args.length)
        mc = mc_estimate(args.params, SamplingConfig(alpha, seed=args.seed), args.length, args.samples)
        print(f"{alpha:.2f},{exact.p_hat:.6f},{exact.truncated_mass:.2e},{mc.p_hat:.6f},{mc.ci_low:.6f},{mc.ci_high:.6f}")


if __name__ == "__main__":
    main()
