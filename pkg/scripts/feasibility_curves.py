"""Probability of a feasible fork as a function of its length, for several stakes.

Uses plain Monte Carlo while hits are plentiful and switches to importance
sampling for rare events. Prints CSV: alpha,n,method,p,lo,hi,mean_cost.

    python3 scripts/feasibility_curves.py --alphas 0.3,0.35,0.4,0.45 --max-length 32
"""

import argparse

from tezos_reorg.estimators import ISConfig, choose_alpha_q, is_estimate, mc_estimate
from tezos_reorg.protocol import ProtocolParams
from tezos_reorg.state import SamplingConfig

DAILY = 1 / 1440
YEARLY = DAILY / 365


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alphas", default="0.30,0.35,0.40,0.45")
    ap.add_argument("--max-length", type=int, default=32)
    ap.add_argument("--step", type=int, default=2)
    ap.add_argument("--samples", type=int, default=10**5)
    ap.add_argument("--min-hits", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--params", type=ProtocolParams.from_string, default=ProtocolParams())
    args = ap.parse_args()

    print(f"# daily rate {DAILY:.3e}, yearly rate {YEARLY:.3e}")
    print("alpha,n,method,p,lo,hi,mean_cost")
    for alpha in (float(a) for a in args.alphas.split(",")):
        for n in range(2, args.max_length + 1, args.step):
            cfg = SamplingConfig(alpha, seed=args.seed)
            res = mc_estimate(args.params, cfg, n, args.samples, "mean_cost")
            cost = "" if res.mean_cost is None else f"{res.mean_cost:.2f}"
            if res.hits < args.min_hits:
                res = is_estimate(args.params, cfg, ISConfig(choose_alpha_q(alpha, n)), n, args.samples)
            print(f"{alpha},{n},{res.method},{res.p_hat:.4e},{res.ci_low:.4e},{res.ci_high:.4e},{cost}")


if __name__ == "__main__":
    main()
