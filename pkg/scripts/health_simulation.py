"""Simulate chains with a reorg attacker and summarise what the health metric saw.

    python3 scripts/health_simulation.py --alpha 0.375 --seeds 20
"""

import argparse

from tezos_reorg.protocol import ProtocolParams
from tezos_reorg.simulation import simulate_chain


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.375)
    ap.add_argument("--blocks", type=int, default=968)
    ap.add_argument("--min-attack", type=int, default=8)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--params", type=ProtocolParams.from_string, default=ProtocolParams())
    args = ap.parse_args()

    print("seed,attacks,deleted_blocks,zero_at_execution,ideal_blocks_inside_attacks,min_health,mean_health")
    for seed in range(args.seeds):
        res = simulate_chain(args.params, args.alpha, args.blocks, args.min_attack, seed=seed)
        trace = dict(res.trace)
        zero = sum(trace[e] == 0.0 for _, e in res.attack_windows)
        ideal_inside = sum(trace[s] >= 40.0 for f, e in res.attack_windows for s in range(f + 1, e + 1))
        values = list(trace.values())
        print(f"{seed},{len(res.events)},{sum(e.deleted for e in res.events)},{zero},{ideal_inside},"
              f"{min(values):.2f},{sum(values) / len(values):.2f}")


if __name__ == "__main__":
    main()
