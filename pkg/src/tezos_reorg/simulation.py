"""Chain simulator with an embedded reorg attacker.

Slot rights are drawn up front (the attacker knows them in advance). At each
public head the attacker looks for the longest feasible fork within
``[min_attack, max_attack]``; if one exists it withholds its blocks and
endorsements while the honest network keeps publishing, then releases the
fork and replaces the honest blocks. Outside attacks it behaves honestly, so
every block is baked at priority 0 with all 32 endorsements.

Health trace convention: during an attack the trace follows the honest
network's view, including its candidate for the last slot of the race (the
block the released fork orphans). That entry is the one reported at
``executed_at``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .health import DEFAULT_WINDOW, AttackEvent, ChainHistory, ChainRecord, health
from .protocol import ProtocolParams, delay_array
from .rng import substream
from .state import ENDORSERS, sample_states


@dataclass(frozen=True)
class SimulationResult:
    records: list[ChainRecord]
    events: list[AttackEvent]
    trace: list[tuple[int, float]]
    # (fork point, executed_at) of each attack, for checking the trace
    attack_windows: list[tuple[int, int]]

    @property
    def history(self) -> ChainHistory:
        return ChainHistory(tuple(self.records))


def _longest_feasible(params, a, h, e, head, lo, hi) -> int:
    """Longest ``n`` in ``[lo, hi]`` for which the fork from ``head`` wins the race, else 0."""
    if hi < lo:
        return 0
    idx = np.arange(head + 1, head + hi + 1)
    prev = idx - 1
    t_a = delay_array(params, a[idx], e[prev])
    t_a[0] = delay_array(params, a[idx[:1]], np.array([ENDORSERS]))[0]
    t_h = delay_array(params, h[idx], ENDORSERS - e[prev])
    ok = np.cumsum(t_a) <= np.cumsum(t_h)
    for n in range(hi, lo - 1, -1):
        if ok[n - 1]:
            return n
    return 0


def simulate_chain(
    params: ProtocolParams,
    alpha: float,
    blocks: int,
    min_attack: int = 8,
    max_attack: int = 32,
    seed: int = 0,
    window: int = DEFAULT_WINDOW,
) -> SimulationResult:
    """Simulate ``blocks`` slots after a genesis block at slot 0.

    ``alpha = 0`` is allowed and yields an attacker-free, ideal chain.
    """
    if not 0.0 <= alpha < 0.5:
        raise ValueError(f"alpha must lie in [0, 0.5), got {alpha}")
    if min_attack < 2:
        raise ValueError(f"min_attack must be >= 2, got {min_attack}")
    if max_attack < min_attack:
        raise ValueError("max_attack must be >= min_attack")
    if max_attack >= window:
        raise ValueError(f"max_attack ({max_attack}) must be below the health window ({window})")
    if blocks < 1:
        raise ValueError("blocks must be >= 1")

    total = blocks + 1
    if alpha > 0:
        a, h, e = (x[0] for x in sample_states(alpha, 1, total, substream(seed, 0)))
    else:
        a = h = e = None

    def publish_health(chain: list[ChainRecord]) -> float:
        return health(params, ChainHistory(tuple(chain[-window:]), window))

    records = [ChainRecord(0, 0, ENDORSERS)]
    events: list[AttackEvent] = []
    trace: list[tuple[int, float]] = []
    windows: list[tuple[int, int]] = []
    head = 0
    while head < blocks:
        n = 0
        if a is not None:
            n = _longest_feasible(params, a, h, e, head, min_attack, min(max_attack, blocks - head))
        if n == 0:
            records.append(ChainRecord(head + 1, 0, ENDORSERS))
            trace.append((head + 1, publish_health(records)))
            head += 1
            continue

        public = list(records[-window:])
        for i in range(1, n + 1):
            s = head + i
            # the attacker withholds its priority and its endorsements of the previous slot
            public.append(ChainRecord(s, int(h[s]), ENDORSERS - int(e[s - 1])))
            trace.append((s, publish_health(public)))
        records.append(ChainRecord(head + 1, int(a[head + 1]), ENDORSERS))
        for i in range(2, n + 1):
            s = head + i
            records.append(ChainRecord(s, int(a[s]), int(e[s - 1])))
        events.append(AttackEvent(executed_at=head + n, fork_length=n))
        windows.append((head, head + n))
        head += n
    return SimulationResult(records, events, trace, windows)
