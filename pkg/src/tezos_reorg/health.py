"""Backward-looking chain health from public block data.

For every depth ``k`` inside the security window the metric compares the
time the honest chain actually needed for its last ``k`` blocks with the
fastest fork an attacker could have built over the same slots: best free
priority (0 where the public block was not priority 0, else 1) and every
endorsement missing from the public chain. The health is the smallest
per-block advantage of the honest chain, or 0 once any fork would have won.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .protocol import ProtocolParams, delay
from .state import ENDORSERS

DEFAULT_WINDOW = 40


class InsufficientHistory(ValueError):
    pass


@dataclass(frozen=True)
class ChainRecord:
    slot: int
    priority: int
    endorsements: int  # endorsements of the previous slot carried by this block

    def __post_init__(self):
        if self.slot < 0:
            raise ValueError(f"slot must be >= 0, got {self.slot}")
        if self.priority < 0:
            raise ValueError(f"priority must be >= 0, got {self.priority}")
        if not 0 <= self.endorsements <= ENDORSERS:
            raise ValueError(f"endorsements must lie in [0, {ENDORSERS}], got {self.endorsements}")

    def to_json(self) -> str:
        return json.dumps({"slot": self.slot, "priority": self.priority, "endorsements": self.endorsements})


@dataclass(frozen=True)
class ChainHistory:
    records: tuple[ChainRecord, ...]
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if not self.records:
            raise InsufficientHistory("a chain history needs at least one record")
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        for prev, cur in zip(self.records, self.records[1:]):
            if cur.slot != prev.slot + 1:
                raise ValueError(f"slots must be consecutive: {prev.slot} is followed by {cur.slot}")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def head(self) -> ChainRecord:
        return self.records[-1]

    @property
    def max_depth(self) -> int:
        return min(self.window, len(self.records)) - 1


@dataclass(frozen=True)
class AttackEvent:
    executed_at: int
    fork_length: int

    @property
    def deleted(self) -> int:
        return self.fork_length - 1

    def to_json(self) -> str:
        return json.dumps({"executed_at": self.executed_at, "fork_length": self.fork_length})


def potential_priority(priority: int) -> int:
    """Best priority an attacker could still hold at a slot: 0 if the public block did not use it."""
    return 0 if priority != 0 else 1


def _check_depth(hist: ChainHistory, k: int) -> None:
    if not 1 <= k <= hist.max_depth:
        raise InsufficientHistory(
            f"depth {k} needs 1 <= k < min(window={hist.window}, history={len(hist)})"
        )


def honest_backward_time(params: ProtocolParams, hist: ChainHistory, k: int) -> int:
    _check_depth(hist, k)
    recs = hist.records
    return sum(delay(params, r.priority, r.endorsements) for r in recs[len(recs) - k :])


def attacker_backward_time(params: ProtocolParams, hist: ChainHistory, k: int) -> int:
    _check_depth(hist, k)
    recs = hist.records
    first, rest = recs[len(recs) - k], recs[len(recs) - k + 1 :]
    # the first fork block reuses all endorsements of the common ancestor
    total = delay(params, potential_priority(first.priority), ENDORSERS)
    for r in rest:
        total += delay(params, potential_priority(r.priority), ENDORSERS - r.endorsements)
    return total


def margins(params: ProtocolParams, hist: ChainHistory) -> list[int]:
    """Attacker minus honest backward time for depths ``1..K``, ``K = min(window, len) - 1``."""
    if hist.max_depth < 1:
        raise InsufficientHistory("health needs at least two records")
    recs = hist.records
    out = []
    honest = 0
    tail = 0  # attacker time of the fork blocks after the first
    for k in range(1, hist.max_depth + 1):
        r = recs[-k]
        honest += delay(params, r.priority, r.endorsements)
        first = delay(params, potential_priority(r.priority), ENDORSERS)
        out.append(first + tail - honest)
        tail += delay(params, potential_priority(r.priority), ENDORSERS - r.endorsements)
    return out


def health(params: ProtocolParams, hist: ChainHistory) -> float:
    """Seconds per block by which the honest chain stays ahead of the best hypothetical fork.

    40 for an ideal chain under the default parameters; 0 when some fork over
    the window would already have been at least as fast.
    """
    ds = margins(params, hist)
    if min(ds) <= 0:
        return 0.0
    return min(d / k for k, d in enumerate(ds, start=1))


def health_trace(
    params: ProtocolParams, records: Sequence[ChainRecord], window: int = DEFAULT_WINDOW
) -> list[tuple[int, float]]:
    """Health after each block, from the second record on."""
    out = []
    for i in range(1, len(records)):
        hist = ChainHistory(records[max(0, i + 1 - window) : i + 1], window)
        out.append((records[i].slot, health(params, hist)))
    return out


def baseline_statistics(records: Sequence[ChainRecord]) -> dict:
    """Share of priority-0 blocks and the mean / standard deviation of endorsement counts."""
    if not records:
        raise InsufficientHistory("no records to summarise")
    ends = [r.endorsements for r in records]
    return {
        "blocks": len(records),
        "priority0_fraction": sum(r.priority == 0 for r in records) / len(records),
        "endorsement_mean": statistics.fmean(ends),
        "endorsement_std": statistics.pstdev(ends),
    }


# -- line-delimited JSON -----------------------------------------------------


def read_records(lines: Iterable[str]) -> list[ChainRecord]:
    out = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            out.append(ChainRecord(int(obj["slot"]), int(obj["priority"]), int(obj["endorsements"])))
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValueError(f"line {lineno}: not a chain record ({exc})") from None
    for prev, cur in zip(out, out[1:]):
        if cur.slot != prev.slot + 1:
            raise ValueError(f"chain records must have consecutive ascending slots ({prev.slot} -> {cur.slot})")
    return out


def write_records(records: Iterable[ChainRecord], stream) -> None:
    for r in records:
        stream.write(r.to_json() + "\n")


def read_events(lines: Iterable[str]) -> list[AttackEvent]:
    return [AttackEvent(**json.loads(line)) for line in lines if line.strip()]


def write_events(events: Iterable[AttackEvent], stream) -> None:
    for ev in events:
        stream.write(ev.to_json() + "\n")
