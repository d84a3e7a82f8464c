"""Slot configurations, fork states and their distribution under stake ``alpha``.

Slot ``i`` of a length-``n`` state (1-based, relative to the fork point)
holds the attacker's best priority ``a_i``, the honest network's best
priority ``h_i`` and the attacker's endorsement count for the *previous*
height, ``e_{i-1}``. Exactly one of ``a_i``, ``h_i`` is zero.

Geometric variables count failures before the first success, so their
support is ``{0, 1, 2, ...}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

ENDORSERS = 32

_LOG_COMB = np.array([math.log(math.comb(ENDORSERS, k)) for k in range(ENDORSERS + 1)])


@dataclass(frozen=True)
class SlotConfig:
    a: int
    h: int
    e: int

    def __post_init__(self):
        if self.a < 0 or self.h < 0:
            raise ValueError(f"priorities must be >= 0, got a={self.a}, h={self.h}")
        if (self.a == 0) == (self.h == 0):
            raise ValueError(f"exactly one of a, h must be 0, got a={self.a}, h={self.h}")
        if not 0 <= self.e <= ENDORSERS:
            raise ValueError(f"e must lie in [0, {ENDORSERS}], got {self.e}")


@dataclass(frozen=True)
class AttackState:
    slots: tuple[SlotConfig, ...]

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        if not self.slots:
            raise ValueError("an attack state needs at least one slot")
        for s in self.slots:
            if not isinstance(s, SlotConfig):
                raise TypeError(f"expected SlotConfig, got {type(s).__name__}")

    @classmethod
    def from_sequences(cls, a: Sequence[int], h: Sequence[int], e: Sequence[int]) -> "AttackState":
        """Build from ``a = (a_1..a_n)``, ``h = (h_1..h_n)``, ``e = (e_0..e_{n-1})``."""
        if not len(a) == len(h) == len(e):
            raise ValueError("a, h and e must have equal length")
        return cls(tuple(SlotConfig(int(x), int(y), int(z)) for x, y, z in zip(a, h, e)))

    @property
    def n(self) -> int:
        return len(self.slots)

    @property
    def a(self) -> tuple[int, ...]:
        return tuple(s.a for s in self.slots)

    @property
    def h(self) -> tuple[int, ...]:
        return tuple(s.h for s in self.slots)

    @property
    def e(self) -> tuple[int, ...]:
        return tuple(s.e for s in self.slots)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(a, h, e)`` as ``(1, n)`` int64 arrays for the batch evaluators."""
        return tuple(np.array([v], dtype=np.int64) for v in (self.a, self.h, self.e))


@dataclass(frozen=True)
class SamplingConfig:
    alpha: float
    seed: int = 0
    priority_cap: int = 152

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise ValueError(f"alpha must lie in (0, 0.5), got {self.alpha}")
        if self.priority_cap < 1:
            raise ValueError(f"priority_cap must be >= 1, got {self.priority_cap}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


# -- probabilities -----------------------------------------------------------


def priority_probability(alpha: float, a: int, h: int) -> float:
    """Joint probability of the best priorities ``(a, h)``; zero if the pair is inconsistent."""
    if a < 0 or h < 0 or (a == 0) == (h == 0):
        return 0.0
    if a == 0:
        return alpha**h * (1.0 - alpha)
    return (1.0 - alpha) ** a * alpha


def binomial_pmf(alpha: float, e: int, trials: int = ENDORSERS) -> float:
    return math.comb(trials, e) * alpha**e * (1.0 - alpha) ** (trials - e)


def log_slot_probability(alpha: float, s: SlotConfig) -> float:
    if s.a == 0:
        lp = s.h * math.log(alpha) + math.log1p(-alpha)
    else:
        lp = s.a * math.log1p(-alpha) + math.log(alpha)
    return lp + _LOG_COMB[s.e] + s.e * math.log(alpha) + (ENDORSERS - s.e) * math.log1p(-alpha)


def slot_probability(cfg: SamplingConfig, s: SlotConfig) -> float:
    return priority_probability(cfg.alpha, s.a, s.h) * binomial_pmf(cfg.alpha, s.e)


def state_probability(cfg: SamplingConfig, state: AttackState) -> float:
    """Probability of the whole state; the product is accumulated in log-space."""
    return math.exp(math.fsum(log_slot_probability(cfg.alpha, s) for s in state.slots))


def log_state_probability_array(alpha: float, a: np.ndarray, h: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Row-wise log-probability of a batch of states given as ``(m, n)`` arrays."""
    la, l1a = math.log(alpha), math.log1p(-alpha)
    prio = np.where(a == 0, h * la + l1a, a * l1a + la)
    endo = _LOG_COMB[e] + e * la + (ENDORSERS - e) * l1a
    return (prio + endo).sum(axis=-1)


# -- sampling ----------------------------------------------------------------


def sample_slot(cfg: SamplingConfig, rng: np.random.Generator) -> SlotConfig:
    h = int(rng.geometric(1.0 - cfg.alpha)) - 1
    # numpy's geometric counts trials (>= 1), i.e. failures + 1: exactly the "+1" needed here.
    a = int(rng.geometric(cfg.alpha)) if h == 0 else 0
    e = int(rng.binomial(ENDORSERS, cfg.alpha))
    return SlotConfig(a, h, e)


def sample_state(cfg: SamplingConfig, n: int, rng: np.random.Generator) -> AttackState:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return AttackState(tuple(sample_slot(cfg, rng) for _ in range(n)))


def sample_states(alpha: float, m: int, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw ``m`` states of length ``n`` at once; returns ``(a, h, e)`` int64 arrays of shape ``(m, n)``.

    The draw order (all ``h``, then all ``a``, then the uniforms behind ``e``)
    is part of the determinism contract of the estimators.
    """
    h = rng.geometric(1.0 - alpha, size=(m, n)).astype(np.int64) - 1
    a = rng.geometric(alpha, size=(m, n)).astype(np.int64)
    a[h != 0] = 0
    # inverse-CDF draw; about twice as fast as Generator.binomial for 32 trials
    e = np.searchsorted(_binomial_cdf(alpha), rng.random(size=(m, n)), side="right").astype(np.int64)
    return a, h, e


def _binomial_cdf(alpha: float) -> np.ndarray:
    pmf = np.array([binomial_pmf(alpha, k) for k in range(ENDORSERS + 1)])
    cdf = np.cumsum(pmf)
    # the last bin absorbs rounding so every u in [0, 1) maps into [0, 32]
    return cdf[:-1]
