"""Protocol constants and the block delay / reward functions.

Delays are integer seconds. Rewards are :class:`~decimal.Decimal` XTZ; the
vectorised code paths work in integer units of ``1e-7`` XTZ (see
:data:`REWARD_SCALE`) so that reward comparisons stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

import numpy as np

# 1 XTZ == REWARD_SCALE reward units; every reward constant is a multiple of 1e-7.
REWARD_SCALE = 10**7


@dataclass(frozen=True)
class ProtocolParams:
    """Design tuple ``(initial_endorsers, delay_endorse, delay_priority)`` plus fixed constants."""

    initial_endorsers: int = 24
    delay_endorse: int = 8
    delay_priority: int = 40
    base_delay: int = 60
    endorsers_per_block: int = 32
    baker_reward_top: Decimal = Decimal("1.25")
    baker_reward_low: Decimal = Decimal("0.1875")
    endorser_reward_top: Decimal = Decimal("1.25")
    endorser_reward_low: Decimal = Decimal("0.8333333")

    def __post_init__(self):
        if not 0 <= self.initial_endorsers <= self.endorsers_per_block:
            raise ValueError(
                f"initial_endorsers must lie in [0, {self.endorsers_per_block}], "
                f"got {self.initial_endorsers}"
            )
        if self.delay_endorse < 0 or self.delay_priority < 0:
            raise ValueError("delay_endorse and delay_priority must be >= 0")
        if self.base_delay < 0:
            raise ValueError("base_delay must be >= 0")
        for name in ("baker_reward_top", "baker_reward_low", "endorser_reward_top", "endorser_reward_low"):
            value = getattr(self, name)
            if not isinstance(value, Decimal):
                object.__setattr__(self, name, Decimal(str(value)))

    @classmethod
    def from_string(cls, text: str) -> "ProtocolParams":
        """Parse ``"EI,DE,DP"`` (e.g. ``"24,8,40"``)."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected EI,DE,DP, got {text!r}")
        try:
            ei, de, dp = (int(p) for p in parts)
        except ValueError:
            raise ValueError(f"EI,DE,DP must be integers, got {text!r}") from None
        return cls(initial_endorsers=ei, delay_endorse=de, delay_priority=dp)

    @property
    def design(self) -> tuple[int, int, int]:
        return (self.initial_endorsers, self.delay_endorse, self.delay_priority)

    def __str__(self) -> str:
        return "{},{},{}".format(*self.design)


DEFAULT_PARAMS = ProtocolParams()


def _check_domain(params: ProtocolParams, p: int, e: int | None = None) -> None:
    if p < 0:
        raise ValueError(f"priority must be >= 0, got {p}")
    if e is not None and not 0 <= e <= params.endorsers_per_block:
        raise ValueError(f"endorsement count must lie in [0, {params.endorsers_per_block}], got {e}")


def delay(params: ProtocolParams, p: int, e: int) -> int:
    """Minimum seconds between a block of priority ``p`` carrying ``e`` endorsements and its parent."""
    _check_domain(params, p, e)
    missing = max(params.initial_endorsers - e, 0)
    return params.base_delay + params.delay_priority * p + params.delay_endorse * missing


def baker_reward(params: ProtocolParams, p: int, e: int) -> Decimal:
    _check_domain(params, p, e)
    rate = params.baker_reward_top if p == 0 else params.baker_reward_low
    return rate * e


def endorser_reward(params: ProtocolParams, p_i: int) -> Decimal:
    """Reward per endorsement included in a block baked at priority ``p_i``."""
    _check_domain(params, p_i)
    return params.endorser_reward_top if p_i == 0 else params.endorser_reward_low


def to_units(amount: Decimal) -> int:
    """Convert an XTZ amount to integer reward units, refusing to round."""
    scaled = amount * REWARD_SCALE
    if scaled != scaled.to_integral_value():
        raise ValueError(f"{amount} is not a multiple of 1e-7 XTZ")
    return int(scaled)


# -- vectorised forms -------------------------------------------------------
#
# The estimators evaluate millions of states per second; these mirror the
# scalar functions above on integer numpy arrays without domain checks.


def delay_array(params: ProtocolParams, p: np.ndarray, e: np.ndarray) -> np.ndarray:
    missing = np.maximum(params.initial_endorsers - np.asarray(e, dtype=np.int64), 0)
    return params.base_delay + params.delay_priority * np.asarray(p, dtype=np.int64) + params.delay_endorse * missing


def baker_reward_units(params: ProtocolParams, p: np.ndarray, e: np.ndarray) -> np.ndarray:
    top = to_units(params.baker_reward_top)
    low = to_units(params.baker_reward_low)
    return np.where(np.asarray(p) == 0, top, low) * np.asarray(e, dtype=np.int64)


def endorser_reward_units(params: ProtocolParams, p_i: np.ndarray) -> np.ndarray:
    top = to_units(params.endorser_reward_top)
    low = to_units(params.endorser_reward_low)
    return np.where(np.asarray(p_i) == 0, top, low).astype(np.int64)
