"""Chain race between a private attacker fork and the honest network.

For a state ``S`` of length ``n`` the attacker's fork takes
``D(a_1, 32) + sum_{i>=2} D(a_i, e_{i-1})`` seconds (its first block reuses
every endorsement of the fork point) while the honest chain, missing the
attacker's endorsements, takes ``sum_i D(h_i, 32 - e_{i-1})``. The attack is
feasible when the fork is not slower; ties go to the attacker.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from typing import NamedTuple

import numpy as np

from .protocol import (
    ProtocolParams,
    REWARD_SCALE,
    baker_reward,
    baker_reward_units,
    delay,
    delay_array,
    endorser_reward,
    endorser_reward_units,
)
from .state import ENDORSERS, AttackState


@dataclass(frozen=True)
class AttackEvaluation:
    attacker_time: int
    honest_time: int
    feasible: bool
    honest_reward: Decimal
    attack_reward: Decimal
    cost: Decimal
    profitable_selfish: bool


def attacker_time(params: ProtocolParams, state: AttackState) -> int:
    slots = state.slots
    total = delay(params, slots[0].a, ENDORSERS)
    for s in slots[1:]:
        total += delay(params, s.a, s.e)
    return total


def honest_time(params: ProtocolParams, state: AttackState) -> int:
    return sum(delay(params, s.h, ENDORSERS - s.e) for s in state.slots)


def is_feasible(params: ProtocolParams, state: AttackState) -> bool:
    return attacker_time(params, state) <= honest_time(params, state)


def honest_reward(params: ProtocolParams, state: AttackState) -> Decimal:
    """Attacker's protocol reward over the window had it followed the protocol."""
    total = Decimal(0)
    full_block = baker_reward(params, 0, ENDORSERS)
    for s in state.slots:
        if s.a == 0:
            total += full_block
        total += s.e * endorser_reward(params, 0)
    return total


def attack_reward(params: ProtocolParams, state: AttackState) -> Decimal:
    """Attacker's protocol reward when every fork block is accepted."""
    first, rest = state.slots[0], state.slots[1:]
    total = baker_reward(params, first.a, ENDORSERS) + first.e * endorser_reward(params, first.a)
    for s in rest:
        total += baker_reward(params, s.a, s.e) + s.e * endorser_reward(params, s.a)
    return total


def evaluate(params: ProtocolParams, state: AttackState) -> AttackEvaluation:
    t_a = attacker_time(params, state)
    t_h = honest_time(params, state)
    honest_r = honest_reward(params, state)
    attack_r = attack_reward(params, state)
    feasible = t_a <= t_h
    return AttackEvaluation(
        attacker_time=t_a,
        honest_time=t_h,
        feasible=feasible,
        honest_reward=honest_r,
        attack_reward=attack_r,
        cost=honest_r - attack_r,
        # strict: a zero-cost reorg earns nothing extra
        profitable_selfish=feasible and attack_r > honest_r,
    )


# -- batch evaluation ----------------------------------------------------------


class BatchEvaluation(NamedTuple):
    attacker_time: np.ndarray
    honest_time: np.ndarray
    feasible: np.ndarray
    honest_units: np.ndarray
    attack_units: np.ndarray

    @property
    def cost_units(self) -> np.ndarray:
        return self.honest_units - self.attack_units

    @property
    def profitable(self) -> np.ndarray:
        return self.feasible & (self.attack_units > self.honest_units)

    def cost_xtz(self) -> np.ndarray:
        return self.cost_units / REWARD_SCALE


def evaluate_batch(
    params: ProtocolParams, a: np.ndarray, h: np.ndarray, e: np.ndarray, *, rewards: bool = True
) -> BatchEvaluation:
    """Evaluate ``m`` states given as ``(m, n)`` arrays laid out like :class:`AttackState`.

    Rewards are integer units of ``1e-7`` XTZ. With ``rewards=False`` the reward
    columns are left as zeros (feasibility-only callers skip the work).
    """
    a = np.asarray(a, dtype=np.int64)
    h = np.asarray(h, dtype=np.int64)
    e = np.asarray(e, dtype=np.int64)
    t_a = delay_array(params, a[:, 0], ENDORSERS) + delay_array(params, a[:, 1:], e[:, 1:]).sum(axis=1)
    t_h = delay_array(params, h, ENDORSERS - e).sum(axis=1)
    feasible = t_a <= t_h
    if not rewards:
        zeros = np.zeros(a.shape[0], dtype=np.int64)
        return BatchEvaluation(t_a, t_h, feasible, zeros, zeros)

    top_end = endorser_reward_units(params, np.zeros(1, dtype=np.int64))[0]
    full_block = baker_reward_units(params, np.zeros(1, dtype=np.int64), np.array([ENDORSERS]))[0]
    honest_r = (np.where(a == 0, full_block, 0) + e * top_end).sum(axis=1)

    attack_r = baker_reward_units(params, a[:, 0], np.full(a.shape[0], ENDORSERS)) + e[:, 0] * endorser_reward_units(
        params, a[:, 0]
    )
    tail = baker_reward_units(params, a[:, 1:], e[:, 1:]) + e[:, 1:] * endorser_reward_units(params, a[:, 1:])
    attack_r = attack_r + tail.sum(axis=1)
    return BatchEvaluation(t_a, t_h, feasible, honest_r, attack_r)
