from decimal import Decimal

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tezos_reorg.attack import (
    attack_reward,
    attacker_time,
    evaluate,
    evaluate_batch,
    honest_reward,
    honest_time,
    is_feasible,
)
from tezos_reorg.protocol import REWARD_SCALE, ProtocolParams
from tezos_reorg.state import AttackState


def st_(a, h, e):
    return AttackState.from_sequences(a, h, e)


@pytest.mark.parametrize(
    "a, h, e, expected",
    [((0,), (1,), (5,), 60), ((0, 0), (1, 1), (0, 32), 120), ((1, 0), (0, 2), (7, 0), 352)],
)
def test_attacker_time(params, a, h, e, expected):
    assert attacker_time(params, st_(a, h, e)) == expected


@pytest.mark.parametrize(
    "a, h, e, expected",
    [((0,), (1,), (32,), 292), ((1,), (0,), (0,), 60), ((1, 0), (0, 1), (16, 8), 224)],
)
def test_honest_time(params, a, h, e, expected):
    assert honest_time(params, st_(a, h, e)) == expected


@pytest.mark.parametrize(
    "a, h, e, feasible",
    # a=1, e=24: the honest block is left with 8 endorsements, D(0, 8) = 188 >= 100
    [((0,), (1,), (32,), True), ((1,), (0,), (0,), False), ((1,), (0,), (24,), True), ((1,), (0,), (32,), True)],
)
def test_feasibility(params, a, h, e, feasible):
    assert is_feasible(params, st_(a, h, e)) is feasible


@pytest.mark.parametrize(
    "a, h, e, honest, attack",
    [
        ((0,), (1,), (16,), Decimal("60"), Decimal("60")),
        ((1,), (0,), (16,), Decimal("20"), Decimal("19.3333328")),
        # the first fork block always carries the 32 endorsements of the common ancestor
        ((5,), (0,), (0,), Decimal("0"), Decimal("6")),
    ],
)
def test_rewards(params, a, h, e, honest, attack):
    s = st_(a, h, e)
    assert honest_reward(params, s) == honest
    assert attack_reward(params, s) == attack


def test_cost_example(params):
    ev = evaluate(params, st_((1,), (0,), (16,)))
    assert float(ev.cost) == pytest.approx(0.6667, abs=1e-4)
    assert not ev.profitable_selfish


def test_all_priority_zero_full_endorsement(params):
    ev = evaluate(params, st_((0,) * 5, (1,) * 5, (32,) * 5))
    assert ev.feasible
    # with a = 0 everywhere the attacker chain earns exactly the honest reward
    assert ev.cost == 0
    assert not ev.profitable_selfish


def test_evaluation_fields_compose(params):
    s = st_((1, 0), (0, 1), (16, 8))
    ev = evaluate(params, s)
    assert ev.attacker_time == attacker_time(params, s)
    assert ev.honest_time == honest_time(params, s)
    assert ev.feasible == is_feasible(params, s)
    assert ev.cost == honest_reward(params, s) - attack_reward(params, s)


def states(max_n=6):
    def build(rows):
        a = [x if z else 0 for x, _, z, _ in rows]
        h = [0 if z else y for _, y, z, _ in rows]
        e = [w for *_, w in rows]
        return st_(a, h, e)

    row = st.tuples(st.integers(1, 20), st.integers(1, 20), st.booleans(), st.integers(0, 32))
    return st.lists(row, min_size=1, max_size=max_n).map(build)


@given(states(), st.sampled_from([(24, 8, 40), (15, 5, 8), (0, 4, 0), (32, 20, 60)]))
def test_batch_matches_scalar(state, design):
    params = ProtocolParams(*design)
    ev = evaluate(params, state)
    b = evaluate_batch(params, *state.as_arrays())
    assert int(b.attacker_time[0]) == ev.attacker_time
    assert int(b.honest_time[0]) == ev.honest_time
    assert bool(b.feasible[0]) == ev.feasible
    assert Decimal(int(b.honest_units[0])) / REWARD_SCALE == ev.honest_reward
    assert Decimal(int(b.attack_units[0])) / REWARD_SCALE == ev.attack_reward
    assert bool(b.profitable[0]) == ev.profitable_selfish


@given(states())
def test_ties_favour_attacker(state):
    params = ProtocolParams()
    ev = evaluate(params, state)
    assert ev.feasible == (ev.attacker_time <= ev.honest_time)


def test_batch_without_rewards(params):
    a = np.array([[1, 0]])
    h = np.array([[0, 1]])
    e = np.array([[16, 8]])
    b = evaluate_batch(params, a, h, e, rewards=False)
    assert int(b.honest_time[0]) == 224
