import pytest

from tezos_reorg.health import DEFAULT_WINDOW, baseline_statistics
from tezos_reorg.simulation import simulate_chain


def test_no_attacker_is_ideal(params):
    res = simulate_chain(params, 0.0, 200, seed=1)
    assert res.events == []
    assert {v for _, v in res.trace} == {40.0}
    assert baseline_statistics(res.records)["priority0_fraction"] == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_attacks_detected_at_execution(params, seed):
    res = simulate_chain(params, 0.375, 968, min_attack=8, seed=seed)
    assert res.events, "expected at least one attack"
    trace = dict(res.trace)
    for ev in res.events:
        assert 8 <= ev.fork_length <= 32
        assert trace[ev.executed_at] == 0.0


def test_chain_is_consecutive(params):
    res = simulate_chain(params, 0.4, 500, seed=2)
    assert [r.slot for r in res.records] == list(range(501))
    assert [s for s, _ in res.trace] == list(range(1, 501))
    assert res.history.head.slot == 500


def test_attack_windows_line_up(params):
    res = simulate_chain(params, 0.4, 500, seed=2)
    for (fork, executed), ev in zip(res.attack_windows, res.events):
        assert executed == ev.executed_at
        assert executed - fork == ev.fork_length


def test_deterministic(params):
    a = simulate_chain(params, 0.375, 300, seed=5)
    b = simulate_chain(params, 0.375, 300, seed=5)
    assert a == b


@pytest.mark.parametrize(
    "kwargs",
    [dict(alpha=0.5), dict(alpha=-0.1), dict(min_attack=1), dict(max_attack=DEFAULT_WINDOW),
     dict(min_attack=9, max_attack=8), dict(blocks=0)],
)
def test_rejects(params, kwargs):
    args = dict(alpha=0.3, blocks=100, min_attack=8, max_attack=32)
    args.update(kwargs)
    with pytest.raises(ValueError):
        simulate_chain(params, **args)
