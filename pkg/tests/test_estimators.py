import json
import math

import numpy as np
import pytest

from tezos_reorg.attack import evaluate
from tezos_reorg.estimators import (
    EnumerationBudgetExceeded,
    ISConfig,
    choose_alpha_q,
    enumerate_probability,
    estimate,
    is_estimate,
    mc_estimate,
    normalize_target,
    slot_domain,
)
from tezos_reorg.protocol import ProtocolParams
from tezos_reorg.state import AttackState, SamplingConfig, state_probability

# feasibility of a 2-block fork (one orphaned block), from the exact analytic table
TABLE = {0.10: 0.000142, 0.15: 0.001419, 0.20: 0.007789, 0.25: 0.029502,
         0.30: 0.081157, 0.35: 0.176913, 0.40: 0.323585, 0.45: 0.504535}


@pytest.mark.parametrize("alpha", sorted(TABLE))
def test_enumeration_two_blocks(params, alpha):
    res = enumerate_probability(params, SamplingConfig(alpha), 2)
    assert res.p_hat == pytest.approx(TABLE[alpha], abs=1e-5)
    assert res.truncated_mass < 1e-4
    assert res.ci_low == res.ci_high == res.p_hat


def test_enumeration_is_lower_bound_of_brute_force(params):
    # independent check: plain loop over the domain with scalar evaluation
    cfg = SamplingConfig(0.3)
    dom = slot_domain(cfg)
    total = math.fsum(
        state_probability(cfg, AttackState((s,))) for s in dom if evaluate(params, AttackState((s,))).feasible
    )
    assert enumerate_probability(params, cfg, 1).p_hat == pytest.approx(total, rel=1e-12)


def test_enumeration_mean_cost_matches_loop(params):
    cfg = SamplingConfig(0.4)
    dom = slot_domain(cfg, prune=1e-5)
    num = den = 0.0
    for s in dom:
        ev = evaluate(params, AttackState((s,)))
        if ev.feasible:
            p = state_probability(cfg, AttackState((s,)))
            num += p * float(ev.cost)
            den += p
    res = enumerate_probability(params, cfg, 1, "mean_cost", prune=1e-5)
    assert res.mean_cost == pytest.approx(num / den, rel=1e-9)


def test_enumeration_budget(params):
    with pytest.raises(EnumerationBudgetExceeded):
        enumerate_probability(params, SamplingConfig(0.3), 5)


def test_slot_domain_pruning():
    dom = slot_domain(SamplingConfig(0.1))
    assert all(((s.a == 0) != (s.h == 0)) for s in dom)
    assert len(dom) < len(slot_domain(SamplingConfig(0.1), prune=1e-12))


@pytest.mark.parametrize("alpha, n", [(0.3, 1), (0.3, 2), (0.45, 2)])
def test_mc_agrees_with_enumeration(params, alpha, n):
    cfg = SamplingConfig(alpha, seed=11)
    exact = enumerate_probability(params, cfg, n).p_hat
    mc = mc_estimate(params, cfg, n, 200_000)
    assert abs(mc.p_hat - exact) <= 4 * mc.half_width


def test_mc_zero_hits_bound(params):
    # with alpha tiny, 10 draws are essentially never feasible at n = 4
    res = mc_estimate(params, SamplingConfig(0.01, seed=0), 4, 10)
    assert res.hits == 0 and res.p_hat == 0.0
    assert res.ci_high == pytest.approx(1 - 0.005 ** 0.1, rel=1e-9)


def test_mc_mean_cost_without_hits(params):
    res = mc_estimate(params, SamplingConfig(0.01, seed=0), 4, 10, "mean_cost")
    assert res.mean_cost is None


def test_mc_deterministic_across_threads(params):
    cfg = SamplingConfig(0.35, seed=3)
    a = mc_estimate(params, cfg, 5, 100_000, chunk_size=4096, threads=1)
    b = mc_estimate(params, cfg, 5, 100_000, chunk_size=4096, threads=4)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())


@pytest.mark.parametrize("alpha, n, expected", [(0.30, 20, 0.35), (0.30, 55, 0.33), (0.48, 20, 0.4999)])
def test_choose_alpha_q(alpha, n, expected):
    assert choose_alpha_q(alpha, n) == pytest.approx(expected)


def test_is_identity_proposal_reproduces_mc(params):
    cfg = SamplingConfig(0.3, seed=9)
    mc = mc_estimate(params, cfg, 3, 50_000)
    iss = is_estimate(params, cfg, ISConfig(0.3), 3, 50_000)
    assert iss.p_hat == mc.p_hat
    assert iss.hits == mc.hits


def test_is_matches_table(params):
    cfg = SamplingConfig(0.3, seed=1)
    res = is_estimate(params, cfg, ISConfig(0.35), 2, 10**6)
    assert res.contains(0.081157)


def test_is_rare_event_agrees_with_enumeration(params):
    cfg = SamplingConfig(0.1, seed=2)
    exact = enumerate_probability(params, cfg, 2).p_hat
    res = is_estimate(params, cfg, ISConfig(choose_alpha_q(0.1, 2)), 2, 200_000)
    assert res.contains(exact)
    assert res.half_width < exact / 2


def test_is_rejects(params):
    cfg = SamplingConfig(0.3)
    with pytest.raises(ValueError):
        is_estimate(params, cfg, ISConfig(0.2), 2, 1000)
    with pytest.raises(ValueError):
        is_estimate(params, cfg, ISConfig(0.35), 2, 1000, "mean_cost")


def test_targets():
    assert normalize_target("mean-cost") == "mean_cost"
    with pytest.raises(ValueError):
        normalize_target("cheap")


def test_dispatcher_and_serialization(params):
    res = estimate(params, SamplingConfig(0.3, seed=1), 2, method="enum")
    d = res.to_dict()
    assert d["method"] == "enum" and d["n"] == 2
    assert json.loads(json.dumps(d)) == d
    with pytest.raises(ValueError):
        estimate(params, SamplingConfig(0.3), 2, method="bogus")


def test_profitable_implies_feasible(params):
    cfg = SamplingConfig(0.45, seed=4)
    f = mc_estimate(params, cfg, 3, 100_000)
    p = mc_estimate(params, cfg, 3, 100_000, "profitable")
    assert p.hits <= f.hits


def test_generalized_parameters_change_estimate():
    cfg = SamplingConfig(0.45, seed=4)
    a = mc_estimate(ProtocolParams(), cfg, 8, 50_000)
    b = mc_estimate(ProtocolParams(15, 5, 8), cfg, 8, 50_000)
    assert a.p_hat != b.p_hat
