"""Estimators for the probability of feasible and profitable reorgs.

Three routes to the probability that an ``n``-block fork is feasible (or
profitable) for an attacker with stake ``alpha``:

* :func:`enumerate_probability` sums exact state probabilities over a
  truncated state space; it is the oracle for the sampling estimators.
* :func:`mc_estimate` counts hits among states drawn at ``alpha`` and reports
  a Clopper-Pearson interval.
* :func:`is_estimate` draws at an inflated stake ``alpha_q`` and reweights by
  the likelihood ratio, with a normal-approximation interval.

Sampling is split into fixed-size chunks, each with its own substream
(:func:`tezos_reorg.rng.substream`); chunk results are reduced in chunk order,
so estimates do not depend on the number of worker threads.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence, TypeVar

import numpy as np

from . import attack
from .protocol import REWARD_SCALE, ProtocolParams, baker_reward, delay, endorser_reward, to_units
from .rng import chunk_plan, substream
from .state import (
    ENDORSERS,
    SamplingConfig,
    SlotConfig,
    log_slot_probability,
    log_state_probability_array,
    sample_states,
    slot_probability,
)
from .stats import clopper_pearson

log = logging.getLogger(__name__)

TARGETS = ("feasible", "profitable", "mean_cost")
METHODS = ("enum", "mc", "is")
DEFAULT_CHUNK = 2**16
Z_99 = 2.58

T = TypeVar("T")


class EnumerationBudgetExceeded(RuntimeError):
    """The truncated state space is too large to enumerate; use mc or is instead."""


@dataclass(frozen=True)
class EstimateResult:
    p_hat: float
    ci_low: float
    ci_high: float
    method: str
    samples: int
    seed: int
    alpha: float
    n: int
    target: str
    mean_cost: Optional[float] = None
    hits: Optional[int] = None
    truncated_mass: Optional[float] = None
    alpha_q: Optional[float] = None
    lr_floor_hits: Optional[int] = None

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def to_dict(self) -> dict:
        """Plain dict with probabilities at 10 significant digits and XTZ at 7 decimals."""
        out = asdict(self)
        for key in ("p_hat", "ci_low", "ci_high", "truncated_mass"):
            if out[key] is not None:
                out[key] = float(f"{out[key]:.10g}")
        if out["mean_cost"] is not None:
            out["mean_cost"] = round(out["mean_cost"], 7)
        return out


@dataclass(frozen=True)
class ISConfig:
    alpha_q: float
    lr_floor: float = 1e-16

    def __post_init__(self):
        if not 0.0 < self.alpha_q < 0.5:
            raise ValueError(f"alpha_q must lie in (0, 0.5), got {self.alpha_q}")
        if self.lr_floor <= 0:
            raise ValueError("lr_floor must be positive")


def normalize_target(target: str) -> str:
    t = target.replace("-", "_")
    if t not in TARGETS:
        raise ValueError(f"unknown target {target!r}; expected one of {', '.join(TARGETS)}")
    return t


def _run_chunks(fn: Callable[[int, int], T], sizes: Sequence[int], threads: Optional[int]) -> list[T]:
    workers = threads if threads is not None else (os.cpu_count() or 1)
    jobs = list(enumerate(sizes))
    if workers <= 1 or len(jobs) == 1:
        return [fn(i, m) for i, m in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order, which fixes the reduction order
        return list(pool.map(lambda job: fn(*job), jobs))


# -- truncated enumeration -------------------------------------------------------


def slot_domain(cfg: SamplingConfig, prune: float = 1e-8) -> list[SlotConfig]:
    """Consistent slot tuples with priorities <= ``priority_cap`` and probability >= ``prune``."""
    out = []
    cap = cfg.priority_cap
    pairs = [(0, h) for h in range(1, cap + 1)] + [(a, 0) for a in range(1, cap + 1)]
    for a, h in pairs:
        for e in range(ENDORSERS + 1):
            s = SlotConfig(a, h, e)
            if slot_probability(cfg, s) >= prune:
                out.append(s)
    return out


def _slot_tables(params: ProtocolParams, cfg: SamplingConfig, domain: list[SlotConfig]):
    """Per-slot contributions to the race margin and to the reward gain.

    The race margin of a state is ``attacker_time - honest_time`` and the reward
    gain is ``attack_reward - honest_reward``; both are sums of independent
    per-slot terms, with the first slot treated differently.
    """
    full_block = baker_reward(params, 0, ENDORSERS)
    top_end = endorser_reward(params, 0)
    cols = {k: [] for k in ("lp", "m_first", "m_later", "g_first", "g_later")}
    for s in domain:
        honest_t = delay(params, s.h, ENDORSERS - s.e)
        honest_r = (full_block if s.a == 0 else 0) + s.e * top_end
        cols["lp"].append(log_slot_probability(cfg.alpha, s))
        cols["m_first"].append(delay(params, s.a, ENDORSERS) - honest_t)
        cols["m_later"].append(delay(params, s.a, s.e) - honest_t)
        first_r = baker_reward(params, s.a, ENDORSERS) + s.e * endorser_reward(params, s.a)
        later_r = baker_reward(params, s.a, s.e) + s.e * endorser_reward(params, s.a)
        cols["g_first"].append(to_units(first_r - honest_r))
        cols["g_later"].append(to_units(later_r - honest_r))
    return {k: np.array(v, dtype=np.float64 if k == "lp" else np.int64) for k, v in cols.items()}


def enumerate_probability(
    params: ProtocolParams,
    cfg: SamplingConfig,
    n: int,
    target: str = "feasible",
    *,
    prune: float = 1e-8,
    max_states: int = 10**9,
    block: int = 2**20,
) -> EstimateResult:
    """Sum exact probabilities of the truncated states where the target holds.

    Only states whose every slot has probability >= ``prune`` are visited, so
    the result is a lower bound; the mass of the discarded states is reported
    as ``truncated_mass``. For ``target="mean_cost"`` the conditional mean cost
    of feasible states is returned alongside the feasibility probability.
    """
    target = normalize_target(target)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    domain = slot_domain(cfg, prune)
    k = len(domain)
    total_states = k**n
    if total_states > max_states:
        raise EnumerationBudgetExceeded(
            f"{k}^{n} = {total_states:.3g} states exceed the enumeration budget of {max_states:.3g}"
        )
    tab = _slot_tables(params, cfg, domain)
    kept_mass = math.fsum(math.exp(x) for x in tab["lp"])

    hit_prob = 0.0
    feasible_prob = 0.0
    cost_weighted = 0.0
    shape = (k,) * n
    for start in range(0, total_states, block):
        idx = np.unravel_index(np.arange(start, min(start + block, total_states)), shape)
        lp = tab["lp"][idx[0]].copy()
        margin = tab["m_first"][idx[0]].copy()
        gain = tab["g_first"][idx[0]].copy()
        for d in idx[1:]:
            lp += tab["lp"][d]
            margin += tab["m_later"][d]
            gain += tab["g_later"][d]
        p = np.exp(lp)
        feasible = margin <= 0
        if target == "profitable":
            hit_prob += float(p[feasible & (gain > 0)].sum())
        else:
            hit_prob += float(p[feasible].sum())
        if target == "mean_cost":
            feasible_prob += float(p[feasible].sum())
            cost_weighted += float((p[feasible] * -gain[feasible]).sum())

    mean_cost = None
    if target == "mean_cost" and feasible_prob > 0:
        mean_cost = cost_weighted / feasible_prob / REWARD_SCALE
    return EstimateResult(
        p_hat=hit_prob,
        ci_low=hit_prob,
        ci_high=hit_prob,
        method="enum",
        samples=total_states,
        seed=cfg.seed,
        alpha=cfg.alpha,
        n=n,
        target=target,
        mean_cost=mean_cost,
        truncated_mass=max(0.0, 1.0 - kept_mass**n),
    )


# -- standard Monte Carlo ----------------------------------------------------


def mc_estimate(
    params: ProtocolParams,
    cfg: SamplingConfig,
    n: int,
    samples: int,
    target: str = "feasible",
    *,
    chunk_size: int = DEFAULT_CHUNK,
    threads: Optional[int] = None,
    confidence: float = 0.99,
) -> EstimateResult:
    """Hit-frequency estimate with a Clopper-Pearson interval.

    For ``target="mean_cost"`` the probability fields describe feasibility and
    ``mean_cost`` is the average cost (XTZ) over feasible draws, or ``None``
    when no draw was feasible.
    """
    target = normalize_target(target)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    need_rewards = target != "feasible"

    def work(chunk: int, m: int) -> tuple[int, int]:
        a, h, e = sample_states(cfg.alpha, m, n, substream(cfg.seed, chunk))
        ev = attack.evaluate_batch(params, a, h, e, rewards=need_rewards)
        if target == "profitable":
            return int(ev.profitable.sum()), 0
        cost = int(ev.cost_units[ev.feasible].sum()) if target == "mean_cost" else 0
        return int(ev.feasible.sum()), cost

    parts = _run_chunks(work, chunk_plan(samples, chunk_size), threads)
    hits = sum(p[0] for p in parts)
    cost_units = sum(p[1] for p in parts)
    lo, hi = clopper_pearson(hits, samples, confidence)
    mean_cost = None
    if target == "mean_cost" and hits > 0:
        mean_cost = cost_units / hits / REWARD_SCALE
    return EstimateResult(
        p_hat=hits / samples,
        ci_low=lo,
        ci_high=hi,
        method="mc",
        samples=samples,
        seed=cfg.seed,
        alpha=cfg.alpha,
        n=n,
        target=target,
        mean_cost=mean_cost,
        hits=hits,
    )


# -- importance sampling -----------------------------------------------------


def choose_alpha_q(alpha: float, n: int) -> float:
    """Proposal stake: ``alpha + 0.05`` up to length 35, ``alpha + 0.03`` beyond, capped at 0.4999."""
    shift = 0.05 if n <= 35 else 0.03
    return min(alpha + shift, 0.4999)


def _combine(acc, part):
    """Chan et al. pairwise update of (count, sum, mean, M2)."""
    n_a, s_a, mean_a, m2_a = acc
    n_b, s_b, mean_b, m2_b = part
    n = n_a + n_b
    delta = mean_b - mean_a
    return n, s_a + s_b, mean_a + delta * n_b / n, m2_a + m2_b + delta * delta * n_a * n_b / n


def is_estimate(
    params: ProtocolParams,
    cfg: SamplingConfig,
    is_cfg: ISConfig,
    n: int,
    samples: int,
    target: str = "feasible",
    *,
    chunk_size: int = DEFAULT_CHUNK,
    threads: Optional[int] = None,
) -> EstimateResult:
    """Likelihood-ratio weighted estimate from states drawn at ``alpha_q``.

    The interval is ``p_hat +/- 2.58 * sigma_hat / sqrt(N)`` clipped to [0, 1].
    ``lr_floor_hits`` counts contributing draws whose likelihood ratio fell
    below ``is_cfg.lr_floor``. With ``alpha_q == alpha`` every ratio is exactly
    1 and ``p_hat`` equals the Monte Carlo frequency on the same draws.
    """
    target = normalize_target(target)
    if target == "mean_cost":
        raise ValueError("importance sampling supports targets 'feasible' and 'profitable' only")
    if is_cfg.alpha_q < cfg.alpha:
        raise ValueError(f"alpha_q ({is_cfg.alpha_q}) must not be below alpha ({cfg.alpha})")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    log_floor = math.log(is_cfg.lr_floor)

    def work(chunk: int, m: int):
        a, h, e = sample_states(is_cfg.alpha_q, m, n, substream(cfg.seed, chunk))
        ev = attack.evaluate_batch(params, a, h, e, rewards=target == "profitable")
        hit = ev.profitable if target == "profitable" else ev.feasible
        log_w = log_state_probability_array(cfg.alpha, a, h, e) - log_state_probability_array(is_cfg.alpha_q, a, h, e)
        x = np.where(hit, np.exp(log_w), 0.0)
        s = float(x.sum())
        mean = s / m
        m2 = float(((x - mean) ** 2).sum())
        return (m, s, mean, m2), int(hit.sum()), int((hit & (log_w < log_floor)).sum())

    parts = _run_chunks(work, chunk_plan(samples, chunk_size), threads)
    acc = parts[0][0]
    for stats_part, _, _ in parts[1:]:
        acc = _combine(acc, stats_part)
    _, total, _, m2 = acc
    p_hat = total / samples
    sigma = math.sqrt(m2 / samples)
    half = Z_99 * sigma / math.sqrt(samples)
    floor_hits = sum(p[2] for p in parts)
    if floor_hits:
        log.warning("%d draws had likelihood ratio below %g; consider a smaller alpha_q", floor_hits, is_cfg.lr_floor)
    return EstimateResult(
        p_hat=p_hat,
        ci_low=max(0.0, p_hat - half),
        ci_high=min(1.0, p_hat + half),
        method="is",
        samples=samples,
        seed=cfg.seed,
        alpha=cfg.alpha,
        n=n,
        target=target,
        hits=sum(p[1] for p in parts),
        alpha_q=is_cfg.alpha_q,
        lr_floor_hits=floor_hits,
    )


def estimate(
    params: ProtocolParams,
    cfg: SamplingConfig,
    n: int,
    *,
    method: str = "mc",
    samples: int = 10**6,
    target: str = "feasible",
    alpha_q: Optional[float] = None,
    threads: Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK,
) -> EstimateResult:
    """Dispatch on ``method``; ``alpha_q`` defaults to :func:`choose_alpha_q`."""
    if method == "enum":
        return enumerate_probability(params, cfg, n, target)
    if method == "mc":
        return mc_estimate(params, cfg, n, samples, target, threads=threads, chunk_size=chunk_size)
    if method == "is":
        q = alpha_q if alpha_q is not None else choose_alpha_q(cfg.alpha, n)
        return is_estimate(params, cfg, ISConfig(q), n, samples, target, threads=threads, chunk_size=chunk_size)
    raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
