"""Reorg feasibility, selfish-mining profitability and chain health for Tezos-style PoS."""

__version__ = "0.1.0"

from .protocol import DEFAULT_PARAMS, ProtocolParams, baker_reward, delay, endorser_reward
from .state import AttackState, SamplingConfig, SlotConfig, state_probability
from .attack import AttackEvaluation, evaluate
from .estimators import EstimateResult, ISConfig, enumerate_probability, is_estimate, mc_estimate

__all__ = [
    "DEFAULT_PARAMS",
    "ProtocolParams",
    "baker_reward",
    "delay",
    "endorser_reward",
    "AttackState",
    "SamplingConfig",
    "SlotConfig",
    "state_probability",
    "AttackEvaluation",
    "evaluate",
    "EstimateResult",
    "ISConfig",
    "enumerate_probability",
    "is_estimate",
    "mc_estimate",
]
