from .features import FEATURE_DIM, EmptyMask, featurize
from .gaussian import (
    ACTION_DIM,
    INIT_LOG_STD,
    POLICY_ARCH,
    PolicyModel,
    act,
    bc_loss,
    bc_update,
    distribution,
    new_policy,
    sample_raw,
)
from .oracle import GRID, OracleActor, candidate_actions, make_oracle_policy, oracle_action

__all__ = [
    "ACTION_DIM",
    "FEATURE_DIM",
    "GRID",
    "INIT_LOG_STD",
    "POLICY_ARCH",
    "EmptyMask",
    "OracleActor",
    "PolicyModel",
    "act",
    "bc_loss",
    "bc_update",
    "candidate_actions",
    "distribution",
    "featurize",
    "make_oracle_policy",
    "new_policy",
    "oracle_action",
    "sample_raw",
]
