"""Avoidance learning under feature-based partial observability."""

from .task import (
    Observation,
    Policy,
    TaskSpec,
    Violation,
    extend_features,
    is_blocked,
    prop,
    validate_task,
)
from .oracle import (
    MaximalPolicy,
    StrategyVerdict,
    has_strategy,
    is_strategy,
    maximal_policy,
    union_policies,
)
from .learning import (
    LearnerMemory,
    LearnerSession,
    RunConfig,
    RunTrace,
    is_settled,
    run,
    segment_trials,
)

__version__ = "0.1.0"
