"""Decoupled play/observe adversarial bandit with regret accounting and an experiment runner."""

__version__ = "0.1.0"

from .environments import (  # noqa: E402
    BernoulliSpec,
    ScheduleSpec,
    bernoulli_env,
    fixed_env,
    schedule_env,
)
from .metrics import RegretReport, RunTrace, g_max, play_frequency, realized_reward, weak_regret  # noqa: E402
from .policy import (  # noqa: E402
    ArmPair,
    PolicyParams,
    PolicyState,
    RoundRecord,
    default_params,
    distribution,
    estimate,
    new_policy,
    run_round,
    sample_arms,
    update,
)
