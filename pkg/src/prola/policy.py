"""PROLA: play with one agent, observe with another.

Two agents share K arms each round.  The *player* draws an arm from an
exponential-weights distribution mixed with uniform exploration and collects
a reward it never sees.  The *observer* draws uniformly among the remaining
K - 1 arms and reports the reward there.  Only that observed reward, rescaled
by the inverse probability of observing the arm, feeds back into the
weights.

Weights are kept as natural logarithms and normalized with a max-shift, so
long horizons cannot overflow.  Arm indices are 0-based throughout the
Python API; files and the CLI use 1-based indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArmCountMismatch, DegenerateDistribution, InvalidParams

# 1 - p(observed) at or below this is treated as numerical corruption.
DEGENERACY_EPS = 1e-15


@dataclass(frozen=True)
class PolicyParams:
    """Arm count, exploration rate ``gamma`` and learning rate ``eta``."""

    num_arms: int
    gamma: float
    eta: float

    def __post_init__(self) -> None:
        k, gamma, eta = self.num_arms, self.gamma, self.eta
        if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 2:
            raise InvalidParams(f"num_arms must be an integer K >= 2, got {k!r}")
        if not (isinstance(gamma, (int, float)) and 0.0 < gamma < 1.0):
            raise InvalidParams(f"gamma must satisfy 0 < gamma < 1, got {gamma!r}")
        bound = eta_bound(k, gamma)
        if not (isinstance(eta, (int, float)) and math.isfinite(eta) and 0.0 < eta):
            raise InvalidParams(f"eta must satisfy 0 < eta, got {eta!r}")
        if eta > bound:
            raise InvalidParams(
                f"eta must satisfy eta <= gamma/(2(K-1)) = {bound!r} (η ≤ γ/(2(K−1))), got {eta!r}"
            )


def eta_bound(num_arms: int, gamma: float) -> float:
    """Largest permitted learning rate for ``num_arms`` and ``gamma``."""
    return gamma / (2 * (num_arms - 1))


def default_gamma(num_arms: int, horizon: int) -> float:
    """``min(0.5, sqrt(K ln K / T))``; always inside (0, 1) for K >= 2."""
    if num_arms < 2 or horizon < 1:
        raise InvalidParams(f"need K >= 2 and T >= 1, got K={num_arms}, T={horizon}")
    return min(0.5, math.sqrt(num_arms * math.log(num_arms) / horizon))


def default_params(num_arms: int, horizon: int, gamma: float | None = None,
                   eta: float | None = None) -> PolicyParams:
    """Resolve unset rates: default gamma, and eta at the top of its range."""
    if gamma is None:
        gamma = default_gamma(num_arms, horizon)
    if eta is None:
        eta = eta_bound(num_arms, gamma)
    return PolicyParams(num_arms, gamma, eta)


@dataclass(frozen=True)
class PolicyState:
    """Learner state at the start of round ``t``."""

    params: PolicyParams
    log_weights: np.ndarray
    t: int = 1

    def __post_init__(self) -> None:
        lw = np.asarray(self.log_weights, dtype=float)
        if lw.shape != (self.params.num_arms,):
            raise ArmCountMismatch(
                f"log_weights has shape {lw.shape}, expected ({self.params.num_arms},)"
            )
        if not np.all(np.isfinite(lw)):
            raise ValueError("log_weights must be finite")
        lw.flags.writeable = False
        object.__setattr__(self, "log_weights", lw)

    @property
    def num_arms(self) -> int:
        return self.params.num_arms


@dataclass(frozen=True)
class ArmPair:
    """Arm played (unobserved reward) and arm observed in one round."""

    played: int
    observed: int

    def __post_init__(self) -> None:
        if self.played == self.observed:
            raise ValueError(f"played and observed arms must differ, both are {self.played}")


@dataclass(frozen=True)
class RoundRecord:
    """Outcome of one round.

    ``distribution`` is the play distribution the arms were sampled from,
    i.e. the one computed before the round's update.
    """

    t: int
    played: int
    observed: int
    observed_reward: int
    played_reward: int
    distribution: np.ndarray = field(repr=False)


def new_policy(params: PolicyParams) -> PolicyState:
    """Fresh learner: every weight equal to one, round counter at 1."""
    return PolicyState(params, np.zeros(params.num_arms), 1)


def mix_distribution(log_weights: np.ndarray, gamma: float) -> np.ndarray:
    k = log_weights.shape[0]
    w = np.exp(log_weights - log_weights.max())
    return (1.0 - gamma) * (w / w.sum()) + gamma / k


def distribution(state: PolicyState) -> np.ndarray:
    """Play distribution for the current round, as a length-K array."""
    return mix_distribution(state.log_weights, state.params.gamma)


def sample_pair(probs: np.ndarray, rng: np.random.Generator) -> ArmPair:
    """Draw the played arm from ``probs`` and a distinct observed arm.

    The played arm comes from inverse-CDF sampling over the left-to-right
    cumulative sums, with the last bin absorbing any rounding residue.  The
    observed arm indexes uniformly into the ordered complement.
    """
    k = probs.shape[0]
    u = rng.random()
    played = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    if played >= k:
        played = k - 1
    observed = int(rng.integers(k - 1))
    if observed >= played:
        observed += 1
    return ArmPair(played, observed)


def sample_arms(state: PolicyState, rng: np.random.Generator) -> ArmPair:
    return sample_pair(distribution(state), rng)


def _check_binary(reward) -> int:
    if reward not in (0, 1):
        raise ValueError(f"rewards are binary, got {reward!r}")
    return int(reward)


def estimate(observed_reward: int, observed_arm: int, dist: np.ndarray, num_arms: int) -> float:
    """Importance-weighted reward estimate for the observed arm.

    The observer sees arm j with probability (1 - p(j)) / (K - 1), so the
    estimate is ``x * (K - 1) / (1 - p(j))``; every other arm implicitly
    gets 0.
    """
    x = _check_binary(observed_reward)
    miss = 1.0 - float(dist[observed_arm])
    if miss <= DEGENERACY_EPS:
        raise DegenerateDistribution(
            f"1 - p(arm {observed_arm}) = {miss!r}; the distribution is degenerate"
        )
    return x * (num_arms - 1) / miss


def update(state: PolicyState, pair: ArmPair, observed_reward: int,
           dist: np.ndarray | None = None) -> PolicyState:
    """Exponential-weight step on the observed arm only.

    ``dist`` may be passed to avoid recomputing the pre-update distribution;
    it must equal ``distribution(state)``.
    """
    k = state.params.num_arms
    if not (0 <= pair.played < k and 0 <= pair.observed < k):
        raise ArmCountMismatch(f"arm pair {pair} out of range for K={k}")
    if dist is None:
        dist = distribution(state)
    x_hat = estimate(observed_reward, pair.observed, dist, k)
    if x_hat == 0.0:
        return PolicyState(state.params, state.log_weights, state.t + 1)
    lw = state.log_weights.copy()
    lw[pair.observed] += state.params.eta * x_hat
    return PolicyState(state.params, lw, state.t + 1)


def run_round(state: PolicyState, env, rng: np.random.Generator) -> tuple[PolicyState, RoundRecord]:
    """Play one round against ``env``.

    The whole reward vector is realized first; the update sees only the
    observed entry, the played entry goes into the record for accounting.
    """
    if env.num_arms != state.params.num_arms:
        raise ArmCountMismatch(
            f"environment has {env.num_arms} arms, policy has {state.params.num_arms}"
        )
    x = env.next_rewards()
    dist = distribution(state)
    pair = sample_pair(dist, rng)
    seen = int(x[pair.observed])
    record = RoundRecord(state.t, pair.played, pair.observed, seen, int(x[pair.played]), dist)
    return update(state, pair, seen, dist), record
