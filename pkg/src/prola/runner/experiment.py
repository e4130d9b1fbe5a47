"""Seeded Monte Carlo replications of policy x environment."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import metrics
from ..environments import fixed_env
from ..metrics import RegretReport, RunTrace
from ..policy import RoundRecord, new_policy, run_round, sample_pair
from ..streams import replication_seed, replication_streams
from .config import ExperimentConfig

log = logging.getLogger(__name__)


@dataclass
class ReplicationResult:
    replication: int
    seed: int
    report: RegretReport
    frequency: np.ndarray          # full-horizon play frequency per arm
    snapshot_rounds: np.ndarray
    snapshots: np.ndarray          # recorded play distributions at snapshot rounds
    regret_curve: np.ndarray       # prefix weak regret at snapshot rounds
    trace: RunTrace | None = None  # kept for single-replication runs only


@dataclass
class AggregateResult:
    config: ExperimentConfig
    replications: list[ReplicationResult]
    mean_regret: float
    std_regret: float
    mean_frequency: np.ndarray
    snapshot_rounds: np.ndarray
    mean_trajectory: np.ndarray       # rounds x K
    mean_bi_trajectory: np.ndarray    # probability of each run's own best arm
    mean_regret_curve: np.ndarray

    @property
    def mean_time_averaged_regret(self) -> float:
        return self.mean_regret / self.config.T


def _baseline_trace(config: ExperimentConfig, matrix: np.ndarray, rng: np.random.Generator) -> RunTrace:
    K = config.K
    if config.policy == "uniform-random":
        dist = np.full(K, 1.0 / K)
    else:
        dist = np.zeros(K)
        dist[metrics.g_max(matrix)[1]] = 1.0
    dist.flags.writeable = False
    records = []
    for t in range(1, config.T + 1):
        pair = sample_pair(dist, rng)
        x = matrix[t - 1]
        records.append(RoundRecord(t, pair.played, pair.observed, int(x[pair.observed]),
                                   int(x[pair.played]), dist))
    return RunTrace(records, matrix)


def simulate_replication(config: ExperimentConfig, replication: int) -> RunTrace:
    """Run one replication and return its full trace.

    The environment is realized for all T rounds up front from its own
    stream; this consumes that stream exactly as round-by-round draws would.
    """
    env_rng, policy_rng = replication_streams(config.base_seed, replication)
    matrix = config.build_environment(env_rng).take(config.T)
    if config.policy != "prola":
        return _baseline_trace(config, matrix, policy_rng)
    env = fixed_env(matrix)
    state = new_policy(config.params)
    records = []
    for _ in range(config.T):
        state, rec = run_round(state, env, policy_rng)
        records.append(rec)
    return RunTrace(records, matrix)


def summarize(config: ExperimentConfig, replication: int, trace: RunTrace,
              keep_trace: bool = False) -> ReplicationResult:
    report = metrics.weak_regret(trace)
    rounds, snaps = metrics.distribution_trajectory(trace, config.snapshot_every)
    return ReplicationResult(
        replication=replication,
        seed=replication_seed(config.base_seed, replication),
        report=report,
        frequency=metrics.play_frequency(trace),
        snapshot_rounds=rounds,
        snapshots=snaps,
        regret_curve=metrics.regret_curve(trace, rounds),
        trace=trace if keep_trace else None,
    )


def _run_one(args: tuple[ExperimentConfig, int]) -> ReplicationResult:
    config, r = args
    trace = simulate_replication(config, r)
    return summarize(config, r, trace, keep_trace=config.replications == 1)


def map_replications(func, config: ExperimentConfig, jobs: int = 1, replications=None) -> list:
    """Apply ``func((config, r))`` to every replication, results in index order."""
    reps = range(config.replications) if replications is None else replications
    tasks = [(config, r) for r in reps]
    if jobs <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, tasks))


def aggregate(config: ExperimentConfig, results: list[ReplicationResult]) -> AggregateResult:
    results = sorted(results, key=lambda r: r.replication)
    if [r.replication for r in results] != list(range(config.replications)):
        raise ValueError("replication results do not cover 0..R-1 exactly once")
    regrets = [r.report.weak_regret for r in results]
    bi = [r.snapshots[:, r.report.best_arm] for r in results]
    return AggregateResult(
        config=config,
        replications=results,
        mean_regret=metrics.stable_mean(regrets),
        std_regret=metrics.stable_std(regrets),
        mean_frequency=metrics.stable_column_mean(r.frequency for r in results),
        snapshot_rounds=results[0].snapshot_rounds,
        mean_trajectory=metrics.stable_column_mean(r.snapshots for r in results),
        mean_bi_trajectory=metrics.stable_column_mean(bi),
        mean_regret_curve=metrics.stable_column_mean(r.regret_curve for r in results),
    )


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> AggregateResult:
    """Run all replications (optionally across ``jobs`` processes) and aggregate.

    Output does not depend on ``jobs``: each replication owns its streams and
    results are collected in replication order.
    """
    log.info("running %s: K=%d T=%d R=%d policy=%s", config.name, config.K, config.T,
             config.replications, config.policy)
    return aggregate(config, map_replications(_run_one, config, jobs))
