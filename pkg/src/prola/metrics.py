"""Regret and convergence accounting over realized runs.

Reward and regret totals are integers computed exactly; only frequencies,
distributions and cross-replication means are floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ArmCountMismatch, EmptyWindow, MalformedMatrix
from .policy import RoundRecord


def as_reward_matrix(reward_matrix) -> np.ndarray:
    m = np.asarray(reward_matrix)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise MalformedMatrix(f"reward matrix must be a non-empty T x K table, got shape {m.shape}")
    if m.dtype == bool or not np.all((m == 0) | (m == 1)):
        raise MalformedMatrix("reward matrix entries must be 0 or 1")
    return m.astype(np.int64)


@dataclass
class RunTrace:
    """Everything realized in one replication: per-round records and the full reward table."""

    records: list[RoundRecord]
    reward_matrix: np.ndarray

    def __post_init__(self) -> None:
        self.reward_matrix = as_reward_matrix(self.reward_matrix)
        T, K = self.reward_matrix.shape
        if len(self.records) != T:
            raise MalformedMatrix(f"{len(self.records)} records but {T} reward rows")
        for rec in self.records:
            if rec.distribution.shape != (K,):
                raise ArmCountMismatch(f"record at round {rec.t} has K={rec.distribution.shape[0]}, expected {K}")

    @property
    def horizon(self) -> int:
        return self.reward_matrix.shape[0]

    @property
    def num_arms(self) -> int:
        return self.reward_matrix.shape[1]

    @cached_property
    def played(self) -> np.ndarray:
        return np.fromiter((r.played for r in self.records), dtype=np.int64, count=len(self.records))

    @cached_property
    def observed(self) -> np.ndarray:
        return np.fromiter((r.observed for r in self.records), dtype=np.int64, count=len(self.records))

    @cached_property
    def distributions(self) -> np.ndarray:
        return np.stack([r.distribution for r in self.records])

    def save(self, path: str | Path) -> None:
        """Write the trace to a ``.npz`` archive."""
        np.savez(
            path,
            rounds=np.array([r.t for r in self.records]),
            played=self.played,
            observed=self.observed,
            observed_reward=np.array([r.observed_reward for r in self.records]),
            played_reward=np.array([r.played_reward for r in self.records]),
            distributions=self.distributions,
            reward_matrix=self.reward_matrix,
        )

    @classmethod
    def load(cls, path: str | Path) -> RunTrace:
        with np.load(path) as z:
            records = [
                RoundRecord(int(t), int(i), int(j), int(xo), int(xp), d)
                for t, i, j, xo, xp, d in zip(z["rounds"], z["played"], z["observed"],
                                              z["observed_reward"], z["played_reward"],
                                              z["distributions"])
            ]
            return cls(records, z["reward_matrix"])


@dataclass(frozen=True)
class RegretReport:
    g_max: int
    g_policy: int
    weak_regret: int
    best_arm: int  # 0-based

    def time_averaged(self, horizon: int) -> float:
        return self.weak_regret / horizon


def g_max(reward_matrix) -> tuple[int, int]:
    """Best fixed arm's realized total and its (0-based, lowest on ties) index."""
    totals = as_reward_matrix(reward_matrix).sum(axis=0)
    best = int(np.argmax(totals))
    return int(totals[best]), best


def realized_reward(trace: RunTrace) -> int:
    """Sum of rewards at the played arms (what the player actually earned)."""
    m = trace.reward_matrix
    return int(m[np.arange(m.shape[0]), trace.played].sum())


def weak_regret(trace: RunTrace) -> RegretReport:
    value, best = g_max(trace.reward_matrix)
    earned = realized_reward(trace)
    return RegretReport(value, earned, value - earned, best)


def regret_curve(trace: RunTrace, rounds: Sequence[int] | None = None) -> np.ndarray:
    """Weak regret of every prefix ``1..t`` (integer), optionally at selected rounds only."""
    m = trace.reward_matrix
    best_prefix = np.cumsum(m, axis=0).max(axis=1)
    earned_prefix = np.cumsum(m[np.arange(m.shape[0]), trace.played])
    curve = best_prefix - earned_prefix
    if rounds is None:
        return curve
    return curve[np.asarray(rounds, dtype=np.int64) - 1]


def _window_slice(trace: RunTrace, window: tuple[int, int] | None) -> slice:
    if window is None:
        return slice(0, trace.horizon)
    start, end = window
    if end < start:
        raise EmptyWindow(f"window {window} contains no rounds")
    if start < 1 or end > trace.horizon:
        raise EmptyWindow(f"window {window} outside rounds 1..{trace.horizon}")
    return slice(start - 1, end)


def play_frequency(trace: RunTrace, window: tuple[int, int] | None = None) -> np.ndarray:
    """Fraction of rounds in ``window`` (inclusive, 1-based) each arm was played."""
    played = trace.played[_window_slice(trace, window)]
    return np.bincount(played, minlength=trace.num_arms) / played.shape[0]


def distribution_trajectory(trace: RunTrace, sample_every: int) -> tuple[np.ndarray, np.ndarray]:
    """Recorded play distributions at rounds 1, 1 + k, 1 + 2k, ...

    Returns ``(rounds, probs)`` where ``probs`` has one row per sampled round.
    These are the stored snapshots, not recomputed ones.
    """
    if sample_every < 1:
        raise ValueError(f"sample_every must be >= 1, got {sample_every}")
    rounds = np.arange(1, trace.horizon + 1, sample_every)
    return rounds, np.stack([trace.records[t - 1].distribution for t in rounds])


def stable_mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values)


def stable_std(values) -> float:
    """Sample standard deviation (0 for a single value)."""
    values = list(values)
    if len(values) < 2:
        return 0.0
    mu = stable_mean(values)
    return math.sqrt(math.fsum((v - mu) ** 2 for v in values) / (len(values) - 1))


def stable_column_mean(rows) -> np.ndarray:
    """Element-wise mean of equally shaped arrays via compensated summation."""
    stacked = np.stack([np.asarray(r, dtype=float) for r in rows])
    flat = stacked.reshape(stacked.shape[0], -1)
    out = np.fromiter((math.fsum(col) for col in flat.T), dtype=float, count=flat.shape[1])
    return (out / stacked.shape[0]).reshape(stacked.shape[1:])
