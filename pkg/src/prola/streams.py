"""Seeded random streams.

Every stream is a numpy ``Generator`` driven by the counter-based Philox
bit generator.  Replication ``r`` of an experiment with base seed ``s`` uses
seed ``s + r``; that seed is expanded by ``SeedSequence`` into two
independent child streams, one for the environment and one for the policy,
so changing learner parameters never perturbs the realized rewards.
"""

from __future__ import annotations

import numpy as np

BIT_GENERATOR = "Philox"

_ENV, _POLICY = 0, 1


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """Return a Philox-backed generator for ``seed``."""
    if isinstance(seed, (int, np.integer)) and seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(seed))


def as_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    if rng is None:
        return make_rng(0)
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(int(rng))


def replication_seed(base_seed: int, replication: int) -> int:
    return base_seed + replication


def replication_streams(base_seed: int, replication: int) -> tuple[np.random.Generator, np.random.Generator]:
    """(environment stream, policy stream) for one replication."""
    seed = replication_seed(base_seed, replication)
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    children = np.random.SeedSequence(seed).spawn(2)
    return make_rng(children[_ENV]), make_rng(children[_POLICY])
