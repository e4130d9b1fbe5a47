"""Experiment configuration: YAML in, validated ``ExperimentConfig`` out."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..environments import (
    BernoulliSpec,
    ScheduleSpec,
    bernoulli_env,
    generated_probs,
    load_fixed_env,
    schedule_env,
    switch_schedule,
)
from ..errors import InvalidParams, InvalidSpec, MalformedMatrix, ParseError, ValidationError
from ..policy import PolicyParams, default_params

POLICIES = ("prola", "uniform-random", "oracle-best-fixed")
ENV_KINDS = ("bernoulli", "schedule", "fixed")

BERNOULLI_PRESETS = {
    "paper": "published probabilities for K=10; K>10 appends seeded generated arms",
    "paper-k<K>": "same as 'paper' but pins K (e.g. paper-k10, paper-k30)",
}
SCHEDULE_PRESETS = {
    "paper-switch": "'paper' probabilities; arms 6 and 2 swap after round T/2",
}

TOP_KEYS = ("name", "K", "T", "gamma", "eta", "environment", "policy", "replications",
            "base_seed", "snapshot_every", "output_dir")
REQUIRED_KEYS = ("name", "K", "T", "environment")
ENV_KEYS = {
    "bernoulli": ("kind", "preset", "probs"),
    "schedule": ("kind", "preset", "segments"),
    "fixed": ("kind", "path"),
}

_PAPER_K = re.compile(r"^paper-k(\d+)$")


@dataclass(frozen=True)
class EnvironmentConfig:
    kind: str
    preset: str | None = None
    probs: tuple[float, ...] | None = None
    segments: tuple[tuple[int, tuple[float, ...]], ...] | None = None
    path: str | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.preset is not None:
            out["preset"] = self.preset
        if self.probs is not None:
            out["probs"] = list(self.probs)
        if self.segments is not None:
            out["segments"] = [{"start": s, "probs": list(p)} for s, p in self.segments]
        if self.path is not None:
            out["path"] = self.path
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment; ``gamma`` and ``eta`` are never None."""

    name: str
    K: int
    T: int
    gamma: float
    eta: float
    environment: EnvironmentConfig
    policy: str = "prola"
    replications: int = 1
    base_seed: int = 0
    snapshot_every: int = 1
    output_dir: str = "results"
    defaults_applied: tuple[str, ...] = field(default=(), compare=False)

    @property
    def params(self) -> PolicyParams:
        return PolicyParams(self.K, self.gamma, self.eta)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "K": self.K,
            "T": self.T,
            "gamma": self.gamma,
            "eta": self.eta,
            "environment": self.environment.to_dict(),
            "policy": self.policy,
            "replications": self.replications,
            "base_seed": self.base_seed,
            "snapshot_every": self.snapshot_every,
            "output_dir": self.output_dir,
        }

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def with_overrides(self, **changes) -> ExperimentConfig:
        """Re-validate with some top-level fields replaced.

        Changing K or T re-derives gamma/eta if they were defaulted.
        """
        raw = self.to_dict()
        for key in ("gamma", "eta"):
            if key in self.defaults_applied:
                raw.pop(key)
        raw.update(changes)
        return parse_config(raw)

    def build_environment(self, rng):
        """Environment instance for one replication, drawing from ``rng``."""
        env = self.environment
        if env.kind == "fixed":
            return load_fixed_env(env.path)
        if env.kind == "bernoulli":
            return bernoulli_env(_bernoulli_spec(env, self.K), rng)
        return schedule_env(_schedule_spec(env, self.K, self.T), rng)


def _bernoulli_spec(env: EnvironmentConfig, K: int) -> BernoulliSpec:
    if env.probs is not None:
        return BernoulliSpec(env.probs)
    m = _PAPER_K.match(env.preset)
    if m and int(m.group(1)) != K:
        raise InvalidSpec(f"preset {env.preset!r} has K={m.group(1)} but config has K={K}")
    if env.preset == "paper" or m:
        return BernoulliSpec(generated_probs(K))
    raise InvalidSpec(f"unknown bernoulli preset {env.preset!r}")


def _schedule_spec(env: EnvironmentConfig, K: int, T: int) -> ScheduleSpec:
    if env.segments is not None:
        return ScheduleSpec(tuple((s, BernoulliSpec(p)) for s, p in env.segments))
    if env.preset == "paper-switch":
        return switch_schedule(T, K)
    raise InvalidSpec(f"unknown schedule preset {env.preset!r}")


def _int_field(raw: dict, key: str, minimum: int, maximum: int | None = None) -> int:
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{key}: expected an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{key}: must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ValidationError(f"{key}: must be <= {maximum}, got {value}")
    return value


def _float_or_none(raw: dict, key: str) -> float | None:
    value = raw.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{key}: expected a number, got {value!r}")
    return float(value)


def _probs(value, where: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ValidationError(f"{where}: expected a non-empty list of probabilities")
    try:
        return BernoulliSpec(value).probs
    except InvalidSpec as exc:
        raise ValidationError(f"{where}: {exc}") from None


def _parse_environment(raw: Any, K: int, T: int, base_dir: Path | None) -> EnvironmentConfig:
    if not isinstance(raw, dict):
        raise ValidationError("environment: expected a mapping with a 'kind' key")
    kind = raw.get("kind")
    if kind not in ENV_KINDS:
        raise ValidationError(f"environment.kind: expected one of {ENV_KINDS}, got {kind!r}")
    unknown = sorted(set(raw) - set(ENV_KEYS[kind]))
    if unknown:
        raise ValidationError(f"environment: unknown key(s) for kind {kind!r}: {', '.join(unknown)}")

    if kind == "fixed":
        path = raw.get("path")
        if not isinstance(path, str) or not path:
            raise ValidationError("environment.path: a CSV path is required for kind 'fixed'")
        p = Path(path)
        if not p.is_absolute() and base_dir is not None:
            p = base_dir / p
        env = EnvironmentConfig(kind, path=str(p))
        try:
            fixed = env_matrix_shape(env)
        except (OSError, MalformedMatrix) as exc:
            raise ValidationError(f"environment.path: {exc}") from None
        if fixed[1] != K:
            raise ValidationError(f"environment.path: table has {fixed[1]} columns but K={K}")
        if fixed[0] < T:
            raise ValidationError(f"environment.path: table has {fixed[0]} rows but T={T}")
        return env

    preset = raw.get("preset")
    payload_key = "probs" if kind == "bernoulli" else "segments"
    payload = raw.get(payload_key)
    if (preset is None) == (payload is None):
        raise ValidationError(f"environment: give exactly one of 'preset' or '{payload_key}'")

    if kind == "bernoulli":
        env = EnvironmentConfig(kind, preset=preset,
                                probs=None if payload is None else _probs(payload, "environment.probs"))
    else:
        segments = None
        if payload is not None:
            if not isinstance(payload, list) or not payload:
                raise ValidationError("environment.segments: expected a non-empty list")
            segs = []
            for i, seg in enumerate(payload):
                where = f"environment.segments[{i}]"
                if not isinstance(seg, dict) or set(seg) != {"start", "probs"}:
                    raise ValidationError(f"{where}: expected keys 'start' and 'probs'")
                start = _int_field(seg, "start", 1)
                segs.append((start, _probs(seg["probs"], where + ".probs")))
            segments = tuple(segs)
        env = EnvironmentConfig(kind, preset=preset, segments=segments)
    if preset is not None and not isinstance(preset, str):
        raise ValidationError(f"environment.preset: expected a string, got {preset!r}")

    try:
        spec = _bernoulli_spec(env, K) if kind == "bernoulli" else _schedule_spec(env, K, T)
    except InvalidSpec as exc:
        raise ValidationError(f"environment: {exc}") from None
    if spec.num_arms != K:
        raise ValidationError(f"environment: has {spec.num_arms} arms but K={K}")
    return env


def env_matrix_shape(env: EnvironmentConfig) -> tuple[int, int]:
    fixed = load_fixed_env(env.path)
    return fixed.horizon, fixed.num_arms


def parse_config(raw: Any, base_dir: str | Path | None = None) -> ExperimentConfig:
    """Validate a decoded config mapping and resolve defaults."""
    if not isinstance(raw, dict):
        raise ValidationError("config: top level must be a mapping")
    unknown = [k for k in raw if k not in TOP_KEYS]
    if unknown:
        raise ValidationError(f"config: unknown key(s): {', '.join(map(str, unknown))}")
    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise ValidationError(f"config: missing required key(s): {', '.join(missing)}")

    name = raw["name"]
    if not isinstance(name, str) or not name:
        raise ValidationError(f"name: expected a non-empty string, got {name!r}")
    K = _int_field(raw, "K", 2)
    T = _int_field(raw, "T", 1)

    defaults = []
    policy = raw.get("policy", "prola")
    if "policy" not in raw:
        defaults.append("policy")
    if policy not in POLICIES:
        raise ValidationError(f"policy: expected one of {POLICIES}, got {policy!r}")
    for key, default in (("replications", 1), ("base_seed", 0), ("snapshot_every", max(1, T // 500))):
        if key not in raw:
            raw = {**raw, key: default}
            defaults.append(key)
    R = _int_field(raw, "replications", 1)
    base_seed = _int_field(raw, "base_seed", 0, 2**64 - 1)
    snapshot_every = _int_field(raw, "snapshot_every", 1)
    output_dir = raw.get("output_dir")
    if output_dir is None:
        output_dir = str(Path("results") / name)
        defaults.append("output_dir")
    elif not isinstance(output_dir, str) or not output_dir:
        raise ValidationError(f"output_dir: expected a path string, got {output_dir!r}")

    gamma, eta = _float_or_none(raw, "gamma"), _float_or_none(raw, "eta")
    if gamma is None:
        defaults.append("gamma")
    if eta is None:
        defaults.append("eta")
    try:
        params = default_params(K, T, gamma, eta)
    except InvalidParams as exc:
        raise ValidationError(f"gamma/eta: {exc}") from None

    environment = _parse_environment(raw["environment"], K, T,
                                     Path(base_dir) if base_dir is not None else None)
    return ExperimentConfig(
        name=name, K=K, T=T, gamma=params.gamma, eta=params.eta,
        environment=environment, policy=policy, replications=R, base_seed=base_seed,
        snapshot_every=snapshot_every, output_dir=output_dir,
        defaults_applied=tuple(defaults),
    )


def parse_yaml(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark is not None else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ParseError(f"{where}{problem}") from None


def load_config(text: str, base_dir: str | Path | None = None) -> ExperimentConfig:
    """Parse and validate YAML config text.

    Relative ``environment.path`` entries resolve against ``base_dir``.
    """
    return parse_config(parse_yaml(text), base_dir)


SHIPPED_DIR = Path(__file__).resolve().parent.parent / "configs"


def shipped_configs() -> dict[str, Path]:
    return {p.stem: p for p in sorted(SHIPPED_DIR.glob("*.yaml"))}


def resolve_config_path(ref: str) -> Path:
    """A filesystem path, or the name of a shipped config."""
    p = Path(ref)
    if p.exists():
        return p
    shipped = shipped_configs()
    if ref in shipped:
        return shipped[ref]
    raise FileNotFoundError(f"config {ref!r} not found (no such file or shipped config)")


def read_config(ref: str | Path) -> ExperimentConfig:
    path = resolve_config_path(str(ref))
    return load_config(path.read_text(), base_dir=path.parent)
