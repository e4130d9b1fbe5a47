"""CSV, JSON and SVG artifacts for finished experiments.

All CSVs have a header row, LF line endings and 1-based arm indices.  Each
file is written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path
from typing import Iterable, Sequence

from .. import __version__
from ..policy import eta_bound
from ..streams import BIT_GENERATOR
from . import svg
from .config import ExperimentConfig
from .experiment import AggregateResult

INTERVAL_LABEL = "1 hour"


def _num(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def metadata(config: ExperimentConfig) -> dict:
    return {
        "implementation": "prola",
        "version": __version__,
        "config": config.to_dict(),
        "defaults_applied": list(config.defaults_applied),
        "resolved": {
            "gamma": config.gamma,
            "eta": config.eta,
            "eta_upper_bound": eta_bound(config.K, config.gamma),
        },
        "random": {
            "bit_generator": BIT_GENERATOR,
            "replication_seed": "base_seed + replication",
            "streams": "SeedSequence(seed).spawn(2): [environment, policy]",
            "seeds": [config.base_seed + r for r in range(config.replications)],
        },
        "arm_indexing": "1-based",
        "interval_label": INTERVAL_LABEL,
    }


def render_outputs(result: AggregateResult) -> dict[str, str]:
    """File name -> content for every artifact of ``result``."""
    config = result.config
    K, T = config.K, config.T
    files: dict[str, str] = {}

    files["runs.csv"] = _csv_text(
        ("replication", "seed", "g_max", "g_policy", "weak_regret", "best_arm"),
        ((r.replication, r.seed, r.report.g_max, r.report.g_policy, r.report.weak_regret,
          r.report.best_arm + 1) for r in result.replications),
    )
    rounds = [int(t) for t in result.snapshot_rounds]
    files["trajectory.csv"] = _csv_text(
        ("round", "arm", "probability"),
        ((t, arm + 1, float(result.mean_trajectory[i, arm]))
         for i, t in enumerate(rounds) for arm in range(K)),
    )
    files["frequency.csv"] = _csv_text(
        ("arm", "frequency"),
        ((arm + 1, float(f)) for arm, f in enumerate(result.mean_frequency)),
    )
    files["regret.csv"] = _csv_text(
        ("round", "mean_weak_regret", "mean_time_averaged_regret"),
        ((t, float(v), float(v) / t) for t, v in zip(rounds, result.mean_regret_curve)),
    )
    files["metadata.json"] = json.dumps(metadata(config), indent=2) + "\n"

    label = f"{config.name} (K={K}, {config.policy}, R={config.replications})"
    files["regret.svg"] = svg.line_chart(
        rounds, [("weak regret", result.mean_regret_curve)],
        title=f"Mean weak regret vs round: {label}", xlabel="round t", ylabel="G_max(t) - G(t)")
    files["regret_time_averaged.svg"] = svg.line_chart(
        rounds, [("regret / t", [float(v) / t for t, v in zip(rounds, result.mean_regret_curve)])],
        title=f"Time-averaged weak regret: {label}", xlabel="round t", ylabel="weak regret / t")
    files["bi_probability.svg"] = svg.line_chart(
        rounds, [("best intersection", result.mean_bi_trajectory)],
        title=f"Play probability of the best intersection: {label}", xlabel="round t",
        ylabel="probability", ylim=(0.0, 1.0))
    best = max(range(K), key=lambda a: (result.mean_frequency[a], -a))
    files["assignment_probability.svg"] = svg.line_chart(
        rounds, [(f"arm {a + 1}", result.mean_trajectory[:, a]) for a in range(K)],
        title=f"Assignment probability per intersection: {label}", xlabel="round t",
        ylabel="probability", ylim=(0.0, 1.0), highlight=f"arm {best + 1}")

    if config.replications == 1:
        trace = result.replications[0].trace
        files["violations.csv"] = _csv_text(
            ("round", "arm", "reward"),
            ((t + 1, arm + 1, int(trace.reward_matrix[t, arm])) for t in range(T) for arm in range(K)),
        )
        files["plays.csv"] = _csv_text(
            ("round", "played", "observed", "observed_reward", "played_reward"),
            ((r.t, r.played + 1, r.observed + 1, r.observed_reward, r.played_reward)
             for r in trace.records),
        )
        files["plays.svg"] = svg.raster(
            [(r.t, r.played + 1) for r in trace.records], num_rows=K, num_cols=T,
            title=f"Marked-car assignment per round: {config.name}", xlabel="round t",
            ylabel="intersection")
        hits = trace.reward_matrix.nonzero()
        files["violations.svg"] = svg.raster(
            [(int(t) + 1, int(a) + 1) for t, a in zip(*hits)], num_rows=K, num_cols=T,
            title=f"Realized violations: {config.name}", xlabel="round t", ylabel="intersection")
    return files


def write_files(files: dict[str, str], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(files):
        path = out / name
        _atomic_write(path, files[name])
        written.append(path)
    return written


def write_outputs(result: AggregateResult, config: ExperimentConfig | None = None,
                  out_dir: str | Path | None = None) -> list[Path]:
    """Render everything first, then write; returns the written paths."""
    config = config or result.config
    files = render_outputs(result)
    return write_files(files, out_dir if out_dir is not None else config.output_dir)


def sweep_summary(results: dict[int, AggregateResult]) -> str:
    return _csv_text(
        ("K", "T", "replications", "mean_weak_regret", "std_weak_regret", "mean_time_averaged_regret"),
        ((k, r.config.T, r.config.replications, r.mean_regret, r.std_regret,
          r.mean_time_averaged_regret) for k, r in sorted(results.items())),
    )


def write_sweep_outputs(results: dict[int, AggregateResult], out_dir: str | Path) -> list[Path]:
    ks = sorted(results)
    first = results[ks[0]].config
    files = {
        "summary.csv": sweep_summary(results),
        "regret_vs_k.svg": svg.bar_chart(
            [f"K={k}" for k in ks], [results[k].mean_regret for k in ks],
            errors=[results[k].std_regret for k in ks],
            title=f"Mean weak regret at T={first.T} ({first.policy}, R={first.replications})",
            xlabel="number of intersections", ylabel="mean weak regret"),
    }
    return write_files(files, out_dir)
