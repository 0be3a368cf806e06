"""Check reports, operand serialization, and the parallel sweep runner."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from .channels import QuantumOperation
from .config import CheckConfig
from .linalg import DensityOperator


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "rows": m.shape[0],
        "cols": m.shape[1],
        "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def vector_to_json(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def serialize_operand(value) -> object:
    if isinstance(value, DensityOperator):
        return matrix_to_json(value.matrix)
    if isinstance(value, QuantumOperation):
        return value.to_json_dict()
    if isinstance(value, np.ndarray):
        if value.ndim == 1:
            return vector_to_json(value)
        return matrix_to_json(value)
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: serialize_operand(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [serialize_operand(v) for v in value]
    return value


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one randomized trial: signed violation plus its operands."""

    violation: float                 # measured LHS minus bound; > 0 is a failure
    instance: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CheckReport:
    lemma: str
    trials: int
    seed: int
    max_violation: float
    worst_case_instance: dict | None
    passed: bool
    extras: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        doc = {
            "lemma": self.lemma,
            "trials": self.trials,
            "seed": self.seed,
            "max_violation": self.max_violation,
            "worst_case_instance": self.worst_case_instance,
            "pass": self.passed,
        }
        if self.extras:
            doc["extras"] = serialize_operand(self.extras)
        return doc


def _invoke(args):
    fn, cfg, index = args
    return fn(cfg, index)


def run_trials(trial_fn, cfg: CheckConfig, workers: int | None = None) -> list[TrialResult]:
    """Run trial_fn(cfg, i) for each trial, deterministically at any worker count."""
    n = cfg.trials
    w = workers if workers is not None else cfg.resolved_workers()
    if w <= 1 or n < 4:
        return [trial_fn(cfg, i) for i in range(n)]
    jobs = [(trial_fn, cfg, i) for i in range(n)]
    chunk = max(1, n // (4 * w))
    with ProcessPoolExecutor(max_workers=w, mp_context=get_context("fork")) as pool:
        return list(pool.map(_invoke, jobs, chunksize=chunk))


def run_check(lemma: str, trial_fn, cfg: CheckConfig,
              workers: int | None = None) -> CheckReport:
    """Sweep a lemma's trial function and assemble the report.

    The worst case is the first trial attaining the maximum violation, so the
    report is identical regardless of parallelism.
    """
    results = run_trials(trial_fn, cfg, workers)
    worst = max(range(len(results)), key=lambda i: results[i].violation)
    max_violation = results[worst].violation
    extras: dict = {"worst_trial_index": worst}
    for r in results:
        for key, value in r.extras.items():
            if isinstance(value, (int, float)):
                agg = extras.setdefault("max_" + key, value)
                extras["max_" + key] = max(agg, value)
    return CheckReport(
        lemma=lemma,
        trials=cfg.trials,
        seed=cfg.seed,
        max_violation=float(max_violation),
        worst_case_instance=serialize_operand(results[worst].instance) or None,
        passed=bool(max_violation <= 0.0),
        extras=extras,
    )


def report_to_json(report: CheckReport, indent: int | None = 2) -> str:
    return json.dumps(report.to_json_dict(), sort_keys=True, indent=indent)
