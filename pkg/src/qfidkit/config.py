"""Tolerance and sweep configuration objects."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, asdict


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances, relative to Frobenius norm where noted.

    Double precision on dims <= 64 leaves at least six digits of headroom
    over the defaults.
    """

    herm: float = 1e-9       # Hermiticity deviation, relative
    trace: float = 1e-9      # trace / identity deviation
    psd: float = 1e-9        # allowed negative-eigenvalue magnitude
    svd: float = 1e-8        # decomposition residuals, relative
    opt: float = 1e-6        # optimizer slack (minima, orderings)
    eig_floor: float = 1e-14  # eigenvalues below this count as exact zeros
    tensor_power_cap: int = 3
    block_dim_cap: int = 4096

    def scaled(self, tol: float, norm: float) -> float:
        return tol * max(1.0, norm)


DEFAULT_TOL = Tolerances()


def worker_count() -> int:
    """Parallelism cap from the QFIDKIT_WORKERS environment variable (default 1)."""
    raw = os.environ.get("QFIDKIT_WORKERS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


@dataclass(frozen=True)
class CheckConfig:
    """Configuration for randomized property sweeps.

    ``strength`` scales the perturbed-identity instance generator; the named
    bound slots (eta_max etc.) cap the hypothesis parameters of each lemma.
    """

    trials: int = 1000
    dim: int = 4
    seed: int = 0
    slack: float = 1e-8      # additive tolerance on every asserted bound
    strength: float = 0.1    # perturbation scale s for high-fidelity instances
    eta_max: float = 0.1     # composition / three-halves hypothesis cap
    delta_max: float = 0.2   # trace-norm cap for the F_e continuity check
    workers: int | None = None  # None: resolve from QFIDKIT_WORKERS

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")

    def resolved_workers(self) -> int:
        return self.workers if self.workers is not None else worker_count()

    def snapshot(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class OptimizerConfig:
    """Multi-start settings for the density-operator maximizer."""

    restarts: int = 16
    max_iterations: int = 300
    value_tolerance: float = 1e-8
    fd_step: float = 1e-5
    seed: int = 0

    def snapshot(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SphereOptimizerConfig:
    """Projected-gradient settings for the minimum pure-state fidelity search."""

    restarts: int = 32
    max_iterations: int = 500
    improvement_tolerance: float = 1e-12
    initial_step: float = 0.5
    seed: int = 0
