"""Deterministic random instances: states, channels, subspaces, instruments.

Every generator takes an explicit numpy Generator; ``rng_for(seed, *path)``
derives one from a root seed and an index path, so sweeps give identical
results at any worker count.
"""

from __future__ import annotations

import numpy as np

from .channels import Instrument, QuantumOperation
from .linalg import DensityOperator, Subspace, dag


def rng_for(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar unitary via phase-fixed QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases.conj()


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityOperator:
    """Mixed state from a normalized Wishart factor of the given rank."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ dag(g)
    return DensityOperator(m / np.trace(m).real)


def random_subspace(rng: np.random.Generator, ambient_dim: int, dim: int) -> Subspace:
    return Subspace(random_unitary(rng, ambient_dim)[:, :dim])


def random_channel(rng: np.random.Generator, dim: int, kraus_count: int = 2) -> QuantumOperation:
    """Haar-random trace-preserving channel from a random isometry."""
    big = random_unitary(rng, dim * kraus_count)
    iso = big[:, :dim]  # (dim*kraus_count) x dim isometry
    ops = tuple(iso[i * dim : (i + 1) * dim, :] for i in range(kraus_count))
    return QuantumOperation(ops)


def perturbed_identity_channel(rng: np.random.Generator, dim: int, strength: float,
                               kraus_count: int = 2) -> QuantumOperation:
    """Trace-preserving channel {sqrt(1−s)·I} ∪ {sqrt(s)·B_j}, s = strength.

    Entanglement fidelity is at least 1 − s on every input, which is how the
    high-fidelity hypotheses of the lemma sweeps are met.
    """
    s = float(strength)
    noise = random_channel(rng, dim, kraus_count)
    ops = (np.sqrt(1 - s) * np.eye(dim, dtype=complex),) + tuple(
        np.sqrt(s) * a for a in noise.kraus
    )
    return QuantumOperation(ops)


def random_trace_nonincreasing(rng: np.random.Generator, dim: int,
                               kraus_count: int = 2) -> QuantumOperation:
    """Strictly trace-decreasing map: a random channel with scaled operators."""
    base = random_channel(rng, dim, kraus_count)
    scale = np.sqrt(rng.uniform(0.3, 0.95))
    return QuantumOperation(tuple(scale * a for a in base.kraus))


def split_instrument(rng: np.random.Generator, op: QuantumOperation,
                     branches: int) -> Instrument:
    """Partition a trace-preserving family's Kraus operators into branches."""
    if len(op.kraus) < branches:
        raise ValueError("not enough Kraus operators to split")
    indices = list(range(len(op.kraus)))
    groups: list[list[int]] = [[] for _ in range(branches)]
    for pos, idx in enumerate(indices):
        groups[pos % branches].append(idx)
    return Instrument(tuple(
        QuantumOperation(tuple(op.kraus[i] for i in group))
        for group in groups
    ))
