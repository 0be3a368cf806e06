"""I.i.d. quantum sources, typical subspaces, and quantum data compression."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .channels import QuantumOperation
from .config import DEFAULT_TOL, Tolerances
from .errors import DegenerateInputError, PreconditionError, ResourceLimitError
from .linalg import (
    DensityOperator,
    Subspace,
    dag,
    orthonormal_complement,
    tensor,
)


def _spectrum_entropy_bits(values, floor: float = 1e-14) -> float:
    v = np.clip(np.asarray(values, dtype=float), 0.0, None)
    v = v[v > floor]
    return float(-np.sum(v * np.log2(v)))


@dataclass(frozen=True)
class IIDSource:
    """Memoryless source: block n emits base^(⊗n)."""

    base: DensityOperator
    label: str = "iid"

    @property
    def dim(self) -> int:
        return self.base.dim

    def entropy_rate(self) -> float:
        """S(base) in bits; the i.i.d. closed form of the block-entropy limit."""
        values, _ = self.base.eigensystem()
        return _spectrum_entropy_bits(values)

    def eigensystem(self):
        return self.base.eigensystem()


def block_state(src: IIDSource, n: int, tol: Tolerances = DEFAULT_TOL) -> DensityOperator:
    """n-fold tensor power of the base state."""
    if n < 1 or src.dim ** n > tol.block_dim_cap:
        raise ResourceLimitError(
            f"block dim {src.dim}^{n} exceeds cap {tol.block_dim_cap}"
        )
    out = src.base.matrix
    for _ in range(n - 1):
        out = tensor(out, src.base.matrix)
    return DensityOperator(out)


def _multiset_counts(dim: int, n: int):
    """Count vectors c (len dim, sum n) with their multinomial multiplicities."""
    for combo in itertools.combinations_with_replacement(range(dim), n):
        counts = [0] * dim
        for idx in combo:
            counts[idx] += 1
        mult = math.factorial(n)
        for c in counts:
            mult //= math.factorial(c)
        yield tuple(counts), mult


def _eigenvalue_for_counts(values: np.ndarray, counts) -> float:
    """Canonical block eigenvalue: product of powers, stable across tuple orderings."""
    lam = 1.0
    for v, c in zip(values, counts):
        if c:
            lam *= float(v) ** c
    return lam


@dataclass(eq=False)
class TypicalSubspace:
    """Span of block eigenvectors with eigenvalues in the 2^{−n(S±ε)} window."""

    n: int
    epsilon: float
    entropy_rate: float
    weight: float
    dim: int
    lower: float
    upper: float
    base_values: np.ndarray = field(repr=False)
    base_vectors: np.ndarray = field(repr=False)
    typical_counts: tuple = field(repr=False)

    @property
    def ambient_dim(self) -> int:
        return len(self.base_values) ** self.n

    @property
    def delta(self) -> float:
        """Atypical weight δ_n = 1 − tr(Λ ρ^(n))."""
        return 1.0 - self.weight

    def is_empty(self) -> bool:
        return self.dim == 0

    def _typical_tuples(self):
        typical = set(self.typical_counts)
        d = len(self.base_values)
        for combo in itertools.product(range(d), repeat=self.n):
            counts = [0] * d
            for idx in combo:
                counts[idx] += 1
            if tuple(counts) in typical:
                yield combo

    @cached_property
    def eigen_basis(self):
        """(eigenvalues, matrix of typical eigenvector columns), product order."""
        d = len(self.base_values)
        columns = []
        values = []
        for combo in self._typical_tuples():
            vec = self.base_vectors[:, combo[0]]
            for idx in combo[1:]:
                vec = np.kron(vec, self.base_vectors[:, idx])
            columns.append(vec)
            values.append(_eigenvalue_for_counts(self.base_values, np.bincount(combo, minlength=d)))
        if not columns:
            return np.zeros(0), np.zeros((d**self.n, 0), dtype=complex)
        return np.array(values), np.column_stack(columns)

    @cached_property
    def basis(self) -> Subspace:
        _, cols = self.eigen_basis
        if cols.shape[1] == 0:
            raise DegenerateInputError("typical subspace is empty")
        return Subspace(cols)

    @cached_property
    def projector(self) -> np.ndarray:
        _, cols = self.eigen_basis
        return cols @ dag(cols)

    def dimension_bounds_ok(self, delta: float) -> bool:
        """(1−δ)·2^{n(S−ε)} <= dim <= 2^{n(S+ε)}, lower side when weight >= 1−δ."""
        upper_ok = self.dim <= 2.0 ** (self.n * (self.entropy_rate + self.epsilon)) * (1 + 1e-12)
        if self.weight < 1.0 - delta:
            return upper_ok
        lower = (1.0 - delta) * 2.0 ** (self.n * (self.entropy_rate - self.epsilon))
        return upper_ok and self.dim >= lower * (1 - 1e-12)


def typical_subspace(src: IIDSource, n: int, epsilon: float,
                     tol: Tolerances = DEFAULT_TOL) -> TypicalSubspace:
    """Typical subspace data for block length n and window half-width ε.

    Eigenvalues exactly on a window edge are included (both inequalities are
    non-strict); a degenerate eigenvalue is judged once per shared value, so
    whole eigenspaces enter or leave together. The projector and basis are
    built lazily; weight and dimension need only the base eigensystem.
    """
    if epsilon <= 0:
        raise PreconditionError("epsilon must be positive")
    if src.dim ** n > tol.block_dim_cap:
        raise ResourceLimitError(f"block dim {src.dim}^{n} exceeds cap {tol.block_dim_cap}")
    values, vectors = src.eigensystem()
    values = np.clip(values, 0.0, None)
    entropy = _spectrum_entropy_bits(values)
    lower = 2.0 ** (-n * (entropy + epsilon))
    upper = 2.0 ** (-n * (entropy - epsilon))
    weight = 0.0
    dim = 0
    typical_counts = []
    for counts, mult in _multiset_counts(src.dim, n):
        lam = _eigenvalue_for_counts(values, counts)
        if lower <= lam <= upper:
            typical_counts.append(counts)
            weight += mult * lam
            dim += mult
    return TypicalSubspace(
        n=n,
        epsilon=epsilon,
        entropy_rate=entropy,
        weight=float(weight),
        dim=int(dim),
        lower=lower,
        upper=upper,
        base_values=values,
        base_vectors=vectors,
        typical_counts=tuple(typical_counts),
    )


@dataclass(frozen=True)
class QAEPRow:
    n: int
    epsilon: float
    weight: float
    dim: int
    log2dim_over_n: float


def qaep_profile(src: IIDSource, epsilon: float, n_range,
                 tol: Tolerances = DEFAULT_TOL) -> list[QAEPRow]:
    """Typical-subspace weight/dimension table over block lengths.

    The weight trend is reported for inspection; monotonicity in n is not
    asserted (only the limiting behaviour is a theorem).
    """
    rows = []
    for n in n_range:
        ts = typical_subspace(src, int(n), epsilon, tol)
        rate = math.log2(ts.dim) / n if ts.dim > 0 else float("-inf")
        rows.append(QAEPRow(int(n), epsilon, ts.weight, ts.dim, rate))
    return rows


def qaep_profile_csv(rows: list[QAEPRow], path: str):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "epsilon", "weight", "dim", "log2dim_over_n"])
        for row in rows:
            writer.writerow([row.n, repr(row.epsilon), repr(row.weight),
                             row.dim, repr(row.log2dim_over_n)])


def apply_block_state(base: DensityOperator, n: int, vec: np.ndarray) -> np.ndarray:
    """(base^{⊗n}) |v⟩ without materializing the block matrix."""
    d = base.dim
    tensor_vec = np.asarray(vec, dtype=complex).reshape((d,) * n)
    for axis in range(n):
        tensor_vec = np.tensordot(base.matrix, tensor_vec, axes=(1, axis))
        tensor_vec = np.moveaxis(tensor_vec, 0, axis)
    return tensor_vec.reshape(-1)


@dataclass(frozen=True)
class SmallSubspaceCheck:
    probability: float
    slack_bound: float
    passed: bool
    paper_bound: float
    paper_bound_satisfied: bool
    skipped: bool = False
    reason: str = ""


def small_subspace_probability_bound(src: IIDSource, n: int, epsilon: float,
                                     delta: float, subspace: Subspace,
                                     tol: Tolerances = DEFAULT_TOL) -> SmallSubspaceCheck:
    """Probability in a subspace smaller than the typical lower bound.

    Asserts the finite-n slack form tr(Π ρ^(n)) <= δ + 2^{−n(S−ε)}·dim(Π);
    the asymptotic bound tr(Π ρ^(n)) <= δ is measured and reported only.
    Preconditions (small enough Π, QAEP weight at (n, ε, δ)) failing produce
    a skipped result rather than an error.
    """
    ts = typical_subspace(src, n, epsilon, tol)
    lower_dim = (1.0 - delta) * 2.0 ** (n * (ts.entropy_rate - epsilon))
    if subspace.dim >= lower_dim:
        return SmallSubspaceCheck(0.0, 0.0, False, delta, False, True,
                                  f"dim(Π)={subspace.dim} not below {lower_dim:.3f}")
    if ts.weight < 1.0 - delta:
        return SmallSubspaceCheck(0.0, 0.0, False, delta, False, True,
                                  f"QAEP weight {ts.weight:.6f} below 1-δ")
    prob = 0.0
    for k in range(subspace.dim):
        col = subspace.basis[:, k]
        prob += float(np.vdot(col, apply_block_state(src.base, n, col)).real)
    per_state = 2.0 ** (-n * (ts.entropy_rate - epsilon))
    slack_bound = delta + per_state * subspace.dim
    return SmallSubspaceCheck(
        probability=prob,
        slack_bound=slack_bound,
        passed=prob <= slack_bound + tol.svd,
        paper_bound=delta,
        paper_bound_satisfied=prob <= delta + tol.svd,
    )


@dataclass(frozen=True)
class CompressionScheme:
    """Trace-preserving map into the typical subspace: Λ(·)Λ plus a garbage branch."""

    n: int
    typical: TypicalSubspace
    garbage_map: QuantumOperation

    def total_map(self) -> QuantumOperation:
        return QuantumOperation((self.typical.projector,) + self.garbage_map.kraus)


def compression_scheme(src: IIDSource, n: int, epsilon: float,
                       tol: Tolerances = DEFAULT_TOL) -> CompressionScheme:
    """Build the compression map C = Λ(·)Λ + C₂.

    C₂ funnels the atypical complement onto the highest-weight typical
    eigenvector via the Kraus family {|t₁⟩⟨e_k|} over an orthonormal
    complement basis, so C is trace-preserving with output supported in the
    typical subspace.
    """
    ts = typical_subspace(src, n, epsilon, tol)
    if ts.is_empty():
        raise DegenerateInputError("typical subspace is empty; no compression target")
    values, cols = ts.eigen_basis
    target = cols[:, int(np.argmax(values))].reshape(-1, 1)
    complement = orthonormal_complement(cols, ts.ambient_dim, tol)
    if complement.shape[1] == 0:
        zero = np.zeros((ts.ambient_dim, ts.ambient_dim), dtype=complex)
        garbage = QuantumOperation((zero,), tol=tol)
    else:
        garbage = QuantumOperation(
            tuple(target @ dag(complement[:, k].reshape(-1, 1))
                  for k in range(complement.shape[1])),
            tol=tol,
        )
    return CompressionScheme(n=n, typical=ts, garbage_map=garbage)


def renormalized_typical_restriction(src: IIDSource, n: int, epsilon: float,
                                     tol: Tolerances = DEFAULT_TOL) -> DensityOperator:
    """Λ ρ^(n) Λ / tr(Λ ρ^(n)), assembled from the typical eigensystem."""
    ts = typical_subspace(src, n, epsilon, tol)
    if ts.weight <= tol.trace:
        raise DegenerateInputError("typical weight vanishes; cannot renormalize")
    values, cols = ts.eigen_basis
    mat = (cols * (values / ts.weight)) @ dag(cols)
    return DensityOperator(mat)
