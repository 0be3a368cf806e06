"""Quantum operations as Kraus families: algebra, dilation, and a test zoo."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import (
    InvalidOperationError,
    PreconditionError,
    ResourceLimitError,
    ShapeError,
)
from .linalg import (
    DensityOperator,
    as_complex_matrix,
    dag,
    eig_hermitian,
    fro,
    sqrtm_psd,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class ValidityReport:
    """Deviation of sum_i A_i†A_i from the identity."""

    max_eigenvalue_excess: float   # max eigenvalue of (sum A†A − I)
    identity_deviation: float      # Frobenius distance of sum A†A from I
    trace_preserving: bool


@dataclass(frozen=True)
class QuantumOperation:
    """Trace-nonincreasing completely positive map, stored as Kraus operators."""

    kraus: tuple
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)
    checked: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        ops = tuple(as_complex_matrix(a) for a in self.kraus)
        if not ops:
            raise ShapeError("a Kraus family needs at least one operator")
        shape = ops[0].shape
        if any(a.shape != shape for a in ops):
            raise ShapeError("all Kraus operators must share one shape")
        object.__setattr__(self, "kraus", ops)
        if self.checked:
            report = validate(self, self.tol)
            object.__setattr__(self, "_trace_preserving", report.trace_preserving)
        else:
            object.__setattr__(self, "_trace_preserving", False)

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def trace_preserving(self) -> bool:
        return self._trace_preserving

    def kraus_sum(self) -> np.ndarray:
        """sum_i A_i† A_i."""
        s = np.zeros((self.dim_in, self.dim_in), dtype=complex)
        for a in self.kraus:
            s += dag(a) @ a
        return s

    @staticmethod
    def unchecked(kraus, tol: Tolerances = DEFAULT_TOL) -> "QuantumOperation":
        """Build without the trace-nonincreasing check (scaled decompositions)."""
        return QuantumOperation(tuple(kraus), tol=tol, checked=False)

    @staticmethod
    def identity(dim: int) -> "QuantumOperation":
        return QuantumOperation((np.eye(dim, dtype=complex),))

    @staticmethod
    def from_unitary(u) -> "QuantumOperation":
        return QuantumOperation((as_complex_matrix(u),))

    def to_json_dict(self) -> dict:
        return {
            "dim_in": self.dim_in,
            "dim_out": self.dim_out,
            "kraus": [
                [[float(z.real), float(z.imag)] for z in a.reshape(-1)]
                for a in self.kraus
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @staticmethod
    def from_json_dict(doc: dict, tol: Tolerances = DEFAULT_TOL) -> "QuantumOperation":
        dim_in, dim_out = int(doc["dim_in"]), int(doc["dim_out"])
        ops = []
        for entries in doc["kraus"]:
            if len(entries) != dim_in * dim_out:
                raise ShapeError("kraus entry count does not match dims")
            flat = np.array([complex(re, im) for re, im in entries])
            ops.append(flat.reshape(dim_out, dim_in))
        return QuantumOperation(tuple(ops), tol=tol)

    @staticmethod
    def from_json(text: str, tol: Tolerances = DEFAULT_TOL) -> "QuantumOperation":
        return QuantumOperation.from_json_dict(json.loads(text), tol=tol)


def validate(op: QuantumOperation, tol: Tolerances = DEFAULT_TOL) -> ValidityReport:
    """Check sum A_i†A_i <= I and classify the operation."""
    s = op.kraus_sum()
    deviation = s - np.eye(op.dim_in)
    excess = float(np.linalg.eigvalsh((deviation + dag(deviation)) / 2.0)[-1])
    dev_norm = fro(deviation)
    if excess > tol.psd:
        raise InvalidOperationError(
            f"sum A†A exceeds the identity by eigenvalue {excess:.3e}"
        )
    return ValidityReport(
        max_eigenvalue_excess=excess,
        identity_deviation=dev_norm,
        trace_preserving=dev_norm <= tol.trace * max(1.0, float(np.sqrt(op.dim_in))),
    )


def apply(op: QuantumOperation, rho) -> np.ndarray:
    """sum_i A_i ρ A_i†. Accepts density operators or unnormalized positive matrices."""
    mat = rho.matrix if isinstance(rho, DensityOperator) else as_complex_matrix(rho)
    if mat.shape != (op.dim_in, op.dim_in):
        raise ShapeError(f"state dim {mat.shape} does not match op input {op.dim_in}")
    out = np.zeros((op.dim_out, op.dim_out), dtype=complex)
    for a in op.kraus:
        out += a @ mat @ dag(a)
    return out


def output_trace(op: QuantumOperation, rho) -> float:
    mat = rho.matrix if isinstance(rho, DensityOperator) else as_complex_matrix(rho)
    return float(sum(np.trace(dag(a) @ a @ mat) for a in op.kraus).real)


def compose(after: QuantumOperation, before: QuantumOperation,
            compress: bool = False) -> QuantumOperation:
    """Operation ``before`` followed by ``after``: Kraus family {A_i E_j}."""
    if before.dim_out != after.dim_in:
        raise ShapeError(
            f"cannot compose: inner dims {before.dim_out} vs {after.dim_in}"
        )
    ops = tuple(a @ e for a in after.kraus for e in before.kraus)
    if compress:
        ops = compress_kraus(ops)
    return QuantumOperation(ops, tol=after.tol)


def tensor_power(op: QuantumOperation, n: int, compress: bool = False,
                 cap: int | None = None) -> QuantumOperation:
    """n-fold tensor power; Kraus family = all n-fold tensor products."""
    cap = cap if cap is not None else op.tol.tensor_power_cap
    if n < 1 or n > cap:
        raise ResourceLimitError(f"tensor power n={n} outside 1..{cap}")
    if n == 1:
        return op
    ops = []
    for combo in itertools.product(op.kraus, repeat=n):
        out = combo[0]
        for a in combo[1:]:
            out = np.kron(out, a)
        ops.append(out)
    ops = tuple(ops)
    if compress:
        ops = compress_kraus(ops)
    return QuantumOperation(ops, tol=op.tol)


def compress_kraus(kraus, threshold: float = 1e-12) -> tuple:
    """Drop redundant operators via the Gram matrix tr(A_i†A_j).

    Eigenvectors of the Gram matrix with eigenvalue below ``threshold``
    correspond to identically vanishing operator combinations; the remaining
    remixed family has the same action.
    """
    ops = [as_complex_matrix(a) for a in kraus]
    s = len(ops)
    gram = np.empty((s, s), dtype=complex)
    for i in range(s):
        for j in range(i, s):
            gram[i, j] = np.trace(dag(ops[i]) @ ops[j])
            gram[j, i] = gram[i, j].conjugate()
    values, vectors = eig_hermitian(gram)
    keep = values > threshold
    m = dag(vectors[:, keep])  # rows = kept remix coefficients
    stacked = np.stack(ops)
    remixed = np.tensordot(m, stacked, axes=(1, 0))
    return tuple(remixed[k] for k in range(remixed.shape[0]))


def is_remix_matrix(m, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True when the smaller-space Gram of m is the identity (maximal partial isometry)."""
    m = as_complex_matrix(m)
    r, s = m.shape
    small = min(r, s)
    gram = dag(m) @ m if s <= r else m @ dag(m)
    return fro(gram - np.eye(small)) <= tol.scaled(tol.trace * 10, 1.0)


def remix_kraus(kraus, m) -> tuple:
    m = as_complex_matrix(m)
    stacked = np.stack([as_complex_matrix(a) for a in kraus])
    if m.shape[1] != stacked.shape[0]:
        raise ShapeError("remix matrix columns must match the Kraus count")
    remixed = np.tensordot(m, stacked, axes=(1, 0))
    return tuple(remixed[k] for k in range(remixed.shape[0]))


def remix(op: QuantumOperation, m) -> QuantumOperation:
    """New decomposition A'_i = sum_j m_ij A_j; identical action guaranteed."""
    m = as_complex_matrix(m)
    if m.shape[0] < m.shape[1]:
        raise PreconditionError("remix matrix must not shrink the family (rows >= cols)")
    if not is_remix_matrix(m, op.tol):
        raise PreconditionError("remix matrix columns are not orthonormal")
    return QuantumOperation(remix_kraus(op.kraus, m), tol=op.tol)


@dataclass(frozen=True)
class PartialIsometry:
    """Operator V with V†V a projector; maximal when V†V or VV† is the identity."""

    matrix: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        m = as_complex_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        g = dag(m) @ m
        if fro(g @ g - g) > self.tol.scaled(self.tol.svd, 1.0) or not is_hermitian_small(g, self.tol):
            raise PreconditionError("V†V is not a projector within tolerance")

    @property
    def dim_in(self) -> int:
        return self.matrix.shape[1]

    @property
    def dim_out(self) -> int:
        return self.matrix.shape[0]

    def domain_projector(self) -> np.ndarray:
        return dag(self.matrix) @ self.matrix

    def range_projector(self) -> np.ndarray:
        return self.matrix @ dag(self.matrix)

    @property
    def maximal(self) -> bool:
        m = self.matrix
        if fro(dag(m) @ m - np.eye(self.dim_in)) <= self.tol.scaled(self.tol.trace * 10, 1.0):
            return True
        return fro(m @ dag(m) - np.eye(self.dim_out)) <= self.tol.scaled(self.tol.trace * 10, 1.0)

    def as_operation(self) -> QuantumOperation:
        return QuantumOperation((self.matrix,), tol=self.tol)


def is_hermitian_small(m: np.ndarray, tol: Tolerances) -> bool:
    return fro(m - dag(m)) <= tol.scaled(tol.svd, fro(m))


@dataclass(frozen=True)
class Instrument:
    """Trace-nonincreasing branches that sum to a trace-preserving operation."""

    branches: tuple

    def __post_init__(self):
        branches = tuple(self.branches)
        if not branches:
            raise ShapeError("instrument needs at least one branch")
        d_in, d_out = branches[0].dim_in, branches[0].dim_out
        if any(b.dim_in != d_in or b.dim_out != d_out for b in branches):
            raise ShapeError("instrument branches must share dims")
        total = np.zeros((d_in, d_in), dtype=complex)
        for b in branches:
            total += b.kraus_sum()
        if fro(total - np.eye(d_in)) > DEFAULT_TOL.trace * max(1.0, float(np.sqrt(d_in))) * 10:
            raise PreconditionError("instrument branches do not sum to a trace-preserving map")
        object.__setattr__(self, "branches", branches)

    @property
    def dim_in(self) -> int:
        return self.branches[0].dim_in

    def total_operation(self) -> QuantumOperation:
        ops = tuple(a for b in self.branches for a in b.kraus)
        return QuantumOperation(ops)


@dataclass(frozen=True)
class StinespringDilation:
    """Unitary on Q ⊗ E reproducing a Kraus family via ⟨i_E| U |0_E⟩ blocks."""

    env_dim: int
    unitary: np.ndarray
    env_initial_index: int = 0

    def kraus_block(self, i: int, dim_q: int) -> np.ndarray:
        """Extract ⟨i_E| U |env_initial_E⟩ with E as the slow tensor factor."""
        u = self.unitary
        rows = slice(i * dim_q, (i + 1) * dim_q)
        cols = slice(self.env_initial_index * dim_q, (self.env_initial_index + 1) * dim_q)
        return u[rows, cols]


def dilate(op: QuantumOperation, tol: Tolerances = DEFAULT_TOL) -> StinespringDilation:
    """Unitary representation of a trace-preserving square operation.

    The stacked Kraus block column is an isometry; it is completed to a
    unitary with the deterministic SVD-complement column order. Environment
    dimension equals the Kraus count.
    """
    if not op.trace_preserving:
        raise PreconditionError("dilation implemented for trace-preserving operations only")
    if op.dim_in != op.dim_out:
        raise PreconditionError("dilation implemented for square operations only")
    d = op.dim_in
    s = len(op.kraus)
    block = np.vstack([a for a in op.kraus])  # (s*d) x d isometry
    u_full, _, _ = np.linalg.svd(block)
    unitary = np.concatenate([block, u_full[:, d:]], axis=1)
    residual = fro(dag(unitary) @ unitary - np.eye(s * d))
    if residual > tol.scaled(tol.svd, 1.0):
        raise PreconditionError(f"unitary completion failed, residual {residual:.3e}")
    return StinespringDilation(env_dim=s, unitary=unitary, env_initial_index=0)


def embed(branch: QuantumOperation) -> QuantumOperation:
    """Embed a trace-nonincreasing branch in a trace-preserving operation.

    Returns F = branch + G where G carries the defect D = I − sum A†A. For
    dim_out >= dim_in, G has the single Kraus operator K·sqrt(D) with K the
    padded-identity isometry; otherwise a basis family {|t0⟩⟨m| sqrt(D)} is
    used so that F stays trace-preserving for any dims.
    """
    defect = np.eye(branch.dim_in) - branch.kraus_sum()
    if fro(defect) <= branch.tol.trace:
        return branch
    root = sqrtm_psd((defect + dag(defect)) / 2.0, branch.tol)
    if branch.dim_out >= branch.dim_in:
        k = np.zeros((branch.dim_out, branch.dim_in), dtype=complex)
        k[: branch.dim_in, : branch.dim_in] = np.eye(branch.dim_in)
        extra = (k @ root,)
    else:
        t0 = np.zeros((branch.dim_out, 1), dtype=complex)
        t0[0, 0] = 1.0
        extra = tuple(
            t0 @ root[m : m + 1, :] for m in range(branch.dim_in)
        )
    return QuantumOperation(branch.kraus + extra, tol=branch.tol)


ZOO_NAMES = ("identity", "depolarizing", "dephasing", "amplitude_damping", "erasure_like")


def channel_zoo(name: str, param: float = 0.0) -> QuantumOperation:
    """Standard qubit channels used as test substrate."""
    if name not in ZOO_NAMES:
        raise ValueError(f"unknown channel {name!r}; choose from {ZOO_NAMES}")
    p = float(param)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"param must be in [0, 1], got {p}")
    eye = np.eye(2, dtype=complex)
    if name == "identity":
        return QuantumOperation((eye,))
    if name == "depolarizing":
        return QuantumOperation((
            np.sqrt(1 - 3 * p / 4) * eye,
            np.sqrt(p / 4) * PAULI_X,
            np.sqrt(p / 4) * PAULI_Y,
            np.sqrt(p / 4) * PAULI_Z,
        ))
    if name == "dephasing":
        return QuantumOperation((np.sqrt(1 - p) * eye, np.sqrt(p) * PAULI_Z))
    if name == "amplitude_damping":
        return QuantumOperation((
            np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex),
            np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex),
        ))
    # erasure_like: qubit into a qutrit with an orthogonal erasure flag
    keep = np.zeros((3, 2), dtype=complex)
    keep[0, 0] = keep[1, 1] = 1.0
    flag0 = np.zeros((3, 2), dtype=complex)
    flag0[2, 0] = 1.0
    flag1 = np.zeros((3, 2), dtype=complex)
    flag1[2, 1] = 1.0
    return QuantumOperation((np.sqrt(1 - p) * keep, np.sqrt(p) * flag0, np.sqrt(p) * flag1))
