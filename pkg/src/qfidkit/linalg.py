"""Dense complex-matrix substrate: decompositions, tensor algebra, purifications."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import DecompositionError, PreconditionError, ShapeError


def as_complex_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ShapeError(f"expected a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise PreconditionError("matrix has non-finite entries")
    return a


def dag(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def fro(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def is_hermitian(m: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    return fro(m - dag(m)) <= tol.scaled(tol.herm, fro(m))


def svd(m, tol: Tolerances = DEFAULT_TOL):
    """Singular value decomposition M = U @ diag(D) @ V, D descending.

    Returns (U, D, V) with V already the right factor (numpy's ``vh``).
    """
    m = as_complex_matrix(m)
    try:
        u, d, vh = np.linalg.svd(m)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"SVD did not converge: {exc}") from exc
    k = min(m.shape)
    residual = fro(m - u[:, :k] * d @ vh[:k, :])
    if residual > tol.scaled(tol.svd, fro(m)):
        raise DecompositionError("SVD reconstruction residual too large", residual)
    return u, d, vh


def eig_hermitian(m, tol: Tolerances = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns (values, vectors) with vectors as orthonormal columns.
    """
    m = as_complex_matrix(m)
    if not is_hermitian(m, tol):
        raise PreconditionError("matrix is not Hermitian within tolerance")
    values, vectors = np.linalg.eigh((m + dag(m)) / 2.0)
    return values[::-1].copy(), vectors[:, ::-1].copy()


def sqrtm_psd(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a PSD Hermitian matrix (negatives clipped)."""
    values, vectors = eig_hermitian(m, tol)
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ dag(vectors)


def polar(m, maximal: bool = False, tol: Tolerances = DEFAULT_TOL):
    """Polar decomposition M = W @ P with P = sqrt(M†M) and W a partial isometry.

    By default W keeps only the singular directions with nonzero singular
    value, so W†W projects onto the row support of M (rank(W) = rank(M)).
    With ``maximal=True`` W is completed to U @ V, making W†W or WW† the
    identity on the smaller space.
    """
    m = as_complex_matrix(m)
    u, d, vh = svd(m, tol)
    n = m.shape[1]
    dd = np.zeros(n)
    dd[: len(d)] = d
    p = dag(vh) * dd @ vh
    if maximal:
        k = min(m.shape)
        w = u[:, :k] @ vh[:k, :]
    else:
        rank = int(np.sum(d > tol.scaled(tol.svd, fro(m) if fro(m) > 0 else 1.0)))
        w = u[:, :rank] @ vh[:rank, :]
    residual = fro(m - w @ p)
    if residual > tol.scaled(tol.svd, fro(m)):
        raise DecompositionError("polar reconstruction residual too large", residual)
    return w, p


def tensor(a, b) -> np.ndarray:
    """Kronecker product, left factor on the slow index."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def tensor_many(factors) -> np.ndarray:
    out = as_complex_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_complex_matrix(f))
    return out


def partial_trace(m, over: str, dims: tuple[int, int]) -> np.ndarray:
    """Trace out one factor of a matrix on R ⊗ Q.

    ``over`` is "R" (slow factor) or "Q" (fast factor); ``dims`` = (dim_R, dim_Q).
    """
    m = as_complex_matrix(m)
    dim_r, dim_q = dims
    if m.shape != (dim_r * dim_q, dim_r * dim_q):
        raise ShapeError(f"matrix shape {m.shape} does not match dims {dims}")
    t = m.reshape(dim_r, dim_q, dim_r, dim_q)
    if over == "R":
        return np.einsum("ijik->jk", t)
    if over == "Q":
        return np.einsum("ijkj->ik", t)
    raise ValueError("over must be 'R' or 'Q'")


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive-semidefinite, unit-trace matrix."""

    matrix: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        m = as_complex_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if m.shape[0] != m.shape[1]:
            raise ShapeError("density operator must be square")
        if not is_hermitian(m, self.tol):
            raise PreconditionError("density operator is not Hermitian within tolerance")
        values = np.linalg.eigvalsh((m + dag(m)) / 2.0)
        if values[0] < -self.tol.psd:
            raise PreconditionError(f"negative eigenvalue {values[0]:.3e}")
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > self.tol.trace:
            raise PreconditionError(f"trace {tr} deviates from 1")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigensystem(self):
        """Descending eigenvalues and matching orthonormal eigenvector columns."""
        return eig_hermitian(self.matrix, self.tol)

    def rank(self) -> int:
        values, _ = self.eigensystem()
        return int(np.sum(values > self.tol.scaled(self.tol.psd, 1.0)))

    @staticmethod
    def maximally_mixed(dim: int) -> "DensityOperator":
        return DensityOperator(np.eye(dim) / dim)

    @staticmethod
    def pure(vector) -> "DensityOperator":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return DensityOperator(np.outer(v, v.conj()))


@dataclass(frozen=True)
class Purification:
    """Unit vector on R ⊗ Q whose partial trace over R is a given state."""

    dim_r: int
    dim_q: int
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex).reshape(-1)
        object.__setattr__(self, "vector", v)
        if v.size != self.dim_r * self.dim_q:
            raise ShapeError("purification vector length must be dim_R * dim_Q")
        if abs(np.linalg.norm(v) - 1.0) > DEFAULT_TOL.trace:
            raise PreconditionError("purification vector is not normalized")

    def projector(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())

    def reduced_state(self) -> np.ndarray:
        return partial_trace(self.projector(), "R", (self.dim_r, self.dim_q))


def purify(rho: DensityOperator) -> Purification:
    """Canonical purification sum_k sqrt(λ_k) |k_R⟩|k_Q⟩, eigenvalues descending.

    Zero eigenvalues are dropped, so the reference dimension equals rank(ρ).
    """
    values, vectors = rho.eigensystem()
    keep = values > rho.tol.scaled(rho.tol.psd, 1.0)
    values = np.clip(values[keep], 0.0, None)
    vectors = vectors[:, keep]
    rank = len(values)
    dim_q = rho.dim
    vec = np.zeros(rank * dim_q, dtype=complex)
    for k in range(rank):
        vec[k * dim_q : (k + 1) * dim_q] = np.sqrt(values[k]) * vectors[:, k]
    vec = vec / np.linalg.norm(vec)
    return Purification(rank, dim_q, vec)


@dataclass(frozen=True)
class Subspace:
    """Subspace of an ambient space, stored as orthonormal basis columns."""

    basis: np.ndarray

    def __post_init__(self):
        b = as_complex_matrix(self.basis)
        object.__setattr__(self, "basis", b)
        gram = dag(b) @ b
        if fro(gram - np.eye(b.shape[1])) > DEFAULT_TOL.scaled(DEFAULT_TOL.trace, 1.0) * 10:
            raise PreconditionError("subspace basis columns are not orthonormal")

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ dag(self.basis)

    @staticmethod
    def full(dim: int) -> "Subspace":
        return Subspace(np.eye(dim, dtype=complex))

    @staticmethod
    def span(vectors, tol: Tolerances = DEFAULT_TOL) -> "Subspace":
        """Orthonormalize a set of column vectors (rank-revealing)."""
        m = as_complex_matrix(vectors)
        u, d, _ = svd(m, tol)
        rank = int(np.sum(d > tol.scaled(tol.svd, fro(m) if fro(m) > 0 else 1.0)))
        return Subspace(u[:, :rank])


def orthonormal_complement(basis: np.ndarray, ambient_dim: int,
                           tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Deterministic orthonormal basis of the complement of span(basis columns)."""
    b = as_complex_matrix(basis)
    if b.shape[0] != ambient_dim:
        raise ShapeError("basis rows must equal ambient dimension")
    k = b.shape[1]
    if k == 0:
        return np.eye(ambient_dim, dtype=complex)
    u, _, _ = np.linalg.svd(b)
    return u[:, k:]
