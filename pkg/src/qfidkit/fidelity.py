"""Fidelity functionals and their inequality checks as randomized sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import QuantumOperation, apply, compose, remix
from .config import DEFAULT_TOL, CheckConfig, SphereOptimizerConfig, Tolerances
from .errors import DegenerateInputError, ShapeError
from .linalg import (
    DensityOperator,
    Subspace,
    as_complex_matrix,
    dag,
    eig_hermitian,
    fro,
    purify,
    sqrtm_psd,
)
from .reports import CheckReport, TrialResult, run_check
from .sampling import (
    perturbed_identity_channel,
    random_channel,
    random_density,
    random_trace_nonincreasing,
    rng_for,
)

# rng stream tags, one per sweep
_CONVEXITY, _COMPOSITION, _CLOSE_FINAL, _FE_CONTINUITY = 1, 2, 3, 4


def _state_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityOperator):
        return rho.matrix
    return as_complex_matrix(rho)


def _require_square(op: QuantumOperation):
    if op.dim_in != op.dim_out:
        raise ShapeError("entanglement fidelity needs dim_in == dim_out")


def entanglement_fidelity(rho, op: QuantumOperation) -> float:
    """Unnormalized entanglement fidelity sum_i |tr(A_i ρ)|²."""
    _require_square(op)
    mat = _state_matrix(rho)
    if mat.shape != (op.dim_in, op.dim_in):
        raise ShapeError("state dimension does not match the operation")
    return float(sum(abs(np.trace(a @ mat)) ** 2 for a in op.kraus))


def entanglement_fidelity_via_purification(rho, op: QuantumOperation,
                                           reference_unitary=None) -> float:
    """Matrix element ⟨ψ|(I ⊗ op)(|ψ⟩⟨ψ|)|ψ⟩ on a purification of ρ.

    Independent evaluation path used to cross-check the Kraus-trace formula;
    an optional unitary rotates the reference factor to exhibit purification
    independence.
    """
    _require_square(op)
    rho_do = rho if isinstance(rho, DensityOperator) else DensityOperator(_state_matrix(rho))
    p = purify(rho_do)
    psi = p.vector.reshape(p.dim_r, p.dim_q)
    if reference_unitary is not None:
        psi = as_complex_matrix(reference_unitary) @ psi
    total = 0.0
    for a in op.kraus:
        amp = np.sum(psi.conj() * (psi @ a.T))
        total += abs(amp) ** 2
    return float(total)


def entanglement_fidelity_renormalized(rho, op: QuantumOperation,
                                       tol: Tolerances = DEFAULT_TOL) -> float:
    """F_e divided by the output trace, for trace-decreasing maps."""
    mat = _state_matrix(rho)
    t = float(sum(np.trace(a @ mat @ dag(a)) for a in op.kraus).real)
    if t <= tol.trace:
        raise DegenerateInputError("output trace vanishes; cannot renormalize")
    return entanglement_fidelity(rho, op) / t


def uhlmann_fidelity(rho1, rho2, tol: Tolerances = DEFAULT_TOL) -> float:
    """(tr sqrt(sqrt(ρ1) ρ2 sqrt(ρ1)))², the max over purifications."""
    m1, m2 = _state_matrix(rho1), _state_matrix(rho2)
    if m1.shape != m2.shape:
        raise ShapeError("states must share dimensions")
    s1 = sqrtm_psd(m1, tol)
    inner = s1 @ m2 @ s1
    values = np.linalg.eigvalsh((inner + dag(inner)) / 2.0)
    root_sum = float(np.sum(np.sqrt(np.clip(values, 0.0, None))))
    return float(min(root_sum**2, 1.0))


@dataclass(frozen=True)
class FeTermVector:
    """Vector a with a_i = tr(A_i ρ); its squared norm is F_e."""

    components: np.ndarray

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.components) ** 2))


def fe_term_vector(rho, op: QuantumOperation) -> FeTermVector:
    _require_square(op)
    mat = _state_matrix(rho)
    return FeTermVector(np.array([np.trace(a @ mat) for a in op.kraus]))


def pure_state_fidelity(psi, op: QuantumOperation) -> float:
    """sum_i |⟨ψ|A_i|ψ⟩|² for a unit vector ψ."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    return float(sum(abs(np.vdot(v, a @ v)) ** 2 for a in op.kraus))


def fibonacci_sphere_states(count: int) -> np.ndarray:
    """Qubit states on a Fibonacci sphere lattice, rows are state vectors."""
    i = np.arange(count)
    z = 1.0 - 2.0 * (i + 0.5) / count
    phi = np.pi * (1.0 + np.sqrt(5.0)) * i
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    states = np.empty((count, 2), dtype=complex)
    states[:, 0] = np.cos(theta / 2.0)
    states[:, 1] = np.exp(1j * phi) * np.sin(theta / 2.0)
    return states


def sampled_min_fidelity(subspace: Subspace, op: QuantumOperation,
                         points: int = 10_000, rng=None) -> float:
    """Sampling oracle: minimum fidelity over a finite set of states in H.

    Uses the Fibonacci sphere for 2-dimensional subspaces and seeded Haar
    samples otherwise; the result upper-bounds the true minimum.
    """
    k = subspace.dim
    if k == 2:
        coeffs = fibonacci_sphere_states(points)
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        raw = rng.standard_normal((points, k)) + 1j * rng.standard_normal((points, k))
        coeffs = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    basis = subspace.basis
    mats = np.stack([dag(basis) @ a @ basis for a in op.kraus])
    amps = np.einsum("nj,ijk,nk->ni", coeffs.conj(), mats, coeffs)
    values = np.sum(np.abs(amps) ** 2, axis=1)
    return float(values.min())


@dataclass(frozen=True)
class MinFidelityResult:
    value: float
    witness: np.ndarray
    converged: bool
    iterations: int
    restarts: int


def _batched_quartic_descent(mats: np.ndarray, cfg: SphereOptimizerConfig,
                             rng: np.random.Generator):
    """Minimize f(c) = sum_i |c† M_i c|² over the unit sphere, many restarts at once."""
    r, k, _ = mats.shape
    n = cfg.restarts
    c = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    # one axis-aligned start per coordinate helps degenerate landscapes
    for j in range(min(k, n)):
        c[j] = 0.0
        c[j, j] = 1.0
    c = c / np.linalg.norm(c, axis=1, keepdims=True)
    mats_dag = mats.conj().transpose(0, 2, 1)

    def value(cc):
        v = np.einsum("nj,ijk,nk->ni", cc.conj(), mats, cc)
        return np.sum(np.abs(v) ** 2, axis=1), v

    f, v = value(c)
    step = np.full(n, cfg.initial_step)
    converged = np.zeros(n, dtype=bool)
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        grad = (
            np.einsum("ni,ijk,nk->nj", v.conj(), mats, c)
            + np.einsum("ni,ijk,nk->nj", v, mats_dag, c)
        )
        trial = c - step[:, None] * grad
        trial = trial / np.linalg.norm(trial, axis=1, keepdims=True)
        f_trial, v_trial = value(trial)
        improved = f_trial < f
        gain = np.where(improved, f - f_trial, 0.0)
        c = np.where(improved[:, None], trial, c)
        v = np.where(improved[:, None], v_trial, v)
        f = np.where(improved, f_trial, f)
        step = np.where(improved, step * 1.2, step * 0.5)
        converged |= (gain < cfg.improvement_tolerance) & (step < 1e-14)
        if bool(np.all(converged)):
            break
    return f, c, converged, iterations


def _canonical_phase(c: np.ndarray) -> np.ndarray:
    pivot = int(np.argmax(np.abs(c)))
    phase = c[pivot] / abs(c[pivot]) if abs(c[pivot]) > 0 else 1.0
    return c / phase


def min_pure_state_fidelity(subspace: Subspace, op: QuantumOperation,
                            cfg: SphereOptimizerConfig = SphereOptimizerConfig(),
                            rng=None) -> MinFidelityResult:
    """Minimum pure-state fidelity over a subspace, by multi-start descent.

    The returned value is an upper bound on the true minimum (the optimizer
    may miss the global minimum); at desk scale the sampling oracle bounds
    the gap. Near-degenerate minima are tie-broken deterministically by the
    lowest index of the witness's largest-amplitude coordinate.
    """
    if subspace.ambient_dim != op.dim_in:
        raise ShapeError("subspace ambient dim must match the operation input")
    basis = subspace.basis
    mats = np.stack([dag(basis) @ a @ basis for a in op.kraus])
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    f, c, converged, iterations = _batched_quartic_descent(mats, cfg, rng)
    best = float(f.min())
    near = np.where(f <= best + 1e-9)[0]

    def tie_key(idx: int):
        cc = _canonical_phase(c[idx])
        return (int(np.argmax(np.abs(cc))), tuple(np.round(cc, 9).view(float)))

    chosen = min(near, key=tie_key)
    witness = basis @ _canonical_phase(c[chosen])
    witness = witness / np.linalg.norm(witness)
    return MinFidelityResult(
        value=float(f[chosen]),
        witness=witness,
        converged=bool(converged[chosen]),
        iterations=iterations,
        restarts=cfg.restarts,
    )


def single_operator_rotation(rho, op: QuantumOperation,
                             tol: Tolerances = DEFAULT_TOL):
    """Remix op so the whole entanglement fidelity sits in the first operator.

    Returns (rotated, 0): the remix matrix is a unitary whose first row is
    a*/|a| with a the F_e term vector, so tr(A'_1 ρ) = ‖a‖ and all later
    terms have vanishing trace against ρ.
    """
    a = fe_term_vector(rho, op).components
    norm = float(np.linalg.norm(a))
    if norm**2 <= tol.trace:
        raise DegenerateInputError("entanglement fidelity vanishes; nothing to rotate")
    s = len(a)
    u = (a / norm).reshape(-1, 1)
    full, _, _ = np.linalg.svd(u)
    phase_fix = np.vdot(full[:, 0], u[:, 0])
    q = full.copy()
    q[:, 0] = full[:, 0] * phase_fix
    m = dag(q)
    rotated = remix(op, m)
    return rotated, 0


# ---------------------------------------------------------------------------
# Lemma sweeps
# ---------------------------------------------------------------------------


def _convexity_trial(cfg: CheckConfig, i: int) -> TrialResult:
    rng = rng_for(cfg.seed, _CONVEXITY, i)
    dim = cfg.dim
    rho1 = random_density(rng, dim)
    rho2 = random_density(rng, dim)
    lam = float(rng.uniform())
    op = random_channel(rng, dim, kraus_count=int(rng.integers(2, 4)))
    mixed = lam * rho1.matrix + (1 - lam) * rho2.matrix
    lhs = entanglement_fidelity(mixed, op)
    rhs = lam * entanglement_fidelity(rho1, op) + (1 - lam) * entanglement_fidelity(rho2, op)
    violation = lhs - rhs - cfg.slack
    return TrialResult(violation, {
        "rho1": rho1, "rho2": rho2, "lambda": lam, "op": op,
        "lhs": lhs, "rhs": rhs,
    })


def check_convexity(cfg: CheckConfig, workers: int | None = None) -> CheckReport:
    """F_e(λρ1 + (1−λ)ρ2) <= λ F_e(ρ1) + (1−λ) F_e(ρ2)."""
    return run_check("convexity", _convexity_trial, cfg, workers)


def _composition_trial(cfg: CheckConfig, i: int) -> TrialResult:
    rng = rng_for(cfg.seed, _COMPOSITION, i)
    dim = cfg.dim
    rho = random_density(rng, dim)
    strength = float(rng.uniform(0.0, cfg.eta_max))
    first = perturbed_identity_channel(rng, dim, strength)
    if i % 2 == 0:
        second = random_channel(rng, dim, kraus_count=2)
    else:
        second = random_trace_nonincreasing(rng, dim, kraus_count=2)
    eta = 1.0 - entanglement_fidelity(rho, first)
    lhs = abs(
        entanglement_fidelity(rho, compose(second, first))
        - entanglement_fidelity(rho, second)
    )
    violation = lhs - (2.0 * eta + cfg.slack)
    return TrialResult(violation, {
        "rho": rho, "first": first, "second": second, "eta": eta, "lhs": lhs,
    })


def check_composition_lemma(cfg: CheckConfig, workers: int | None = None) -> CheckReport:
    """|F_e(ρ, A∘E) − F_e(ρ, A)| <= 2η when F_e(ρ, E) = 1 − η."""
    return run_check("composition", _composition_trial, cfg, workers)


def _close_final_trial(cfg: CheckConfig, i: int) -> TrialResult:
    rng = rng_for(cfg.seed, _CLOSE_FINAL, i)
    dim = cfg.dim
    rho = random_density(rng, dim)
    op_a = perturbed_identity_channel(rng, dim, float(rng.uniform(0.0, cfg.eta_max)))
    op_b = perturbed_identity_channel(rng, dim, float(rng.uniform(0.0, cfg.eta_max)))
    eps1 = 1.0 - entanglement_fidelity(rho, op_a)
    eps2 = 1.0 - entanglement_fidelity(rho, op_b)
    fid = uhlmann_fidelity(apply(op_a, rho), apply(op_b, rho))
    violation = (1.0 - eps1 - eps2) - fid - cfg.slack
    return TrialResult(violation, {
        "rho": rho, "op_a": op_a, "op_b": op_b,
        "eps1": eps1, "eps2": eps2, "final_fidelity": fid,
    })


def check_close_final(cfg: CheckConfig, workers: int | None = None) -> CheckReport:
    """F(A(ρ), B(ρ)) >= 1 − ε1 − ε2 for trace-preserving A, B."""
    return run_check("close-final", _close_final_trial, cfg, workers)


def trace_norm_hermitian(delta: np.ndarray) -> float:
    """tr|Δ| = sum of absolute eigenvalues, for Hermitian Δ."""
    values = np.linalg.eigvalsh((delta + dag(delta)) / 2.0)
    return float(np.sum(np.abs(values)))


def _fe_continuity_trial(cfg: CheckConfig, i: int) -> TrialResult:
    rng = rng_for(cfg.seed, _FE_CONTINUITY, i)
    dim = cfg.dim
    base = random_density(rng, dim).matrix * float(rng.uniform(0.5, 1.0))
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    delta = (raw + dag(raw)) / 2.0
    target = float(rng.uniform(0.0, cfg.delta_max))
    tn = trace_norm_hermitian(delta)
    if tn > 0:
        delta *= target / tn
    op = random_channel(rng, dim, kraus_count=2)
    tn = trace_norm_hermitian(delta)
    lhs = abs(entanglement_fidelity(base + delta, op) - entanglement_fidelity(base, op))
    bound = tn**2 + 2.0 * tn
    violation = lhs - bound - cfg.slack
    return TrialResult(violation, {
        "base": base, "delta": delta, "op": op, "trace_norm": tn, "lhs": lhs,
    })


def check_fe_continuity(cfg: CheckConfig, workers: int | None = None) -> CheckReport:
    """|F_e(B+Δ, A) − F_e(B, A)| <= (tr|Δ|)² + 2 tr|Δ| for subnormalized B."""
    return run_check("fe-continuity", _fe_continuity_trial, cfg, workers)
