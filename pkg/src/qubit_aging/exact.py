"""Full master-equation evolution for small registers (dense, N <= 10).

Operators are assembled as tensor products of single-site matrices; the
dissipator uses the factor-2 convention D[L](rho) = 2 L rho L+ - {L+L, rho}.
The pairwise dissipative coupling enters as one jump operator per
ordered pair (j, k), j != k, with rate V/N: that reading of the primed
double sum is the one that reproduces the loss rate 2k + 4V(N-1)/N of
the collective equations, which a unit test enforces.

Integration proceeds in short windows; after each window the state is
projected back onto the Hermitian subspace (the flow preserves it, the
floating-point arithmetic only approximately) and the density-matrix
invariants are verified.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NonFinite, NonIntegerSplit, NonPhysical, TooLarge
from .integrate import IntegrationControls
from .model import ModelParams

MAX_QUBITS = 10

TRACE_TOL = 1e-8
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-8

SIGMA_P = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |e><g|, basis (e, g)
SIGMA_M = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def site_operator(op: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    """Embed a single-qubit operator at the given site of an N-qubit register."""
    out = np.array([[1.0 + 0j]])
    for j in range(n_qubits):
        out = np.kron(out, op if j == site else IDENTITY_2)
    return out


@dataclass
class DensityMatrix:
    elements: np.ndarray

    def __post_init__(self):
        self.elements = np.asarray(self.elements, dtype=complex)
        if self.elements.ndim != 2 or self.elements.shape[0] != self.elements.shape[1]:
            raise NonPhysical(f"density matrix must be square, got {self.elements.shape}")

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def validate(self) -> None:
        rho = self.elements
        if not np.all(np.isfinite(rho)):
            raise NonPhysical("density matrix contains non-finite entries")
        trace = np.trace(rho)
        if abs(trace - 1.0) > TRACE_TOL:
            raise NonPhysical(f"trace deviates from 1 by {abs(trace - 1.0):.3e}")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > HERMITICITY_TOL:
            raise NonPhysical(f"Hermiticity violated by {herm:.3e}")
        min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
        if min_eig < -POSITIVITY_TOL:
            raise NonPhysical(f"negative eigenvalue {min_eig:.3e}")


def maximally_mixed(n_qubits: int) -> DensityMatrix:
    dim = 2 ** n_qubits
    return DensityMatrix(np.eye(dim, dtype=complex) / dim)


def product_state(populations, coherences=None) -> DensityMatrix:
    """Tensor product of single-qubit states with populations w_j and
    coherences q_j = <g|rho_j|e> (zero by default)."""
    populations = np.asarray(populations, dtype=float)
    if coherences is None:
        coherences = np.zeros_like(populations, dtype=complex)
    coherences = np.asarray(coherences, dtype=complex)
    rho = np.array([[1.0 + 0j]])
    for w, q in zip(populations, coherences):
        rho = np.kron(rho, np.array([[w, np.conj(q)], [q, 1.0 - w]], dtype=complex))
    return DensityMatrix(rho)


@dataclass
class LindbladSystem:
    hamiltonian: np.ndarray
    jump_ops: list[tuple[np.ndarray, float]]
    n_qubits: int
    n_active: int
    population_op: np.ndarray   # Q = (1/N) sum_j |e_j><e_j|

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def build_system(params: ModelParams) -> LindbladSystem:
    """Assemble H and the jump list for the current parameter set."""
    n = params.n_qubits
    if n > MAX_QUBITS:
        raise TooLarge(f"N={n} exceeds the dense-solver guard of {MAX_QUBITS}")
    n_active, _, drift = params.split_counts()
    if drift > 1e-9:
        raise NonIntegerSplit(
            f"N*p = {n * params.inactive_ratio:.6f} is not an integer"
        )

    sz = [site_operator(SIGMA_Z, j, n) for j in range(n)]
    sp = [site_operator(SIGMA_P, j, n) for j in range(n)]
    sm = [site_operator(SIGMA_M, j, n) for j in range(n)]

    dim = 2 ** n
    h = np.zeros((dim, dim), dtype=complex)
    for j in range(n):
        h += 0.5 * params.detuning * sz[j] + 0.5 * params.drive * (sp[j] + sm[j])
    for j in range(n):
        for k in range(n):
            if j != k:
                h += params.coherent_coupling * (sz[j] @ sz[k])

    jump_ops: list[tuple[np.ndarray, float]] = []
    for j in range(n):
        jump_ops.append((sp[j] if j < n_active else sm[j], params.kappa))
    if params.dissipative_coupling != 0.0:
        rate = params.dissipative_coupling / n
        for j in range(n):
            for k in range(n):
                if j != k:
                    jump_ops.append((sm[j] - sm[k], rate))

    q_op = sum(sp[j] @ sm[j] for j in range(n)) / n
    return LindbladSystem(
        hamiltonian=h,
        jump_ops=jump_ops,
        n_qubits=n,
        n_active=n_active,
        population_op=q_op,
    )


def lindblad_generator(system: LindbladSystem):
    """Return rho -> drho/dt applying H and all dissipators.

    The sandwich terms of every jump operator are evaluated in two
    stacked matrix products rather than a Python loop over operators.
    """
    dim = system.dim
    h = system.hamiltonian
    if system.jump_ops:
        stack = np.array([np.sqrt(2.0 * r) * op for op, r in system.jump_ops])
        tall = stack.reshape(-1, dim)                       # (K*dim, dim)
        dag_flat = stack.conj().transpose(0, 2, 1).reshape(-1, dim)
        anti = sum(r * (op.conj().T @ op) for op, r in system.jump_ops)
    else:
        tall = dag_flat = None
        anti = np.zeros((dim, dim), dtype=complex)

    def generator(rho: np.ndarray) -> np.ndarray:
        out = -1j * (h @ rho - rho @ h)
        if tall is not None:
            sandwich = (tall @ rho).reshape(-1, dim, dim)
            out = out + sandwich.transpose(1, 0, 2).reshape(dim, -1) @ dag_flat
        out -= anti @ rho + rho @ anti
        return out

    return generator


@dataclass
class ExactResult:
    times: np.ndarray
    nbar: np.ndarray
    steady_nbar: float
    converged: bool
    reason: str
    rho_final: DensityMatrix

    @property
    def nbar_trajectory(self) -> list[tuple[float, float]]:
        return [(float(t), float(v)) for t, v in zip(self.times, self.nbar)]


def evolve_exact(
    system: LindbladSystem,
    rho0: DensityMatrix,
    controls: Optional[IntegrationControls] = None,
) -> ExactResult:
    """Evolve rho0 until ||drho/dt||_F settles below steady_tol (confirmed
    over one extra window) or t_max; returns the population record.

    Raises NonPhysical as soon as trace, Hermiticity, or positivity
    break beyond tolerance, and NonFinite on solver blow-up.
    """
    controls = controls or IntegrationControls()
    if rho0.dim != system.dim:
        raise NonPhysical(
            f"rho0 dimension {rho0.dim} does not match system dimension {system.dim}"
        )
    rho0.validate()
    generator = lindblad_generator(system)
    dim = system.dim
    q_op = system.population_op

    def rhs(t, y):
        return generator(y.reshape(dim, dim)).ravel()

    def population(rho):
        return float(np.einsum("ij,ji->", rho, q_op).real)

    # Positivity checks cost a dense eigensolve; thin them out for the
    # largest registers where they would dominate the runtime.
    check_every = 1 if dim <= 128 else 10

    rho = rho0.elements.astype(complex)
    times = [0.0]
    nbars = [population(rho)]
    window = controls.report_interval
    t = 0.0
    converged = False
    settled_once = False
    n_window = 0
    while t < controls.t_max:
        t_next = min(t + window, controls.t_max)
        sol = solve_ivp(
            rhs, (t, t_next), rho.ravel(), rtol=controls.rtol, atol=controls.atol
        )
        if sol.status < 0 or sol.t[-1] <= t:
            raise NonFinite(f"density-matrix integration stalled at t={t:.4g}: {sol.message}")
        if not np.all(np.isfinite(sol.y[:, -1])):
            raise NonFinite("density-matrix integration produced non-finite values")
        for col, tt in zip(sol.y[:, 1:].T, sol.t[1:]):
            times.append(float(tt))
            nbars.append(population(col.reshape(dim, dim)))
        rho = sol.y[:, -1].reshape(dim, dim)
        t = t_next
        n_window += 1

        herm_drift = np.max(np.abs(rho - rho.conj().T))
        if herm_drift > HERMITICITY_TOL:
            raise NonPhysical(f"Hermiticity drift {herm_drift:.3e} at t={t:.2f}")
        trace_err = abs(np.trace(rho) - 1.0)
        if trace_err > TRACE_TOL:
            raise NonPhysical(f"trace drift {trace_err:.3e} at t={t:.2f}")
        rho = 0.5 * (rho + rho.conj().T)
        if n_window % check_every == 0:
            min_eig = float(np.linalg.eigvalsh(rho).min())
            if min_eig < -POSITIVITY_TOL:
                raise NonPhysical(f"negative eigenvalue {min_eig:.3e} at t={t:.2f}")

        settled = np.linalg.norm(generator(rho)) < controls.steady_tol
        if settled and settled_once:
            converged = True
            break
        settled_once = settled

    final = DensityMatrix(rho)
    final.validate()
    return ExactResult(
        times=np.array(times),
        nbar=np.array(nbars),
        steady_nbar=nbars[-1],
        converged=converged,
        reason="steady" if converged else "t_max reached before settling",
        rho_final=final,
    )
