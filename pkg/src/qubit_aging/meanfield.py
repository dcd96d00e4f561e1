"""Per-qubit mean-field dynamics (3N real variables).

Each qubit carries its excited population w_j and coherence q_j; the
first n_active qubits are pumped, the rest decay.  The coupling sums
over all other qubits are evaluated in O(N) from the global totals, so
a full right-hand-side evaluation is linear in the network size.  Also
provides the factorisation-discrepancy diagnostics that quantify why
the collective closure and the mean-field solution differ.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, NonIntegerSplit
from .integrate import IntegrationControls, integrate_steady
from .model import ModelParams

SPLIT_TOL = 1e-9


@dataclass
class MeanFieldState:
    """Populations w (real) and coherences q (complex), one per qubit."""

    w: np.ndarray
    q: np.ndarray
    n_active: int

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.q = np.asarray(self.q, dtype=complex)
        if self.w.shape != self.q.shape or self.w.ndim != 1:
            raise DimensionMismatch(
                f"w shape {self.w.shape} and q shape {self.q.shape} must be equal 1-D"
            )
        if not 0 <= self.n_active <= self.w.size:
            raise DimensionMismatch(
                f"n_active={self.n_active} outside [0, {self.w.size}]"
            )

    @property
    def n_qubits(self) -> int:
        return self.w.size

    def nbar(self) -> float:
        return float(self.w.mean())

    def physicality_violation(self) -> float:
        """Worst violation of |q_j|^2 <= w_j (1 - w_j) over the register."""
        return float(np.max(np.abs(self.q) ** 2 - self.w * (1.0 - self.w)))

    def pack(self) -> np.ndarray:
        return np.concatenate([self.w, self.q.real, self.q.imag])

    @staticmethod
    def unpack(y: np.ndarray, n_active: int) -> "MeanFieldState":
        n = y.size // 3
        return MeanFieldState(w=y[:n], q=y[n:2 * n] + 1j * y[2 * n:], n_active=n_active)


@dataclass(frozen=True)
class CorrelationDiagnostics:
    """Closure-discrepancy terms; m2 and m3 vanish identically at V = 0."""

    m1: complex
    m2: float
    m3: complex


def default_init(params: ModelParams, p: Optional[float] = None) -> MeanFieldState:
    """Uniform w_j = 0.5, q_j = 0.5 start, mirroring the collective init."""
    n_active, _, drift = params.split_counts(p)
    if drift > SPLIT_TOL:
        raise NonIntegerSplit(
            f"N*p = {params.n_qubits * (params.inactive_ratio if p is None else p)} "
            "is not an integer; round p first"
        )
    n = params.n_qubits
    return MeanFieldState(w=np.full(n, 0.5), q=np.full(n, 0.5 + 0j), n_active=n_active)


def meanfield_rhs(state: MeanFieldState, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Derivatives (dw, dq) of all qubits.

    The primed sums exclude the qubit's own term and are formed from the
    precomputed totals sum_k q_k and sum_k w_k in O(N).
    """
    n = params.n_qubits
    if state.n_qubits != n:
        raise DimensionMismatch(
            f"state has {state.n_qubits} qubits, params expect {n}"
        )
    kappa = params.kappa
    omega = params.drive
    g = params.coherent_coupling
    v = params.dissipative_coupling
    gamma = params.loss_rate()

    w, q = state.w, state.q
    q_others = q.sum() - q            # sum_{k != j} q_k
    z_others = 2.0 * (w.sum() - w) - (n - 1)  # sum_{k != j} (2 w_k - 1)

    active = np.zeros(n)
    active[: state.n_active] = 1.0

    dw = (
        omega * q.imag
        - gamma * w
        + 2.0 * kappa * active
        + (2.0 * v / n) * (q * np.conj(q_others) + np.conj(q) * q_others).real
    )
    dq = (
        1j * (params.detuning + 4.0 * g * z_others) * q
        + 0.5j * omega * (1.0 - 2.0 * w)
        - kappa * q
        - (4.0 * v / n) * w * q_others
        - (2.0 * v * (n - 1) / n) * q
        + (2.0 * v / n) * q_others
    )
    return dw, dq


def integrate_meanfield(
    params: ModelParams,
    init: MeanFieldState,
    controls: Optional[IntegrationControls] = None,
) -> tuple[MeanFieldState, float]:
    """Integrate to steady state; returns (steady state, nbar).

    Requires an integer active/inactive split: N * inactive_ratio must
    already be whole (rounding is the caller's explicit decision).
    """
    _, _, drift = params.split_counts()
    if drift > SPLIT_TOL:
        raise NonIntegerSplit(
            f"N*p = {params.n_qubits * params.inactive_ratio:.6f} is not an integer"
        )
    controls = controls or IntegrationControls()
    n = params.n_qubits
    if init.n_qubits != n:
        raise DimensionMismatch(f"init has {init.n_qubits} qubits, params expect {n}")
    n_active = init.n_active

    def rhs(t, y):
        dw, dq = meanfield_rhs(MeanFieldState.unpack(y, n_active), params)
        return np.concatenate([dw, dq.real, dq.imag])

    _, states, converged, _reason = integrate_steady(rhs, init.pack(), controls)
    final = MeanFieldState.unpack(states[-1], n_active)
    return final, final.nbar()


def correlation_diagnostics(state: MeanFieldState, params: ModelParams) -> CorrelationDiagnostics:
    """Closure terms separating the collective equations from mean field.

    The single-qubit raising expectation is identified with the
    conjugated coherence, so m1 and m3 carry conj(q_j) w_j products;
    m2 is a plain coherence power and is real by construction.
    """
    n = params.n_qubits
    if state.n_qubits != n:
        raise DimensionMismatch(f"state has {state.n_qubits} qubits, params expect {n}")
    g = params.coherent_coupling
    v = params.dissipative_coupling
    qw = (np.conj(state.q) * state.w).sum()
    m1 = 1j * (8.0 * g / n) * qw
    m2 = float((4.0 * v / n ** 2) * (np.abs(state.q) ** 2).sum())
    m3 = -(4.0 * v / n ** 2) * qw
    return CorrelationDiagnostics(m1=complex(m1), m2=m2, m3=complex(m3))
