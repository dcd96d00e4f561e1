"""Closed three-variable collective dynamics and linear stability.

The network state is reduced to the mean excited-state population q and
the mean raising-operator expectation a; the third dynamical variable
of the closed system is a* and is carried implicitly by conjugation.
The linearisation around a fixed point is derived analytically from the
same flow (not transcribed), and is cross-checked against finite
differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .integrate import IntegrationControls, batch_integrate_steady, integrate_steady
from .model import FixedPoint, ModelParams

# Eigenvalue real parts within this margin of zero are "marginal".
STABILITY_MARGIN = 1e-9


@dataclass(frozen=True)
class CollectiveState:
    """Mean population q and mean coherence a = <A>."""

    q: float
    a: complex

    def pack(self) -> np.ndarray:
        return np.array([self.q, self.a.real, self.a.imag])

    @staticmethod
    def unpack(y: np.ndarray) -> "CollectiveState":
        return CollectiveState(q=float(y[0]), a=complex(y[1], y[2]))


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: tuple[complex, complex, complex]
    stable: bool
    max_real_part: float
    marginal: bool = False


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    q: np.ndarray
    a: np.ndarray          # complex
    converged: bool
    steady: Optional[CollectiveState]
    reason: str

    @property
    def states(self) -> list[CollectiveState]:
        return [CollectiveState(q=float(qq), a=complex(aa)) for qq, aa in zip(self.q, self.a)]


def collective_rhs(state: CollectiveState, params: ModelParams, p: float) -> tuple[float, complex]:
    """Time derivatives (dq/dt, da/dt); da*/dt is the conjugate of da/dt."""
    q, a = state.q, state.a
    kappa = params.kappa
    v = params.dissipative_coupling
    gamma = params.loss_rate()
    dq = (
        params.drive * a.imag
        - gamma * q
        + 2.0 * kappa * (1.0 - p)
        + 4.0 * v * (a.real * a.real + a.imag * a.imag)
    )
    da = (
        1j * (params.shifted_detuning() + 8.0 * params.coherent_coupling * params.n_qubits * q) * a
        + 0.5j * params.drive * (1.0 - 2.0 * q)
        - (kappa + 4.0 * v * q) * a
    )
    return dq, da


def _packed_rhs(params: ModelParams, p: float):
    """Real-packed (q, Re a, Im a) flow used by the integrator."""
    kappa = params.kappa
    omega = params.drive
    v = params.dissipative_coupling
    gamma = params.loss_rate()
    dshift = params.shifted_detuning()
    gn8 = 8.0 * params.coherent_coupling * params.n_qubits
    pump = 2.0 * kappa * (1.0 - p)

    def rhs(t, y):
        q, ar, ai = y
        phase = dshift + gn8 * q
        damp = kappa + 4.0 * v * q
        return np.array([
            omega * ai - gamma * q + pump + 4.0 * v * (ar * ar + ai * ai),
            -phase * ai - damp * ar,
            phase * ar + 0.5 * omega * (1.0 - 2.0 * q) - damp * ai,
        ])

    return rhs


def integrate_to_steady(
    params: ModelParams,
    p: float,
    init: CollectiveState,
    controls: Optional[IntegrationControls] = None,
) -> Trajectory:
    """Integrate the collective flow until it settles (or t_max).

    Raises NonFinite on integrator blow-up; never expected for valid
    parameters.
    """
    controls = controls or IntegrationControls()
    times, states, converged, reason = integrate_steady(
        _packed_rhs(params, p), init.pack(), controls
    )
    q = states[:, 0]
    a = states[:, 1] + 1j * states[:, 2]
    steady = CollectiveState(q=float(q[-1]), a=complex(a[-1])) if converged else None
    return Trajectory(times=times, q=q, a=a, converged=converged, steady=steady, reason=reason)


def stability_matrix(params: ModelParams, p: float, q: float, a: complex) -> np.ndarray:
    """3x3 linearisation of the flow at (q, a, a*), in that variable order."""
    kappa = params.kappa
    omega = params.drive
    v = params.dissipative_coupling
    n = params.n_qubits
    gamma = params.loss_rate()
    dshift = params.shifted_detuning()
    g8n = 8.0 * params.coherent_coupling * n
    return np.array(
        [
            [-gamma, -0.5j * omega + 4.0 * v * np.conj(a), 0.5j * omega + 4.0 * v * a],
            [
                (1j * g8n - 4.0 * v) * a - 1j * omega,
                1j * dshift - kappa + (1j * g8n - 4.0 * v) * q,
                0.0,
            ],
            [
                -(1j * g8n + 4.0 * v) * np.conj(a) + 1j * omega,
                0.0,
                -1j * dshift - kappa - (1j * g8n + 4.0 * v) * q,
            ],
        ],
        dtype=complex,
    )


def stability(params: ModelParams, p: float, fp: FixedPoint) -> StabilityReport:
    """Eigenvalue classification of a fixed point.

    Stable means every real part is below -STABILITY_MARGIN; real parts
    within the margin of zero are reported marginal, not stable.
    """
    m = stability_matrix(params, p, fp.nbar, fp.coherence)
    eig = np.linalg.eigvals(m)
    max_real = float(eig.real.max())
    marginal = bool(np.any(np.abs(eig.real) <= STABILITY_MARGIN))
    stable = bool(np.all(eig.real < -STABILITY_MARGIN))
    return StabilityReport(
        eigenvalues=tuple(complex(x) for x in eig),
        stable=stable,
        max_real_part=max_real,
        marginal=marginal,
    )


def batch_steady(
    params: ModelParams,
    p,
    q0,
    a0,
    controls: Optional[IntegrationControls] = None,
    n_qubits=None,
    g=None,
    omega=None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Steady population for many independent initial-value problems.

    p, q0, a0 and the optional per-cell overrides (n_qubits, g, omega)
    broadcast against each other; every cell shares the remaining
    parameters.  Returns (q_final, a_final, converged) flattened over
    the broadcast shape.  This vectorised path is what the sweep, basin
    and size-scan operations run on.
    """
    controls = controls or IntegrationControls()
    kappa = params.kappa
    v = params.dissipative_coupling

    nq = params.n_qubits if n_qubits is None else n_qubits
    gg = params.coherent_coupling if g is None else g
    om = params.drive if omega is None else omega

    shape = np.broadcast_shapes(
        np.shape(p), np.shape(q0), np.shape(a0), np.shape(nq), np.shape(gg), np.shape(om)
    )
    m = int(np.prod(shape)) if shape else 1
    pv = np.broadcast_to(np.asarray(p, float), shape).ravel()
    q0v = np.broadcast_to(np.asarray(q0, float), shape).ravel()
    a0v = np.broadcast_to(np.asarray(a0, float), shape).ravel()
    nv = np.broadcast_to(np.asarray(nq, float), shape).ravel()
    gv = np.broadcast_to(np.asarray(gg, float), shape).ravel()
    ov = np.broadcast_to(np.asarray(om, float), shape).ravel()

    gamma = 2.0 * kappa + 4.0 * v * (nv - 1.0) / nv
    dshift = params.detuning - 4.0 * gv * (nv - 1.0)
    gn8 = 8.0 * gv * nv
    pump = 2.0 * kappa * (1.0 - pv)

    def rhs(t, y):
        q, ar, ai = y[:m], y[m:2 * m], y[2 * m:]
        phase = dshift + gn8 * q
        damp = kappa + 4.0 * v * q
        return np.concatenate([
            ov * ai - gamma * q + pump + 4.0 * v * (ar * ar + ai * ai),
            -phase * ai - damp * ar,
            phase * ar + 0.5 * ov * (1.0 - 2.0 * q) - damp * ai,
        ])

    y0 = np.concatenate([q0v, a0v, np.zeros(m)])
    y, _res, converged = batch_integrate_steady(rhs, y0, m, controls)
    return y[:m], y[m:2 * m] + 1j * y[2 * m:], converged
