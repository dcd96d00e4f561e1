"""Second-order correlated collective dynamics (six moments, V = 0).

Beyond the population q and coherence a, the state carries the pair
moments b (coherence exchange, real), c, d (complex) and e (population
pair, real); three-qubit expectations are closed with second-order
cumulant factorisation.  The equations are only available without the
dissipative coupling, exactly as they were derived.

b and e are stored as reals because their evolution is real whenever
the state respects the moment symmetries; the would-be imaginary
residuals are available separately for monitoring instead of being
carried in the state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import RequiresZeroV
from .integrate import IntegrationControls, batch_integrate_steady, integrate_steady
from .model import ModelParams


@dataclass(frozen=True)
class CumulantState:
    q: float = 0.0
    a: complex = 0.0
    b: float = 0.0
    c: complex = 0.0
    d: complex = 0.0
    e: float = 0.0

    def pack(self) -> np.ndarray:
        return np.array([
            self.q, self.a.real, self.a.imag, self.b,
            self.c.real, self.c.imag, self.d.real, self.d.imag, self.e,
        ])

    @staticmethod
    def unpack(y: np.ndarray) -> "CumulantState":
        return CumulantState(
            q=float(y[0]),
            a=complex(y[1], y[2]),
            b=float(y[3]),
            c=complex(y[4], y[5]),
            d=complex(y[6], y[7]),
            e=float(y[8]),
        )


def zero_state() -> CumulantState:
    return CumulantState()


def _require_zero_v(params: ModelParams) -> None:
    if params.dissipative_coupling != 0.0:
        raise RequiresZeroV(
            "correlated-moment equations are only implemented for V = 0; "
            f"got V = {params.dissipative_coupling}"
        )


def _complex_derivatives(state: CumulantState, params: ModelParams, p: float):
    """All six moment derivatives in complex form."""
    n = params.n_qubits
    kappa = params.kappa
    omega = params.drive
    g = params.coherent_coupling
    delta = params.detuning
    q, a, b, c, d, e = state.q, state.a, state.b, state.c, state.d, state.e

    dq = omega * a.imag - 2.0 * kappa * q + 2.0 * kappa * (1.0 - p)
    da = (
        0.5j * omega * (1.0 - 2.0 * q)
        + (1j * (delta - 4.0 * g * (n - 1)) - kappa) * a
        + 8j * g * c
    )
    db = (
        1j * omega * (c - np.conj(c))
        - 0.5j * omega * (n - 1) * (a - np.conj(a))
        - 2.0 * kappa * b
    )
    dc = (
        0.5j * omega * (n - 1) * q
        + 2.0 * kappa * n * (1.0 - p) * a
        + 0.5j * omega * b
        - 0.5j * omega * d
        - 1j * omega * e
        + (1j * delta + 4j * g - 3.0 * kappa) * c
        + 4j * g * (
            c * (2.0 * n * q - n + 2.0)
            + 2.0 * n * q * c
            + 2.0 * n * a * e
            - 4.0 * n * n * a * q * q
        )
    )
    dd = (
        1j * omega * (n - 1) * a
        - 2j * omega * c
        + (2j * delta - 2.0 * kappa) * d
        + 8j * g * (
            d * (2.0 * n * q - n + 2.0)
            + 4.0 * n * a * c
            - 4.0 * n * n * a * a * q
        )
    )
    de = (
        4.0 * kappa * n * (1.0 - p) * q
        - 1j * omega * (c - np.conj(c))
        - 4.0 * kappa * e
    )
    return dq, da, db, dc, dd, de


def cumulant_rhs(state: CumulantState, params: ModelParams, p: float) -> CumulantState:
    """Time derivative of every moment, packaged like the state itself."""
    _require_zero_v(params)
    dq, da, db, dc, dd, de = _complex_derivatives(state, params, p)
    return CumulantState(q=dq, a=da, b=db.real, c=dc, d=dd, e=de.real)


def reality_residual(state: CumulantState, params: ModelParams, p: float) -> tuple[float, float]:
    """|Im db/dt| and |Im de/dt| from the full complex expressions.

    Both vanish identically when b and e are real, so nonzero values
    flag a transcription error rather than physics.
    """
    _require_zero_v(params)
    _, _, db, _, _, de = _complex_derivatives(state, params, p)
    return abs(db.imag), abs(de.imag)


def integrate_cumulant(
    params: ModelParams,
    p: float,
    init: CumulantState,
    controls: Optional[IntegrationControls] = None,
) -> tuple[CumulantState, float]:
    """Integrate the moment system to steady state; returns (state, nbar)."""
    _require_zero_v(params)
    controls = controls or IntegrationControls()

    def rhs(t, y):
        return cumulant_rhs(CumulantState.unpack(y), params, p).pack()

    _, states, _converged, _reason = integrate_steady(rhs, init.pack(), controls)
    final = CumulantState.unpack(states[-1])
    return final, final.q


def batch_steady(
    params: ModelParams,
    p,
    init: Optional[CumulantState] = None,
    controls: Optional[IntegrationControls] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Steady nbar over an array of inactive ratios, integrated as one
    stacked system (the fast path for sweeps).

    Every cell starts from the same init (all moments zero by default).
    Returns (nbar, converged) matching the p array.
    """
    _require_zero_v(params)
    controls = controls or IntegrationControls()
    init = init or zero_state()
    pv = np.atleast_1d(np.asarray(p, dtype=float))
    m = pv.size
    n = params.n_qubits
    kappa = params.kappa
    omega = params.drive
    g = params.coherent_coupling
    delta = params.detuning
    pump2 = 2.0 * kappa * (1.0 - pv)
    pump_a = 2.0 * kappa * n * (1.0 - pv)
    pump4 = 4.0 * kappa * n * (1.0 - pv)

    def rhs(t, y):
        q = y[0 * m:1 * m]
        a = y[1 * m:2 * m] + 1j * y[2 * m:3 * m]
        b = y[3 * m:4 * m]
        c = y[4 * m:5 * m] + 1j * y[5 * m:6 * m]
        d = y[6 * m:7 * m] + 1j * y[7 * m:8 * m]
        e = y[8 * m:9 * m]
        dq = omega * a.imag - 2.0 * kappa * q + pump2
        da = (
            0.5j * omega * (1.0 - 2.0 * q)
            + (1j * (delta - 4.0 * g * (n - 1)) - kappa) * a
            + 8j * g * c
        )
        db = 2.0 * omega * (-c.imag) + omega * (n - 1) * a.imag - 2.0 * kappa * b
        dc = (
            0.5j * omega * (n - 1) * q
            + pump_a * a
            + 0.5j * omega * b
            - 0.5j * omega * d
            - 1j * omega * e
            + (1j * delta + 4j * g - 3.0 * kappa) * c
            + 4j * g * (
                c * (2.0 * n * q - n + 2.0)
                + 2.0 * n * q * c
                + 2.0 * n * a * e
                - 4.0 * n * n * a * q * q
            )
        )
        dd = (
            1j * omega * (n - 1) * a
            - 2j * omega * c
            + (2j * delta - 2.0 * kappa) * d
            + 8j * g * (
                d * (2.0 * n * q - n + 2.0)
                + 4.0 * n * a * c
                - 4.0 * n * n * a * a * q
            )
        )
        de = pump4 * q + 2.0 * omega * c.imag - 4.0 * kappa * e
        return np.concatenate([
            dq, da.real, da.imag, db, dc.real, dc.imag, dd.real, dd.imag, de,
        ])

    base = init.pack()
    y0 = np.repeat(base[:, None], m, axis=1).ravel()
    y, _res, converged = batch_integrate_steady(rhs, y0, m, controls)
    return y[:m].copy(), converged
