"""Steady-state ODE drivers shared by the dynamical solvers.

Two entry points: a scalar driver that integrates one system until its
right-hand side settles (with the settling confirmed over one reporting
interval), and a batch driver that advances many independent copies of
a vectorised flow in lockstep windows, which is how the sweep and basin
machinery stays fast without explicit multiprocessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NonFinite

REASON_STEADY = "steady"
REASON_TMAX = "t_max reached before settling"


@dataclass(frozen=True)
class IntegrationControls:
    """Knobs for the adaptive RK45 steady-state integration.

    fixed_step switches to a classic fixed-step RK4 loop (same settling
    criterion), mainly for cross-checking the adaptive results.
    """

    rtol: float = 1e-9
    atol: float = 1e-12
    steady_tol: float = 1e-9
    t_max: float = 500.0
    report_interval: float = 1.0
    fixed_step: Optional[float] = None


def _check_finite(y: np.ndarray) -> None:
    if not np.all(np.isfinite(y)):
        raise NonFinite("state left the finite range during integration")


def _residual(rhs, t, y) -> float:
    return float(np.max(np.abs(rhs(t, y))))


def integrate_steady(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    controls: IntegrationControls,
) -> tuple[np.ndarray, np.ndarray, bool, str]:
    """Integrate until max|rhs| < steady_tol, sustained over one report
    interval, or until t_max.

    Returns (times, states, converged, reason); states has one row per
    recorded time.
    """
    if controls.fixed_step is not None:
        return _integrate_steady_fixed(rhs, y0, controls)

    y0 = np.asarray(y0, dtype=float)
    _check_finite(y0)
    times = [0.0]
    states = [y0.copy()]
    t, y = 0.0, y0

    if _residual(rhs, t, y) < controls.steady_tol:
        return np.array(times), np.array(states), True, REASON_STEADY

    # March in reporting-interval windows and call the state steady once
    # the residual sits below tolerance at two consecutive window ends.
    settled_once = False
    while t < controls.t_max:
        span = (t, min(t + controls.report_interval, controls.t_max))
        sol = solve_ivp(rhs, span, y, rtol=controls.rtol, atol=controls.atol)
        if sol.status < 0 or sol.t[-1] <= t:
            raise NonFinite(f"integration stalled at t={t:.4g}: {sol.message}")
        _check_finite(sol.y[:, -1])
        times.extend(sol.t[1:].tolist())
        states.extend(sol.y[:, 1:].T)
        t, y = float(sol.t[-1]), sol.y[:, -1]
        settled = _residual(rhs, t, y) < controls.steady_tol
        if settled and settled_once:
            return np.array(times), np.array(states), True, REASON_STEADY
        settled_once = settled
    return np.array(times), np.array(states), False, REASON_TMAX


def _rk4_step(rhs, t, y, h):
    k1 = rhs(t, y)
    k2 = rhs(t + h / 2, y + h / 2 * k1)
    k3 = rhs(t + h / 2, y + h / 2 * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _integrate_steady_fixed(rhs, y0, controls):
    h = controls.fixed_step
    y = np.asarray(y0, dtype=float).copy()
    times, states = [0.0], [y.copy()]
    t = 0.0
    checks_per_report = max(1, int(round(controls.report_interval / h)))
    settled_once = False
    step = 0
    while t < controls.t_max:
        y = _rk4_step(rhs, t, y, h)
        t += h
        step += 1
        _check_finite(y)
        times.append(t)
        states.append(y.copy())
        if step % checks_per_report == 0:
            settled = _residual(rhs, t, y) < controls.steady_tol
            if settled and settled_once:
                return np.array(times), np.array(states), True, REASON_STEADY
            settled_once = settled
    return np.array(times), np.array(states), False, REASON_TMAX


def batch_integrate_steady(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    n_cells: int,
    controls: IntegrationControls,
    window: float = 25.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Advance a stacked batch of independent systems in shared windows.

    y0 is the flattened batch state; its length must be a multiple of
    n_cells, laid out as (n_vars, n_cells) row-major.  After each window
    the per-cell residual max|rhs| is evaluated and integration stops
    once every cell settles (or t_max).  Returns (y_final, residuals,
    converged_mask).
    """
    y = np.asarray(y0, dtype=float).copy()
    if y.size % n_cells:
        raise ValueError("batch state length is not a multiple of n_cells")
    _check_finite(y)
    t = 0.0
    res = np.abs(np.asarray(rhs(t, y))).reshape(-1, n_cells).max(axis=0)
    while t < controls.t_max and res.max() >= controls.steady_tol:
        t_next = min(t + window, controls.t_max)
        sol = solve_ivp(rhs, (t, t_next), y, rtol=controls.rtol, atol=controls.atol)
        if sol.status < 0 or sol.t[-1] <= t:
            raise NonFinite(f"batch integration stalled at t={t:.4g}: {sol.message}")
        y = sol.y[:, -1]
        _check_finite(y)
        t = float(sol.t[-1])
        res = np.abs(np.asarray(rhs(t, y))).reshape(-1, n_cells).max(axis=0)
    return y, res, res < controls.steady_tol
