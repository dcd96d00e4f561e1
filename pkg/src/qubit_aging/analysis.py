"""Parameter sweeps, transition detection, bistable-interval and basin
mapping: the figure-generation layer on top of the four solvers.

Grid points are independent problems.  The collective and correlated
solvers run them as one stacked vectorised system; the per-qubit and
exact solvers loop (optionally across processes).  Identical inputs
always produce identical outputs: there is no randomness anywhere.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import collective, cumulant, exact, meanfield
from .errors import NoBistability, NonIntegerSplit
from .integrate import IntegrationControls
from .model import ModelParams, Region, cubic_coefficients, solve_fixed_points

METHODS = ("collective", "meanfield", "exact", "cumulant")

DEFAULT_JUMP_THRESHOLD = 0.05
BASIN_CAPTURE_TOL = 1e-4

# Basin labels (stored as int8 codes in the grid).
UNDETERMINED = 0
TO_N1 = 1
TO_N2 = 2
LABEL_NAMES = {UNDETERMINED: "undetermined", TO_N1: "toN1", TO_N2: "toN2"}


@dataclass(frozen=True)
class JumpEvent:
    """An abrupt population drop between two adjacent grid points."""

    location: float   # midpoint of the bracketing cells
    drop: float       # nbar decrease across the cell


@dataclass(frozen=True)
class SweepResult:
    axis: np.ndarray
    nbar: np.ndarray
    method: str
    jumps: list[JumpEvent] = field(default_factory=list)
    converged: Optional[np.ndarray] = None


@dataclass(frozen=True)
class Sweep2D:
    x_name: str               # "g" or "omega"
    x_values: np.ndarray
    p_values: np.ndarray
    nbar: np.ndarray          # shape (len(x_values), len(p_values))
    converged: np.ndarray


@dataclass(frozen=True)
class BistableInterval:
    p_cmin: float
    p_cmax: float
    clamped_upper: bool
    # Endpoints of the window where the low branch is actually stable,
    # reported alongside the discriminant-based ones.
    stability_p_cmin: Optional[float] = None
    stability_p_cmax: Optional[float] = None

    @property
    def width(self) -> float:
        return self.p_cmax - self.p_cmin


@dataclass(frozen=True)
class BasinGrid:
    q0_axis: np.ndarray
    a0_axis: np.ndarray
    labels: np.ndarray        # int8 codes, shape (len(q0_axis), len(a0_axis))

    def count(self, code: int) -> int:
        return int((self.labels == code).sum())

    @property
    def area_to_n1(self) -> int:
        return self.count(TO_N1)

    @property
    def area_to_n2(self) -> int:
        return self.count(TO_N2)

    def label_strings(self) -> np.ndarray:
        out = np.empty(self.labels.shape, dtype=object)
        for code, name in LABEL_NAMES.items():
            out[self.labels == code] = name
        return out


def detect_jumps(axis, nbar, threshold: float = DEFAULT_JUMP_THRESHOLD) -> list[JumpEvent]:
    """Population drops larger than threshold between adjacent cells."""
    axis = np.asarray(axis, dtype=float)
    nbar = np.asarray(nbar, dtype=float)
    drops = nbar[:-1] - nbar[1:]
    return [
        JumpEvent(location=float(0.5 * (axis[i] + axis[i + 1])), drop=float(drops[i]))
        for i in np.nonzero(drops > threshold)[0]
    ]


def _validate_axis(grid, lo=None, hi=None, name="grid"):
    grid = np.asarray(grid, dtype=float).copy()
    if grid.ndim != 1 or grid.size < 1:
        raise ValueError(f"{name} must be a non-empty 1-D sequence")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError(f"{name} must be strictly increasing")
    if lo is not None:
        # Snap float-accumulation overshoot (arange-style grids) onto
        # the bounds before enforcing them.
        grid[np.abs(grid - lo) < 1e-9] = lo
        grid[np.abs(grid - hi) < 1e-9] = hi
        if grid[0] < lo or grid[-1] > hi:
            raise ValueError(f"{name} must lie within [{lo}, {hi}]")
    return grid


def _meanfield_point(params: ModelParams, p: float, w0: float, q0: complex,
                     controls: Optional[IntegrationControls]):
    run = params.with_inactive_ratio(p)
    n_active, _, drift = run.split_counts()
    if drift > meanfield.SPLIT_TOL:
        raise NonIntegerSplit(f"N*p = {run.n_qubits * p:.6f} is not an integer at p={p}")
    n = run.n_qubits
    init = meanfield.MeanFieldState(
        w=np.full(n, w0), q=np.full(n, q0, dtype=complex), n_active=n_active
    )
    final, nbar = meanfield.integrate_meanfield(run, init, controls)
    res_w, res_q = meanfield.meanfield_rhs(final, run)
    tol = (controls or IntegrationControls()).steady_tol
    converged = max(np.abs(res_w).max(), np.abs(res_q).max()) < tol
    return nbar, converged


def _exact_point(params: ModelParams, p: float, rho0, controls):
    system = exact.build_system(params.with_inactive_ratio(p))
    rho = exact.maximally_mixed(params.n_qubits) if rho0 is None else rho0
    result = exact.evolve_exact(system, rho, controls)
    return result.steady_nbar, result.converged


def _pmap(fn, argtuples, workers: Optional[int]):
    if workers is None or workers <= 1 or len(argtuples) <= 1:
        return [fn(*args) for args in argtuples]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*argtuples)))


def sweep_p(
    params: ModelParams,
    p_grid,
    init=None,
    method: str = "collective",
    controls: Optional[IntegrationControls] = None,
    jump_threshold: float = DEFAULT_JUMP_THRESHOLD,
    hysteresis: bool = False,
    workers: Optional[int] = None,
) -> SweepResult:
    """Steady nbar over a p grid, restarting from the same init each point.

    init semantics per method (None picks the default):
      collective -- CollectiveState, default (q, a) = (0.5, 0.5).
      meanfield  -- (w0, q0) uniform per-qubit start, default (0.5, 0.5).
      cumulant   -- CumulantState, default all moments zero.
      exact      -- DensityMatrix, default maximally mixed.
    With hysteresis=True each point warm-starts from the previous steady
    state instead (collective only; sweeps then run serially).
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    p_grid = _validate_axis(p_grid, 0.0, 1.0, "p_grid")

    if method == "collective":
        start = init or collective.CollectiveState(q=0.5, a=0.5 + 0j)
        if hysteresis:
            nbars, conv = [], []
            current = start
            for p in p_grid:
                traj = collective.integrate_to_steady(params, float(p), current, controls)
                nbars.append(traj.q[-1])
                conv.append(traj.converged)
                if traj.converged:
                    current = traj.steady
            nbar = np.array(nbars)
            converged = np.array(conv)
        else:
            if start.a.imag != 0.0:
                raise ValueError("collective sweeps take a real initial coherence")
            nbar, _a, converged = collective.batch_steady(
                params, p_grid, start.q, start.a.real, controls
            )
    elif method == "cumulant":
        nbar, converged = cumulant.batch_steady(params, p_grid, init, controls)
    elif method == "meanfield":
        w0, q0 = (0.5, 0.5 + 0j) if init is None else init
        rows = _pmap(
            _meanfield_point,
            [(params, float(p), w0, q0, controls) for p in p_grid],
            workers,
        )
        nbar = np.array([r[0] for r in rows])
        converged = np.array([r[1] for r in rows])
    else:  # exact
        rows = _pmap(
            _exact_point,
            [(params, float(p), init, controls) for p in p_grid],
            workers,
        )
        nbar = np.array([r[0] for r in rows])
        converged = np.array([r[1] for r in rows])

    return SweepResult(
        axis=p_grid,
        nbar=nbar,
        method=method,
        jumps=detect_jumps(p_grid, nbar, jump_threshold),
        converged=converged,
    )


def sweep_2d(
    params: ModelParams,
    x_axis: str,
    x_grid,
    p_grid,
    init: Optional[collective.CollectiveState] = None,
    controls: Optional[IntegrationControls] = None,
) -> Sweep2D:
    """Collective steady nbar over the (g or omega) x p product grid."""
    if x_axis not in ("g", "omega"):
        raise ValueError(f"x_axis must be 'g' or 'omega', got {x_axis!r}")
    x_grid = _validate_axis(x_grid, name="x_grid")
    p_grid = _validate_axis(p_grid, 0.0, 1.0, "p_grid")
    start = init or collective.CollectiveState(q=0.5, a=0.5 + 0j)

    xx, pp = np.meshgrid(x_grid, p_grid, indexing="ij")
    override = {"g": xx} if x_axis == "g" else {"omega": xx}
    nbar, _a, conv = collective.batch_steady(
        params, pp, start.q, start.a.real, controls, **override
    )
    shape = xx.shape
    return Sweep2D(
        x_name=x_axis,
        x_values=x_grid,
        p_values=p_grid,
        nbar=nbar.reshape(shape),
        converged=conv.reshape(shape),
    )


def _discriminant(params: ModelParams, p: float) -> float:
    coeffs = cubic_coefficients(params, p)
    if coeffs.degenerate:
        return np.inf   # no cubic, never three roots
    return coeffs.discriminant


def _bisect_sign_change(params: ModelParams, lo: float, hi: float, tol: float) -> float:
    f_lo = _discriminant(params, lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = _discriminant(params, mid)
        if (f_lo < 0) == (f_mid < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bistable_interval(
    params: ModelParams,
    scan_step: float = 1e-3,
    refine_tol: float = 1e-6,
    check_stability: bool = True,
) -> BistableInterval:
    """Locate the p window with three steady states.

    The discriminant is scanned on a uniform grid and each sign change
    bisected; when it stays negative all the way to p = 1 the upper
    endpoint is clamped there and flagged.  The window where the lower
    branch is confirmed stable is reported side by side.  Raises
    NoBistability when the discriminant never goes negative.
    """
    ps = np.arange(0.0, 1.0 + scan_step / 2, scan_step)
    ps[-1] = 1.0
    disc = np.array([_discriminant(params, float(p)) for p in ps])
    neg = disc < 0
    if not neg.any():
        raise NoBistability("discriminant is non-negative on all of [0, 1]")

    first = int(np.argmax(neg))
    last = int(len(neg) - 1 - np.argmax(neg[::-1]))
    if first == 0:
        p_cmin = 0.0
    else:
        p_cmin = _bisect_sign_change(params, float(ps[first - 1]), float(ps[first]), refine_tol)
    clamped = last == len(ps) - 1
    if clamped:
        p_cmax = 1.0
    else:
        p_cmax = _bisect_sign_change(params, float(ps[last]), float(ps[last + 1]), refine_tol)

    stab_lo = stab_hi = None
    if check_stability:
        inside = ps[(ps > p_cmin) & (ps < p_cmax)]
        stable_ps = []
        for p in inside:
            fps = solve_fixed_points(params, float(p))
            if fps.region is not Region.II:
                continue
            report = collective.stability(params, float(p), fps.lower)
            if report.stable:
                stable_ps.append(float(p))
        if stable_ps:
            stab_lo, stab_hi = min(stable_ps), max(stable_ps)

    return BistableInterval(
        p_cmin=float(p_cmin),
        p_cmax=float(p_cmax),
        clamped_upper=bool(clamped),
        stability_p_cmin=stab_lo,
        stability_p_cmax=stab_hi,
    )


def basin_map(
    params: ModelParams,
    p: float,
    q0_grid=None,
    a0_grid=None,
    controls: Optional[IntegrationControls] = None,
) -> BasinGrid:
    """Classify initial conditions by the fixed point they converge to.

    The initial coherence is taken real.  Cells are labelled by the
    nearest fixed point within the capture tolerance: toN1 for the upper
    branch, toN2 for the low branch, undetermined otherwise (including
    cells parked near the unstable intermediate point).  Outside the
    bistable window everything converges to the single fixed point and
    the whole map reads toN1.
    """
    q0_grid = _validate_axis(
        np.linspace(0.0, 1.0, 101) if q0_grid is None else q0_grid, name="q0_grid"
    )
    a0_grid = _validate_axis(
        np.linspace(0.0, 1.0, 101) if a0_grid is None else a0_grid, name="a0_grid"
    )
    fps = solve_fixed_points(params, p)
    targets = [(TO_N1, fps.upper)]
    if len(fps.points) == 3:
        targets.append((TO_N2, fps.lower))

    qq, aa = np.meshgrid(q0_grid, a0_grid, indexing="ij")
    q_fin, a_fin, _conv = collective.batch_steady(params, p, qq, aa, controls)

    labels = np.full(q_fin.size, UNDETERMINED, dtype=np.int8)
    for code, fp in targets:
        dist = np.maximum(np.abs(q_fin - fp.nbar), np.abs(a_fin - fp.coherence))
        labels[dist < BASIN_CAPTURE_TOL] = code
    return BasinGrid(q0_axis=q0_grid, a0_axis=a0_grid, labels=labels.reshape(qq.shape))


def size_scan(
    params: ModelParams,
    p: float,
    n_grid,
    init: Optional[collective.CollectiveState] = None,
    controls: Optional[IntegrationControls] = None,
    jump_threshold: float = DEFAULT_JUMP_THRESHOLD,
) -> SweepResult:
    """Collective steady nbar versus network size at fixed p.

    params.n_qubits is ignored; each grid entry supplies its own N.
    """
    n_grid = np.asarray(n_grid)
    if n_grid.ndim != 1 or n_grid.size < 1:
        raise ValueError("n_grid must be a non-empty 1-D sequence")
    if np.any(n_grid < 1) or np.any(n_grid != np.round(n_grid)):
        raise ValueError("n_grid entries must be positive integers")
    if n_grid.size > 1 and not np.all(np.diff(n_grid) > 0):
        raise ValueError("n_grid must be strictly increasing")
    start = init or collective.CollectiveState(q=0.5, a=0.5 + 0j)
    nbar, _a, conv = collective.batch_steady(
        params, p, start.q, start.a.real, controls, n_qubits=n_grid.astype(float)
    )
    axis = n_grid.astype(float)
    return SweepResult(
        axis=axis,
        nbar=nbar,
        method="collective",
        jumps=detect_jumps(axis, nbar, jump_threshold),
        converged=conv,
    )
