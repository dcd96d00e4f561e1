"""Command-line front end.

All rates are quoted in units of kappa (the local pump/decay rate), so
time is in units of 1/kappa.  Grids use the inclusive start:stop:step
grammar; floats are printed with 12 significant digits so runs can be
reproduced and diffed across machines.

Exit codes: 0 success, 1 solver failure, 2 invalid flags or grids.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import Optional

import numpy as np

from . import __version__, analysis, collective, exact
from .errors import (
    DegenerateDenominator,
    DimensionMismatch,
    NoBistability,
    NoFixedPoint,
    NonFinite,
    NonIntegerSplit,
    NonPhysical,
    RequiresZeroV,
    TooLarge,
)
from .integrate import IntegrationControls
from .model import ModelParams

VALIDATION_ERRORS = (ValueError, RequiresZeroV, NonIntegerSplit, TooLarge, DimensionMismatch)
SOLVER_ERRORS = (NonFinite, NonPhysical, NoBistability, DegenerateDenominator, NoFixedPoint)


def fmt(x) -> str:
    """12-significant-digit float formatting used for every numeric cell."""
    return f"{float(x):.12g}"


def parse_grid(spec: str) -> np.ndarray:
    """Parse 'start:stop:step' (endpoints inclusive within half a step)
    or a single number into a grid."""
    parts = spec.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"grid must be 'start:stop:step' or a single value, got {spec!r}")
    start, stop, step = (float(x) for x in parts)
    if step <= 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"grid stop {stop} is below start {start}")
    count = int(np.floor((stop - start) / step + 0.5)) + 1
    grid = start + step * np.arange(count)
    # float accumulation may overshoot the stated stop; snap it back
    if grid[-1] > stop:
        grid[-1] = stop
    return grid


def _params_from(args) -> ModelParams:
    return ModelParams(
        n_qubits=args.n,
        detuning=args.delta,
        drive=args.omega,
        coherent_coupling=args.g,
        dissipative_coupling=args.v,
        kappa=args.kappa,
    )


def _controls_from(args) -> IntegrationControls:
    return IntegrationControls(
        rtol=args.rtol,
        atol=args.atol,
        steady_tol=args.steady_tol,
        t_max=args.t_max,
        report_interval=args.report_interval,
    )


def _round_split_grid(p_grid: np.ndarray, n: int) -> np.ndarray:
    """Snap each p to an integer split N*p, warn, and drop duplicates."""
    snapped = np.round(p_grid * n) / n
    moved = np.abs(snapped - p_grid) > 1e-12
    unique = np.unique(snapped)
    if moved.any() or unique.size != p_grid.size:
        print(
            f"warning: rounded {int(moved.sum())} of {p_grid.size} p values to "
            f"integer splits of N={n}; {unique.size} unique points remain",
            file=sys.stderr,
        )
    return unique


# ---------------------------------------------------------------- output --

def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w"), True


def _emit(text: str, path: str) -> None:
    stream, close = _open_out(path)
    try:
        stream.write(text)
    finally:
        if close:
            stream.close()


def _csv_lines(header, rows, jumps=None):
    lines = [",".join(header)]
    lines += [",".join(row) for row in rows]
    for j in jumps or []:
        lines.append(f"# jump location={fmt(j.location)} drop={fmt(j.drop)}")
    return "\n".join(lines) + "\n"


def _json_doc(meta, header, rows, jumps=None):
    doc = {"meta": meta, "header": list(header), "rows": rows}
    if jumps is not None:
        doc["jumps"] = [{"location": j.location, "drop": j.drop} for j in jumps]
    return json.dumps(doc, indent=2) + "\n"


def _meta(args, params, extra=None):
    meta = {
        "tool": "qubit-aging",
        "version": __version__,
        "subcommand": args.command,
        "params": dataclasses.asdict(params),
        "controls": dataclasses.asdict(_controls_from(args)),
        "format": args.format,
        "out": args.out,
        "threads": args.threads,
    }
    meta.update(extra or {})
    return meta


def _save_svg(path: str, draw) -> None:
    if path == "-":
        raise ValueError("svg output requires --out <file>")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    draw(ax)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


# ---------------------------------------------------------- CSV readers --

def read_sweep_csv(text: str):
    """Inverse of the sweep/sizescan writer: (axis, nbar, converged, jumps)."""
    axis, nbar, conv, jumps = [], [], [], []
    lines = [ln for ln in text.strip().splitlines() if ln]
    for ln in lines[1:]:
        if ln.startswith("# jump"):
            fieldspec = dict(tok.split("=") for tok in ln[2:].split()[1:])
            jumps.append(analysis.JumpEvent(
                location=float(fieldspec["location"]), drop=float(fieldspec["drop"])
            ))
            continue
        a, b, c = ln.split(",")
        axis.append(float(a))
        nbar.append(float(b))
        conv.append(c == "true")
    return np.array(axis), np.array(nbar), np.array(conv), jumps


def read_table_csv(text: str):
    """Generic CSV reader: (header, list of string rows), comments skipped."""
    lines = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


# ------------------------------------------------------------- commands --

def _cmd_sweep(args, method_override=None) -> int:
    params = _params_from(args)
    controls = _controls_from(args)
    method = method_override or args.method
    p_grid = parse_grid(args.p)
    if method in ("meanfield", "exact"):
        p_grid = _round_split_grid(p_grid, params.n_qubits)
    init = None
    if method == "collective":
        init = collective.CollectiveState(q=args.q0, a=args.a0 + 0j)
    elif method == "meanfield":
        init = (args.q0, args.a0 + 0j)
    result = analysis.sweep_p(
        params,
        p_grid,
        init=init,
        method=method,
        controls=controls,
        jump_threshold=args.jump_threshold,
        hysteresis=getattr(args, "hysteresis", False),
        workers=args.threads,
    )
    rows = [
        [fmt(p), fmt(v), "true" if c else "false"]
        for p, v, c in zip(result.axis, result.nbar, result.converged)
    ]
    header = ["p", "nbar", "converged"]
    if args.format == "csv":
        _emit(_csv_lines(header, rows, result.jumps), args.out)
    elif args.format == "json":
        meta = _meta(args, params, {"method": method, "q0": args.q0, "a0": args.a0})
        _emit(_json_doc(meta, header, rows, result.jumps), args.out)
    else:
        _save_svg(args.out, lambda ax: (
            ax.plot(result.axis, result.nbar, "-o", ms=2),
            ax.set_xlabel("p"),
            ax.set_ylabel("nbar"),
        ))
    return 0


def _cmd_cumulant_sweep(args) -> int:
    return _cmd_sweep(args, method_override="cumulant")


def _cmd_sweep2d(args) -> int:
    params = _params_from(args)
    result = analysis.sweep_2d(
        params,
        args.axis,
        parse_grid(args.xgrid),
        parse_grid(args.p),
        init=collective.CollectiveState(q=args.q0, a=args.a0 + 0j),
        controls=_controls_from(args),
    )
    header = ["x", "p", "nbar"]
    rows = [
        [fmt(x), fmt(p), fmt(result.nbar[i, j])]
        for i, x in enumerate(result.x_values)
        for j, p in enumerate(result.p_values)
    ]
    if args.format == "csv":
        _emit(_csv_lines(header, rows), args.out)
    elif args.format == "json":
        meta = _meta(args, params, {"x_axis": args.axis, "q0": args.q0, "a0": args.a0})
        _emit(_json_doc(meta, header, rows), args.out)
    else:
        _save_svg(args.out, lambda ax: (
            ax.pcolormesh(result.p_values, result.x_values, result.nbar, shading="auto"),
            ax.set_xlabel("p"),
            ax.set_ylabel(result.x_name),
        ))
    return 0


def _cmd_interval(args) -> int:
    params = _params_from(args)
    interval = analysis.bistable_interval(params)
    summary = (
        f"p_cmin={fmt(interval.p_cmin)} p_cmax={fmt(interval.p_cmax)} "
        f"clamped_upper={'true' if interval.clamped_upper else 'false'}"
    )
    print(summary, file=sys.stderr if args.out == "-" else sys.stdout)
    header = ["p_cmin", "p_cmax", "clamped_upper"]
    rows = [[fmt(interval.p_cmin), fmt(interval.p_cmax),
             "true" if interval.clamped_upper else "false"]]
    if args.format == "csv":
        _emit(_csv_lines(header, rows), args.out)
    elif args.format == "json":
        meta = _meta(args, params, {
            "stability_p_cmin": interval.stability_p_cmin,
            "stability_p_cmax": interval.stability_p_cmax,
        })
        _emit(_json_doc(meta, header, rows), args.out)
    else:
        raise ValueError("interval has no svg rendering; use csv or json")
    return 0


def _cmd_basin(args) -> int:
    params = _params_from(args)
    grid = analysis.basin_map(
        params,
        args.p,
        parse_grid(args.q0grid),
        parse_grid(args.a0grid),
        controls=_controls_from(args),
    )
    names = grid.label_strings()
    header = ["q0", "a0", "label"]
    rows = [
        [fmt(q0), fmt(a0), names[i, j]]
        for i, q0 in enumerate(grid.q0_axis)
        for j, a0 in enumerate(grid.a0_axis)
    ]
    if args.format == "csv":
        _emit(_csv_lines(header, rows), args.out)
    elif args.format == "json":
        meta = _meta(args, params, {
            "p": args.p,
            "area_toN1": grid.area_to_n1,
            "area_toN2": grid.area_to_n2,
        })
        _emit(_json_doc(meta, header, rows), args.out)
    else:
        _save_svg(args.out, lambda ax: (
            ax.pcolormesh(grid.a0_axis, grid.q0_axis, grid.labels, shading="auto"),
            ax.set_xlabel("a0"),
            ax.set_ylabel("q0"),
        ))
    return 0


def _cmd_sizescan(args) -> int:
    params = _params_from(args)
    n_grid = parse_grid(args.nrange).astype(int)
    result = analysis.size_scan(
        params,
        args.p,
        n_grid,
        init=collective.CollectiveState(q=args.q0, a=args.a0 + 0j),
        controls=_controls_from(args),
        jump_threshold=args.jump_threshold,
    )
    header = ["N", "nbar", "converged"]
    rows = [
        [str(int(n)), fmt(v), "true" if c else "false"]
        for n, v, c in zip(result.axis, result.nbar, result.converged)
    ]
    if args.format == "csv":
        _emit(_csv_lines(header, rows, result.jumps), args.out)
    elif args.format == "json":
        meta = _meta(args, params, {"p": args.p, "q0": args.q0, "a0": args.a0})
        _emit(_json_doc(meta, header, rows, result.jumps), args.out)
    else:
        _save_svg(args.out, lambda ax: (
            ax.plot(result.axis, result.nbar, "-o", ms=2),
            ax.set_xlabel("N"),
            ax.set_ylabel("nbar"),
        ))
    return 0


def _cmd_compare(args) -> int:
    params = _params_from(args)
    controls = _controls_from(args)
    p_grid = _round_split_grid(parse_grid(args.p), params.n_qubits)
    col = analysis.sweep_p(params, p_grid, method="collective", controls=controls)
    mf = analysis.sweep_p(params, p_grid, method="meanfield", controls=controls,
                          workers=args.threads)
    run_exact = params.n_qubits <= exact.MAX_QUBITS
    if run_exact:
        ex = analysis.sweep_p(params, p_grid, method="exact", controls=controls,
                              workers=args.threads)
        exact_col = [fmt(v) for v in ex.nbar]
    else:
        print(
            f"note: N={params.n_qubits} > {exact.MAX_QUBITS}, exact column left empty",
            file=sys.stderr,
        )
        exact_col = ["" for _ in p_grid]
    header = ["p", "nbar_collective", "nbar_meanfield", "nbar_exact"]
    rows = [
        [fmt(p), fmt(c), fmt(m), e]
        for p, c, m, e in zip(p_grid, col.nbar, mf.nbar, exact_col)
    ]
    if args.format == "csv":
        _emit(_csv_lines(header, rows), args.out)
    elif args.format == "json":
        meta = _meta(args, params, {"exact_included": run_exact})
        json_rows = [row[:3] + [None if row[3] == "" else row[3]] for row in rows]
        _emit(_json_doc(meta, header, json_rows), args.out)
    else:
        _save_svg(args.out, lambda ax: (
            ax.plot(p_grid, col.nbar, "-o", ms=2, label="collective"),
            ax.plot(p_grid, mf.nbar, "-s", ms=2, label="meanfield"),
            ax.plot(p_grid, [float(e) for e in exact_col], "-^", ms=2, label="exact")
            if run_exact else None,
            ax.set_xlabel("p"),
            ax.set_ylabel("nbar"),
            ax.legend(),
        ))
    return 0


# -------------------------------------------------------------- parsing --

def _add_param_flags(sp):
    sp.add_argument("--n", type=int, required=True, help="number of qubits N")
    sp.add_argument("--delta", type=float, required=True,
                    help="qubit-laser detuning Delta (units of kappa)")
    sp.add_argument("--omega", type=float, required=True,
                    help="laser drive strength Omega >= 0 (units of kappa)")
    sp.add_argument("--g", type=float, required=True,
                    help="coherent sigma_z sigma_z coupling g (units of kappa)")
    sp.add_argument("--v", type=float, required=True,
                    help="dissipative coupling V >= 0 (units of kappa)")
    sp.add_argument("--kappa", type=float, default=1.0,
                    help="local pump/decay rate kappa, the rate unit (default 1)")


def _add_common_flags(sp):
    sp.add_argument("--out", default="-",
                    help="output path, '-' for stdout (default); svg needs a file")
    sp.add_argument("--format", choices=("csv", "json", "svg"), default="csv",
                    help="artifact format (default csv)")
    sp.add_argument("--threads", type=int, default=os.cpu_count(),
                    help="parallel workers for per-point solvers "
                         "(default: machine parallelism)")
    sp.add_argument("--rtol", type=float, default=1e-9,
                    help="integrator relative tolerance (default 1e-9)")
    sp.add_argument("--atol", type=float, default=1e-12,
                    help="integrator absolute tolerance (default 1e-12)")
    sp.add_argument("--steady-tol", type=float, default=1e-9,
                    help="max|rhs| settling threshold (default 1e-9)")
    sp.add_argument("--t-max", type=float, default=500.0,
                    help="integration horizon in units of 1/kappa (default 500)")
    sp.add_argument("--report-interval", type=float, default=1.0,
                    help="settling confirmation interval, 1/kappa units (default 1)")


def _add_init_flags(sp):
    sp.add_argument("--q0", type=float, default=0.5,
                    help="initial mean population <Q>_0 (default 0.5)")
    sp.add_argument("--a0", type=float, default=0.5,
                    help="initial real coherence <A>_0 (default 0.5)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubit-aging",
        description="Aging-transition analysis of driven coupled qubit "
                    "networks.  All rates are in units of kappa; grids use "
                    "the inclusive start:stop:step grammar.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="steady nbar versus inactive ratio p")
    _add_param_flags(sp)
    sp.add_argument("--p", required=True, help="p grid, start:stop:step")
    sp.add_argument("--method", choices=("collective", "meanfield", "exact", "cumulant"),
                    default="collective", help="solver (default collective); "
                    "meanfield/exact round p to integer splits with a warning")
    _add_init_flags(sp)
    sp.add_argument("--jump-threshold", type=float, default=0.05,
                    help="minimum nbar drop flagged as a transition (default 0.05)")
    sp.add_argument("--hysteresis", action="store_true",
                    help="warm-start each point from the previous steady state")
    _add_common_flags(sp)
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("cumulant-sweep",
                        help="correlated-moment sweep over p (requires --v 0)")
    _add_param_flags(sp)
    sp.add_argument("--p", required=True, help="p grid, start:stop:step")
    sp.add_argument("--jump-threshold", type=float, default=0.05,
                    help="minimum nbar drop flagged as a transition (default 0.05)")
    _add_common_flags(sp)
    sp.set_defaults(func=_cmd_cumulant_sweep, q0=None, a0=None)

    sp = sub.add_parser("sweep2d", help="collective nbar over (g or omega) x p")
    _add_param_flags(sp)
    sp.add_argument("--axis", choices=("g", "omega"), required=True,
                    help="which coupling the x grid varies")
    sp.add_argument("--xgrid", required=True, help="x grid, start:stop:step")
    sp.add_argument("--p", required=True, help="p grid, start:stop:step")
    _add_init_flags(sp)
    _add_common_flags(sp)
    sp.set_defaults(func=_cmd_sweep2d)

    sp = sub.add_parser("interval", help="bistable window [p_cmin, p_cmax]")
    _add_param_flags(sp)
    _add_common_flags(sp)
    sp.set_defaults(func=_cmd_interval)

    sp = sub.add_parser("basin", help="basin-of-attraction map at fixed p")
    _add_param_flags(sp)
    sp.add_argument("--p", type=float, required=True, help="inactive ratio p")
    sp.add_argument("--q0grid", default="0:1:0.01",
                    help="initial-population grid (default 0:1:0.01)")
    sp.add_argument("--a0grid", default="0:1:0.01",
                    help="initial-coherence grid, real (default 0:1:0.01)")
    _add_common_flags(sp)
    sp.set_defaults(func=_cmd_basin)

    sp = sub.add_parser("sizescan", help="collective nbar versus network size N")
    _add_param_flags(sp)
    sp.add_argument("--p", type=float, required=True, help="inactive ratio p")
    sp.add_argument("--nrange", required=True, help="N grid, start:stop:step (integers)")
    _add_init_flags(sp)
    sp.add_argument("--jump-threshold", type=float, default=0.05,
                    help="minimum nbar drop flagged as a transition (default 0.05)")
    _add_common_flags(sp)
    sp.set_defaults(func=_cmd_sizescan)

    sp = sub.add_parser("compare",
                        help="collective vs meanfield vs exact (exact needs N <= 10; "
                             "exact starts from the maximally mixed state)")
    _add_param_flags(sp)
    sp.add_argument("--p", required=True, help="p grid, start:stop:step")
    _add_common_flags(sp)
    sp.set_defaults(func=_cmd_compare)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VALIDATION_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except SOLVER_ERRORS as err:
        print(f"solver error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
