"""
Batch front-end.

    memoryport <command> --config <file> [--out <dir>] [--dt <value>] [--hard-reset]

Each command writes ``summary.json`` (and ``timeseries.csv`` or
``sweep.csv`` where applicable) into the output directory.  Exit codes:
0 success, 2 configuration error, 3 infeasible shaping, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import config as cfgmod
from .channel import SignalSchedule, simulate_sequence
from .config import ConfigError, RunConfig, require
from .dynamics import readout_profile, simulate_dynamics
from .errors import MemoryPortError, ShapingError
from .gaussian import (apply_channel, channel_to_quadratures, duan_value,
                       log_negativity, make_squeezed_inputs, symplectic_eigenvalues)
from .shaping import (ShapingProblem, max_readout_efficiency, readout_branches,
                      shape_readout_coupling, shape_writein_coupling)
from .spatial import crosstalk_metric, gram_matrix

log = logging.getLogger("memoryport")

EXIT_CONFIG, EXIT_SHAPING, EXIT_NUMERIC = 2, 3, 4
ETA_CEILING = 1 + 1e-6


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _cmat(m) -> list:
    return [[_c(v) for v in row] for row in np.atleast_2d(m)]


def _check_eta(name: str, eta: float) -> float:
    if not -1e-12 <= eta <= ETA_CEILING:
        raise MemoryPortError(f"{name}={eta} outside [0, 1]")
    return float(eta)


class Timeseries:
    """Column-oriented table written with 17 significant digits."""

    def __init__(self):
        self.columns: dict = {}

    def add(self, name: str, values) -> None:
        self.columns[name] = np.asarray(values, dtype=float)

    def write(self, path: Path) -> None:
        names = list(self.columns)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for row in zip(*(self.columns[n] for n in names)):
                w.writerow([f"{v:.17g}" for v in row])


def _bin_cavity(traj) -> np.ndarray:
    return (traj.cavity[:-1] + traj.cavity[1:]) / 2


def run_simulate(body: dict, dt: Optional[float], hard_reset: bool):
    params = cfgmod.parse_cavity(body.get("cavity"))
    grid = cfgmod.parse_grid(body.get("grid"), dt)
    schedule = cfgmod.parse_schedule(require(body, "couplings"), grid)
    initial = cfgmod.parse_state(body.get("initial"), schedule.n_waves)
    a_in = None
    if body.get("input") is not None:
        spec = body["input"]
        a_in = cfgmod.parse_mode(spec, grid).samples * cfgmod.parse_complex(spec.get("amplitude", 1.0))
    traj = simulate_dynamics(params, grid, schedule, a_in, initial)

    start = abs(initial.cavity) ** 2 + np.sum(np.abs(initial.spins) ** 2)
    fed = 0.0 if a_in is None else float(np.sum(np.abs(a_in) ** 2) * grid.dt)
    final = traj.final
    left = abs(final.cavity) ** 2 + float(np.sum(np.abs(final.spins) ** 2))
    emitted = traj.emitted_energy
    scalars = {
        "emitted_energy": emitted,
        "final_cavity_energy": abs(final.cavity) ** 2,
        "final_spin_energy": float(np.sum(np.abs(final.spins) ** 2)),
        "energy_balance_residual": float(start + fed - emitted - left),
    }
    if a_in is None and start > 0:
        scalars["readout_efficiency"] = _check_eta("readout_efficiency", emitted / start)
    summary = {
        "scalars": scalars,
        "final_state": {"cavity": _c(final.cavity), "spins": [_c(b) for b in final.spins]},
    }
    ts = Timeseries()
    ts.add("t", grid.midpoints)
    a = _bin_cavity(traj)
    ts.add("re_a", a.real)
    ts.add("im_a", a.imag)
    ts.add("abs_a_out_sq", np.abs(traj.output) ** 2)
    for m, k in enumerate(schedule.samples):
        ts.add(f"re_k{m}", k.real / params.decay_rate)
        ts.add(f"im_k{m}", k.imag / params.decay_rate)
    return summary, ts, {"dt": grid.dt}


def _solution_record(sol) -> dict:
    return {
        "eta_target": sol.eta_target,
        "achieved_eta": _check_eta("achieved_eta", sol.achieved_eta),
        "residual_spin": sol.residual_spin,
        "residual_cavity": sol.residual_cavity,
        "ledger_residual": 1.0 - sol.achieved_eta - sol.residual_spin - sol.residual_cavity,
        "mode_overlap": sol.mode_overlap,
        "coefficient": _c(sol.coefficient),
        "branch": list(sol.branch),
    }


def run_shape(body: dict, dt: Optional[float], hard_reset: bool):
    params = cfgmod.parse_cavity(body.get("cavity"))
    grid = cfgmod.parse_grid(body.get("grid"), dt)
    target = cfgmod.parse_mode(body.get("target"), grid)
    direction = body.get("direction", "readout")
    eta_max = max_readout_efficiency(params, grid, target if direction == "readout" else target.reversed())

    if direction == "readout":
        if "eta_target" in body:
            sols = [shape_readout_coupling(ShapingProblem(
                params, grid, target, float(body["eta_target"]), tuple(body.get("branch_spec", ()))))]
        else:
            sols = readout_branches(params, grid, target, body.get("eta_targets"))
    elif direction == "writein":
        etas = body.get("eta_targets") or [body.get("eta_target", eta_max)]
        sols = [shape_writein_coupling(params, grid, target, float(e), tuple(body.get("branch_spec", ())))
                for e in etas]
    else:
        raise ConfigError(f"direction must be 'readout' or 'writein', got {direction!r}")

    etas = [s.achieved_eta for s in sols]
    summary = {
        "direction": direction,
        "branches": [_solution_record(s) for s in sols],
        "scalars": {
            "eta_max": eta_max,
            "n_branches": len(sols),
            "eta_branch_min": min(etas),
            "eta_branch_max": max(etas),
            "min_mode_overlap": min(s.mode_overlap for s in sols),
        },
    }
    ts = Timeseries()
    ts.add("t", grid.midpoints)
    if direction == "readout":
        ref = readout_profile(params, grid, sols[0].schedule, target)
        a = _bin_cavity(ref.trajectory)
        ts.add("re_a", a.real)
        ts.add("im_a", a.imag)
        ts.add("abs_a_out_sq", np.abs(ref.output) ** 2)
    ts.add("abs_target_sq", np.abs(target.samples) ** 2)
    for b, s in enumerate(sols):
        ts.add(f"re_k{b}", s.coupling.real / params.decay_rate)
        ts.add(f"im_k{b}", s.coupling.imag / params.decay_rate)
    return summary, ts, {"dt": grid.dt}


def _simulated_channel(body: dict, params, dt: Optional[float], hard_reset: bool):
    n = int(require(body, "n_signals", "channel"))
    write = require(body, "write", "channel")
    read = require(body, "read", "channel")
    grid_w = cfgmod.parse_grid(write.get("grid"), dt, "write.grid")
    grid_r = cfgmod.parse_grid(read.get("grid"), dt, "read.grid")
    if grid_w.dt != grid_r.dt:
        raise ConfigError("write and read grids must share dt")
    f = cfgmod.parse_mode(write.get("mode", {"reversed": True}), grid_w)
    g = cfgmod.parse_mode(read.get("mode"), grid_r)
    eta_w = write.get("eta_target", max_readout_efficiency(params, grid_w, f.reversed()) - 0.01)
    eta_r = read.get("eta_target", max_readout_efficiency(params, grid_r, g) - 0.01)
    sol_w = shape_writein_coupling(params, grid_w, f, float(eta_w))
    sol_r = shape_readout_coupling(ShapingProblem(params, grid_r, g, float(eta_r)))

    u_w = cfgmod.parse_unitary(body.get("write_unitary", "identity"), n)
    u_r = cfgmod.parse_unitary(body.get("read_unitary", "identity"), n)
    guard = float(body.get("guard_gap", 8.0 / params.decay_rate))
    try:
        sched = SignalSchedule.sequential(n, grid_w.duration, grid_r.duration, guard,
                                          float(body.get("storage_time", 0.0)))
    except MemoryPortError as exc:
        raise ConfigError(f"schedule: {exc}") from exc
    hard = hard_reset or bool(body.get("hard_reset", False))
    res = simulate_sequence(params, grid_w.dt, sched, u_w, u_r, sol_w.coupling, sol_r.coupling,
                            f, g, hard_reset=hard)
    return res, grid_w.dt


def run_channel(body: dict, dt: Optional[float], hard_reset: bool):
    params = cfgmod.parse_cavity(body.get("cavity"))
    res, used_dt = _simulated_channel(body, params, dt, hard_reset)
    measured, expected = res.measured.transfer, res.expected.transfer
    sv = np.linalg.svd(measured, compute_uv=False)
    summary = {
        "measured_transfer": _cmat(measured),
        "composed_transfer": _cmat(expected),
        "k_w": _c(res.k_w),
        "k_r": _c(res.k_r),
        "scalars": {
            "discrepancy": res.discrepancy,
            "total_efficiency": _check_eta("total_efficiency", res.expected.total_efficiency),
            "measured_efficiency": _check_eta("measured_efficiency", res.measured.total_efficiency),
            "max_singular_value": float(sv.max()),
            "write_efficiency": abs(res.k_w) ** 2,
            "read_efficiency": abs(res.k_r) ** 2,
        },
    }
    return summary, None, {"dt": used_dt}


def run_gaussian(body: dict, dt: Optional[float], hard_reset: bool):
    sq = require(body, "squeezing")
    r = sq.get("r", 1.0)
    if "angles" in sq:
        state = make_squeezed_inputs(r, sq["angles"])
    else:
        # default: orthogonal quadratures, ready to be entangled by a 1:1 splitter
        rr = np.broadcast_to(np.asarray(r, dtype=float), (2,))
        state = make_squeezed_inputs(rr, [np.pi / 2, 0.0])
    ch = require(body, "channel")
    meta = {}
    if "transfer" in ch:
        transfer = np.array([[cfgmod.parse_complex(v) for v in row] for row in ch["transfer"]])
    elif "simulate" in ch:
        params = cfgmod.parse_cavity(body.get("cavity"))
        sim = dict(ch["simulate"])
        sim.setdefault("n_signals", state.n_modes)
        res, meta["dt"] = _simulated_channel(sim, params, dt, hard_reset)
        transfer = res.measured.transfer
    else:
        eff = float(ch.get("efficiency", 1.0))
        u = cfgmod.parse_unitary(ch.get("unitary", "identity"), state.n_modes)
        transfer = np.sqrt(eff) * u.matrix
    out = apply_channel(state, channel_to_quadratures(transfer))
    scalars = {
        "min_symplectic_eigenvalue": float(symplectic_eigenvalues(out.covariance).min()),
        "channel_efficiency": float(np.mean(np.sum(np.abs(transfer) ** 2, axis=0))),
    }
    if out.n_modes >= 2:
        scalars["log_negativity"] = log_negativity(out, ((0,), (1,)))
    if out.n_modes == 2:
        scalars["duan_value"] = duan_value(out)
    summary = {
        "transfer": _cmat(transfer),
        "output_covariance": out.covariance.tolist(),
        "output_mean": out.mean.tolist(),
        "scalars": scalars,
    }
    return summary, None, meta


def run_spatial(body: dict, dt: Optional[float], hard_reset: bool):
    density = cfgmod.parse_density(require(body, "density"))
    basis = cfgmod.parse_basis(require(body, "basis"), density)
    gram = gram_matrix(density, basis)
    summary = {
        "gram": _cmat(gram),
        "offsets": list(basis.offsets),
        "scalars": {
            "crosstalk": crosstalk_metric(gram),
            "min_gram_eigenvalue": float(np.linalg.eigvalsh(gram).min()),
        },
    }
    return summary, None, {}


RUNNERS = {
    "simulate": run_simulate,
    "shape": run_shape,
    "channel": run_channel,
    "gaussian": run_gaussian,
    "spatial": run_spatial,
}


def execute(cfg: RunConfig, dt: Optional[float] = None, hard_reset: bool = False):
    """Run one non-sweep command; returns (summary, timeseries or None)."""
    try:
        runner = RUNNERS[cfg.command]
    except KeyError:
        raise ConfigError(f"command {cfg.command!r} cannot be executed directly") from None
    try:
        summary, ts, meta = runner(cfg.body, dt, hard_reset)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed {cfg.command} config: {exc}") from exc
    summary = {"command": cfg.command, "schema_version": cfgmod.SCHEMA_VERSION,
               "convergence": meta, **summary}
    return summary, ts


def sweep(cfg: RunConfig, dt: Optional[float] = None, hard_reset: bool = False):
    """Run the base config once per value; rows come back in grid order."""
    spec = cfg.body
    base = require(spec, "base", "sweep")
    param = require(spec, "parameter", "sweep")
    values = require(spec, "values", "sweep")
    if not isinstance(values, list) or len(values) < 2:
        raise ConfigError("sweep needs a grid of at least two values")
    base_cfg = RunConfig.from_dict(base)
    if base_cfg.command == "sweep":
        raise ConfigError("nested sweeps are not supported")

    rows = []
    for v in values:
        body = copy.deepcopy(base_cfg.body)
        cfgmod.set_path(body, param, v)
        summary, _ = execute(RunConfig(base_cfg.command, body), dt, hard_reset)
        rows.append({"value": v, "scalars": summary["scalars"]})
    summary = {
        "command": "sweep",
        "schema_version": cfgmod.SCHEMA_VERSION,
        "base_command": base_cfg.command,
        "parameter": param,
        "rows": rows,
    }
    return summary


def _write_sweep_csv(summary: dict, path: Path) -> None:
    keys = sorted({k for row in summary["rows"] for k in row["scalars"]})
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([summary["parameter"], *keys])
        for row in summary["rows"]:
            v = row["value"]
            vs = f"{v:.17g}" if isinstance(v, float) else json.dumps(v)
            w.writerow([vs, *(f"{row['scalars'][k]:.17g}" if k in row["scalars"] else "" for k in keys)])


def dump_summary(summary: dict) -> str:
    return json.dumps(summary, sort_keys=True, indent=2, allow_nan=True) + "\n"


def run(cfg: RunConfig, out_dir: Optional[Path] = None, dt: Optional[float] = None,
        hard_reset: bool = False) -> dict:
    """Execute ``cfg`` and write its files; returns the summary."""
    out = Path(out_dir) if out_dir is not None else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    if cfg.command == "sweep":
        summary = sweep(cfg, dt, hard_reset)
        _write_sweep_csv(summary, out / "sweep.csv")
    else:
        summary, ts = execute(cfg, dt, hard_reset)
        if ts is not None and cfg.emit_timeseries:
            ts.write(out / "timeseries.csv")
    (out / "summary.json").write_text(dump_summary(summary))
    return summary


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, ShapingError):
        return EXIT_SHAPING
    return EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="memoryport",
                                description="Multiport cavity quantum memory simulator.")
    p.add_argument("command", choices=cfgmod.COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    p.add_argument("--dt", type=float, default=None, help="override the grid step")
    p.add_argument("--hard-reset", action="store_true",
                   help="zero the cavity at every window start instead of waiting it out")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = cfgmod.load_config(args.config, args.command)
        run(cfg, args.out, args.dt, args.hard_reset)
    except (MemoryPortError, FloatingPointError, np.linalg.LinAlgError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return exit_code(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
