"""JSON run configuration: loading and translation of blocks into model objects."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .channel import UnitarySpec
from .dynamics import CavityParams, CouplingSchedule, SimState, TemporalMode, TimeGrid
from .errors import ConfigError, MemoryPortError
from .modes import exponential_mode, gaussian_mode
from .spatial import DensityProfile, SpinWaveBasis

SCHEMA_VERSION = 1
COMMANDS = ("simulate", "shape", "channel", "gaussian", "spatial", "sweep")


@dataclass
class RunConfig:
    command: str
    body: dict
    output_dir: Path = Path("memoryport_out")
    emit_timeseries: bool = True

    @classmethod
    def from_dict(cls, raw: dict, command: Optional[str] = None) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        version = raw.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
        cfg_cmd = raw.get("command", command)
        if command is not None and cfg_cmd != command:
            raise ConfigError(f"command line asks for {command!r} but the config is for {cfg_cmd!r}")
        if cfg_cmd not in COMMANDS:
            raise ConfigError(f"unknown command {cfg_cmd!r}; expected one of {', '.join(COMMANDS)}")
        body = copy.deepcopy(raw)
        return cls(
            command=cfg_cmd,
            body=body,
            output_dir=Path(raw.get("output_dir", "memoryport_out")),
            emit_timeseries=bool(raw.get("emit_timeseries", True)),
        )


def load_config(path, command: Optional[str] = None) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig.from_dict(raw, command)


def require(block: dict, key: str, where: str = ""):
    try:
        return block[key]
    except (KeyError, TypeError):
        raise ConfigError(f"missing required field {where + '.' if where else ''}{key}") from None


def parse_complex(value) -> complex:
    """A number, or a [re, im] pair."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"cannot read a complex number from {value!r}")


def parse_complex_array(spec) -> np.ndarray:
    """Either {"re": [...], "im": [...]} or a list of numbers / [re, im] pairs."""
    if isinstance(spec, dict):
        re = np.asarray(require(spec, "re"), dtype=float)
        im = np.asarray(spec.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise ConfigError("re and im arrays differ in length")
        return re + 1j * im
    return np.array([parse_complex(v) for v in spec], dtype=complex)


def parse_cavity(block: Optional[dict]) -> CavityParams:
    block = block or {}
    try:
        return CavityParams(float(block.get("decay_rate", 1.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cavity: {exc}") from exc


def parse_grid(block: dict, dt_override: Optional[float] = None, where: str = "grid") -> TimeGrid:
    if not isinstance(block, dict):
        raise ConfigError(f"{where} block is missing")
    dt = float(dt_override if dt_override is not None else require(block, "dt", where))
    try:
        if "duration" in block:
            return TimeGrid.spanning(float(block["duration"]), dt, float(block.get("t_start", 0.0)))
        return TimeGrid(dt, int(require(block, "n_steps", where)), float(block.get("t_start", 0.0)))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_mode(spec: Optional[dict], grid: TimeGrid, default_kind: str = "gaussian") -> TemporalMode:
    spec = dict(spec or {})
    kind = spec.get("kind", default_kind)
    try:
        if kind == "gaussian":
            mode = gaussian_mode(grid, float(spec.get("center", grid.t_start + grid.duration / 2)),
                                 float(spec.get("width", grid.duration / 8)))
        elif kind == "exponential":
            mode = exponential_mode(grid, float(require(spec, "rate", "mode")),
                                    rising=bool(spec.get("rising", False)))
        elif kind == "samples":
            samples = parse_complex_array(require(spec, "samples", "mode"))
            if samples.size != grid.n_steps:
                raise ConfigError(f"mode has {samples.size} samples, grid has {grid.n_steps} bins")
            mode = TemporalMode.normalized(samples, grid.dt)
        else:
            raise ConfigError(f"unknown mode kind {kind!r}")
    except MemoryPortError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"mode: {exc}") from exc
    if spec.get("reversed", False):
        mode = mode.reversed()
    return mode


def parse_coupling(spec, grid: TimeGrid) -> np.ndarray:
    """One wave's coupling samples, in units of the decay rate C = 1 unless stated."""
    if isinstance(spec, (int, float, list)) and not isinstance(spec, bool):
        spec = {"kind": "constant", "value": spec}
    kind = require(spec, "kind", "coupling")
    if kind == "zero":
        return np.zeros(grid.n_steps, dtype=complex)
    if kind == "constant":
        return np.full(grid.n_steps, parse_complex(require(spec, "value", "coupling")))
    if kind == "samples":
        k = parse_complex_array(require(spec, "samples", "coupling"))
        if k.size != grid.n_steps:
            raise ConfigError(f"coupling has {k.size} samples, grid has {grid.n_steps} bins")
        return k
    raise ConfigError(f"unknown coupling kind {kind!r}")


def parse_schedule(specs, grid: TimeGrid) -> CouplingSchedule:
    if not isinstance(specs, list) or not specs:
        raise ConfigError("couplings must be a non-empty list, one entry per spin wave")
    return CouplingSchedule(np.array([parse_coupling(s, grid) for s in specs]))


def parse_state(spec: Optional[dict], n_waves: int) -> SimState:
    if spec is None:
        return SimState.vacuum(n_waves)
    cavity = parse_complex(spec.get("cavity", 0.0))
    spins = np.array([parse_complex(v) for v in spec.get("spins", [0.0] * n_waves)])
    if spins.size != n_waves:
        raise ConfigError(f"initial state lists {spins.size} spins for {n_waves} waves")
    return SimState(cavity, spins)


def parse_unitary(spec, n: int) -> UnitarySpec:
    """Named unitary or {"rows": [[[re, im], ...], ...]} in row-major order."""
    try:
        if isinstance(spec, str):
            if spec == "identity":
                return UnitarySpec.identity(n)
            if spec == "swap":
                return UnitarySpec.permutation(list(range(n))[::-1])
            if spec == "cyclic":
                return UnitarySpec.cyclic(n)
            if spec == "balanced":
                if n != 2:
                    raise ConfigError("the balanced beamsplitter is 2x2")
                return UnitarySpec.balanced()
            if spec == "fourier":
                return UnitarySpec.fourier(n)
            raise ConfigError(f"unknown unitary name {spec!r}")
        rows = require(spec, "rows", "unitary")
        u = np.array([[parse_complex(v) for v in row] for row in rows], dtype=complex)
        if u.shape != (n, n):
            raise ConfigError(f"unitary has shape {u.shape}, expected ({n}, {n})")
        return UnitarySpec(u)
    except MemoryPortError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"unitary: {exc}") from exc


def parse_density(spec: dict) -> DensityProfile:
    kind = require(spec, "kind", "density")
    try:
        if kind == "uniform":
            return DensityProfile.uniform(float(require(spec, "length", "density")))
        if kind == "gaussian":
            hw = spec.get("half_width")
            return DensityProfile.gaussian(float(require(spec, "sigma", "density")),
                                           None if hw is None else float(hw))
    except ValueError as exc:
        raise ConfigError(f"density: {exc}") from exc
    raise ConfigError(f"unknown density kind {kind!r}")


def parse_basis(spec: dict, density: DensityProfile) -> SpinWaveBasis:
    try:
        if "offsets" in spec:
            return SpinWaveBasis(tuple(float(k) for k in spec["offsets"]))
        n = int(require(spec, "n_waves", "basis"))
        if "increment" in spec:
            return SpinWaveBasis.evenly_spaced(n, float(spec["increment"]))
        if density.kind != "uniform":
            raise ConfigError("commensurate offsets need a uniform density; give an increment")
        return SpinWaveBasis.commensurate(n, density.length)
    except ValueError as exc:
        raise ConfigError(f"basis: {exc}") from exc


def set_path(cfg: dict, path: str, value: Any) -> None:
    """Assign ``value`` at a dotted path such as ``couplings.0.value``."""
    keys = path.split(".")
    node = cfg
    try:
        for key in keys[:-1]:
            node = node[int(key)] if isinstance(node, list) else node[key]
        last = keys[-1]
        if isinstance(node, list):
            if isinstance(node[int(last)], (dict, str, bool)):
                raise TypeError(last)
            node[int(last)] = value
        elif last in node:
            if isinstance(node[last], (dict, str, bool)) or node[last] is None:
                raise TypeError(last)
            node[last] = value
        else:
            raise KeyError(last)
    except (KeyError, IndexError, ValueError, TypeError):
        raise ConfigError(f"sweep parameter {path!r} does not name an existing scalar field") from None
