"""Parameter sweeps with deterministic CSV output.

A sweep evaluates the cycled-model quasi-energies along one axis (gain-loss
strength, drive frequency, or tilt force) and writes one CSV row per grid
point plus a JSON manifest describing exactly what was run.  Rows land in
grid order no matter how many worker threads computed them, and identical
configurations produce byte-identical CSV bodies, so downstream plotting and
regression checks can diff the files directly.

Failures never abort a sweep: a point that raises gets ``nan`` in every
result column and an entry in the manifest error list.  Points inside the
critical window keep their quasi-energy columns and only blank the adiabatic
and geometric ones, because that refusal is a documented domain restriction,
not a numerical accident.
"""

from __future__ import annotations

import hashlib
import json
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy

from ._version import __version__ as _pkg_version
from .errors import ConfigError
from .floquet import _floquet_core
from .models import TwoLevelModel, parse_model_descriptor

__all__ = ["SweepConfig", "SweepOutcome", "fig_preset", "load_config", "run_sweep"]

_AXES = ("lambda", "omega", "force")
_OUTPUTS = ("quasienergy", "adiabatic", "berry", "ws", "dynamics")
_COLUMN_OUTPUTS = ("quasienergy", "adiabatic", "berry")
_DEFAULT_TOLERANCE = 1e-11

CSV_HEADER = (
    "param,re_mu_plus,im_mu_plus,re_mu_minus,im_mu_minus,"
    "re_mu_adiab_plus,im_mu_adiab_plus,re_gamma_plus,im_gamma_plus,"
    "branch_index,error_estimate"
)


@dataclass(frozen=True)
class SweepConfig:
    """Validated sweep description.

    ``model`` stays in wire format (the :func:`~.models.parse_model_descriptor`
    dictionary) so the manifest can echo and hash the exact input.  ``omega``
    is the drive frequency for gain-loss sweeps; frequency and force sweeps
    take it from the axis value instead.  ``threads`` only schedules work and
    never changes results, so it stays outside the config hash.
    """

    model: Mapping
    axis: str
    start: float
    stop: float
    count: int
    outputs: tuple = ("quasienergy", "adiabatic", "berry")
    tolerance: float = _DEFAULT_TOLERANCE
    omega: float | None = None
    threads: int = 1

    def __post_init__(self):
        if self.axis not in _AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; pick one of {_AXES}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError("grid endpoints must be finite")
        if self.count < 2:
            raise ConfigError("grid needs at least 2 points")
        if not self.start < self.stop:
            raise ConfigError("grid start must be below stop")
        if not 1e-14 <= self.tolerance <= 1e-6:
            raise ConfigError("integrator tolerance must lie in [1e-14, 1e-6]")
        bad = [o for o in self.outputs if o not in _OUTPUTS]
        if bad or not self.outputs:
            raise ConfigError(f"outputs must be a non-empty subset of {_OUTPUTS}")
        if self.axis == "lambda":
            if self.omega is None or not self.omega > 0.0:
                raise ConfigError("gain-loss sweeps need a positive drive frequency")
        elif not self.start > 0.0:
            raise ConfigError("frequency and force sweeps need a positive grid")
        if self.threads < 1:
            raise ConfigError("thread count must be at least 1")

    @classmethod
    def from_dict(cls, data: Mapping) -> "SweepConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("sweep config must be a JSON object")
        known = {"model", "axis", "grid", "outputs", "tolerance", "omega", "threads"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for key in ("model", "axis", "grid"):
            if key not in data:
                raise ConfigError(f"config is missing the {key!r} field")
        grid = data["grid"]
        if not isinstance(grid, Mapping) or set(grid) != {"start", "stop", "count"}:
            raise ConfigError('grid must be an object with "start", "stop" and "count"')
        outputs = data.get("outputs", list(_COLUMN_OUTPUTS))
        if isinstance(outputs, str) or not isinstance(outputs, Sequence):
            raise ConfigError("outputs must be a list of output names")
        try:
            return cls(
                model=dict(data["model"]),
                axis=str(data["axis"]),
                start=float(grid["start"]),
                stop=float(grid["stop"]),
                count=int(grid["count"]),
                outputs=tuple(outputs),
                tolerance=float(data.get("tolerance", _DEFAULT_TOLERANCE)),
                omega=None if data.get("omega") is None else float(data["omega"]),
                threads=int(data.get("threads", 1)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config value: {exc}") from exc

    def grid_values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def semantic_dict(self) -> dict:
        """Everything that affects numbers; scheduling knobs excluded."""
        return {
            "model": self.model,
            "axis": self.axis,
            "grid": {"start": self.start, "stop": self.stop, "count": self.count},
            "outputs": sorted(self.outputs),
            "tolerance": self.tolerance,
            "omega": self.omega,
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.semantic_dict(), sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass(frozen=True)
class SweepOutcome:
    """What a finished sweep produced and where it went."""

    csv_path: str
    manifest_path: str
    rows: int
    failures: int
    manifest: dict = field(repr=False, compare=False)


def load_config(path) -> SweepConfig:
    """Read and validate a sweep config file; parse errors carry a location."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return SweepConfig.from_dict(data)


def fig_preset(which: int, omega: float | None = None, tolerance: float | None = None,
               threads: int = 1) -> SweepConfig:
    """Sweep configs behind the figure subcommands.

    Each preset scans the gain-loss strength over [0, 2] times the critical
    value of its builtin family with 101 uniform points, which is the grid
    recorded in every manifest.
    """
    presets = {
        1: ({"example": 1, "params": {"r0": 1.0}}, 2.0, 0.02),
        2: ({"example": 2, "params": {"t1": 1.0, "t2": 0.5}}, 1.0, 0.1),
        3: ({"example": 3, "params": {"t0": 0.3, "t1": 0.5, "t2": 1.0}}, 1.0, 0.02),
    }
    if which not in presets:
        raise ConfigError(f"no figure preset {which}")
    builtin, stop, default_omega = presets[which]
    return SweepConfig(
        model={"builtin": builtin, "lambda": 0.0},
        axis="lambda",
        start=0.0,
        stop=stop,
        count=101,
        outputs=("quasienergy", "adiabatic", "berry"),
        tolerance=_DEFAULT_TOLERANCE if tolerance is None else tolerance,
        omega=default_omega if omega is None else omega,
        threads=threads,
    )


def _format(value: float) -> str:
    return f"{value:.17g}"


def _evaluate_point(model: TwoLevelModel, config: SweepConfig, x: float):
    """One grid point -> (11 column strings, tags, fatal flag)."""
    nan = float("nan")
    cols = {
        "re_mu_plus": nan, "im_mu_plus": nan,
        "re_mu_minus": nan, "im_mu_minus": nan,
        "re_mu_adiab_plus": nan, "im_mu_adiab_plus": nan,
        "re_gamma_plus": nan, "im_gamma_plus": nan,
    }
    branch: float = nan
    error_estimate: float = nan
    tags: list = []
    fatal = False
    try:
        if config.axis == "lambda":
            point_model = model.with_lambda(x)
            drive = float(config.omega)
        else:
            point_model = model
            drive = x
        result = _floquet_core(point_model, drive, rtol=config.tolerance).result
        if "quasienergy" in config.outputs:
            cols["re_mu_plus"] = result.mu_plus.real
            cols["im_mu_plus"] = result.mu_plus.imag
            cols["re_mu_minus"] = result.mu_minus.real
            cols["im_mu_minus"] = result.mu_minus.imag
        near_critical = result.berry is None
        if near_critical:
            tags.append("near-critical: adiabatic and geometric columns undefined")
        if "adiabatic" in config.outputs and not near_critical:
            cols["re_mu_adiab_plus"] = result.mu_adiabatic_plus.real
            cols["im_mu_adiab_plus"] = result.mu_adiabatic_plus.imag
        if not near_critical:
            branch = float(result.branch_index)
        if "berry" in config.outputs and not near_critical:
            cols["re_gamma_plus"] = result.berry.gamma_plus.real
            cols["im_gamma_plus"] = result.berry.gamma_plus.imag
        if result.berry is not None:
            error_estimate = result.berry.quadrature_error
        else:
            error_estimate = result.integrator_stats.local_tolerance
    except Exception as exc:  # never abort the sweep over one point
        tags.append(f"{type(exc).__name__}: {exc}")
        fatal = True
    row = [_format(x)]
    for name in ("re_mu_plus", "im_mu_plus", "re_mu_minus", "im_mu_minus",
                 "re_mu_adiab_plus", "im_mu_adiab_plus",
                 "re_gamma_plus", "im_gamma_plus"):
        row.append(_format(cols[name]))
    row.append("nan" if math.isnan(branch) else str(int(branch)))
    row.append(_format(error_estimate))
    return ",".join(row), tags, fatal


def run_sweep(config: SweepConfig, csv_path, manifest_path=None) -> SweepOutcome:
    """Execute a sweep and write the CSV body plus its JSON manifest.

    The worker pool steals grid points freely; results are buffered per index
    and written in grid order, so the CSV bytes depend only on the semantic
    config fields.
    """
    model = parse_model_descriptor(config.model)
    grid = config.grid_values()
    started = time.perf_counter()
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(lambda x: _evaluate_point(model, config, x), grid))
    else:
        results = [_evaluate_point(model, config, x) for x in grid]
    wall = time.perf_counter() - started

    csv_path = Path(csv_path)
    if manifest_path is None:
        manifest_path = csv_path.with_suffix(".manifest.json")
    manifest_path = Path(manifest_path)

    with open(csv_path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row, _tags, _fatal in results:
            fh.write(row + "\n")

    notes = [o for o in config.outputs if o not in _COLUMN_OUTPUTS]
    events = [
        {"index": i, "param": float(grid[i]), "tag": tag, "fatal": fatal}
        for i, (_row, tags, fatal) in enumerate(results)
        for tag in tags
    ]
    failures = sum(1 for _row, _tags, fatal in results if fatal)
    manifest = {
        "config_hash": config.config_hash(),
        "config": config.semantic_dict(),
        "versions": {
            "package": _pkg_version,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "wall_time_seconds": wall,
        "threads": config.threads,
        "branch_rule": "reconstructed: ladder rung nearest the adiabatic estimate",
        "rows": int(grid.size),
        "failures": failures,
        "events": events,
        "csv": csv_path.name,
    }
    if notes:
        manifest["ignored_outputs"] = sorted(notes)
    with open(manifest_path, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return SweepOutcome(
        csv_path=str(csv_path),
        manifest_path=str(manifest_path),
        rows=int(grid.size),
        failures=failures,
        manifest=manifest,
    )
