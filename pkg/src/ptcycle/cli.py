"""Command-line front end: sweeps, figure data, ladder spectra, chain dynamics."""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    InvalidModelError,
    PTCycleError,
    ParameterError,
    SymmetryError,
)
from .lattice_dynamics import (
    evolve,
    periodicity_report,
    single_site_initial,
    transient_estimate,
    write_report_json,
    write_trajectory_csv,
)
from .models import hamiltonian_at, lattice_from_descriptor, parse_model_descriptor
from .spectral import critical_lambda
from .sweep import fig_preset, load_config, run_sweep
from .wannier_stark import write_spectrum_csv, ws_spectrum

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_THREADS_ENV = "PTCYCLE_THREADS"


def _resolve_threads(flag_value: int | None, fallback: int) -> int:
    """Thread count precedence: --threads flag, then env var, then fallback."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get(_THREADS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(
                f"{_THREADS_ENV} must be an integer, got {env!r}") from None
    return fallback


def _load_json(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno}"
        ) from exc


def _load_descriptor(path, lam_override: float | None) -> dict:
    desc = _load_json(path)
    if not isinstance(desc, dict):
        raise ConfigError(f"{path}: model descriptor must be a JSON object")
    if lam_override is not None:
        desc = dict(desc)
        desc["lambda"] = float(lam_override)
    return desc


def _report_sweep(outcome) -> int:
    manifest = outcome.manifest
    print(f"wrote {outcome.rows} rows to {outcome.csv_path}")
    print(f"manifest: {outcome.manifest_path} (config {manifest['config_hash'][:12]})")
    ignored = manifest.get("ignored_outputs")
    if ignored:
        print(f"note: outputs {', '.join(ignored)} are served by dedicated "
              "subcommands and were skipped here")
    for event in manifest["events"]:
        status = "failed" if event["fatal"] else "flagged"
        print(f"point {event['index']} (param={event['param']:.17g}) "
              f"{status}: {event['tag']}")
    if outcome.failures:
        print(f"{outcome.failures} point(s) failed; NaN rows kept in place",
              file=sys.stderr)
        return 3
    return 0


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    overrides: dict = {"threads": _resolve_threads(args.threads, config.threads)}
    if args.omega is not None:
        overrides["omega"] = args.omega
    if args.tol is not None:
        overrides["tolerance"] = args.tol
    config = dataclasses.replace(config, **overrides)
    out = Path(args.out) if args.out else Path("sweep.csv")
    return _report_sweep(run_sweep(config, out))


def _cmd_fig(args) -> int:
    config = fig_preset(
        args.which,
        omega=args.omega,
        tolerance=args.tol,
        threads=_resolve_threads(args.threads, 1),
    )
    out = Path(args.out) if args.out else Path(f"fig{args.which}.csv")
    return _report_sweep(run_sweep(config, out))


def _cmd_ws(args) -> int:
    desc = _load_descriptor(args.config, args.lam)
    model = parse_model_descriptor(desc)
    ladder = ws_spectrum(model, args.force)
    out = Path(args.out) if args.out else Path("ws.csv")
    write_spectrum_csv(out, ladder)
    theta = ladder.theta_shift
    print(f"theta_shift: {theta.real:.17g}{theta.imag:+.17g}j")
    print(f"t1_period: {ladder.t1_period:.17g}")
    print(f"t2_period: {ladder.t2_period:.17g}")
    print(f"wrote {len(ladder.energies)} levels to {out}")
    return 0


def _cmd_dynamics(args) -> int:
    desc = _load_descriptor(args.config, args.lam)
    lam = float(desc.get("lambda", 0.0))
    hoppings = lattice_from_descriptor(desc)
    model = parse_model_descriptor(desc)
    ladder = ws_spectrum(model, args.force)
    theta = ladder.theta_shift
    t1 = ladder.t1_period

    transient = transient_estimate(theta)
    # Store on an exact submultiple of the Bloch period, fine enough to
    # resolve the interband beat when there is one.
    samples = 16
    if math.isfinite(ladder.t2_period):
        samples = max(16, min(256, math.ceil(8.0 * t1 / ladder.t2_period)))
    dt_store = t1 / samples
    n_store = int(math.ceil((transient + 6.0 * t1) / dt_store))
    t_max = n_store * dt_store

    extra = {} if args.tol is None else {"rtol": args.tol}
    traj = evolve(hoppings, lam, args.force, single_site_initial(),
                  t_max, dt_store, **extra)
    report = periodicity_report(traj, args.force, theta)

    base = Path(args.out) if args.out else Path("dynamics")
    csv_path = base.with_suffix(".csv")
    json_path = base.with_suffix(".json")
    write_trajectory_csv(csv_path, traj)
    write_report_json(json_path, report)
    print(f"classification: {report.classification}")
    print(f"t1_period: {report.t1_period:.17g}")
    print(f"transient: {report.transient:.17g}")
    print(f"min_fidelity: {report.min_fidelity:.17g}")
    if report.secondary_period is not None:
        print(f"secondary_period: {report.secondary_period:.17g}")
    print(f"wrote {csv_path} and {json_path}")
    return 0


def _pt_residual(model) -> float:
    """Largest pointwise violation of sigma_x conj(H) sigma_x = H at zero detuning."""
    probe = dataclasses.replace(model, epsilon=0.0)
    worst = 0.0
    for k in np.linspace(0.0, 2.0 * math.pi, 33):
        h = hamiltonian_at(probe, k)
        worst = max(worst, float(np.max(np.abs(_SIGMA_X @ np.conj(h) @ _SIGMA_X - h))))
    return worst


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    model = parse_model_descriptor(config.model)
    residual = _pt_residual(model)
    if residual > 1e-9:
        print(f"pt_symmetry: violated (max residual {residual:.3e})",
              file=sys.stderr)
        return 2
    print(f"pt_symmetry: ok (max residual {residual:.3e})")
    lam_c = critical_lambda(model)
    print(f"critical lambda: {lam_c:.17g}")
    if math.isfinite(lam_c) and abs(model.lam - lam_c) < 1e-3:
        print(f"warning: model lambda {model.lam:.17g} sits within 1e-3 of "
              "critical; quasi-energy branches degenerate there")
    print("branch rule: principal square root, sign fixed at k = 0 "
          "(Im >= 0, ties broken by Re >= 0)")
    print(f"axis: {config.axis}")
    print(f"grid: [{config.start:.17g}, {config.stop:.17g}] with "
          f"{config.count} points")
    print(f"outputs: {', '.join(config.outputs)}")
    print(f"tolerance: {config.tolerance:.17g}  threads: {config.threads}")
    return 0


def _add_out(parser, default_hint: str) -> None:
    parser.add_argument("--out", metavar="PATH",
                        help=f"output path (default: {default_hint})")


def _add_threads_tol(parser) -> None:
    parser.add_argument("--threads", type=int, metavar="N",
                        help=f"worker threads (default: {_THREADS_ENV} "
                             "env var, else config/1)")
    parser.add_argument("--tol", type=float, metavar="X",
                        help="integrator tolerance override")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptcycle",
        description="Quasi-energy sweeps, Wannier-Stark ladders and chain "
                    "dynamics for PT-symmetric two-band models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a sweep from a JSON config")
    p.add_argument("--config", required=True, metavar="FILE",
                   help="sweep configuration (JSON)")
    p.add_argument("--omega", type=float, help="drive frequency override")
    _add_out(p, "sweep.csv")
    _add_threads_tol(p)
    p.set_defaults(handler=_cmd_sweep)

    for which, omega_default in ((1, 0.02), (2, 0.1), (3, 0.02)):
        p = sub.add_parser(f"fig{which}",
                           help=f"sweep preset for figure {which} data")
        p.add_argument("--omega", type=float,
                       help=f"drive frequency (default {omega_default})")
        _add_out(p, f"fig{which}.csv")
        _add_threads_tol(p)
        p.set_defaults(handler=_cmd_fig, which=which)

    p = sub.add_parser("ws", help="Wannier-Stark ladder of a model")
    p.add_argument("--config", required=True, metavar="FILE",
                   help="model descriptor (JSON)")
    p.add_argument("--force", type=float, required=True, help="tilt F")
    p.add_argument("--lambda", dest="lam", type=float,
                   help="override the descriptor's lambda")
    _add_out(p, "ws.csv")
    p.set_defaults(handler=_cmd_ws)

    p = sub.add_parser("dynamics",
                       help="tilted-chain time evolution and periodicity report")
    p.add_argument("--config", required=True, metavar="FILE",
                   help="model descriptor (JSON)")
    p.add_argument("--force", type=float, required=True, help="tilt F")
    p.add_argument("--lambda", dest="lam", type=float,
                   help="override the descriptor's lambda")
    p.add_argument("--tol", type=float, metavar="X",
                   help="relative tolerance for the time stepper")
    _add_out(p, "dynamics.{csv,json}")
    p.set_defaults(handler=_cmd_dynamics)

    p = sub.add_parser("validate",
                       help="check a sweep config without running it")
    p.add_argument("--config", required=True, metavar="FILE",
                   help="sweep configuration (JSON)")
    p.set_defaults(handler=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.handler(args)
    except (ConfigError, InvalidModelError, SymmetryError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PTCycleError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
