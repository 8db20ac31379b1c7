"""Deterministic figure rendering from ptcycle CSV artifacts.

Reads the CSV contracts written by the `ptcycle` command line (parameter
sweeps, ladder spectra, chain trajectories) and turns them into plots.
No numerics are recomputed here: whatever the sweep refused to evaluate
(the NaN phase columns near the critical strength) stays visibly absent
from the rendered series.

Rendering is deterministic: the same CSV produces byte-identical output,
so image files can be diffed in review. SVG ids are salted with a fixed
string and the date metadata is stripped.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "ptcycle-figures"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class RenderError(Exception):
    """Raised when a CSV is missing, empty, or lacks a referenced column."""


_SWEEP_STYLES = {
    "fig1": "smooth transition",
    "fig2": "sharp transition",
    "fig3": "imperfect transition",
}
STYLES = tuple(_SWEEP_STYLES) + ("ws", "dynamics")


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input CSVs, style, markers, output image path.

    One panel is drawn per input CSV (each sweep file carries a single
    drive rate). Marker roles for the sweep styles: open circles are the
    exact series, crosses the adiabatic estimate.
    """

    csv_paths: tuple
    style: str
    out_path: str
    xlabel: str = ""
    ylabel: str = ""
    marker_exact: str = "o"
    marker_adiabatic: str = "x"

    def __post_init__(self):
        if self.style not in STYLES:
            raise RenderError(
                f"unknown style {self.style!r}; choose from {', '.join(STYLES)}")
        if not self.csv_paths:
            raise RenderError("no input CSV given")


@dataclass(frozen=True)
class RenderInfo:
    """What got drawn: panel count, plotted points, masked adiabatic points."""

    panels: int
    points: int
    masked_adiabatic: int
    out_path: str


def _read_rows(path) -> tuple:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            fields = reader.fieldnames
            rows = list(reader)
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc.strerror}") from exc
    if not fields:
        raise RenderError(f"{path} has no header row")
    if not rows:
        raise RenderError(f"{path} has no data rows, nothing to plot")
    return fields, rows


def _require(fields: Sequence[str], needed: Sequence[str], path) -> None:
    missing = [c for c in needed if c not in fields]
    if missing:
        raise RenderError(
            f"column {missing[0]!r} missing from {path} "
            f"(found: {', '.join(fields)})")


def _sweep_panel(ax, rows, spec: FigureSpec, path) -> tuple:
    lam = [float(r["param"]) for r in rows]
    im_plus = [float(r["im_mu_plus"]) for r in rows]
    im_minus = [float(r["im_mu_minus"]) for r in rows]
    adiab = [(float(r["param"]), float(r["im_mu_adiab_plus"])) for r in rows]
    live = [(x, y) for x, y in adiab if math.isfinite(y)]
    masked = len(adiab) - len(live)

    common = dict(linestyle="none", markerfacecolor="none")
    ax.plot(lam, im_plus, marker=spec.marker_exact, color="tab:blue",
            label="exact, upper band", **common)
    ax.plot(lam, im_minus, marker=spec.marker_exact, color="tab:red",
            label="exact, lower band", **common)
    ax.plot([x for x, _ in live], [y for _, y in live],
            marker=spec.marker_adiabatic, linestyle="none", color="black",
            label="adiabatic estimate")
    ax.set_title(f"{_SWEEP_STYLES[spec.style]} ({Path(path).stem})")
    ax.set_xlabel(spec.xlabel or "gain-loss strength")
    ax.set_ylabel(spec.ylabel or "Im quasi-energy")
    ax.legend(loc="best", fontsize="small")
    return 2 * len(rows) + len(live), masked


def _ws_panel(ax, rows, spec: FigureSpec, path) -> tuple:
    for branch, marker, color in (("+", "o", "tab:blue"), ("-", "s", "tab:red")):
        mine = [r for r in rows if r["branch"] == branch]
        ax.plot([int(r["l"]) for r in mine],
                [float(r["re_E"]) for r in mine],
                linestyle="none", marker=marker, markerfacecolor="none",
                color=color, label=f"branch {branch}")
    ax.set_title(f"ladder spectrum ({Path(path).stem})")
    ax.set_xlabel(spec.xlabel or "ladder index")
    ax.set_ylabel(spec.ylabel or "Re energy")
    ax.legend(loc="best", fontsize="small")
    return len(rows), 0


def _dynamics_panel(ax, fields, rows, spec: FigureSpec, path) -> tuple:
    t = [float(r["t"]) for r in rows]
    cells = [int(name[3:]) for name in fields if name.startswith("pa_")]
    com = []
    for r in rows:
        weights = [float(r[f"pa_{n}"]) + float(r[f"pb_{n}"]) for n in cells]
        total = sum(weights) or 1.0
        com.append(sum(n * w for n, w in zip(cells, weights)) / total)
    ax.plot(t, com, color="tab:blue", label="center of mass")
    ax.set_xlabel(spec.xlabel or "time")
    ax.set_ylabel(spec.ylabel or "center of mass (cells)")
    twin = ax.twinx()
    twin.plot(t, [float(r["norm_log"]) for r in rows],
              color="tab:red", label="log norm")
    twin.set_ylabel("log norm")
    ax.set_title(f"chain trajectory ({Path(path).stem})")
    return len(rows), 0


def render(spec: FigureSpec) -> RenderInfo:
    """Draw the figure described by ``spec`` and write the image file.

    Validates every input CSV before anything is drawn, so a failure never
    leaves a partial image behind. Returns counts of what was plotted.
    """
    needed = {
        "ws": ("l", "branch", "re_E", "im_E"),
        "dynamics": ("t", "norm_log"),
    }.get(spec.style, ("param", "im_mu_plus", "im_mu_minus", "im_mu_adiab_plus"))

    loaded = []
    for path in spec.csv_paths:
        fields, rows = _read_rows(path)
        _require(fields, needed, path)
        loaded.append((path, fields, rows))

    suffix = Path(spec.out_path).suffix.lower()
    if suffix == ".svg":
        metadata = {"Date": None}
    elif suffix == ".png":
        metadata = {"Software": "ptcycle-figures"}
    else:
        raise RenderError(f"unsupported output format {suffix!r}; use .png or .svg")

    n = len(loaded)
    fig, axes = plt.subplots(1, n, figsize=(4.6 * n, 3.4), squeeze=False)
    try:
        points = masked = 0
        for ax, (path, fields, rows) in zip(axes[0], loaded):
            if spec.style == "ws":
                p, m = _ws_panel(ax, rows, spec, path)
            elif spec.style == "dynamics":
                p, m = _dynamics_panel(ax, fields, rows, spec, path)
            else:
                p, m = _sweep_panel(ax, rows, spec, path)
            points += p
            masked += m
        fig.tight_layout()
        fig.savefig(spec.out_path, metadata=metadata)
    finally:
        plt.close(fig)
    return RenderInfo(panels=n, points=points, masked_adiabatic=masked,
                      out_path=str(spec.out_path))
