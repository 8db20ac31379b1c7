"""Deterministic plots from ptcycle sweep, ladder and trajectory CSVs."""

from .render import STYLES, FigureSpec, RenderError, RenderInfo, render

__all__ = ["STYLES", "FigureSpec", "RenderError", "RenderInfo", "render"]
