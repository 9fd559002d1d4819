"""Render dqsim result CSVs into publication-style figures.

This package never recomputes physics: it reads the CSV tables and
.meta.json sidecars written by the ``dqsim`` CLI and turns them into PNG
files with fixed, deterministic styling.
"""

__version__ = "0.1.0"

from .spec import FigureSpec, FigureSpecError, parse_spec
from .render import render

__all__ = ["FigureSpec", "FigureSpecError", "parse_spec", "render", "__version__"]
