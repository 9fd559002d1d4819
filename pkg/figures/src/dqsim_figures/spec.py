"""Figure spec parsing and CSV loading.

A spec is a JSON object:

    {
      "figure": "fig2a" | "fig2b" | "fig2c" | "fig3alt" | "fig3app",
      "inputs": {"<role>": "<path to csv>", ...},
      "output": "<path to png>",
      "labels": {"<axis>": "<text>", ...}        # optional overrides
    }

Each figure id requires specific input roles and CSV columns; anything
missing is reported by name.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["FigureSpec", "FigureSpecError", "Table", "parse_spec", "load_table"]


class FigureSpecError(ValueError):
    """Spec or input-table rejected; the message names what is wrong."""


# role -> columns that must be present; a trailing "*" matches a prefix
REQUIRED = {
    "fig2a": {"grid": ["delta", "g", "concurrence"]},
    "fig2b": {
        "delta_line": ["delta", "concurrence_gamma=*"],
        "gamma_line": ["gamma", "concurrence"],
    },
    "fig2c": {"timeseries": ["t", "concurrence_*"]},
    "fig3alt": {"stirap": ["t", "P_E", "P_PsiPlus", "P_PsiMinus", "delta_t", "g_t"]},
    "fig3app": {"stirap": ["t", "P_E", "P_PsiPlus", "P_PsiMinus", "delta_t", "g_t"]},
}


@dataclass(frozen=True)
class FigureSpec:
    figure: str
    inputs: dict
    output: Path
    labels: dict = field(default_factory=dict)


@dataclass
class Table:
    """A parsed CSV plus its .meta.json sidecar (or {} when absent)."""

    columns: list
    data: dict
    meta: dict

    def column(self, name: str) -> np.ndarray:
        return self.data[name]

    def matching(self, prefix: str) -> list:
        return [c for c in self.columns if c.startswith(prefix)]


def parse_spec(text: str) -> FigureSpec:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FigureSpecError(f"malformed JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(raw, dict):
        raise FigureSpecError("spec must be a JSON object")
    for key in ("figure", "inputs", "output"):
        if key not in raw:
            raise FigureSpecError(f"missing required field {key!r}")
    figure = raw["figure"]
    if figure not in REQUIRED:
        raise FigureSpecError(
            f"unknown figure id {figure!r}; expected one of {sorted(REQUIRED)}"
        )
    inputs = raw["inputs"]
    if not isinstance(inputs, dict):
        raise FigureSpecError("field 'inputs' must be an object of role -> csv path")
    for role in REQUIRED[figure]:
        if role not in inputs:
            raise FigureSpecError(f"figure {figure!r} needs input role {role!r}")
    labels = raw.get("labels", {})
    if not isinstance(labels, dict):
        raise FigureSpecError("field 'labels' must be an object")
    unknown = set(raw) - {"figure", "inputs", "output", "labels"}
    if unknown:
        raise FigureSpecError(f"unknown field {sorted(unknown)[0]!r}")
    return FigureSpec(
        figure=figure, inputs=dict(inputs), output=Path(raw["output"]), labels=dict(labels)
    )


def load_table(path: Path) -> Table:
    path = Path(path)
    if not path.exists():
        raise FigureSpecError(f"input CSV does not exist: {path}")
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            columns = next(reader)
        except StopIteration:
            raise FigureSpecError(f"empty CSV: {path}") from None
        rows = [row for row in reader if row]
    if not rows:
        raise FigureSpecError(f"CSV has a header but no rows: {path}")
    values = np.array([[float(v) for v in row] for row in rows])
    data = {name: values[:, i] for i, name in enumerate(columns)}

    meta_path = path.with_suffix("").with_suffix(".meta.json")
    meta = {}
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
    return Table(columns=columns, data=data, meta=meta)


def check_columns(figure: str, role: str, table: Table, path) -> None:
    for required in REQUIRED[figure][role]:
        if required.endswith("*"):
            if not table.matching(required[:-1]):
                raise FigureSpecError(
                    f"{path}: no column matching {required!r} (needed by {figure})"
                )
        elif required not in table.columns:
            raise FigureSpecError(f"{path}: missing column {required!r} (needed by {figure})")
