"""Rendering of each figure id with fixed styling."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .spec import FigureSpec, FigureSpecError, Table, check_columns, load_table

__all__ = ["render"]

DPI = 150

# Stripping the metadata keeps two renders of the same spec byte-identical
# (the PNG writer would otherwise embed the library version string).
_SAVEFIG = {"dpi": DPI, "metadata": {"Software": None}}


def _axis_spacing(meta: dict, axis_key: str) -> str:
    return meta.get("diagnostics", {}).get(axis_key, {}).get("spacing", "log")


def _set_scale(ax, spacing: str, which: str) -> None:
    if spacing == "log":
        getattr(ax, f"set_{which}scale")("log")


def _render_fig2a(table: Table, labels: dict, out: Path) -> None:
    delta = np.unique(table.column("delta"))
    g = np.unique(table.column("g"))
    conc = table.column("concurrence").reshape(delta.size, g.size)

    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    mesh = ax.pcolormesh(delta, g, conc.T, cmap="viridis", vmin=0.0, vmax=1.0, shading="auto")
    _set_scale(ax, _axis_spacing(table.meta, "delta_axis"), "x")
    _set_scale(ax, _axis_spacing(table.meta, "g_axis"), "y")
    ax.set_xlabel(labels.get("x", r"$\Delta/\kappa$"))
    ax.set_ylabel(labels.get("y", r"$g/\kappa$"))
    cbar = fig.colorbar(mesh, ax=ax, ticks=[0.0, 0.25, 0.5, 0.75, 1.0])
    cbar.set_label(labels.get("cbar", "concurrence"))
    fig.tight_layout()
    fig.savefig(out, **_SAVEFIG)
    plt.close(fig)


def _render_fig2b(delta_table: Table, gamma_table: Table, labels: dict, out: Path) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    delta = delta_table.column("delta")
    for name in delta_table.matching("concurrence_gamma="):
        gamma_text = name.split("=", 1)[1]
        ax.plot(delta, delta_table.column(name), label=rf"$\Gamma={gamma_text}\,\kappa$")
    _set_scale(ax, _axis_spacing(delta_table.meta, "axis"), "x")
    ax.set_xlabel(labels.get("x", r"$\Delta/\kappa$"))
    ax.set_ylabel(labels.get("y", "concurrence"))
    ax.set_ylim(0.0, 1.0)
    ax.legend(fontsize=7, loc="upper left")

    top = ax.twiny()
    gammas = gamma_table.column("gamma")
    top.plot(gammas, gamma_table.column("concurrence"), color="black", linestyle="--")
    _set_scale(top, _axis_spacing(gamma_table.meta, "axis"), "x")
    top.set_xlabel(labels.get("x2", r"$\Gamma/\kappa$ (dashed)"))
    fig.tight_layout()
    fig.savefig(out, **_SAVEFIG)
    plt.close(fig)


def _render_fig2c(table: Table, labels: dict, out: Path) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    t = table.column("t")
    sets = table.meta.get("diagnostics", {}).get("params_sets", [])
    for name in table.matching("concurrence_"):
        index = int(name.rsplit("_", 1)[1])
        if index < len(sets):
            entry = sets[index]
            label = rf"$g={entry['g']:g}\,\kappa,\ \Delta={entry['delta']:g}\,\kappa$"
        else:
            label = name
        ax.plot(t, table.column(name), label=label)
    positive = t > 0
    if positive.any():
        ax.set_xscale("log")
        ax.set_xlim(t[positive].min(), t.max())
    ax.set_xlabel(labels.get("x", r"$t\,\kappa$"))
    ax.set_ylabel(labels.get("y", "concurrence"))
    ax.set_ylim(0.0, 1.0)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out, **_SAVEFIG)
    plt.close(fig)


def _render_stirap(table: Table, labels: dict, out: Path) -> None:
    t = table.column("t")
    fig, (top, bottom) = plt.subplots(
        2, 1, figsize=(5.2, 5.6), sharex=True, height_ratios=[1, 1.4]
    )
    top.plot(t, table.column("delta_t"), label=r"$\Delta(t)/\kappa$")
    top.plot(t, table.column("g_t"), label=r"$g(t)/\kappa$")
    top.set_ylabel(labels.get("y_top", "schedule / $\\kappa$"))
    top.legend(fontsize=8)

    for name, style in (("P_E", "-"), ("P_PsiPlus", "--"), ("P_PsiMinus", "-.")):
        pretty = {"P_E": r"$P_E$", "P_PsiPlus": r"$P_{\Psi_+}$", "P_PsiMinus": r"$P_{\Psi_-}$"}
        bottom.plot(t, table.column(name), style, label=pretty[name])
    bottom.set_xlabel(labels.get("x", r"$t\,\kappa$"))
    bottom.set_ylabel(labels.get("y", "population"))
    bottom.set_ylim(-0.02, 1.02)
    bottom.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, **_SAVEFIG)
    plt.close(fig)


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the written image path."""
    tables = {role: load_table(path) for role, path in spec.inputs.items()}
    for role in _required_roles(spec.figure):
        check_columns(spec.figure, role, tables[role], spec.inputs[role])

    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    if spec.figure == "fig2a":
        _render_fig2a(tables["grid"], spec.labels, out)
    elif spec.figure == "fig2b":
        _render_fig2b(tables["delta_line"], tables["gamma_line"], spec.labels, out)
    elif spec.figure == "fig2c":
        _render_fig2c(tables["timeseries"], spec.labels, out)
    else:
        _render_stirap(tables["stirap"], spec.labels, out)
    return out


def _required_roles(figure: str):
    from .spec import REQUIRED

    return REQUIRED[figure]
