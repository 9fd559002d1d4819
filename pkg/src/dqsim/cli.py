"""Command-line entry point: parse a JSON config, run one experiment, write CSV.

Every run writes two files: ``<out>.csv`` (header row, 17-significant-digit
floats, '.' decimal separator) and ``<out>.meta.json`` (the fully resolved
config plus solver diagnostics).  All rates are in units of kappa and all
times in units of 1/kappa, in configs and outputs alike.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import IntegratorConfig, converge_cutoff, evolve
from .hilbert import SpaceLayout, named_state, partial_trace_mode
from .measures import concurrence, mean_photon_number, populations
from .model import (
    Schedule,
    SystemParams,
    dissipators,
    hamiltonian_pump,
    hamiltonian_rot,
    liouvillian,
)
from .sweep import (
    DEFAULT_CUTOFF,
    DEFAULT_EPSILON,
    DEFAULT_GAMMA,
    AxisSpec,
    GridSpec,
    ResultTable,
    StirapSpec,
    _steady_point,
    grid_sweep,
    line_sweep_delta,
    line_sweep_gamma,
    stirap_run,
    time_series,
)

__all__ = ["ConfigError", "RunConfig", "parse_config", "serialize_config", "run", "main"]


class ConfigError(ValueError):
    """Config rejected; the message names the offending field."""


# Field schema per experiment: name -> (required, default).  Defaults for the
# steady-state experiments follow the figure captions: epsilon = kappa,
# gamma = 1e-5 kappa, Fock cutoff 5.
_AXIS_DEFAULT = {"min": 1e-3, "max": 1e2, "count": 60, "spacing": "log"}

_COMMON_RATES = {
    "gamma": (False, DEFAULT_GAMMA),
    "kappa": (False, 1.0),
    "epsilon": (False, DEFAULT_EPSILON),
    "fock_cutoff": (False, DEFAULT_CUTOFF),
    "flip_detuning": (False, False),
}

_SCHEMA: dict[str, dict[str, tuple[bool, object]]] = {
    "steady": {"g": (True, None), "delta": (True, None), **_COMMON_RATES},
    "grid": {
        "delta_axis": (False, _AXIS_DEFAULT),
        "g_axis": (False, _AXIS_DEFAULT),
        **_COMMON_RATES,
    },
    "line": {
        "mode": (False, "delta"),
        "g": (False, 1.0),
        "delta": (False, 0.1),
        "axis": (False, {"min": 1e-3, "max": 1e1, "count": 40, "spacing": "log"}),
        "gammas": (False, [DEFAULT_GAMMA]),
        **_COMMON_RATES,
    },
    "timeseries": {
        "params_sets": (True, None),
        "t_final": (False, None),
        "samples": (False, 200),
        "rtol": (False, 1e-8),
        "atol": (False, 1e-10),
        "flip_detuning": (False, False),
    },
    "stirap": {
        "delta_schedule": (True, None),
        "g_schedule": (True, None),
        "gamma": (True, None),
        "kappa": (False, 1.0),
        "t_final": (True, None),
        "initial_state": (False, "E"),
        "samples": (False, 400),
        "fock_cutoff": (False, DEFAULT_CUTOFF),
        "pump_during_stirap": (False, False),
        "flip_detuning": (False, False),
        "rtol": (False, 1e-8),
        "atol": (False, 1e-10),
    },
    "evolve": {
        "g": (True, None),
        "delta": (True, None),
        "t_final": (True, None),
        "initial_state": (False, "G0"),
        "samples": (False, 200),
        "rtol": (False, 1e-8),
        "atol": (False, 1e-10),
        **_COMMON_RATES,
    },
    "converge": {
        "g": (True, None),
        "delta": (True, None),
        "observable": (False, "concurrence"),
        "start_cutoff": (False, 1),
        "tol": (False, 1e-3),
        "gamma": (False, DEFAULT_GAMMA),
        "kappa": (False, 1.0),
        "epsilon": (False, DEFAULT_EPSILON),
        "flip_detuning": (False, False),
    },
}

_NONNEGATIVE = ("g", "delta", "gamma", "epsilon", "tol", "rtol", "atol", "t_final")


@dataclass(frozen=True)
class RunConfig:
    """One experiment plus its fully resolved options."""

    experiment: str
    options: dict

    def __getitem__(self, key: str):
        return self.options[key]


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config, filling every default."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if "experiment" not in raw:
        raise ConfigError("missing required field 'experiment'")
    experiment = raw["experiment"]
    if experiment not in _SCHEMA:
        raise ConfigError(
            f"unknown experiment {experiment!r}; expected one of {sorted(_SCHEMA)}"
        )
    schema = _SCHEMA[experiment]
    options = {}
    for key, value in raw.items():
        if key == "experiment":
            continue
        if key not in schema:
            raise ConfigError(f"unknown field {key!r} for experiment {experiment!r}")
        options[key] = value
    for key, (required, default) in schema.items():
        if key not in options:
            if required:
                raise ConfigError(f"missing required field {key!r} for experiment {experiment!r}")
            options[key] = json.loads(json.dumps(default))  # deep copy of the default
    _validate(experiment, options)
    return RunConfig(experiment=experiment, options=options)


def _validate(experiment: str, options: dict) -> None:
    for key in _NONNEGATIVE:
        if key in options and options[key] is not None and not isinstance(options[key], bool):
            if not isinstance(options[key], (int, float)):
                raise ConfigError(f"field {key!r} must be a number, got {options[key]!r}")
            if options[key] < 0:
                raise ConfigError(f"field {key!r} must be >= 0, got {options[key]}")
    if "kappa" in options and options["kappa"] <= 0:
        raise ConfigError(f"field 'kappa' must be > 0, got {options['kappa']}")
    if "fock_cutoff" in options and (
        not isinstance(options["fock_cutoff"], int) or options["fock_cutoff"] < 1
    ):
        raise ConfigError(f"field 'fock_cutoff' must be an integer >= 1, got {options['fock_cutoff']}")
    if experiment == "line" and options["mode"] not in ("delta", "gamma"):
        raise ConfigError(f"field 'mode' must be 'delta' or 'gamma', got {options['mode']!r}")
    if experiment == "timeseries":
        sets = options["params_sets"]
        if not isinstance(sets, list) or not sets:
            raise ConfigError("field 'params_sets' must be a non-empty list")
        for i, entry in enumerate(sets):
            if not isinstance(entry, dict) or "g" not in entry or "delta" not in entry:
                raise ConfigError(f"params_sets[{i}] must be an object with 'g' and 'delta'")
    if experiment == "converge" and options["observable"] not in ("concurrence", "n_mode"):
        raise ConfigError(
            f"field 'observable' must be 'concurrence' or 'n_mode', got {options['observable']!r}"
        )


def serialize_config(config: RunConfig) -> str:
    """JSON text that reparses to an equal config."""
    payload = {"experiment": config.experiment, **config.options}
    return json.dumps(payload, indent=2, sort_keys=True)


def _axis(d: dict, field: str) -> AxisSpec:
    try:
        return AxisSpec(
            min=d["min"], max=d["max"], count=d["count"], spacing=d.get("spacing", "log")
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid axis spec in field {field!r}: {exc}") from exc


def _schedule(d: dict, field: str) -> Schedule:
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError(f"field {field!r} must be an object with a 'kind'")
    try:
        if d["kind"] == "constant":
            return Schedule.constant(d["value"])
        return Schedule(
            kind=d["kind"], max_value=d["max_value"], t0=d["t0"], rate=d["rate"]
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid schedule in field {field!r}: {exc}") from exc


def _params_from(options: dict, **overrides) -> SystemParams:
    fields = dict(
        g=options.get("g", 0.0),
        delta=options.get("delta", 0.0),
        gamma=options.get("gamma", DEFAULT_GAMMA),
        kappa=options.get("kappa", 1.0),
        epsilon=options.get("epsilon", DEFAULT_EPSILON),
        fock_cutoff=options.get("fock_cutoff", DEFAULT_CUTOFF),
    )
    fields.update(overrides)
    return SystemParams(**fields)


def _run_steady(options: dict) -> ResultTable:
    conc, n_mode, residual, status = _steady_point(
        options["g"], options["delta"], options["gamma"], options["kappa"],
        options["epsilon"], options["fock_cutoff"], options["flip_detuning"],
    )
    meta = {"experiment": "steady", "code_version": __version__, **{
        k: options[k] for k in ("g", "delta", "gamma", "kappa", "epsilon",
                                "fock_cutoff", "flip_detuning")
    }}
    return ResultTable(
        columns=["delta", "g", "concurrence", "n_mode", "residual", "status"],
        rows=[[options["delta"], options["g"], conc, n_mode, residual, status]],
        metadata=meta,
    )


def _run_grid(options: dict) -> ResultTable:
    spec = GridSpec(
        delta_axis=_axis(options["delta_axis"], "delta_axis"),
        g_axis=_axis(options["g_axis"], "g_axis"),
        epsilon=options["epsilon"],
        gamma=options["gamma"],
        kappa=options["kappa"],
        fock_cutoff=options["fock_cutoff"],
        flip_detuning=options["flip_detuning"],
    )
    return grid_sweep(spec)


def _run_line(options: dict) -> ResultTable:
    axis = _axis(options["axis"], "axis")
    if options["mode"] == "delta":
        return line_sweep_delta(
            options["g"], axis, list(options["gammas"]),
            epsilon=options["epsilon"], kappa=options["kappa"],
            fock_cutoff=options["fock_cutoff"], flip_detuning=options["flip_detuning"],
        )
    return line_sweep_gamma(
        options["g"], options["delta"], axis,
        epsilon=options["epsilon"], kappa=options["kappa"],
        fock_cutoff=options["fock_cutoff"], flip_detuning=options["flip_detuning"],
    )


def _run_timeseries(options: dict) -> ResultTable:
    params_list = [
        _params_from({**entry}, )
        for entry in options["params_sets"]
    ]
    cfg = None
    if options["rtol"] != 1e-8 or options["atol"] != 1e-10:
        cfg = IntegratorConfig(rtol=options["rtol"], atol=options["atol"])
    return time_series(
        params_list,
        t_final=options["t_final"],
        samples=options["samples"],
        cfg=cfg,
        flip_detuning=options["flip_detuning"],
    )


def _run_stirap(options: dict) -> ResultTable:
    epsilon = options["kappa"] if options["pump_during_stirap"] else 0.0
    spec = StirapSpec(
        delta_schedule=_schedule(options["delta_schedule"], "delta_schedule"),
        g_schedule=_schedule(options["g_schedule"], "g_schedule"),
        gamma=options["gamma"],
        kappa=options["kappa"],
        epsilon=epsilon,
        t_final=options["t_final"],
        initial_state=options["initial_state"],
        samples=options["samples"],
        fock_cutoff=options["fock_cutoff"],
        flip_detuning=options["flip_detuning"],
    )
    cfg = IntegratorConfig(
        rtol=options["rtol"],
        atol=options["atol"],
        max_step=1.0 / (20.0 * spec.fastest_rate()),
    )
    table = stirap_run(spec, cfg=cfg)
    table.metadata["pump_during_stirap"] = options["pump_during_stirap"]
    return table


def _run_evolve(options: dict) -> ResultTable:
    params = _params_from(options)
    layout = params.layout
    h = hamiltonian_rot(params, layout, flip_detuning=options["flip_detuning"])
    h = h + hamiltonian_pump(params.epsilon, layout)
    sup = liouvillian(h, dissipators(params, layout))
    psi0 = named_state(options["initial_state"], layout)
    rho0 = np.outer(psi0, psi0.conj())
    times = np.linspace(0.0, options["t_final"], options["samples"])
    cfg = IntegratorConfig(
        rtol=options["rtol"], atol=options["atol"],
        method="expm" if options["t_final"] > 1e4 else "rk45",
    )
    traj = evolve(rho0, sup, (0.0, options["t_final"]), times, cfg)
    rows = []
    for t, rho in zip(traj.times, traj.states):
        pops = populations(rho, layout)
        rows.append(
            [t, pops["P_G0"], pops["P_E"], pops["P_PsiPlus"], pops["P_PsiMinus"],
             pops["n_mode"], concurrence(partial_trace_mode(rho, layout))]
        )
    meta = {
        "experiment": "evolve", "code_version": __version__,
        **{k: options[k] for k in ("g", "delta", "gamma", "kappa", "epsilon",
                                   "fock_cutoff", "t_final", "initial_state",
                                   "samples", "rtol", "atol", "flip_detuning")},
    }
    return ResultTable(
        columns=["t", "P_G0", "P_E", "P_PsiPlus", "P_PsiMinus", "n_mode", "concurrence"],
        rows=rows,
        metadata=meta,
    )


def _run_converge(options: dict) -> ResultTable:
    params = _params_from(options)
    if options["observable"] == "concurrence":
        def obs(rho, layout):
            return concurrence(partial_trace_mode(rho, layout))
    else:
        obs = mean_photon_number
    cutoff, value = converge_cutoff(
        params, obs,
        start_cutoff=options["start_cutoff"], tol=options["tol"],
        flip_detuning=options["flip_detuning"],
    )
    meta = {"experiment": "converge", "code_version": __version__, **{
        k: options[k] for k in ("g", "delta", "gamma", "kappa", "epsilon",
                                "observable", "start_cutoff", "tol", "flip_detuning")
    }}
    return ResultTable(
        columns=["cutoff", "value"], rows=[[cutoff, value]], metadata=meta
    )


_RUNNERS = {
    "steady": _run_steady,
    "grid": _run_grid,
    "line": _run_line,
    "timeseries": _run_timeseries,
    "stirap": _run_stirap,
    "evolve": _run_evolve,
    "converge": _run_converge,
}


def _format_value(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.17g}"


def write_outputs(table: ResultTable, config: RunConfig, out_path: Path) -> None:
    """Write <out>.csv and the <out>.meta.json sidecar."""
    out_path = Path(out_path)
    csv_path = out_path if out_path.suffix == ".csv" else out_path.with_suffix(".csv")
    lines = [",".join(table.columns)]
    for row in table.rows:
        lines.append(",".join(_format_value(v) for v in row))
    csv_path.write_text("\n".join(lines) + "\n")

    meta = {
        "config": json.loads(serialize_config(config)),
        "diagnostics": table.metadata,
        "columns": table.columns,
        "code_version": __version__,
    }
    meta_path = csv_path.with_suffix("").with_suffix(".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def run(config: RunConfig, out_path: Path) -> int:
    """Execute one experiment and write its outputs; returns the exit status."""
    try:
        table = _RUNNERS[config.experiment](config.options)
        write_outputs(table, config, Path(out_path))
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dqsim",
        description="Steady-state and adiabatic entanglement experiments for "
        "two detuned qubits coupled to a lossy bosonic mode.",
    )
    parser.add_argument("--config", required=True, help="path to a JSON experiment config")
    parser.add_argument("--out", default="result.csv", help="output CSV path")
    parser.add_argument("--cutoff", type=int, default=None, help="override the Fock cutoff")
    parser.add_argument(
        "--seedless", action="store_true",
        help="reserved; no RNG is used anywhere in the pipeline",
    )
    args = parser.parse_args(argv)
    try:
        config = parse_config(Path(args.config).read_text())
        if args.cutoff is not None:
            if "fock_cutoff" not in _SCHEMA[config.experiment]:
                raise ConfigError(
                    f"experiment {config.experiment!r} does not take a Fock cutoff override"
                )
            config = RunConfig(
                experiment=config.experiment,
                options={**config.options, "fock_cutoff": args.cutoff},
            )
            _validate(config.experiment, config.options)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(config, Path(args.out))


if __name__ == "__main__":
    sys.exit(main())
