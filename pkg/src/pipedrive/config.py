"""JSON configuration documents.

A document has the sections ``pipe``, ``soil``, ``load``, ``mesh``,
``run`` and optionally ``sweep``. Every physical number is a string with
a unit suffix::

    {
      "pipe": {"E": "210 GPa", "rho": "7530 kg/m3", "h": "3 mm",
               "R": "45 mm", "L": "7.5 m", "L1": "4 m"},
      "soil": {"a": "0.611 m/ms", "b": "0.357 m/ms", "gamma": "2000 kg/m3",
               "R2": "0.8 m", "tau0": "0.1 MPa"},
      "load": {"kind": "half-sine", "P0": "88 kN", "t0": "0.22 ms"},
      "mesh": {"h_z": "0.1 m"},
      "run": {"t_end": "100 ms", "probes": ["0 m"], "model": "deformable"},
      "sweep": {"parameter": "tau0", "values": ["0.1 MPa", "0.05 MPa"]}
    }

The soil may be given by wave speeds (``a``, ``b``) or by moduli
(``G``, ``lambda``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, InvalidSpecError
from .model import LoadKind, LoadPulse, PipeSpec, SoilSpec
from .solver import MediumModel, Scenario
from .units import UnitError, parse_quantity

# sweepable parameter -> dimension of its values
SWEEP_DIMENSIONS = {
    "tau0": "pressure",
    "P0": "force",
    "R2": "length",
    "L": "length",
    "L1": "length",
    "t0": "time",
}


def _q(section: dict, name: str, dimension: str, where: str, default=None) -> float:
    if name not in section:
        if default is not None:
            return default
        raise ConfigError(f"{where}.{name} is required")
    try:
        return parse_quantity(section[name], dimension)
    except UnitError as exc:
        raise ConfigError(f"{where}.{name}: {exc}") from None


def _section(doc: dict, name: str, required: bool = True) -> dict:
    sec = doc.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"missing section {name!r}")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be an object")
    return sec


def parse_pipe(sec: dict) -> PipeSpec:
    return PipeSpec(
        E=_q(sec, "E", "pressure", "pipe"),
        rho=_q(sec, "rho", "density", "pipe"),
        h=_q(sec, "h", "length", "pipe"),
        R=_q(sec, "R", "length", "pipe"),
        L=_q(sec, "L", "length", "pipe"),
        L1=_q(sec, "L1", "length", "pipe"),
    )


def parse_soil(sec: dict) -> SoilSpec:
    gamma = _q(sec, "gamma", "density", "soil")
    R2 = _q(sec, "R2", "length", "soil")
    tau0 = _q(sec, "tau0", "pressure", "soil")
    if "a" in sec or "b" in sec:
        if "G" in sec or "lambda" in sec:
            raise ConfigError("soil: give either wave speeds (a, b) or moduli (G, lambda), not both")
        a = _q(sec, "a", "velocity", "soil")
        b = _q(sec, "b", "velocity", "soil")
        return SoilSpec.from_speeds(a, b, gamma, R2, tau0)
    return SoilSpec(
        G=_q(sec, "G", "pressure", "soil"),
        gamma=gamma,
        lam=_q(sec, "lambda", "pressure", "soil"),
        R2=R2,
        tau0=tau0,
    )


def parse_load(sec: dict) -> LoadPulse:
    kind = sec.get("kind", "half-sine")
    try:
        kind = LoadKind(kind)
    except ValueError:
        raise ConfigError(f"load.kind must be 'step' or 'half-sine', got {kind!r}") from None
    P0 = _q(sec, "P0", "force", "load")
    if kind is LoadKind.STEP:
        return LoadPulse.step(P0)
    return LoadPulse.half_sine(P0, _q(sec, "t0", "time", "load"))


def parse_model(text: str) -> MediumModel:
    try:
        return MediumModel(text)
    except ValueError:
        raise ConfigError(f"run.model must be 'deformable' or 'rigid', got {text!r}") from None


def _quantities(values, dimension: str, where: str) -> tuple[float, ...]:
    if not isinstance(values, list):
        raise ConfigError(f"{where} must be a list")
    out = []
    for v in values:
        try:
            out.append(parse_quantity(v, dimension))
        except UnitError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    return tuple(out)


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a :class:`Scenario`; every failure surfaces as ConfigError."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    try:
        pipe = parse_pipe(_section(doc, "pipe"))
        soil = parse_soil(_section(doc, "soil"))
        load = parse_load(_section(doc, "load"))
        mesh = _section(doc, "mesh", required=False)
        run = _section(doc, "run")
        t_end = _q(run, "t_end", "time", "run")
        eval_time = _q(run, "eval_time", "time", "run") if "eval_time" in run else None
        return Scenario(
            pipe=pipe,
            soil=soil,
            load=load,
            t_end=t_end,
            target_h_z=_q(mesh, "h_z", "length", "mesh", default=0.1),
            probes=_quantities(run.get("probes", ["0 m"]), "length", "run.probes"),
            snapshot_times=_quantities(run.get("snapshot_times", []), "time", "run.snapshot_times"),
            model=parse_model(run.get("model", "deformable")),
            eval_time=eval_time,
            record_stride=int(run.get("record_stride", 1)),
            energy_stride=int(run.get("energy_stride", 1)),
        )
    except InvalidSpecError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class Sweep:
    parameter: str
    values: tuple[float, ...]


def parse_sweep(sec: dict) -> Sweep:
    name = sec.get("parameter")
    if name not in SWEEP_DIMENSIONS:
        raise ConfigError(f"sweep.parameter must be one of {sorted(SWEEP_DIMENSIONS)}, got {name!r}")
    values = _quantities(sec.get("values"), SWEEP_DIMENSIONS[name], "sweep.values")
    if not values:
        raise ConfigError("sweep.values is empty")
    if any(v <= 0 for v in values):
        raise ConfigError("sweep values must be positive")
    if list(values) != sorted(values):
        raise ConfigError("sweep values must be sorted ascending")
    return Sweep(name, values)


def load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def load_scenario(path) -> Scenario:
    return scenario_from_dict(load_json(path))
