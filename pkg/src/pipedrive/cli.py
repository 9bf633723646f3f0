"""Command-line entry point: ``pipedrive simulate|study|fit|thresholds``.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .config import Sweep, load_json, parse_model, parse_sweep, scenario_from_dict
from .errors import (
    ConfigError,
    DivergenceError,
    FitError,
    InvalidSpecError,
    MeshError,
    SchemeInconsistencyError,
    StabilityError,
)
from .io import read_table, write_run
from .solver import MediumModel, run
from .study import (
    DEFAULT_EVAL_TIME,
    EPS_SLIP,
    FitForm,
    StudySpec,
    fit,
    run_study,
    slip_threshold_scan,
)
from .units import UnitError, parse_quantity

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

# abscissa unit for each fit form: value in SI divided by this
_FIT_X_SCALE = {
    FitForm.INVERSE_TAU: 1e6,    # MPa
    FitForm.QUADRATIC_P: 1e3,    # kN
    FitForm.INVERSE_LOG_L: 1.0,  # m
    FitForm.LINEAR_L: 1.0,       # m
}

log = logging.getLogger("pipedrive")


def _models(choice: str) -> tuple[MediumModel, ...]:
    if choice == "both":
        return (MediumModel.DEFORMABLE, MediumModel.RIGID)
    return (MediumModel(choice),)


def _eval_time(doc: dict, t_end: float) -> float:
    run_sec = doc.get("run", {})
    if "eval_time" in run_sec:
        try:
            return parse_quantity(run_sec["eval_time"], "time")
        except UnitError as exc:
            raise ConfigError(f"run.eval_time: {exc}") from None
    return min(DEFAULT_EVAL_TIME, t_end)


def cmd_simulate(args) -> int:
    doc = load_json(args.config)
    base = scenario_from_dict(doc)
    if args.friction_sign_literal:
        # the literal switch has no complementarity guarantee to check
        base = base.with_(friction_sign_literal=True, check_complementarity=False)
    models = _models(args.model) if args.model else (base.model,)
    out = Path(args.out)
    if len(models) > 1 and args.workers > 1:
        spec = StudySpec(base, None, out, _eval_time(doc, base.t_end), models)
        result = run_study(spec, workers=args.workers)
        for rec in result.records:
            if rec.status != "ok":
                print(f"{rec.model}: {rec.error}", file=sys.stderr)
                return EXIT_SOLVER
            _print_metrics(rec.model, rec.metrics.U_res, rec.metrics.U_av, rec.metrics.slip_flag)
        return EXIT_OK
    for model in models:
        result = run(base.with_(model=model))
        prefix = f"{model.value}_" if len(models) > 1 else ""
        write_run(out, result, prefix)
        m = result.metrics
        _print_metrics(model.value, m.U_res, m.U_av, m.slip_flag)
    return EXIT_OK


def _print_metrics(model: str, U_res: float, U_av: float, slip: bool) -> None:
    print(f"{model}: U_res={U_res:.6g} m U_av={U_av:.6g} m slip={'yes' if slip else 'no'}")


def _study_spec(doc: dict, out: Path) -> StudySpec:
    base = scenario_from_dict(doc)
    sweep = parse_sweep(doc["sweep"]) if "sweep" in doc else None
    run_sec = doc.get("run", {})
    models = tuple(parse_model(m) for m in run_sec.get("models", [base.model.value]))
    try:
        return StudySpec(base, sweep, out, _eval_time(doc, base.t_end), models)
    except InvalidSpecError as exc:
        raise ConfigError(str(exc)) from None


def cmd_study(args) -> int:
    spec = _study_spec(load_json(args.study), Path(args.out))
    result = run_study(spec, workers=args.workers)
    failed = [r for r in result.records if r.status != "ok"]
    for model, path in result.metrics_files.items():
        print(f"{model}: {path}")
    for r in failed:
        print(f"run {r.index} ({r.model}, {r.sweep_value:g}) failed: {r.error}", file=sys.stderr)
    return EXIT_SOLVER if failed and len(failed) == len(result.records) else EXIT_OK


def cmd_fit(args) -> int:
    form = FitForm(args.form)
    header, rows = read_table(args.metrics)
    if "P0_threshold_N" in header:
        xi, yi, y_scale = header.index("L_m"), header.index("P0_threshold_N"), 1e3
    elif "sweep_value" in header and "U_res_m" in header:
        xi, yi, y_scale = header.index("sweep_value"), header.index("U_res_m"), 1.0
    else:
        raise ConfigError(f"{args.metrics}: not a metrics or thresholds table")
    pts = [(float(r[xi]), float(r[yi])) for r in rows]
    pts = [(x, y) for x, y in pts if math.isfinite(x) and math.isfinite(y)]
    xs = [x / _FIT_X_SCALE[form] for x, _ in pts]
    ys = [y / y_scale for _, y in pts]
    res = fit(form, xs, ys)
    coefs = " ".join(f"{c:.10g}" for c in res.coefficients)
    print(f"form={form.value} coefficients={coefs} R2={res.r_squared:.6f}")
    return EXIT_OK


def cmd_thresholds(args) -> int:
    doc = load_json(args.study)
    spec = _study_spec(doc, Path(args.out))
    if spec.sweep is None or spec.sweep.parameter != "L":
        raise ConfigError("thresholds needs a sweep over L")
    opts = doc.get("thresholds", {})
    try:
        bounds = None
        if "P0_low" in opts or "P0_high" in opts:
            bounds = (parse_quantity(opts["P0_low"], "force"), parse_quantity(opts["P0_high"], "force"))
        eps = parse_quantity(opts["eps"], "length") if "eps" in opts else EPS_SLIP
    except (KeyError, UnitError) as exc:
        raise ConfigError(f"thresholds: {exc}") from None
    template = spec.base.with_(eval_time=spec.eval_time, record_stride=100, energy_stride=1000)
    predicate = opts.get("predicate", "U_av")
    table = slip_threshold_scan(
        spec.sweep.values, template, bounds, float(opts.get("rel_tol", 0.01)), eps, predicate
    )
    path = table.write(Path(args.out) / "thresholds.csv")
    for r in table.rows:
        p0 = "unbracketed" if r.P0 is None else f"{r.P0:.6g} N"
        print(f"L={r.L:g} m threshold={p0} rigid_line={r.rigid_line:.6g} N")
    if table.fit is not None:
        a, b = table.fit.coefficients
        print(f"linear fit P0[kN] = {a:.6g} L[m] + {b:.6g}, R2={table.fit.r_squared:.6f}")
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pipedrive", description="Impact-driven pipe in soil with dry friction.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one scenario and write CSVs")
    s.add_argument("config")
    s.add_argument("--out", default="out")
    s.add_argument("--model", choices=["deformable", "rigid", "both"])
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--friction-sign-literal", action="store_true",
                   help="apply the friction correction with the same sign to pipe and soil")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("study", help="run a parameter sweep and write metrics.csv")
    s.add_argument("study")
    s.add_argument("--out", default="out")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_study)

    s = sub.add_parser("fit", help="fit an empirical law to a metrics or thresholds table")
    s.add_argument("metrics")
    s.add_argument("--form", required=True, choices=[f.value for f in FitForm])
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("thresholds", help="slip-onset load per pipe length")
    s.add_argument("study")
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_thresholds)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvalidSpecError, MeshError, StabilityError, FitError, UnitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, SchemeInconsistencyError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
