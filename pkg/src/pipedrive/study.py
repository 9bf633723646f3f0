"""Parameter sweeps, run metrics, empirical-law fits and slip thresholds."""

from __future__ import annotations

import enum
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SWEEP_DIMENSIONS, Sweep
from .errors import DivergenceError, FitError, InvalidSpecError, SchemeInconsistencyError, StabilityError
from .io import write_run, write_table
from .model import LoadPulse, PipeSpec, derive_pipe
from .solver import MediumModel, RunResult, Scenario, run

logger = logging.getLogger(__name__)

DEFAULT_EVAL_TIME = 0.1  # s
EPS_SLIP = 1e-6          # m
METRICS_HEADER = ["sweep_value", "U_res_m", "U_av_m", "F_f_N", "slip_flag"]


def friction_force(pipe: PipeSpec, tau0: float) -> float:
    """Total friction capacity P_t L tau0 of the whole pipe."""
    return derive_pipe(pipe).P_t * pipe.L * tau0


def apply_sweep(base: Scenario, parameter: str, value: float) -> Scenario:
    """Scenario with one parameter replaced.

    Sweeping ``L`` keeps a fully embedded pipe fully embedded (L1 follows
    L); otherwise L1 is kept.
    """
    if parameter not in SWEEP_DIMENSIONS:
        raise InvalidSpecError("sweep", f"unknown parameter {parameter!r}")
    pipe, soil, load = base.pipe, base.soil, base.load
    if parameter == "tau0":
        soil = soil.with_tau0(value)
    elif parameter == "R2":
        soil = type(soil)(soil.G, soil.gamma, soil.lam, value, soil.tau0)
    elif parameter == "P0":
        load = LoadPulse(load.kind, value, load.t0)
    elif parameter == "t0":
        load = LoadPulse(load.kind, load.P0, value)
    elif parameter == "L":
        L1 = value if pipe.L1 == pipe.L else pipe.L1
        pipe = PipeSpec(pipe.E, pipe.rho, pipe.h, pipe.R, value, L1)
    else:
        pipe = PipeSpec(pipe.E, pipe.rho, pipe.h, pipe.R, pipe.L, value)
    return base.with_(pipe=pipe, soil=soil, load=load)


@dataclass(frozen=True)
class Metrics:
    sweep_value: float
    U_res: float      # head displacement at eval_time (m)
    U_av: float       # (max_z U + min_z U) / 2 at eval_time (m)
    F_f: float        # P_t L tau0 (N)
    slip_flag: bool
    slip_res: float = 0.0  # mean accumulated slip over the contact (m)

    def row(self) -> tuple:
        return (self.sweep_value, self.U_res, self.U_av, self.F_f, self.slip_flag)


def metrics_of(result: RunResult, sweep_value: float = math.nan) -> Metrics:
    m = result.metrics
    sc = result.scenario
    return Metrics(
        sweep_value=sweep_value,
        U_res=m.U_res,
        U_av=m.U_av,
        F_f=friction_force(sc.pipe, sc.soil.tau0),
        slip_flag=m.slip_flag,
        slip_res=m.slip_res,
    )


@dataclass(frozen=True)
class StudySpec:
    """A base scenario, an optional one-parameter sweep and where to write."""

    base: Scenario
    sweep: Sweep | None = None
    outputs: Path = Path("out")
    eval_time: float = DEFAULT_EVAL_TIME
    models: tuple[MediumModel, ...] = (MediumModel.DEFORMABLE,)

    def __post_init__(self):
        if not 0 < self.eval_time <= self.base.t_end:
            raise InvalidSpecError("eval_time", f"{self.eval_time} must lie in (0, t_end={self.base.t_end}]")
        if self.sweep is not None:
            vals = list(self.sweep.values)
            if any(v <= 0 for v in vals) or vals != sorted(vals):
                raise InvalidSpecError("sweep", "values must be positive and sorted")

    def scenarios(self) -> list[tuple[float, MediumModel, Scenario]]:
        base = self.base.with_(eval_time=self.eval_time)
        values = self.sweep.values if self.sweep else (math.nan,)
        out = []
        for model in self.models:
            for v in values:
                sc = base if self.sweep is None else apply_sweep(base, self.sweep.parameter, v)
                out.append((v, model, sc.with_(model=model)))
        return out


@dataclass
class RunRecord:
    index: int
    sweep_value: float
    model: str
    status: str                 # "ok" or "failed"
    error: str | None = None
    files: list[str] = field(default_factory=list)
    metrics: Metrics | None = None


@dataclass
class StudyResult:
    records: list[RunRecord]
    metrics_files: dict[str, Path]
    manifest: Path

    def metrics(self, model: MediumModel = MediumModel.DEFORMABLE) -> list[Metrics]:
        return [r.metrics for r in self.records if r.model == model.value and r.metrics is not None]


def _run_one(args) -> RunRecord:
    index, value, scenario, outdir = args
    model = scenario.model.value
    rec = RunRecord(index, value, model, "ok")
    try:
        result = run(scenario)
        rec.metrics = metrics_of(result, value)
        if outdir is not None:
            rundir = Path(outdir) / f"run{index:03d}_{model}"
            rec.files = [str(p.relative_to(outdir)) for p in write_run(rundir, result)]
    except (DivergenceError, SchemeInconsistencyError, StabilityError, InvalidSpecError) as exc:
        rec.status, rec.error = "failed", f"{type(exc).__name__}: {exc}"
        logger.error("run %d (%s, %s) failed: %s", index, value, model, exc)
    return rec


def _nan_to_none(x):
    return None if isinstance(x, float) and math.isnan(x) else x


def run_study(spec: StudySpec, workers: int = 1, write_runs: bool = True) -> StudyResult:
    """Run every sweep member and write ``metrics.csv`` and ``manifest.json``.

    With two models the rigid-medium table goes to ``metrics_rigid.csv``.
    Failed runs are recorded in the manifest and skipped in the tables.
    Output is independent of ``workers``.
    """
    out = Path(spec.outputs)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(i, v, sc, out if write_runs else None) for i, (v, _, sc) in enumerate(spec.scenarios())]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(j) for j in jobs]

    metrics_files = {}
    for model in spec.models:
        name = "metrics.csv" if model is spec.models[0] else f"metrics_{model.value}.csv"
        rows = [r.metrics.row() for r in records if r.model == model.value and r.metrics is not None]
        metrics_files[model.value] = write_table(out / name, METRICS_HEADER, rows)

    manifest = {
        "sweep": None if spec.sweep is None else {"parameter": spec.sweep.parameter, "values": list(spec.sweep.values)},
        "eval_time_s": spec.eval_time,
        "models": [m.value for m in spec.models],
        "runs": [
            {
                "index": r.index,
                "sweep_value": _nan_to_none(r.sweep_value),
                "model": r.model,
                "status": r.status,
                "error": r.error,
                "files": r.files,
            }
            for r in records
        ],
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return StudyResult(records, metrics_files, manifest_path)


# ---------------------------------------------------------------------------
# fits
# ---------------------------------------------------------------------------

class FitForm(enum.Enum):
    INVERSE_LOG_L = "inverse-log-l"  # U = 1 / (A ln L + B)
    INVERSE_TAU = "inverse-tau"      # U = C / tau0
    QUADRATIC_P = "quadratic-p"      # U = A P^2 + B P + C
    LINEAR_L = "linear-l"            # P = A L + B


@dataclass(frozen=True)
class FitResult:
    form: FitForm
    coefficients: tuple[float, ...]
    r_squared: float

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        c = self.coefficients
        if self.form is FitForm.INVERSE_LOG_L:
            return 1.0 / (c[0] * np.log(x) + c[1])
        if self.form is FitForm.INVERSE_TAU:
            return c[0] / x
        return np.polyval(c, x)


def _r_squared(y, y_hat) -> float:
    ss_res = float(np.sum((y - y_hat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return min(1.0, max(0.0, 1.0 - ss_res / ss_tot))


def fit(form: FitForm | str, x, y) -> FitResult:
    """Least squares in the space that makes ``form`` linear.

    R^2 is computed on the untransformed data.
    """
    form = FitForm(form)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError("x and y must be 1D arrays of equal length")
    if x.size < 3:
        raise FitError(f"need at least 3 points, got {x.size}")
    if np.unique(x).size != x.size:
        raise FitError("abscissae must be distinct")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError("non-finite data")

    if form is FitForm.INVERSE_LOG_L:
        if np.any(x <= 0) or np.any(y == 0):
            raise FitError("inverse-log-l needs positive L and nonzero U")
        A = np.column_stack([np.log(x), np.ones_like(x)])
        target = 1.0 / y
    elif form is FitForm.INVERSE_TAU:
        if np.any(x == 0):
            raise FitError("inverse-tau needs nonzero tau0")
        A = (1.0 / x)[:, None]
        target = y
    elif form is FitForm.QUADRATIC_P:
        A = np.column_stack([x * x, x, np.ones_like(x)])
        target = y
    else:
        A = np.column_stack([x, np.ones_like(x)])
        target = y

    # column scaling keeps the rank test meaningful for any units
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise FitError("degenerate design matrix")
    coef, _, rank, _ = np.linalg.lstsq(A / norms, target, rcond=None)
    if rank < A.shape[1]:
        raise FitError("degenerate design matrix")
    result = FitResult(form, tuple(float(c) for c in coef / norms), 0.0)
    return FitResult(form, result.coefficients, _r_squared(y, result.predict(x)))


# ---------------------------------------------------------------------------
# slip thresholds and model comparison
# ---------------------------------------------------------------------------

def rigid_threshold(pipe: PipeSpec, tau0: float) -> float:
    """Rigid-model slip onset P0 = tau0 P_t L / 2 (N)."""
    return 0.5 * friction_force(pipe, tau0)


@dataclass(frozen=True)
class ThresholdRow:
    L: float
    P0: float | None     # None when the bracket did not contain the threshold
    bracketed: bool
    rigid_line: float
    evaluations: int


@dataclass
class ThresholdTable:
    rows: list[ThresholdRow]
    fit: FitResult | None  # LinearL fit of P0 [kN] against L [m]

    def write(self, path) -> Path:
        return write_table(
            path,
            ["L_m", "P0_threshold_N", "bracketed", "rigid_line_N"],
            [(r.L, math.nan if r.P0 is None else r.P0, r.bracketed, r.rigid_line) for r in self.rows],
        )


SLIP_PREDICATES = ("U_av", "slip_res")


def slips(template: Scenario, P0: float, eps: float = EPS_SLIP, predicate: str = "U_av") -> bool:
    """Slip-onset predicate at eval_time.

    ``"U_av"`` tests the mid-range head-to-tail displacement; ``"slip_res"``
    tests the contact-averaged accumulated slip, which excludes elastic
    strain locked in by friction.
    """
    if predicate not in SLIP_PREDICATES:
        raise InvalidSpecError("predicate", f"must be one of {SLIP_PREDICATES}")
    return getattr(run(apply_sweep(template, "P0", P0)).metrics, predicate) > eps


def slip_threshold(
    template: Scenario,
    lo: float,
    hi: float,
    rel_tol: float = 0.01,
    eps: float = EPS_SLIP,
    predicate: str = "U_av",
) -> tuple[float | None, int]:
    """Bisection for the smallest P0 with :func:`slips`; ``(None, n)`` if unbracketed."""
    if not 0 < lo < hi:
        raise InvalidSpecError("bounds", "need 0 < lo < hi")
    n = 2
    if slips(template, lo, eps, predicate) or not slips(template, hi, eps, predicate):
        return None, n
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        n += 1
        if slips(template, mid, eps, predicate):
            hi = mid
        else:
            lo = mid
    return hi, n


def slip_threshold_scan(
    L_values,
    template: Scenario,
    bounds: tuple[float, float] | None = None,
    rel_tol: float = 0.01,
    eps: float = EPS_SLIP,
    predicate: str = "U_av",
) -> ThresholdTable:
    """Slip-onset load for each pipe length, plus a linear fit in kN vs m.

    Default bounds per L are [1e-3, 10] times the rigid-model threshold.
    """
    L_values = list(L_values)
    if L_values != sorted(L_values):
        raise InvalidSpecError("L_values", "must be sorted")
    rows = []
    for L in L_values:
        sc = apply_sweep(template, "L", L)
        rigid = rigid_threshold(sc.pipe, sc.soil.tau0)
        lo, hi = bounds if bounds is not None else (1e-3 * rigid, 10.0 * rigid)
        P0, n = slip_threshold(sc, lo, hi, rel_tol, eps, predicate)
        if P0 is None:
            logger.warning("slip threshold for L=%g not bracketed by [%g, %g] N", L, lo, hi)
        rows.append(ThresholdRow(L, P0, P0 is not None, rigid, n))
    ok = [r for r in rows if r.P0 is not None]
    line = None
    if len(ok) >= 3:
        line = fit(FitForm.LINEAR_L, [r.L for r in ok], [r.P0 / 1e3 for r in ok])
    return ThresholdTable(rows, line)


@dataclass(frozen=True)
class Comparison:
    deformable: RunResult
    rigid: RunResult
    max_dU_rel: float       # max |U_def - U_rig| / max |U_def| at z = 0
    residual_ratio: float   # U_res(rigid) / U_res(deformable)
    L_star: float           # P0 / (tau0 P_t)
    short_pipe: bool        # L < L*/4: the two models are expected to agree
    slip_by_tau: bool       # tau0 <= 2 P0 / (L P_t)
    slip_by_length: bool    # L < 2 L*

    @property
    def agree(self) -> bool:
        return abs(self.residual_ratio - 1.0) <= 0.1


def model_compare(scenario: Scenario) -> Comparison:
    deformable = run(scenario.with_(model=MediumModel.DEFORMABLE))
    rigid = run(scenario.with_(model=MediumModel.RIGID))
    Ud, Ur = deformable.U[:, 0], rigid.U[:, 0]
    n = min(Ud.size, Ur.size)
    peak = float(np.max(np.abs(Ud)))
    max_dU = float(np.max(np.abs(Ud[:n] - Ur[:n]))) / peak if peak > 0 else 0.0
    ud, ur = deformable.metrics.U_res, rigid.metrics.U_res
    ratio = ur / ud if ud != 0 else (1.0 if ur == 0 else math.inf)
    pipe, tau0, P0 = scenario.pipe, scenario.soil.tau0, scenario.load.P0
    P_t = derive_pipe(pipe).P_t
    L_star = P0 / (tau0 * P_t) if tau0 > 0 else math.inf
    return Comparison(
        deformable=deformable,
        rigid=rigid,
        max_dU_rel=max_dU,
        residual_ratio=ratio,
        L_star=L_star,
        short_pipe=pipe.L < L_star / 4.0,
        slip_by_tau=tau0 <= 2.0 * P0 / (pipe.L * P_t),
        slip_by_length=pipe.L < 2.0 * L_star,
    )
