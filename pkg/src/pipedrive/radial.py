"""Thin-layer radial model and its closed-form solutions.

When axial gradients are negligible the soil obeys the cylindrical wave
equation ``V_tt = b^2 (V_rr + V_r / r)`` on R <= r <= R2, welded to the
pipe at r = R and clamped at r = R2, while the pipe is a lumped mass per
unit length driven by the head load and the soil shear traction.

The load is interpreted per unit axial length of the layer, so ``P0`` in
newtons gives displacements in metres for a one-metre layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError, ResonanceError, StabilityError
from .model import (
    LoadKind,
    LoadPulse,
    PipeSpec,
    SoilSpec,
    check_geometry,
    derive_pipe,
    derive_soil,
    load_value,
)


@dataclass
class Oscillogram:
    """Displacement history at one or more probes."""

    t: np.ndarray
    U: np.ndarray  # shape (n_samples,) or (n_samples, n_probes)

    def to_csv(self, path, columns: list[str] | None = None) -> None:
        from .io import write_oscillogram

        write_oscillogram(path, self, columns)


@dataclass
class RadialState:
    V_prev: np.ndarray
    V_curr: np.ndarray
    t: float

    @property
    def U_curr(self) -> float:
        return float(self.V_curr[0])

    @property
    def U_prev(self) -> float:
        return float(self.V_prev[0])


@dataclass(frozen=True)
class RadialGrid:
    h_r: float
    h_t: float
    r: np.ndarray


def radial_grid(pipe: PipeSpec, soil: SoilSpec, h_r: float, h_t: float | None = None) -> RadialGrid:
    """Uniform radial grid from R to R2; h_r is shrunk to fit a whole number of cells."""
    check_geometry(pipe, soil)
    n = max(2, math.ceil((soil.R2 - pipe.R) / h_r - 1e-9))
    h_r = (soil.R2 - pipe.R) / n
    b = derive_soil(soil).b
    if h_t is None:
        h_t = h_r / b
    elif h_t > h_r / b * (1 + 1e-12):
        raise StabilityError(f"h_t={h_t} exceeds the radial bound h_r/b={h_r / b}")
    return RadialGrid(h_r, h_t, pipe.R + h_r * np.arange(n + 1))


def _forcing(load: LoadPulse):
    if load.kind is LoadKind.STEP:
        return lambda t: load.P0 if t >= 0 else 0.0
    return lambda t: load_value(load, t)


def iterate_radial(pipe: PipeSpec, soil: SoilSpec, load: LoadPulse, grid: RadialGrid):
    """Yield ``(t, state, Q)`` after every step, starting at the first level.

    Node 0 is the pipe (V(R) = U). The pipe row uses a three-point
    one-sided derivative for the soil shear traction; interior rows are
    central differences of the cylindrical Laplacian.
    """
    pd = derive_pipe(pipe)
    b = derive_soil(soil).b
    h_r, h_t, r = grid.h_r, grid.h_t, grid.r
    m_pipe = pd.S_t * pipe.rho
    traction = pd.P_t * soil.G / (2.0 * h_r)
    cf = (b * h_t / h_r) ** 2
    skew = h_r / (2.0 * r[1:-1])
    Q = _forcing(load)

    def pipe_acc(V, t):
        return (traction * (-3.0 * V[0] + 4.0 * V[1] - V[2]) + Q(t)) / m_pipe

    V_prev = np.zeros_like(r)
    V = np.zeros_like(r)
    # Taylor start from rest
    V[0] = 0.5 * h_t * h_t * pipe_acc(V_prev, 0.0)
    state = RadialState(V_prev, V, h_t)
    yield h_t, state, Q(0.0)
    n = 1
    while True:
        t = n * h_t
        V_next = np.empty_like(V)
        lap = (V[2:] - 2.0 * V[1:-1] + V[:-2]) + skew * (V[2:] - V[:-2])
        V_next[1:-1] = 2.0 * V[1:-1] - V_prev[1:-1] + cf * lap
        V_next[-1] = 0.0
        V_next[0] = 2.0 * V[0] - V_prev[0] + h_t * h_t * pipe_acc(V, t)
        V_prev, V = V, V_next
        n += 1
        state = RadialState(V_prev, V, n * h_t)
        yield n * h_t, state, Q(t)


def solve_radial(
    pipe: PipeSpec,
    soil: SoilSpec,
    load: LoadPulse,
    t_end: float,
    h_r: float = 0.01,
    h_t: float | None = None,
    probe_stride: int = 1,
) -> Oscillogram:
    """Pipe displacement history of the radial model, U(0) = 0 included."""
    if not t_end > 0:
        raise InvalidSpecError("t_end", "must be positive")
    grid = radial_grid(pipe, soil, h_r, h_t)
    n_steps = math.ceil(t_end / grid.h_t - 1e-9)
    ts, us = [0.0], [0.0]
    for n, (t, state, _) in enumerate(iterate_radial(pipe, soil, load, grid), start=1):
        if n % probe_stride == 0:
            ts.append(t)
            us.append(state.U_curr)
        if n >= n_steps:
            break
    return Oscillogram(np.array(ts), np.array(us))


def radial_energy(pipe: PipeSpec, soil: SoilSpec, load: LoadPulse, grid: RadialGrid, n_steps: int):
    """Discrete energy and load work at half levels, for auditing.

    Returns arrays ``(t, energy, work)``; energy is kinetic plus shear
    strain with the staggered (leap-frog) product for the strain term.
    """
    pd = derive_pipe(pipe)
    r = grid.r
    h_r, h_t = grid.h_r, grid.h_t
    mass = soil.gamma * 2.0 * math.pi * r * h_r
    mass[0] = pd.S_t * pipe.rho
    mass[-1] = 0.0
    stiff = soil.G * 2.0 * math.pi * (r[:-1] + 0.5 * h_r) / h_r
    ts, es, ws = [], [], []
    work = 0.0
    prev = None
    for n, (t, state, Q) in enumerate(iterate_radial(pipe, soil, load, grid), start=1):
        V_prev, V = state.V_prev, state.V_curr
        if prev is not None:
            work += Q * (V[0] - prev[0]) / 2.0
            # state.V_prev is level n-1, prev is level n-2
            dV = (V - V_prev) / h_t
            kin = 0.5 * np.sum(mass * dV * dV)
            strain = 0.5 * np.sum(stiff * np.diff(V) * np.diff(V_prev))
            ts.append(t - 0.5 * h_t)
            es.append(kin + strain)
            ws.append(work)
        prev = V_prev
        if n >= n_steps:
            break
    return np.array(ts), np.array(es), np.array(ws)


def asymptote_step(pipe: PipeSpec, soil: SoilSpec, P0: float, t):
    """Long-time displacement under a step load in an unbounded medium.

    Valid for t well above R/(2b) and before waves return from the outer
    boundary; smaller t gives the formula's (negative) value, flagged by
    :func:`asymptote_valid`.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise InvalidSpecError("t", "asymptote is defined for t > 0 only")
    b = derive_soil(soil).b
    out = P0 / (2.0 * math.pi * soil.G) * np.log(2.0 * b * t / pipe.R)
    return float(out) if out.ndim == 0 else out


def asymptote_valid(pipe: PipeSpec, soil: SoilSpec, t: float) -> bool:
    b = derive_soil(soil).b
    return pipe.R / (2.0 * b) < t


def validity_window(pipe: PipeSpec, soil: SoilSpec) -> tuple[float, float]:
    """[10 R/b, 2 (R2 - R)/b]: late enough for the asymptote, before reflections."""
    b = derive_soil(soil).b
    return 10.0 * pipe.R / b, 2.0 * (soil.R2 - pipe.R) / b


@dataclass(frozen=True)
class OracleConstants:
    beta: float    # natural frequency of pipe on the static soil spring
    U0: float      # pulse displacement scale
    U_stat: float  # static displacement under P0


def oracle_constants(pipe: PipeSpec, soil: SoilSpec, P0: float) -> OracleConstants:
    check_geometry(pipe, soil)
    pd = derive_pipe(pipe)
    log_ratio = math.log(soil.R2 / pipe.R)
    spring = 2.0 * math.pi * soil.G / log_ratio
    mass = pd.S_t * pipe.rho
    beta = math.sqrt(spring / mass)
    U0 = P0 / (mass * beta * beta)
    U_stat = P0 * log_ratio / (2.0 * math.pi * soil.G)
    return OracleConstants(beta=beta, U0=U0, U_stat=U_stat)


def pulsed_response(
    pipe: PipeSpec,
    constants: OracleConstants,
    load: LoadPulse,
    t,
    simplified: bool = False,
):
    """Half-sine response of the pipe on the static soil spring.

    The exact form is the two-branch solution of ``U'' + beta^2 U = Q/m``;
    ``simplified=True`` returns ``U0 sin(omega* t)`` during the pulse and
    zero afterwards, the limit for omega* << beta.
    """
    if load.kind is not LoadKind.HALF_SINE:
        raise InvalidSpecError("load", "pulsed response needs a half-sine load")
    t = np.asarray(t, dtype=float)
    w, t0 = load.omega_star, load.t0
    beta = constants.beta
    if simplified:
        out = np.where((t >= 0) & (t <= t0), constants.U0 * np.sin(w * t), 0.0)
        return float(out) if out.ndim == 0 else out
    if abs(w - beta) / beta < 1e-9:
        raise ResonanceError(f"omega*={w} coincides with beta={beta}")
    pd = derive_pipe(pipe)
    scale = load.P0 / (pd.S_t * pipe.rho * beta * (w * w - beta * beta))
    during = w * np.sin(beta * t) - beta * np.sin(w * t)
    after = w * (np.sin(beta * t) + np.sin(beta * (t - t0)))
    out = scale * np.where(t <= t0, during, after)
    out = np.where(t < 0, 0.0, out)
    return float(out) if out.ndim == 0 else out
