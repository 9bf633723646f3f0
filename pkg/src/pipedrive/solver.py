"""Coupled pipe / axisymmetric soil solver with dry-friction contact.

The pipe is a 1D bar on z in [0, L]; the soil occupies the annulus
R <= r <= R2 along the embedded stretch L - L1 <= z <= L and carries only
an axial displacement V(z, r). Both are advanced with the explicit
three-level cross scheme. Interior soil rows reduce exactly to

    V^{n+1} - 2V^n + V^{n-1} = h_t^2 [a^2 L_zz V + b^2 (L_rr V + L_r V / r)]

but are assembled here in flux form (node masses times accelerations),
which makes the discrete energy identity exact and gives each boundary
node a half cell:

* pipe head z = 0 and tail z = L, soil rows at z = L - L1 and z = L:
  half-length cells (ghost-node Neumann conditions; the head carries Q);
* soil node at r = R: half-width ring, coupled to the pipe by a contact
  force; r = R2 is clamped.

Contact at every embedded node is resolved per time level. Frictionless
predictors for the pipe node and the soil ring are formed first; the
fictitious relative velocities for the two possible friction signs then
decide between slip (same sign: pick the smaller magnitude) and stick
(opposite signs or zero: the pair moves together for this step and the
transmitted force follows from the shared motion).
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DivergenceError, InvalidSpecError, SchemeInconsistencyError, StabilityError
from .model import (
    Geometry,
    LoadPulse,
    Mesh,
    PipeSpec,
    SoilSpec,
    check_geometry,
    check_stability,
    derive_pipe,
    derive_soil,
    load_value,
    optimized_mesh,
)

logger = logging.getLogger(__name__)

DIVERGENCE_GUARD = 1.0e6  # m
GUARD_EVERY = 100
STICK_TOL = 1e-9


class ContactMode(enum.IntEnum):
    STICK = 0
    SLIP = 1


class MediumModel(enum.Enum):
    DEFORMABLE = "deformable"
    RIGID = "rigid"


# ---------------------------------------------------------------------------
# contact resolution
# ---------------------------------------------------------------------------

def fictitious_velocities(
    U_pred, V_pred, U_now, V_now, capacity, inv_m_pipe, inv_m_soil, dt2, h_t, literal=False
):
    """Relative contact velocities under the two assumed friction signs.

    Returns ``(w_plus, w_minus)``. With ``literal=False`` the friction
    force retards the faster body and drags the slower one (equal and
    opposite); ``literal=True`` shifts both predictors the same way.
    """
    w_free = ((U_pred - U_now) - (V_pred - V_now)) / h_t
    if literal:
        d = dt2 / h_t * capacity * (inv_m_pipe - inv_m_soil)
        return w_free + d, w_free - d
    d = dt2 / h_t * capacity * (inv_m_pipe + inv_m_soil)
    return w_free - d, w_free + d


def classify(w_plus, w_minus):
    """Stick/slip decision from the two fictitious velocities.

    Same strict sign: slip, with k of the branch whose relative velocity
    is smaller in magnitude (the sign of motion on a tie). Different signs
    or a zero: stick (k = 0).
    """
    w_plus = np.asarray(w_plus, dtype=float)
    w_minus = np.asarray(w_minus, dtype=float)
    slip = w_plus * w_minus > 0
    ap, am = np.abs(w_plus), np.abs(w_minus)
    # a tie (zero capacity) follows the direction of motion
    k = np.where(ap < am, 1, np.where(ap > am, -1, np.sign(w_plus))).astype(np.int8)
    k = np.where(slip, k, 0).astype(np.int8)
    return slip, k


@dataclass
class ContactResolution:
    slip: np.ndarray     # bool per node
    k: np.ndarray        # +1 / -1 while slipping, 0 in stick
    force: np.ndarray    # force on the pipe node (N); the soil gets minus this
    U_next: np.ndarray
    V_next: np.ndarray
    w_plus: np.ndarray
    w_minus: np.ndarray


def resolve_contact(
    U_pred, V_pred, U_now, V_now, capacity, inv_m_pipe, inv_m_soil, dt2, h_t, literal=False
) -> ContactResolution:
    """Resolve all contact nodes of one time level independently.

    ``U_pred``/``V_pred`` are the frictionless predictors of the pipe node
    and the soil ring node; ``capacity`` is tau0 times the node's contact
    area. ``inv_m_soil`` is zero for an immobile medium.
    """
    U_pred, V_pred = np.asarray(U_pred, float), np.asarray(V_pred, float)
    w_plus, w_minus = fictitious_velocities(
        U_pred, V_pred, U_now, V_now, capacity, inv_m_pipe, inv_m_soil, dt2, h_t, literal
    )
    slip, k = classify(w_plus, w_minus)

    # stick: relative displacement increment vanishes
    free_inc = (U_pred - U_now) - (V_pred - V_now)
    compliance = dt2 * (inv_m_pipe + inv_m_soil)
    with np.errstate(divide="ignore", invalid="ignore"):
        f_stick = np.where(compliance > 0, -free_inc / compliance, 0.0)
    if literal:
        f_slip = k * capacity
        U_next = np.where(slip, U_pred + dt2 * f_slip * inv_m_pipe, U_pred + dt2 * f_stick * inv_m_pipe)
        V_next = np.where(slip, V_pred + dt2 * f_slip * inv_m_soil, V_pred - dt2 * f_stick * inv_m_soil)
        force = np.where(slip, f_slip, f_stick)
    else:
        force = np.where(slip, -k * capacity, f_stick)
        U_next = U_pred + dt2 * force * inv_m_pipe
        V_next = V_pred - dt2 * force * inv_m_soil
        over = ~slip & (np.abs(force) > capacity * (1.0 + STICK_TOL) + 1e-300)
        if np.any(over):
            raise SchemeInconsistencyError(
                f"stick force exceeds friction capacity at {np.flatnonzero(over).tolist()}"
            )
    return ContactResolution(slip, k, force, U_next, V_next, w_plus, w_minus)


# ---------------------------------------------------------------------------
# scenario and state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """One simulation: materials, load, grid and what to record.

    ``mesh=None`` builds an optimized mesh whose axial step is at most
    ``target_h_z``.
    """

    pipe: PipeSpec
    soil: SoilSpec
    load: LoadPulse
    t_end: float
    mesh: Mesh | None = None
    target_h_z: float = 0.1
    probes: tuple[float, ...] = (0.0,)
    snapshot_times: tuple[float, ...] = ()
    model: MediumModel = MediumModel.DEFORMABLE
    eval_time: float | None = None
    friction_sign_literal: bool = False
    check_complementarity: bool = True
    record_stride: int = 1
    energy_stride: int = 1

    def __post_init__(self):
        check_geometry(self.pipe, self.soil)
        if not self.t_end > 0:
            raise InvalidSpecError("t_end", "must be positive")
        for z in self.probes:
            if not 0 <= z <= self.pipe.L:
                raise InvalidSpecError("probes", f"probe z={z} outside [0, L]")
        for t in self.snapshot_times:
            if not 0 <= t <= self.t_end:
                raise InvalidSpecError("snapshot_times", f"t={t} outside [0, t_end]")
        if self.eval_time is not None and not 0 < self.eval_time <= self.t_end:
            raise InvalidSpecError("eval_time", "must lie in (0, t_end]")

    def build_mesh(self) -> Mesh:
        if self.mesh is not None:
            return self.mesh
        pd, sd = derive_pipe(self.pipe), derive_soil(self.soil)
        return optimized_mesh(
            self.target_h_z / pd.c, pd, sd, Geometry.of(self.pipe, self.soil, self.t_end)
        )

    def with_(self, **changes) -> Scenario:
        return replace(self, **changes)


@dataclass
class FieldState:
    """Two time levels of the discrete fields plus contact bookkeeping.

    Contact arrays are indexed by embedded node, i.e. pipe node
    ``j_surface + m``. ``V`` is None for the immobile-medium model.
    """

    U_prev: np.ndarray
    U: np.ndarray
    V_prev: np.ndarray | None
    V: np.ndarray | None
    tau: np.ndarray
    slip: np.ndarray
    k: np.ndarray
    ever_slipped: np.ndarray
    n: int = 0
    t: float = 0.0
    work: float = 0.0
    dissipated: float = 0.0
    Q: float = 0.0


@dataclass(frozen=True)
class EnergyLedger:
    kinetic_pipe: float
    kinetic_soil: float
    strain_pipe: float
    strain_soil: float
    work_input: float
    dissipated_friction: float

    @property
    def mechanical(self) -> float:
        return self.kinetic_pipe + self.kinetic_soil + self.strain_pipe + self.strain_soil

    @property
    def residual(self) -> float:
        return self.work_input - (self.mechanical + self.dissipated_friction)


class AxisymSolver:
    """Precomputed coefficients and the time-stepping kernel for one scenario."""

    def __init__(self, scenario: Scenario, mesh: Mesh | None = None):
        self.scenario = sc = scenario
        self.mesh = m = mesh or scenario.build_mesh()
        self.pd = pd = derive_pipe(sc.pipe)
        self.sd = sd = derive_soil(sc.soil)
        self.rigid = sc.model is MediumModel.RIGID
        self.literal = sc.friction_sign_literal

        report = check_stability(m, pd, sd)
        if not report[1].ok or (not self.rigid and not report[0].ok):
            raise StabilityError(
                "time step too large: "
                + ", ".join(f"{c.name} margin {c.margin:.6g}" for c in report.conditions)
            )

        h_z, h_r = m.h_z, m.h_r
        self.h_t = m.h_t

        # pipe: lumped masses, half cells at both ends
        wp = np.ones(m.n_z)
        wp[0] = wp[-1] = 0.5
        self.m_pipe = sc.pipe.rho * pd.S_t * h_z * wp
        self.k_pipe = sc.pipe.E * pd.S_t / h_z  # axial edge stiffness

        self.js = m.j_surface
        ne = m.n_embedded
        ws = np.ones(ne)
        ws[0] *= 0.5
        ws[-1] *= 0.5
        self.contact_length = h_z * ws
        self.capacity = sc.soil.tau0 * pd.P_t * self.contact_length
        self.inv_m_pipe_c = 1.0 / self.m_pipe[self.js:]

        if self.rigid:
            self.inv_m_soil_c = np.zeros(ne)
            return

        r = m.r
        self.r = r
        r_half = r[:-1] + 0.5 * h_r
        area = 2.0 * math.pi * r * h_r
        area[0] = math.pi * h_r * r_half[0]
        gamma = sc.soil.gamma
        self.m_soil = gamma * area[None, :] * self.contact_length[:, None]
        self.m_soil[:, -1] = np.inf  # clamped ring
        self.kz_soil = gamma * sd.a**2 * area / h_z                              # per z-edge, by column
        self.kr_soil = sc.soil.G * 2.0 * math.pi * r_half / h_r                  # per unit length, by r-edge
        self.kr_soil = self.kr_soil[None, :] * self.contact_length[:, None]
        self.inv_m_soil = 1.0 / self.m_soil
        self.inv_m_soil_c = self.inv_m_soil[:, 0].copy()

    # -- forces -------------------------------------------------------------

    def pipe_forces(self, U: np.ndarray) -> np.ndarray:
        flux = self.k_pipe * np.diff(U)
        F = np.zeros_like(U)
        F[:-1] += flux
        F[1:] -= flux
        return F

    def soil_forces(self, V: np.ndarray) -> np.ndarray:
        F = np.zeros_like(V)
        if V.shape[0] > 1:
            fz = self.kz_soil[None, :] * (V[1:] - V[:-1])
            F[:-1] += fz
            F[1:] -= fz
        fr = self.kr_soil * (V[:, 1:] - V[:, :-1])
        F[:, :-1] += fr
        F[:, 1:] -= fr
        return F

    # -- state --------------------------------------------------------------

    def initial_state(self) -> FieldState:
        m = self.mesh
        ne = m.n_embedded
        V = None if self.rigid else np.zeros((ne, m.n_r))
        return FieldState(
            U_prev=np.zeros(m.n_z),
            U=np.zeros(m.n_z),
            V_prev=None if V is None else V.copy(),
            V=V,
            tau=np.zeros(ne),
            slip=np.zeros(ne, bool),
            k=np.zeros(ne, np.int8),
            ever_slipped=np.zeros(ne, bool),
        )

    def advance(self, s: FieldState) -> FieldState:
        """One time level of the coupled scheme."""
        h_t = self.h_t
        first = s.n == 0
        # Taylor start from rest: u^1 = u^0 + h^2/2 a^0
        dt2 = 0.5 * h_t * h_t if first else h_t * h_t
        U_old = s.U if first else s.U_prev

        Q = load_value(self.scenario.load, s.t)
        FU = self.pipe_forces(s.U)
        FU[0] += Q
        U_pred = 2.0 * s.U - U_old + dt2 * FU / self.m_pipe

        js = self.js
        if self.rigid:
            V_next = None
            V_now_c = np.zeros_like(self.capacity)
            V_pred_c = V_now_c
        else:
            V_old = s.V if first else s.V_prev
            FV = self.soil_forces(s.V)
            V_next = 2.0 * s.V - V_old + dt2 * FV * self.inv_m_soil
            V_next[:, -1] = 0.0
            V_now_c = s.V[:, 0]
            V_pred_c = V_next[:, 0]

        res = resolve_contact(
            U_pred[js:], V_pred_c, s.U[js:], V_now_c, self.capacity,
            self.inv_m_pipe_c, self.inv_m_soil_c, dt2, h_t, self.literal,
        )
        U_next = U_pred
        U_next[js:] = res.U_next
        if V_next is not None:
            V_next[:, 0] = res.V_next

        rel_inc = (res.U_next - s.U[js:]) - (res.V_next - V_now_c)
        if self.scenario.check_complementarity and not self.literal:
            # round-off of the four displacements bounds the stick increment
            # and of the acceleration and contact terms that cancel in stick
            kick = dt2 * np.abs(res.force) * (self.inv_m_pipe_c + self.inv_m_soil_c)
            scale = (np.abs(U_pred[js:] - s.U[js:]) + np.abs(V_pred_c - V_now_c)) * 1e-9 + 8 * np.finfo(float).eps * (
                np.abs(res.U_next) + np.abs(s.U[js:]) + np.abs(U_old[js:])
                + np.abs(res.V_next) + np.abs(V_now_c) + kick
            )
            self._check_complementarity(res, rel_inc, scale)

        slip_mask = res.slip
        # friction work with leap-frog centred slip increments: the force of
        # level n acts on half of each neighbouring increment
        V_old_c = V_now_c if self.rigid else s.V_prev[:, 0]
        rel_inc_prev = 0.0 if first else (s.U[js:] - s.U_prev[js:]) - (V_now_c - V_old_c)
        dissipated = s.dissipated + 0.5 * float(np.sum(np.abs(res.force * (rel_inc + rel_inc_prev))))
        # leap-frog work: Q^n (u^{n+1} - u^{n-1}) / 2; zero on the symmetric first step
        work = s.work + (0.0 if first else Q * (U_next[0] - s.U_prev[0]) / 2.0)

        tau = res.force / (self.pd.P_t * self.contact_length)
        n = s.n + 1
        new = FieldState(
            U_prev=s.U,
            U=U_next,
            V_prev=s.V,
            V=V_next,
            tau=tau,
            slip=slip_mask,
            k=res.k,
            ever_slipped=s.ever_slipped | slip_mask,
            n=n,
            t=n * h_t,
            work=work,
            dissipated=dissipated,
            Q=Q,
        )
        if n % GUARD_EVERY == 0:
            self._guard(new)
        return new

    def _check_complementarity(self, res: ContactResolution, rel_inc, tol) -> None:
        tau0 = self.scenario.soil.tau0
        tau = res.force / (self.pd.P_t * self.contact_length)
        stick = ~res.slip
        bad = stick & (
            (np.abs(tau) > tau0 * (1.0 + STICK_TOL) + 1e-300)
            | (np.abs(rel_inc) > tol + 1e-300)
        )
        bad |= res.slip & (
            (np.abs(np.abs(tau) - tau0) > tau0 * 1e-9) | (res.k * rel_inc < 0)
        )
        if np.any(bad):
            raise SchemeInconsistencyError(
                f"complementarity violated at embedded nodes {np.flatnonzero(bad).tolist()}"
            )

    def _guard(self, s: FieldState) -> None:
        big = np.max(np.abs(s.U))
        if s.V is not None:
            big = max(big, np.max(np.abs(s.V)))
        if not np.isfinite(big) or big > DIVERGENCE_GUARD:
            raise DivergenceError(f"solution diverged at step {s.n} (t={s.t:.6g} s, max |u|={big:.3g})")

    # -- diagnostics ----------------------------------------------------------

    def energy_audit(self, s: FieldState) -> EnergyLedger:
        """Energy at the half level between ``s.U_prev`` and ``s.U``.

        Strain terms use the staggered product u^{n+1} K u^n, which is the
        quantity the leap-frog scheme conserves.
        """
        h_t = self.h_t
        dU = (s.U - s.U_prev) / h_t
        kin_p = 0.5 * float(np.sum(self.m_pipe * dU * dU))
        str_p = 0.5 * self.k_pipe * float(np.sum(np.diff(s.U) * np.diff(s.U_prev)))
        kin_s = str_s = 0.0
        if s.V is not None:
            dV = (s.V[:, :-1] - s.V_prev[:, :-1]) / h_t
            kin_s = 0.5 * float(np.sum(self.m_soil[:, :-1] * dV * dV))
            if s.V.shape[0] > 1:
                str_s += 0.5 * float(np.sum(self.kz_soil[None, :] * np.diff(s.V, axis=0) * np.diff(s.V_prev, axis=0)))
            str_s += 0.5 * float(np.sum(self.kr_soil * np.diff(s.V, axis=1) * np.diff(s.V_prev, axis=1)))
        return EnergyLedger(kin_p, kin_s, str_p, str_s, s.work, s.dissipated)

    def shear_stress(self, s: FieldState, j: int) -> float:
        """Contact shear stress on the pipe at node j (Pa); zero off the embedded stretch."""
        if j < self.js:
            return 0.0
        return float(s.tau[j - self.js])

    def accumulated_slip(self, s: FieldState) -> np.ndarray:
        V0 = 0.0 if s.V is None else s.V[:, 0]
        return s.U[self.js:] - V0


def advance(state: FieldState, solver: AxisymSolver) -> FieldState:
    return solver.advance(state)


def energy_audit(state: FieldState, solver: AxisymSolver) -> EnergyLedger:
    return solver.energy_audit(state)


def shear_stress(state: FieldState, solver: AxisymSolver, j: int) -> float:
    return solver.shear_stress(state, j)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

@dataclass
class RunMetrics:
    U_res: float         # head displacement at eval_time
    U_av: float          # (max_z U + min_z U) / 2 at eval_time
    slip_res: float      # contact-length-weighted mean accumulated slip at eval_time
    slip_flag: bool
    degenerate: bool     # tau0 == 0: no restoring friction


@dataclass
class RunResult:
    scenario: Scenario
    mesh: Mesh
    t: np.ndarray
    probe_z: np.ndarray
    U: np.ndarray                       # (n_samples, n_probes)
    z_contact: np.ndarray
    profiles: dict[float, np.ndarray]  # snapshot time -> tau over z_contact
    energy_t: np.ndarray
    energy: dict[str, np.ndarray]
    metrics: RunMetrics
    final: FieldState
    eval_field: np.ndarray = field(repr=False, default=None)


def run(scenario: Scenario, mesh: Mesh | None = None, callback=None) -> RunResult:
    """Advance a scenario to t_end and collect oscillograms, profiles and energy.

    ``callback(solver, state)`` is invoked after every step when given.
    """
    solver = AxisymSolver(scenario, mesh)
    m = solver.mesh
    h_t = m.h_t
    n_end = math.ceil(scenario.t_end / h_t - 1e-9)
    eval_time = scenario.eval_time if scenario.eval_time is not None else scenario.t_end
    n_eval = min(n_end, int(round(eval_time / h_t)))
    probe_idx = np.array([int(round(z / m.h_z)) for z in scenario.probes])
    snap_steps = {int(round(t / h_t)): t for t in scenario.snapshot_times}

    state = solver.initial_state()
    ts, us = [0.0], [state.U[probe_idx].copy()]
    et, energy_rows = [], []
    profiles: dict[float, np.ndarray] = {}
    if 0 in snap_steps:
        profiles[snap_steps[0]] = state.tau.copy()
    eval_field = state.U.copy()
    metrics_at_eval = None

    for n in range(1, n_end + 1):
        state = solver.advance(state)
        if n % scenario.record_stride == 0 or n == n_end:
            ts.append(state.t)
            us.append(state.U[probe_idx].copy())
        if n % scenario.energy_stride == 0 or n == n_end:
            led = solver.energy_audit(state)
            et.append(state.t - 0.5 * h_t)
            energy_rows.append((led.work_input, led.kinetic_pipe + led.kinetic_soil,
                                led.strain_pipe + led.strain_soil, led.dissipated_friction, led.residual))
        if n in snap_steps:
            profiles[snap_steps[n]] = state.tau.copy()
        if n == n_eval:
            eval_field = state.U.copy()
            metrics_at_eval = _metrics(solver, state)
        if callback is not None:
            callback(solver, state)

    if metrics_at_eval is None:
        metrics_at_eval = _metrics(solver, state)
    energy = np.array(energy_rows).reshape(-1, 5)
    return RunResult(
        scenario=scenario,
        mesh=m,
        t=np.array(ts),
        probe_z=probe_idx * m.h_z,
        U=np.array(us),
        z_contact=m.z[solver.js:],
        profiles=profiles,
        energy_t=np.array(et),
        energy={
            "work": energy[:, 0],
            "kinetic": energy[:, 1],
            "strain": energy[:, 2],
            "dissipated": energy[:, 3],
            "residual": energy[:, 4],
        },
        metrics=metrics_at_eval,
        final=state,
        eval_field=eval_field,
    )


def _metrics(solver: AxisymSolver, s: FieldState) -> RunMetrics:
    slip = solver.accumulated_slip(s)
    w = solver.contact_length
    degenerate = solver.scenario.soil.tau0 == 0
    if degenerate:
        logger.warning("tau0 = 0: no friction, the pipe is free to drift")
    return RunMetrics(
        U_res=float(s.U[0]),
        U_av=0.5 * float(np.max(s.U) + np.min(s.U)),
        slip_res=float(np.sum(slip * w) / np.sum(w)),
        slip_flag=bool(np.any(s.ever_slipped)),
        degenerate=degenerate,
    )


def run_rigid_medium(scenario: Scenario, mesh: Mesh | None = None, callback=None) -> RunResult:
    """Same scenario against an immobile medium (pipe-only model)."""
    return run(scenario.with_(model=MediumModel.RIGID), mesh, callback)
