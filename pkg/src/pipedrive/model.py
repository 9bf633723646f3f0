"""Parameter sets, derived constants, meshes and the impact load.

All quantities are SI (m, s, Pa, N, kg/m3). Conversions from the mixed
units used in configuration files happen in :mod:`pipedrive.units`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InconsistentSoilError, InvalidSpecError, MeshError


@dataclass(frozen=True)
class PipeSpec:
    """Elastic tubular pipe.

    E, rho : Young's modulus and density.
    h, R   : wall thickness and outer radius.
    L, L1  : total and embedded length.
    """

    E: float
    rho: float
    h: float
    R: float
    L: float
    L1: float

    def __post_init__(self):
        if not self.E > 0:
            raise InvalidSpecError("E", "Young's modulus must be positive")
        if not self.rho > 0:
            raise InvalidSpecError("rho", "density must be positive")
        if not self.R > 0:
            raise InvalidSpecError("R", "radius must be positive")
        if not 0 < self.h < self.R:
            raise InvalidSpecError("h", "wall thickness must satisfy 0 < h < R")
        if not self.L > 0:
            raise InvalidSpecError("L", "length must be positive")
        if not 0 < self.L1 <= self.L:
            raise InvalidSpecError("L1", "embedded length must satisfy 0 < L1 <= L")


@dataclass(frozen=True)
class PipeDerived:
    c: float    # bar wave speed
    S_t: float  # wall cross-section
    P_t: float  # outer perimeter


def derive_pipe(spec: PipeSpec) -> PipeDerived:
    return PipeDerived(
        c=math.sqrt(spec.E / spec.rho),
        S_t=math.pi * spec.h * (2.0 * spec.R - spec.h),
        P_t=2.0 * math.pi * spec.R,
    )


@dataclass(frozen=True)
class SoilSpec:
    """Surrounding medium in the single-displacement model.

    Build from moduli (``SoilSpec(G, gamma, lam, R2, tau0)``) or from wave
    speeds with :meth:`from_speeds`.
    """

    G: float
    gamma: float
    lam: float
    R2: float
    tau0: float

    def __post_init__(self):
        if not self.G > 0:
            raise InvalidSpecError("G", "shear modulus must be positive")
        if not self.gamma > 0:
            raise InvalidSpecError("gamma", "density must be positive")
        if not self.lam >= 0:
            raise InvalidSpecError("lambda", "Lame coefficient must be non-negative")
        if not self.R2 > 0:
            raise InvalidSpecError("R2", "exterior radius must be positive")
        if not self.tau0 >= 0:
            raise InvalidSpecError("tau0", "ultimate shear stress must be non-negative")

    @classmethod
    def from_speeds(cls, a: float, b: float, gamma: float, R2: float, tau0: float) -> SoilSpec:
        if not (a > 0 and b > 0):
            raise InvalidSpecError("a" if not a > 0 else "b", "wave speeds must be positive")
        if not a > b:
            raise InconsistentSoilError("a", f"axial speed a={a} must exceed shear speed b={b}")
        G = gamma * b * b
        return cls(G=G, gamma=gamma, lam=gamma * a * a - 2.0 * G, R2=R2, tau0=tau0)

    def with_tau0(self, tau0: float) -> SoilSpec:
        return SoilSpec(self.G, self.gamma, self.lam, self.R2, tau0)


@dataclass(frozen=True)
class SoilDerived:
    a: float  # axial (compressional) speed
    b: float  # shear speed


def derive_soil(spec: SoilSpec) -> SoilDerived:
    a = math.sqrt((spec.lam + 2.0 * spec.G) / spec.gamma)
    b = math.sqrt(spec.G / spec.gamma)
    if not a > b:
        raise InconsistentSoilError("lambda", f"a={a} must exceed b={b}")
    return SoilDerived(a=a, b=b)


def check_geometry(pipe: PipeSpec, soil: SoilSpec) -> None:
    if not soil.R2 > pipe.R:
        raise InvalidSpecError("R2", f"exterior radius {soil.R2} must exceed pipe radius {pipe.R}")


class LoadKind(enum.Enum):
    STEP = "step"
    HALF_SINE = "half-sine"


@dataclass(frozen=True)
class LoadPulse:
    """Axial force applied to the pipe head.

    A step holds ``P0`` for all t >= 0; a half-sine is
    ``P0 sin(pi t / t0)`` on [0, t0) and zero afterwards.
    """

    kind: LoadKind
    P0: float
    t0: float | None = None

    def __post_init__(self):
        if not self.P0 >= 0:
            raise InvalidSpecError("P0", "amplitude must be non-negative")
        if self.kind is LoadKind.HALF_SINE and not (self.t0 is not None and self.t0 > 0):
            raise InvalidSpecError("t0", "half-sine pulse needs a positive duration")

    @classmethod
    def step(cls, P0: float) -> LoadPulse:
        return cls(LoadKind.STEP, P0)

    @classmethod
    def half_sine(cls, P0: float, t0: float) -> LoadPulse:
        return cls(LoadKind.HALF_SINE, P0, t0)

    @property
    def omega_star(self) -> float | None:
        if self.kind is LoadKind.STEP:
            return None
        return math.pi / self.t0

    @property
    def impulse(self) -> float:
        """Total impulse; infinite for a step."""
        if self.kind is LoadKind.STEP:
            return math.inf
        return 2.0 * self.P0 * self.t0 / math.pi

    def scaled(self, factor: float) -> LoadPulse:
        return LoadPulse(self.kind, self.P0 * factor, self.t0)


def load_value(load: LoadPulse, t: float) -> float:
    if t < 0:
        return 0.0
    if load.kind is LoadKind.STEP:
        return load.P0
    if t >= load.t0:
        return 0.0
    return load.P0 * math.sin(math.pi * t / load.t0)


@dataclass(frozen=True)
class Mesh:
    """Space-time grid of the coupled problem.

    Nodes run over z in [0, L] and r in [R, R2]; ``R2`` here is the exterior
    radius actually meshed, which may differ from the requested one by less
    than half a radial step (see :func:`optimized_mesh`).
    """

    h_t: float
    h_z: float
    h_r: float
    n_z: int
    n_r: int
    n_t: int
    R: float
    R2: float
    L: float
    L1: float

    def __post_init__(self):
        for name in ("h_t", "h_z", "h_r"):
            if not getattr(self, name) > 0:
                raise MeshError(f"{name} must be positive")
        if self.n_z < 2 or self.n_r < 2:
            raise MeshError("need at least two nodes along z and r")

    @property
    def z(self) -> np.ndarray:
        return self.h_z * np.arange(self.n_z)

    @property
    def r(self) -> np.ndarray:
        return self.R + self.h_r * np.arange(self.n_r)

    @property
    def j_surface(self) -> int:
        """Index of the node at the soil surface z = L - L1."""
        return self.n_z - 1 - int(round(self.L1 / self.h_z))

    @property
    def n_embedded(self) -> int:
        return self.n_z - self.j_surface


@dataclass(frozen=True)
class Geometry:
    L: float
    L1: float
    R: float
    R2: float
    t_end: float

    @classmethod
    def of(cls, pipe: PipeSpec, soil: SoilSpec, t_end: float) -> Geometry:
        return cls(pipe.L, pipe.L1, pipe.R, soil.R2, t_end)


def _axial_cells(L: float, L1: float, h_max: float) -> int:
    """Smallest cell count N with L/N <= h_max and L1 landing on a node."""
    ratio = Fraction(L1 / L).limit_denominator(10**6)
    q = ratio.denominator
    n = max(1, math.ceil(L / h_max - 1e-9))
    return q * math.ceil(n / q)


def optimized_mesh(h_t: float, pipe: PipeDerived, soil: SoilDerived, geometry: Geometry) -> Mesh:
    """Mesh with h_z = c h_t and h_r = h_t c b / sqrt(c^2 - a^2).

    h_t is shrunk so that L and L1 are whole numbers of axial cells; the
    radial step then follows from the optimality relation, and the outer
    radius is snapped to the nearest whole number of radial cells. Both
    step relations hold exactly; only R2 moves.
    """
    c, a, b = pipe.c, soil.a, soil.b
    if not c > a:
        raise MeshError(f"pipe speed c={c} must exceed soil speed a={a} for the radial step to exist")
    if not h_t > 0:
        raise MeshError("h_t must be positive")
    n_cells = _axial_cells(geometry.L, geometry.L1, c * h_t)
    h_z = geometry.L / n_cells
    h_t = h_z / c
    h_r = h_t * c * b / math.sqrt(c * c - a * a)
    n_rc = max(1, round((geometry.R2 - geometry.R) / h_r))
    return Mesh(
        h_t=h_t,
        h_z=h_z,
        h_r=h_r,
        n_z=n_cells + 1,
        n_r=n_rc + 1,
        n_t=math.ceil(geometry.t_end / h_t - 1e-9) + 1,
        R=geometry.R,
        R2=geometry.R + n_rc * h_r,
        L=geometry.L,
        L1=geometry.L1,
    )


@dataclass(frozen=True)
class StabilityCondition:
    name: str
    bound: float   # largest admissible h_t
    margin: float  # h_t / bound

    @property
    def ok(self) -> bool:
        # a few ulp of slack: optimized meshes sit exactly on the bound
        return self.margin <= 1.0 + 1e-12


@dataclass(frozen=True)
class StabilityReport:
    conditions: tuple[StabilityCondition, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.conditions)

    def __getitem__(self, i: int) -> StabilityCondition:
        return self.conditions[i]


def check_stability(mesh: Mesh, pipe: PipeDerived, soil: SoilDerived) -> StabilityReport:
    soil_bound = (soil.a**2 / mesh.h_z**2 + soil.b**2 / mesh.h_r**2) ** -0.5
    pipe_bound = mesh.h_z / pipe.c
    return StabilityReport((
        StabilityCondition("soil", soil_bound, mesh.h_t / soil_bound),
        StabilityCondition("pipe", pipe_bound, mesh.h_t / pipe_bound),
    ))
