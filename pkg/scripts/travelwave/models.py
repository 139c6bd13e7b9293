"""
Data models for the travelwave toolkit.

Inputs (model constants and solver options) are frozen pydantic models so they
validate once at the edge; results are plain dataclasses.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


# ============================================================================
# INPUT MODELS
# ============================================================================

class Params(BaseModel):
    """The six model constants of the predator-prey system."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    d1: float = Field(..., gt=0, description="Prey diffusion coefficient (per unit time)")
    d2: float = Field(..., gt=0, description="Predator diffusion coefficient (per unit time)")
    m: float = Field(..., ge=0, description="Predation quality constant; 0 is the no-predation limit")
    a: float = Field(..., gt=0, description="Predator saturation rate")
    s: float = Field(..., gt=0, description="Predator growth rate (per unit time)")
    b: float = Field(..., gt=0, lt=1, description="Allee threshold")


class SolverOptions(BaseModel):
    """Grid and iteration controls for the profile solver."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    L: float = Field(70.0, gt=0, description="Half-width of the wave-coordinate domain")
    h: float = Field(0.1, gt=0, description="Grid spacing")
    max_iter: int = Field(20000, gt=0, description="Iteration budget")
    fix_tol: float = Field(1e-10, gt=0, description="Successive-iterate tolerance (max norm)")
    boundary_tol: float = Field(1e-3, gt=0, description="Allowed distance from the limit states at the ends")
    relaxation: float = Field(1.0, gt=0, le=1, description="Damping factor for the Picard update")
    auto_grid: bool = Field(True, description="Enlarge L / refine h to meet the grid invariants")
    convolution: Literal["direct", "fft", "auto"] = Field("direct", description="Nonlocal operator evaluation")


class ContinuationOptions(BaseModel):
    """Controls for reaching c = c* through a decreasing speed sequence."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    factor: float = Field(0.5, gt=0, description="c_n = c*(1 + factor * 2^-n)")
    delta: Optional[float] = Field(None, gt=0, description="Normalization level psi(0) = delta")
    max_steps: int = Field(10, ge=2, description="Number of continuation speeds")
    cauchy_tol: float = Field(5e-3, gt=0, description="Normalized max-norm gap that ends the continuation")


class Domain(BaseModel):
    """Spatial grid for time-domain runs: x in [-half_width, half_width]."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    half_width: float = Field(150.0, gt=0)
    h: float = Field(0.2, gt=0)

    def grid(self) -> np.ndarray:
        n = int(round(2 * self.half_width / self.h)) + 1
        return np.linspace(-self.half_width, self.half_width, n)


class SimOptions(BaseModel):
    """Time-stepping controls for `evolve`."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dt: float = Field(0.1, gt=0)
    T: float = Field(60.0, gt=0, description="Time horizon")
    theta: Optional[float] = Field(None, gt=0, description="Front level; defaults to u2*/2")
    extension: Literal["clamp", "periodic"] = "clamp"
    stepper: Literal["euler", "rk4"] = "rk4"
    record_interval: float = Field(1.0, gt=0, description="Time between front samples")
    u_floor: float = Field(1e-8, gt=0)
    probe_speeds: Tuple[float, ...] = Field((), description="Rays x = c t along which v is recorded")
    progress: bool = False


class LogisticOptions(BaseModel):
    """Initial bump and reporting grid for the logistic comparison run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    zeta: float = Field(0.1, gt=0, description="Bump plateau is zeta/4")
    eps1: float = Field(2.0, gt=0, description="Bump support half-width")
    speed_fractions: Tuple[float, ...] = Field((0.3, 0.6, 0.9))
    capacity: Optional[float] = Field(None, gt=0, description="Defaults to (1+b)/2")

    @model_validator(mode="after")
    def _fractions_in_range(self):
        if not self.speed_fractions or any(not (0 < f < 1) for f in self.speed_fractions):
            raise ValueError("speed_fractions must be non-empty and inside (0, 1)")
        return self


# ============================================================================
# RESULTS: model
# ============================================================================

class Classification(str, Enum):
    TWO_POSITIVE = "TwoPositive"
    ONE_POSITIVE = "OnePositive"
    NONE_POSITIVE = "NonePositive"


@dataclass(frozen=True)
class EquilibriaReport:
    """Kinetic equilibria of the predator-prey system."""
    b1: float
    classification: Classification
    u_star: Optional[float] = None
    u1_star: Optional[float] = None
    u2_star: Optional[float] = None


@dataclass(frozen=True)
class AdmissibilityRecord:
    """The three strong-Allee bounds on m and the verdict."""
    term1: float
    term2: float
    term3: float
    min_term: float
    admissible: bool
    violated: List[str] = field(default_factory=list)


# ============================================================================
# RESULTS: dispersion
# ============================================================================

@dataclass(frozen=True)
class DispersionReport:
    """Minimal speed, tangency rate and, for a queried speed, the decay rates."""
    c_star: float
    lambda_star: float
    c: Optional[float] = None
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    eta: Optional[float] = None
    sign_pattern_ok: Optional[bool] = None


# ============================================================================
# RESULTS: bounds
# ============================================================================

@dataclass(frozen=True)
class SupersubPair:
    """Piecewise upper/lower solutions; each function has one breakpoint."""
    c: float
    b: float
    eta: float
    lambda1: float
    lambda2: float
    epsilon: float
    r: float
    xi1: float

    @property
    def exception_set(self) -> Tuple[float, float]:
        return (0.0, self.xi1)

    def phi_upper(self, xi):
        return np.ones_like(np.asarray(xi, dtype=float))

    def phi_lower(self, xi):
        xi = np.asarray(xi, dtype=float)
        k = 0.5 * (1.0 - self.b)
        z = np.minimum(xi, 0.0)
        return np.where(xi > 0, 0.5 * (1.0 + self.b), 1.0 - k * np.exp(self.eta * z))

    def psi_upper(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(self.lambda1 * np.minimum(xi, 0.0))

    def psi_lower(self, xi):
        xi = np.asarray(xi, dtype=float)
        z = np.minimum(xi, self.xi1)
        inner = np.exp(self.lambda1 * z) * (1.0 - self.r * np.exp(self.epsilon * z))
        return np.where(xi <= self.xi1, np.maximum(inner, 0.0), 0.0)

    def dphi_upper(self, xi):
        return np.zeros_like(np.asarray(xi, dtype=float))

    def dphi_lower(self, xi):
        xi = np.asarray(xi, dtype=float)
        k = 0.5 * (1.0 - self.b)
        z = np.minimum(xi, 0.0)
        return np.where(xi > 0, 0.0, -k * self.eta * np.exp(self.eta * z))

    def dpsi_upper(self, xi):
        xi = np.asarray(xi, dtype=float)
        z = np.minimum(xi, 0.0)
        return np.where(xi > 0, 0.0, self.lambda1 * np.exp(self.lambda1 * z))

    def dpsi_lower(self, xi):
        xi = np.asarray(xi, dtype=float)
        z = np.minimum(xi, self.xi1)
        rate = self.lambda1 + self.epsilon
        slope = self.lambda1 * np.exp(self.lambda1 * z) - self.r * rate * np.exp(rate * z)
        return np.where(xi <= self.xi1, slope, 0.0)


@dataclass
class SupersubResidualReport:
    """Signed residuals of the four differential inequalities on a grid."""
    xi: np.ndarray
    residuals: Dict[str, np.ndarray]
    extremes: Dict[str, float]
    tolerances: Dict[str, float]
    passed: Dict[str, bool]

    @property
    def all_passed(self) -> bool:
        return all(self.passed.values())


# ============================================================================
# RESULTS: squeeze
# ============================================================================

@dataclass
class SqueezeTrace:
    """The adjacent sequence and its diagnostics."""
    gammas: List[float]
    rho: float
    u2_star: float
    n_converged: Optional[int]
    n_steps: int
    max_step_ratio: float
    # observed step ratio above rho
    rate_exceeded: bool = False

    @property
    def limit(self) -> float:
        return self.gammas[-1]


# ============================================================================
# RESULTS: profile
# ============================================================================

@dataclass
class WaveProfile:
    """Sampled wave profile on a uniform grid."""
    c: float
    xi: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    residual: float
    iterations: int
    beta: float
    lambda1: float
    fixed_point_gap: float = 0.0
    projection_gap: float = 0.0
    history: List[float] = field(default_factory=list)

    @property
    def h(self) -> float:
        return float(self.xi[1] - self.xi[0])


@dataclass(frozen=True)
class QuasiMonotoneAudit:
    """Outcome of randomized dominance checks on the profile operator."""
    n_pairs: int
    violations: int
    worst: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass
class ContinuationResult:
    """Profiles along c_n decreasing to c*, normalized to psi(0) = delta."""
    profile: WaveProfile
    speeds: List[float]
    gaps: List[float]
    delta: float
    converged: bool


# ============================================================================
# RESULTS: evolve
# ============================================================================

@dataclass
class SimState:
    """Time-domain fields and front history."""
    t: float
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    front_history: List[Tuple[float, float]] = field(default_factory=list)
    probe_history: Dict[float, List[Tuple[float, float]]] = field(default_factory=dict)
    # negative predator values reset to 0, summed over all steps
    v_clips: int = 0


@dataclass(frozen=True)
class SpeedEstimate:
    """Least-squares front speed with a 95% half-width."""
    speed: float
    half_width: float
    n_samples: int


@dataclass
class InvasionResult:
    state: SimState
    speed: SpeedEstimate
    c_star: float
    theta: float

    @property
    def ratio(self) -> float:
        return self.speed.speed / self.c_star


@dataclass
class LogisticReport:
    """inf over |x| < c t of the comparison solution, per time and speed."""
    times: np.ndarray
    speeds: np.ndarray
    floors: np.ndarray
    capacity: float
    c_star: float
    x: np.ndarray
    final: np.ndarray

    @property
    def final_floors(self) -> np.ndarray:
        return self.floors[-1]
