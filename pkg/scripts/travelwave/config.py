"""
Run configuration: one TOML or JSON file whose sections mirror the option models.

    [params]
    d1 = 1.0
    ...
    [kernel2]
    shape = "gaussian"
    sigma = 1.0

Environment defaults:
    TRAVELWAVE_OUTPUT_DIR  output directory when neither the file nor --out sets one
    TRAVELWAVE_THREADS     worker count for sweeps
"""

import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Annotated, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError
from .kernel import GaussianKernel, Kernel, LaplaceKernel, MomentDefinedKernel, TabulatedKernel, UniformKernel
from .models import ContinuationOptions, Domain, LogisticOptions, Params, SimOptions, SolverOptions

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = "travelwave_out"


# ============================================================================
# KERNEL SPECS
# ============================================================================

class _KernelSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class GaussianSpec(_KernelSpec):
    shape: Literal["gaussian"] = "gaussian"
    sigma: float = Field(1.0, gt=0, description="Standard deviation")

    def build(self) -> Kernel:
        return GaussianKernel(self.sigma)


class LaplaceSpec(_KernelSpec):
    shape: Literal["laplace"] = "laplace"
    alpha: float = Field(..., gt=0, description="Decay rate; moments exist for |lambda| < alpha")

    def build(self) -> Kernel:
        return LaplaceKernel(self.alpha)


class UniformSpec(_KernelSpec):
    shape: Literal["uniform"] = "uniform"
    radius: float = Field(..., gt=0, description="Support half-width")

    def build(self) -> Kernel:
        return UniformKernel(self.radius)


class TabulatedSpec(_KernelSpec):
    shape: Literal["tabulated"] = "tabulated"
    path: Path = Field(..., description="CSV of (offset, density) pairs on a symmetric grid")

    def build(self) -> Kernel:
        return TabulatedKernel.from_csv(self.path)


class MomentDefinedSpec(_KernelSpec):
    shape: Literal["moment_defined"] = "moment_defined"
    coefficients: List[float] = Field(..., min_length=1, description="c_k in M(lam) = 1 + sum c_k lam^(2k)")
    lambda0: float = Field(math.inf, gt=0)

    def build(self) -> Kernel:
        return MomentDefinedKernel.from_coefficients(self.coefficients, self.lambda0)


KernelSpec = Annotated[
    Union[GaussianSpec, LaplaceSpec, UniformSpec, TabulatedSpec, MomentDefinedSpec],
    Field(discriminator="shape"),
]


# ============================================================================
# RUN CONFIG
# ============================================================================

class SweepSpec(BaseModel):
    """Parameter axes for `sweep`; the grid is their Cartesian product."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    axes: Dict[str, List[float]] = Field(default_factory=dict, description="Params field -> values")
    solve_wave: bool = Field(False, description="Also solve a profile at wave_factor * c* per point")
    wave_factor: float = Field(1.2, gt=1)

    @field_validator("axes")
    @classmethod
    def _known_axes(cls, axes):
        unknown = sorted(set(axes) - set(Params.model_fields))
        if unknown:
            raise ValueError(f"unknown sweep axes {unknown}; expected names from {sorted(Params.model_fields)}")
        return axes


class RunConfig(BaseModel):
    """Everything one CLI invocation needs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    params: Params
    kernel1: KernelSpec = Field(default_factory=GaussianSpec)
    kernel2: KernelSpec = Field(default_factory=GaussianSpec)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    continuation: ContinuationOptions = Field(default_factory=ContinuationOptions)
    sim: SimOptions = Field(default_factory=SimOptions)
    domain: Domain = Field(default_factory=Domain)
    logistic: LogisticOptions = Field(default_factory=LogisticOptions)
    speeds: List[float] = Field(default_factory=list, description="Absolute speeds to analyze")
    speed_factors: List[float] = Field(default_factory=lambda: [1.2], description="Speeds as multiples of c*")
    sweep: SweepSpec = Field(default_factory=SweepSpec)
    output_dir: Optional[Path] = None
    seed: int = 0

    def kernels(self):
        """(prey kernel, predator kernel)."""
        return self.kernel1.build(), self.kernel2.build()

    def resolved_output_dir(self, override: Optional[str] = None) -> Path:
        if override:
            return Path(override)
        if self.output_dir is not None:
            return self.output_dir
        return default_output_dir()


def default_output_dir() -> Path:
    return Path(os.getenv("TRAVELWAVE_OUTPUT_DIR", DEFAULT_OUTPUT_DIR))


def default_threads() -> int:
    """Sweep pool size from TRAVELWAVE_THREADS, else the CPU count."""
    value = os.getenv("TRAVELWAVE_THREADS")
    if value is None:
        return os.cpu_count() or 1
    try:
        threads = int(value)
    except ValueError as e:
        raise ConfigError(f"TRAVELWAVE_THREADS must be an integer, got {value!r}") from e
    if threads < 1:
        raise ConfigError("TRAVELWAVE_THREADS must be at least 1")
    return threads


def _anchor_paths(raw: dict, base: Path) -> dict:
    for key in ("kernel1", "kernel2"):
        spec = raw.get(key)
        if isinstance(spec, dict) and spec.get("shape") == "tabulated" and "path" in spec:
            path = Path(spec["path"])
            if not path.is_absolute():
                raw[key] = {**spec, "path": str(base / path)}
    return raw


def parse_config(raw: dict, base: Optional[Path] = None) -> RunConfig:
    """
    Validate a decoded mapping.

    Raises:
        ConfigError: with pydantic's diagnostics
    """
    if base is not None:
        raw = _anchor_paths(dict(raw), base)
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration:\n{e}") from e


def load_config(path) -> RunConfig:
    """
    Load a `.toml` or `.json` run configuration.

    Relative kernel table paths are taken relative to the config file.

    Raises:
        ConfigError: for a missing file, unknown suffix, parse error or invalid values
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")

    suffix = path.suffix.lower()
    try:
        if suffix == ".toml":
            with open(path, "rb") as f:
                raw = tomllib.load(f)
        elif suffix == ".json":
            with open(path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        else:
            raise ConfigError(f"Unsupported config format {suffix!r}; use .toml or .json")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot parse {path}: {e}") from e

    if not isinstance(raw, dict):
        raise ConfigError(f"{path} must contain a table/object at the top level")
    config = parse_config(raw, base=path.parent)
    logger.debug(f"Loaded configuration from {path}")
    return config
