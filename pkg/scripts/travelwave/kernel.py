"""
Dispersal kernels, exponential moments and the discrete nonlocal operator.

A kernel is a symmetric unit-mass density J with exponential moments
M(lam) = int J(y) e^{lam y} dy finite for |lam| < lambda0. Kernels are
discretized into cell masses on a uniform stencil; `nonlocal_op` applies
N[w] = J*w - w to a sampled field.
"""

import csv
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy import integrate, signal, special

from .errors import DivergentMomentError, KernelError, PreconditionError, UnsupportedKernelError

logger = logging.getLogger(__name__)

TAIL_MASS = 1e-12
SLOPE_STEP = 1e-5
FFT_MIN_STENCIL = 65


class Kernel(ABC):
    """Base class for symmetric unit-mass dispersal kernels."""

    name = "kernel"

    @property
    @abstractmethod
    def lambda0(self) -> float:
        """Supremum of admissible decay rates (may be inf)."""

    @abstractmethod
    def _moment(self, lam: np.ndarray) -> np.ndarray:
        """Moment for |lam| < lambda0, elementwise."""

    @abstractmethod
    def describe(self) -> Dict:
        """JSON-ready description."""

    def density(self, x):
        raise UnsupportedKernelError(f"{self.name} kernel has no pointwise density")

    def sf(self, x):
        """Upper tail mass int_x^inf J."""
        raise UnsupportedKernelError(f"{self.name} kernel has no distribution function")

    def default_radius(self) -> float:
        raise UnsupportedKernelError(f"{self.name} kernel cannot be truncated")

    def moment(self, lam):
        """
        Exponential moment M(lam).

        Raises:
            DivergentMomentError: if |lam| >= lambda0
        """
        lam_arr = np.asarray(lam, dtype=float)
        if np.any(np.abs(lam_arr) >= self.lambda0):
            raise DivergentMomentError(
                f"moment of {self.name} kernel diverges at |lambda| >= {self.lambda0}"
            )
        value = np.asarray(self._moment(np.abs(lam_arr)), dtype=float)
        return float(value) if value.ndim == 0 else value

    def moment_slope(self, lam):
        """dM/dlam; central difference unless a subclass knows better."""
        lam = np.asarray(lam, dtype=float)
        step = SLOPE_STEP * np.maximum(1.0, np.abs(lam))
        value = (np.asarray(self.moment(lam + step)) - np.asarray(self.moment(lam - step))) / (2.0 * step)
        return float(value) if np.ndim(value) == 0 else value


class GaussianKernel(Kernel):
    name = "gaussian"

    def __init__(self, sigma: float):
        if sigma <= 0:
            raise KernelError("Gaussian sigma must be positive")
        self.sigma = float(sigma)

    @property
    def lambda0(self) -> float:
        return math.inf

    def _moment(self, lam):
        return np.exp(0.5 * (self.sigma * lam) ** 2)

    def moment_slope(self, lam):
        lam = np.asarray(lam, dtype=float)
        value = self.sigma ** 2 * lam * np.exp(0.5 * (self.sigma * lam) ** 2)
        return float(value) if value.ndim == 0 else value

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (x / self.sigma) ** 2) / (self.sigma * math.sqrt(2.0 * math.pi))

    def sf(self, x):
        return special.ndtr(-np.asarray(x, dtype=float) / self.sigma)

    def default_radius(self) -> float:
        return 8.0 * self.sigma

    def describe(self) -> Dict:
        return {"shape": self.name, "sigma": self.sigma}


class LaplaceKernel(Kernel):
    name = "laplace"

    def __init__(self, alpha: float):
        if alpha <= 0:
            raise KernelError("Laplace alpha must be positive")
        self.alpha = float(alpha)

    @property
    def lambda0(self) -> float:
        return self.alpha

    def _moment(self, lam):
        return self.alpha ** 2 / (self.alpha ** 2 - lam ** 2)

    def moment_slope(self, lam):
        lam = np.asarray(lam, dtype=float)
        if np.any(np.abs(lam) >= self.alpha):
            raise DivergentMomentError(f"moment of laplace kernel diverges at |lambda| >= {self.alpha}")
        value = 2.0 * self.alpha ** 2 * lam / (self.alpha ** 2 - lam ** 2) ** 2
        return float(value) if value.ndim == 0 else value

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.alpha * np.exp(-self.alpha * np.abs(x))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, 0.5 * np.exp(-self.alpha * np.abs(x)), 1.0 - 0.5 * np.exp(-self.alpha * np.abs(x)))

    def default_radius(self) -> float:
        return 28.0 / self.alpha

    def describe(self) -> Dict:
        return {"shape": self.name, "alpha": self.alpha}


class UniformKernel(Kernel):
    name = "uniform"

    def __init__(self, radius: float):
        if radius <= 0:
            raise KernelError("Uniform radius must be positive")
        self.radius = float(radius)

    @property
    def lambda0(self) -> float:
        return math.inf

    def _moment(self, lam):
        x = lam * self.radius
        small = np.abs(x) < 1e-8
        safe = np.where(small, 1.0, x)
        return np.where(small, 1.0 + x * x / 6.0, np.sinh(safe) / safe)

    def moment_slope(self, lam):
        lam = np.asarray(lam, dtype=float)
        x = lam * self.radius
        small = np.abs(x) < 1e-6
        safe = np.where(small, 1.0, x)
        value = np.where(
            small,
            self.radius * x / 3.0,
            self.radius * (safe * np.cosh(safe) - np.sinh(safe)) / safe ** 2,
        )
        return float(value) if value.ndim == 0 else value

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= self.radius, 0.5 / self.radius, 0.0)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((self.radius - x) / (2.0 * self.radius), 0.0, 1.0)

    def default_radius(self) -> float:
        return self.radius

    def describe(self) -> Dict:
        return {"shape": self.name, "radius": self.radius}


class TabulatedKernel(Kernel):
    """Kernel sampled on a symmetric grid, linearly interpolated, zero outside."""

    name = "tabulated"
    SYMMETRY_TOL = 1e-9
    MASS_TOL = 0.01

    def __init__(self, offsets: Sequence[float], values: Sequence[float], source: Optional[str] = None):
        xs = np.asarray(offsets, dtype=float)
        js = np.asarray(values, dtype=float)
        if xs.ndim != 1 or xs.shape != js.shape or xs.size < 3:
            raise KernelError("tabulated kernel needs at least three (offset, density) pairs")
        order = np.argsort(xs)
        xs, js = xs[order], js[order]
        if np.any(np.diff(xs) <= 0):
            raise KernelError("tabulated offsets must be distinct")
        if np.any(js < 0):
            raise KernelError("tabulated density must be nonnegative")
        scale = max(float(np.max(np.abs(xs))), 1.0)
        if np.max(np.abs(xs + xs[::-1])) > self.SYMMETRY_TOL * scale:
            raise KernelError("tabulated offsets are not a symmetric grid")
        if np.max(np.abs(js - js[::-1])) > self.SYMMETRY_TOL * max(float(js.max()), 1.0):
            raise KernelError("tabulated density is not symmetric")

        mass = float(integrate.trapezoid(js, xs))
        if abs(mass - 1.0) > self.MASS_TOL:
            raise KernelError(f"tabulated kernel mass {mass:.6g} deviates from 1 by more than 1%")
        if mass != 1.0:
            logger.info(f"Renormalizing tabulated kernel (mass {mass:.12g})")
        js = js / mass
        # exact symmetry after renormalization
        js = 0.5 * (js + js[::-1])
        xs = 0.5 * (xs - xs[::-1])

        self.offsets = xs
        self.values = js
        self.source = source
        self.total_variation = float(np.sum(np.abs(np.diff(js))))
        cells = 0.5 * (js[1:] + js[:-1]) * np.diff(xs)
        self._cum = np.concatenate([[0.0], np.cumsum(cells)])

    @classmethod
    def from_csv(cls, path) -> "TabulatedKernel":
        """Load a two-column (offset, density) CSV; non-numeric rows are skipped."""
        path = Path(path)
        if not path.exists():
            raise KernelError(f"kernel table not found: {path}")
        offsets, values = [], []
        with path.open(newline="") as handle:
            for row in csv.reader(handle):
                if len(row) < 2 or row[0].strip().startswith("#"):
                    continue
                try:
                    offsets.append(float(row[0]))
                    values.append(float(row[1]))
                except ValueError:
                    continue
        return cls(offsets, values, source=str(path))

    @property
    def lambda0(self) -> float:
        return math.inf

    def _moment(self, lam):
        lam = np.asarray(lam, dtype=float)
        weights = np.exp(np.multiply.outer(lam, self.offsets))
        return integrate.trapezoid(weights * self.values, self.offsets, axis=-1)

    def moment_slope(self, lam):
        lam = np.asarray(lam, dtype=float)
        weights = np.exp(np.multiply.outer(lam, self.offsets))
        value = integrate.trapezoid(weights * self.values * self.offsets, self.offsets, axis=-1)
        return float(value) if np.ndim(value) == 0 else value

    def density(self, x):
        return np.interp(np.asarray(x, dtype=float), self.offsets, self.values, left=0.0, right=0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        xs, js = self.offsets, self.values
        i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, xs.size - 2)
        t = x - xs[i]
        slope = (js[i + 1] - js[i]) / (xs[i + 1] - xs[i])
        inside = self._cum[i] + js[i] * t + 0.5 * slope * t * t
        return np.where(x < xs[0], 0.0, np.where(x >= xs[-1], 1.0, inside))

    def sf(self, x):
        # symmetric: upper tail at x equals lower tail at -x
        return self.cdf(-np.asarray(x, dtype=float))

    def default_radius(self) -> float:
        return float(self.offsets[-1])

    def describe(self) -> Dict:
        return {"shape": self.name, "source": self.source, "points": int(self.offsets.size)}


class MomentDefinedKernel(Kernel):
    """
    Kernel known only through its moment function.

    Serves dispersion analysis only; M(lam) = 1 + lam^2 encodes the local
    diffusion reduction.
    """

    name = "moment_defined"

    def __init__(self, moment_fn: Callable, lambda0: float = math.inf, label: str = "custom"):
        self._fn = moment_fn
        self._lambda0 = float(lambda0)
        self.label = label

    @classmethod
    def from_coefficients(cls, coefficients: Sequence[float], lambda0: float = math.inf) -> "MomentDefinedKernel":
        """M(lam) = 1 + sum_k c_k lam^(2k), k = 1, 2, ..."""
        coeffs = [float(c) for c in coefficients]

        def fn(lam):
            lam2 = np.asarray(lam, dtype=float) ** 2
            total = np.ones_like(lam2)
            power = np.ones_like(lam2)
            for c in coeffs:
                power = power * lam2
                total = total + c * power
            return total

        kernel = cls(fn, lambda0=lambda0, label="even-polynomial")
        kernel.coefficients = coeffs
        return kernel

    @property
    def lambda0(self) -> float:
        return self._lambda0

    def _moment(self, lam):
        return self._fn(lam)

    def describe(self) -> Dict:
        info = {"shape": self.name, "label": self.label, "lambda0": self._lambda0}
        if hasattr(self, "coefficients"):
            info["coefficients"] = self.coefficients
        return info


@dataclass(frozen=True)
class DiscreteKernel:
    """Symmetric convolution weights indexed -K..K on spacing h."""
    weights: np.ndarray
    h: float
    truncation_radius: float
    raw_mass: float
    source: Kernel

    @property
    def K(self) -> int:
        return (self.weights.size - 1) // 2

    @property
    def offsets(self) -> np.ndarray:
        return self.h * np.arange(-self.K, self.K + 1)

    def moment(self, lam):
        """Discrete exponential moment sum_k w_k e^{lam k h}."""
        lam = np.asarray(lam, dtype=float)
        value = np.exp(np.multiply.outer(lam, self.offsets)) @ self.weights
        return float(value) if np.ndim(value) == 0 else value

    @property
    def second_moment(self) -> float:
        return float(np.sum(self.weights * self.offsets ** 2))


def moment(k: Kernel, lam):
    """Exponential moment of `k` at `lam`; see Kernel.moment."""
    return k.moment(lam)


def discretize(k: Kernel, h: float, radius: Optional[float] = None) -> DiscreteKernel:
    """
    Cell masses of `k` on the midpoint stencil kh, |k| <= K.

    The stencil covers [-radius, radius] (default: the kernel's own radius,
    chosen so the discarded tail mass is below 1e-12), then the weights are
    renormalized to unit sum.

    Raises:
        UnsupportedKernelError: for moment-defined kernels
    """
    if isinstance(k, MomentDefinedKernel):
        raise UnsupportedKernelError("moment-defined kernels serve dispersion analysis only")
    if h <= 0:
        raise PreconditionError("grid spacing must be positive")

    radius = k.default_radius() if radius is None else float(radius)
    K = max(0, int(math.ceil(radius / h - 0.5 - 1e-9)))
    edges = (np.arange(K + 1) + 0.5) * h
    upper = np.asarray(k.sf(edges), dtype=float)

    half = np.empty(K + 1)
    half[0] = 1.0 - 2.0 * upper[0]
    half[1:] = upper[:-1] - upper[1:]
    half = np.maximum(half, 0.0)
    weights = np.concatenate([half[:0:-1], half])

    raw_mass = float(half[0] + 2.0 * half[1:].sum())
    weights = weights / raw_mass
    weights.setflags(write=False)
    logger.debug(f"Discretized {k.name} kernel: K={K}, h={h}, raw mass={raw_mass:.17g}")
    return DiscreteKernel(
        weights=weights, h=float(h), truncation_radius=(K + 0.5) * h, raw_mass=raw_mass, source=k
    )


def nonlocal_op(
    dk: DiscreteKernel,
    w,
    extension: str = "clamp",
    method: str = "direct",
    left_value: Optional[float] = None,
    right_value: Optional[float] = None,
) -> np.ndarray:
    """
    Apply N[w] = J*w - w to a sampled field.

    Args:
        dk: discrete kernel on the field's grid spacing
        w: field samples
        extension: "clamp" (constant continuation by the end values, or by
            left_value/right_value when given) or "periodic"
        method: "direct" summation, "fft" via scipy.signal.fftconvolve, or "auto"

    Returns:
        np.ndarray: sum_k weights[k] * w_ext[i-k] - w[i]
    """
    w = np.asarray(w, dtype=float)
    n = w.size
    if n < 1:
        raise PreconditionError("nonlocal_op needs a nonempty field")
    K = dk.K

    if extension == "periodic":
        w_ext = w[np.arange(-K, n + K) % n]
    elif extension == "clamp":
        left = w[0] if left_value is None else float(left_value)
        right = w[-1] if right_value is None else float(right_value)
        w_ext = np.concatenate([np.full(K, left), w, np.full(K, right)])
    else:
        raise PreconditionError(f"unknown extension rule: {extension}")

    if method == "auto":
        method = "fft" if dk.weights.size >= FFT_MIN_STENCIL and n >= FFT_MIN_STENCIL else "direct"

    # shifting by a constant keeps constant fields exactly in the kernel's null space
    anchor = w[0]
    if method == "direct":
        conv = np.convolve(w_ext - anchor, dk.weights, mode="valid")
    elif method == "fft":
        conv = signal.fftconvolve(w_ext - anchor, dk.weights, mode="valid")
    else:
        raise PreconditionError(f"unknown convolution method: {method}")
    return conv - (w - anchor)
