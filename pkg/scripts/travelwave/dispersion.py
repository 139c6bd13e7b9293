"""
Characteristic functions of the linearization at the predator-free state.

    Delta(lam, c) = d2 (M2(lam) - 1) - c lam + s
    Pi(lam, c)    = d1 (M1(lam) - 1) - c lam

The minimal wave speed is c* = inf_{lam > 0} [d2 (M2(lam) - 1) + s] / lam.
For c > c*, Delta(., c) has two positive roots lambda1 < lambda2.
"""

import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import (
    DivergentMomentError,
    EtaSelectionError,
    NoRootsError,
    NumericalFailure,
    PreconditionError,
    UnboundedMinimizerError,
)
from .kernel import Kernel
from .models import DispersionReport, Params

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
BRACKET_START = 1e-6
GOLDEN_WIDTH = 1e-12
ROOT_TOL = 1e-12
INFINITE_CAP = 1e3
TANGENCY_RTOL = 1e-9
MAX_HALVINGS = 60


def search_cap(k: Kernel) -> float:
    """Upper end of the decay-rate search domain."""
    return 0.999 * k.lambda0 if math.isfinite(k.lambda0) else INFINITE_CAP


def delta(lam, c: float, p: Params, k2: Kernel):
    """Predator characteristic function Delta(lam, c)."""
    value = p.d2 * (np.asarray(k2.moment(lam)) - 1.0) - c * np.asarray(lam, dtype=float) + p.s
    return float(value) if np.ndim(value) == 0 else value


def pi_value(lam, c: float, p: Params, k1: Kernel):
    """Prey characteristic function Pi(lam, c)."""
    value = p.d1 * (np.asarray(k1.moment(lam)) - 1.0) - c * np.asarray(lam, dtype=float)
    return float(value) if np.ndim(value) == 0 else value


def _bisect(fn: Callable[[float], float], lo: float, hi: float, tol: float, max_iter: int = 400) -> float:
    f_lo = fn(lo)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _golden_section(fn: Callable[[float], float], lo: float, hi: float, width: float) -> float:
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    while hi - lo > width:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = fn(x2)
    return 0.5 * (lo + hi)


def cstar(p: Params, k2: Kernel) -> Tuple[float, float]:
    """
    Minimal wave speed and tangency rate.

    The ratio q(lam) = [d2 (M2(lam) - 1) + s] / lam is bracketed by doubling
    from 1e-6, minimized by golden-section search to width 1e-12, and the
    argmin is polished by bisection on the tangency condition
    lam d2 M2'(lam) = d2 (M2(lam) - 1) + s.

    Returns:
        (c_star, lambda_star)

    Raises:
        UnboundedMinimizerError: if q is still decreasing at the search cap
    """
    cap = search_cap(k2)

    def q(lam: float) -> float:
        return (p.d2 * (k2.moment(lam) - 1.0) + p.s) / lam

    x, qx = BRACKET_START, q(BRACKET_START)
    while True:
        nxt = min(2.0 * x, cap)
        with np.errstate(over="ignore"):
            qn = q(nxt)
        if qn >= qx:
            break
        if nxt >= cap:
            raise UnboundedMinimizerError(
                f"q(lambda) still decreasing at the search cap {cap:.6g} of the {k2.name} kernel"
            )
        x, qx = nxt, qn

    lam_g = _golden_section(q, 0.5 * x, nxt, GOLDEN_WIDTH)
    if lam_g >= cap * (1.0 - 1e-9):
        raise UnboundedMinimizerError(f"minimizer sits on the search cap {cap:.6g}")

    def tangency(lam: float) -> float:
        return lam * p.d2 * k2.moment_slope(lam) - p.d2 * (k2.moment(lam) - 1.0) - p.s

    lam_star = lam_g
    lo, hi = lam_g * (1.0 - 1e-4), min(lam_g * (1.0 + 1e-4), cap)
    if tangency(lo) < 0.0 < tangency(hi):
        lam_star = _bisect(tangency, lo, hi, tol=1e-15 * lam_g)

    c_star = q(lam_star)
    logger.debug(f"c* = {c_star:.12g} at lambda* = {lam_star:.12g}")
    return c_star, lam_star


def lambda_roots(
    c: float, p: Params, k2: Kernel, star: Optional[Tuple[float, float]] = None
) -> Tuple[float, float]:
    """
    Roots lambda1 < lambda2 of Delta(., c) = 0.

    At c = c* (relative tolerance 1e-9) the tangency pair (lambda*, lambda*)
    is returned.

    Raises:
        NoRootsError: if c < c*
    """
    c_star, lam_star = cstar(p, k2) if star is None else star
    if abs(c - c_star) <= TANGENCY_RTOL * max(1.0, c_star):
        return lam_star, lam_star
    if c < c_star:
        raise NoRootsError(f"c = {c:.6g} is below the minimal wave speed c* = {c_star:.6g}")

    def fn(lam: float) -> float:
        return delta(lam, c, p, k2)

    lam1 = _bisect(fn, 0.0, lam_star, ROOT_TOL)

    cap = search_cap(k2)
    hi = min(2.0 * lam_star, cap)
    with np.errstate(over="ignore"):
        while fn(hi) <= 0.0:
            if hi >= cap:
                raise NumericalFailure(f"second root of Delta lies beyond the search cap {cap:.6g}")
            hi = min(2.0 * hi, cap)
    lam2 = _bisect(fn, lam_star, hi, ROOT_TOL)
    return lam1, lam2


def check_sign_pattern(
    c: float, p: Params, k2: Kernel, lam1: float, lam2: float, n: int = 1000
) -> bool:
    """Delta > 0 on (0, lam1) and beyond lam2, Delta < 0 on (lam1, lam2), on an audit grid."""
    upper = min(2.0 * lam2 + 1.0, search_cap(k2))
    grid = np.linspace(0.0, upper, n + 2)[1:-1]
    keep = (np.abs(grid - lam1) > 1e-9 * (1.0 + lam1)) & (np.abs(grid - lam2) > 1e-9 * (1.0 + lam2))
    grid = grid[keep]
    values = delta(grid, c, p, k2)
    inside = (grid > lam1) & (grid < lam2)
    return bool(np.all(values[inside] < 0) and np.all(values[~inside] > 0))


def eta_select(c: float, p: Params, k1: Kernel, lambda1: float) -> float:
    """
    Prey decay rate eta in (0, lambda1) with Pi(eta, c) < 0.

    Starts at lambda1/2 and halves until accepted.

    Raises:
        PreconditionError: if c <= 0 or lambda1 <= 0
        EtaSelectionError: after 60 unsuccessful halvings
    """
    if c <= 0 or lambda1 <= 0:
        raise PreconditionError("eta_select needs c > 0 and lambda1 > 0")
    eta = 0.5 * lambda1
    for _ in range(MAX_HALVINGS):
        try:
            if pi_value(eta, c, p, k1) < 0.0:
                return eta
        except DivergentMomentError:
            pass
        eta *= 0.5
    raise EtaSelectionError(f"no eta with Pi(eta, {c:.6g}) < 0 after {MAX_HALVINGS} halvings")


def dispersion_report(
    p: Params, k1: Kernel, k2: Kernel, c: Optional[float] = None
) -> DispersionReport:
    """c*, lambda* and, when c is given, lambda1, lambda2, eta for that speed."""
    c_star, lam_star = cstar(p, k2)
    if c is None:
        return DispersionReport(c_star=c_star, lambda_star=lam_star)

    lam1, lam2 = lambda_roots(c, p, k2, star=(c_star, lam_star))
    eta = eta_select(c, p, k1, lam1)
    pattern = check_sign_pattern(c, p, k2, lam1, lam2) if lam2 > lam1 else None
    logger.info(
        f"c={c:.6g}: c*={c_star:.6g}, lambda1={lam1:.6g}, lambda2={lam2:.6g}, eta={eta:.6g}"
    )
    return DispersionReport(
        c_star=c_star,
        lambda_star=lam_star,
        c=c,
        lambda1=lam1,
        lambda2=lam2,
        eta=eta,
        sign_pattern_ok=pattern,
    )
