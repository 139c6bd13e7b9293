"""
Reaction terms, kinetic equilibria and the strong-Allee admissibility gate.

All functions accept scalars or numpy arrays and return the same kind.
"""

import logging
import math
from typing import Tuple

import numpy as np

from .errors import DomainError
from .models import AdmissibilityRecord, Classification, EquilibriaReport, Params

logger = logging.getLogger(__name__)

TANGENCY_TOL = 1e-14
RATIO_GUARD = 1e-300


def _as_result(value: np.ndarray):
    return float(value) if value.ndim == 0 else value


def reaction_f(phi, psi, p: Params):
    """
    Per-capita prey growth (1-phi)(phi/b-1) - m psi/(phi + a psi).

    Raises:
        DomainError: if any phi <= 0 or the ratio denominator vanishes
    """
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if np.any(phi <= 0):
        raise DomainError("reaction_f needs phi > 0")
    denom = phi + p.a * psi
    if np.any(denom < RATIO_GUARD):
        raise DomainError("ratio term m*psi/(phi + a*psi) undefined")
    value = (1.0 - phi) * (phi / p.b - 1.0) - p.m * psi / denom
    return _as_result(value)


def reaction_g(phi, psi, p: Params):
    """Per-capita predator growth s(1 - psi/phi)."""
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if np.any(phi <= 0):
        raise DomainError("reaction_g needs phi > 0")
    return _as_result(p.s * (1.0 - psi / phi))


def equilibria(p: Params) -> EquilibriaReport:
    """
    Coexistence equilibria from the closed-form roots of
    u^2 - (1+b)u + b(1 + m/(1+a)) = 0.

    Example:
        >>> rep = equilibria(Params(d1=1, d2=1, m=0.1, a=1, s=1, b=0.2))
        >>> round(rep.u2_star, 6)
        0.987298
    """
    k = p.m / (1.0 + p.a)
    b1 = 1.0 + 2.0 * k - 2.0 * math.sqrt(k * (1.0 + k))

    if abs(p.b - b1) <= TANGENCY_TOL:
        return EquilibriaReport(
            b1=b1, classification=Classification.ONE_POSITIVE, u_star=0.5 * (1.0 + p.b)
        )
    if p.b > b1:
        return EquilibriaReport(b1=b1, classification=Classification.NONE_POSITIVE)

    disc = p.b * p.b - 2.0 * (1.0 + 2.0 * k) * p.b + 1.0
    root = math.sqrt(max(disc, 0.0))
    return EquilibriaReport(
        b1=b1,
        classification=Classification.TWO_POSITIVE,
        u1_star=0.5 * (p.b + 1.0 - root),
        u2_star=0.5 * (p.b + 1.0 + root),
    )


def check_strong_allee_assumption(p: Params) -> AdmissibilityRecord:
    """Evaluate the three upper bounds on m; admissible iff m is below all of them."""
    b, a = p.b, p.a
    term1 = (1.0 - b) ** 2 * (1.0 + b) / (8.0 * b)
    term2 = (1.0 - b) ** 2 * (1.0 + a) / (4.0 * b)
    term3 = (1.0 + a) ** 3 / 8.0 * (math.sqrt(b * b + 4.0 * ((1.0 - b) / (1.0 + a)) ** 2) - b)
    terms = {"term1": term1, "term2": term2, "term3": term3}
    violated = [name for name, value in terms.items() if p.m >= value]
    record = AdmissibilityRecord(
        term1=term1,
        term2=term2,
        term3=term3,
        min_term=min(terms.values()),
        admissible=not violated,
        violated=violated,
    )
    if violated:
        logger.debug(f"m={p.m} violates {', '.join(violated)}")
    return record


def reaction_slope_bounds(p: Params) -> Tuple[float, float]:
    """
    Largest negative own-slopes of phi*f and psi*g over the box
    (1+b)/2 <= phi <= 1, 0 <= psi <= 1.

    Returns:
        (kappa1, kappa2): bounds on -d(phi f)/d phi and -d(psi g)/d psi
    """
    b, a, m = p.b, p.a, p.m
    lo = 0.5 * (1.0 + b)

    def growth_slope(phi: float) -> float:
        # d/dphi of phi(1-phi)(phi/b-1)
        return -3.0 * phi * phi / b + 2.0 * phi * (1.0 + 1.0 / b) - 1.0

    # -growth_slope is a convex quadratic, so its maximum sits at an end of the box
    growth = max(-growth_slope(1.0), -growth_slope(lo))
    predation = m * a / (lo + a) ** 2
    kappa1 = max(0.0, growth + predation)
    kappa2 = p.s * (3.0 - b) / (1.0 + b)
    return kappa1, kappa2
