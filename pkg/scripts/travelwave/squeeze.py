"""
Adjacent sequence pinching the coexistence value u2*.

    gamma_{n+1} = (b + 1 + sqrt((1-b)^2 - 4 m b gamma_n / (gamma_{n-1} + a gamma_n))) / 2

with gamma_{-1} = (1+b)/2 and gamma_0 = 1. Odd terms increase, even terms
decrease, and both converge to u2* geometrically with ratio at most rho.
"""

import logging
import math

from .errors import AssumptionViolation, ConsistencyError, InadmissibleParamsError, PreconditionError
from .kinetics import check_strong_allee_assumption, equilibria
from .models import Params, SqueezeTrace

logger = logging.getLogger(__name__)

RANGE_TOL = 1e-12
ORDER_TOL = 1e-12
RATIO_FLOOR = 1e-13
RATE_TOL = 1e-9


def squeeze_step(gamma_prev: float, gamma_curr: float, p: Params) -> float:
    """
    One step of the recursion.

    Raises:
        PreconditionError: if an argument lies outside [(1+b)/2, 1]
        AssumptionViolation: if the radicand is negative
    """
    lo = 0.5 * (1.0 + p.b)
    for value in (gamma_prev, gamma_curr):
        if value < lo - RANGE_TOL or value > 1.0 + RANGE_TOL:
            raise PreconditionError(f"squeeze argument {value} outside [{lo}, 1]")
    radicand = (1.0 - p.b) ** 2 - 4.0 * p.m * p.b * gamma_curr / (gamma_prev + p.a * gamma_curr)
    if radicand < 0:
        raise AssumptionViolation(f"negative radicand {radicand:.6g} in squeeze step")
    return 0.5 * (p.b + 1.0 + math.sqrt(radicand))


def contraction_ratio(p: Params) -> float:
    """rho = (4m/(1+a)^2) / sqrt((1-b)^2 - 4mb/(1+a)); below 1 exactly when m < term3."""
    radicand = (1.0 - p.b) ** 2 - 4.0 * p.m * p.b / (1.0 + p.a)
    if radicand <= 0:
        raise AssumptionViolation("contraction ratio undefined: (1-b)^2 <= 4mb/(1+a)")
    return 4.0 * p.m / (1.0 + p.a) ** 2 / math.sqrt(radicand)


def run_squeeze(p: Params, tol: float = 1e-12, n_max: int = 10000) -> SqueezeTrace:
    """
    Iterate the recursion until successive terms differ by less than `tol`.

    Interleaving (odd terms rising below u2*, even terms falling above it) and
    the contraction estimate are checked at every step.

    Raises:
        InadmissibleParamsError: for inadmissible parameters
        ConsistencyError: on an interleaving violation or when n_max is hit
    """
    record = check_strong_allee_assumption(p)
    if not record.admissible:
        raise InadmissibleParamsError(f"squeeze needs admissible parameters (violates {record.violated})", record)
    u2 = equilibria(p).u2_star
    rho = contraction_ratio(p)

    gammas = [0.5 * (1.0 + p.b), 1.0]
    max_ratio = 0.0
    n_steps = None
    for n in range(1, n_max + 1):
        nxt = squeeze_step(gammas[-2], gammas[-1], p)
        gammas.append(nxt)
        # gammas[i] holds gamma_{i-1}
        if n % 2 == 1:
            if nxt > u2 + ORDER_TOL or nxt < gammas[-3] - ORDER_TOL:
                raise ConsistencyError(f"odd term gamma_{n}={nxt!r} breaks the interleaving with u2*={u2!r}")
        else:
            if nxt < u2 - ORDER_TOL or nxt > gammas[-3] + ORDER_TOL:
                raise ConsistencyError(f"even term gamma_{n}={nxt!r} breaks the interleaving with u2*={u2!r}")
            earlier = abs(gammas[-3] - gammas[-4])
            if earlier > RATIO_FLOOR:
                max_ratio = max(max_ratio, abs(nxt - gammas[-2]) / earlier)
        if abs(nxt - gammas[-2]) < tol:
            n_steps = n
            break

    if n_steps is None:
        raise ConsistencyError(f"squeeze sequence did not settle within {n_max} steps (rho={rho:.6g})")
    rate_exceeded = max_ratio > rho + RATE_TOL
    if rate_exceeded:
        logger.warning(f"observed step ratio {max_ratio:.6g} exceeds rho={rho:.6g}")

    n_converged = next((i - 1 for i, g in enumerate(gammas) if abs(g - u2) < tol), None)
    logger.info(f"squeeze settled after {n_steps} steps at {gammas[-1]:.15g} (u2*={u2:.15g})")
    return SqueezeTrace(
        gammas=gammas,
        rho=rho,
        u2_star=u2,
        n_converged=n_converged,
        n_steps=n_steps,
        max_step_ratio=max_ratio,
        rate_exceeded=rate_exceeded,
    )
