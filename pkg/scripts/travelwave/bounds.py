"""
Explicit upper/lower solutions and a grid verifier for their inequalities.

    phi_upper = 1
    phi_lower = (1+b)/2                      for xi > 0
              = 1 - ((1-b)/2) e^{eta xi}     for xi <= 0
    psi_upper = 1 for xi > 0, e^{lambda1 xi} for xi <= 0
    psi_lower = 0 for xi > xi1, e^{lambda1 xi}(1 - r e^{eps xi}) for xi <= xi1
"""

import logging
import math
from typing import Callable, Tuple

import numpy as np

from .dispersion import delta
from .errors import ConstructionError, NoRootsError, PreconditionError
from .kernel import DiscreteKernel, Kernel
from .kinetics import reaction_f, reaction_g
from .models import DispersionReport, Params, SupersubPair, SupersubResidualReport

logger = logging.getLogger(__name__)

BASE_TOL = 1e-8
CHUNK = 256


def build_supersub(c: float, p: Params, rep: DispersionReport, k2: Kernel) -> SupersubPair:
    """
    Build the upper/lower quadruple for speed c > c*.

    eps is half its allowed supremum min(lambda1, lambda2 - lambda1) and r is
    twice its lower bound max(1, -2s/((1+b) Delta(lambda1 + eps, c))).

    Raises:
        NoRootsError: if c <= c*
        ConstructionError: if Delta(lambda1 + eps, c) >= 0
    """
    if rep.lambda1 is None or rep.lambda2 is None or rep.eta is None:
        raise PreconditionError("dispersion report lacks lambda1, lambda2 or eta")
    if c <= rep.c_star:
        raise NoRootsError(f"upper/lower solutions need c > c* = {rep.c_star:.6g}")

    lam1, lam2 = rep.lambda1, rep.lambda2
    eps = 0.5 * min(lam1, lam2 - lam1)
    if eps <= 0:
        raise ConstructionError("lambda2 - lambda1 must be positive")
    d_val = delta(lam1 + eps, c, p, k2)
    if d_val >= 0:
        raise ConstructionError(f"Delta(lambda1 + eps, c) = {d_val:.6g} is not negative")

    r = 2.0 * max(1.0, -2.0 * p.s / ((1.0 + p.b) * d_val))
    xi1 = -math.log(r) / eps
    logger.debug(f"supersub at c={c:.6g}: eps={eps:.6g}, r={r:.6g}, xi1={xi1:.6g}")
    return SupersubPair(
        c=c, b=p.b, eta=rep.eta, lambda1=lam1, lambda2=lam2, epsilon=eps, r=r, xi1=xi1
    )


def quadrature_nodes(dk: DiscreteKernel, step: float) -> Tuple[np.ndarray, np.ndarray]:
    """Composite trapezoid nodes/weights for int J(y) F(xi - y) dy, normalized to unit mass."""
    n = int(math.ceil(dk.truncation_radius / step))
    nodes = step * np.arange(-n, n + 1)
    weights = np.asarray(dk.source.density(nodes), dtype=float) * step
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return nodes, weights / weights.sum()


def formula_convolution(
    fn: Callable[[np.ndarray], np.ndarray], xi: np.ndarray, nodes: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """N[F](xi) = sum_j w_j (F(xi - y_j) - F(xi)) for a closed-form F."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty_like(xi)
    for start in range(0, xi.size, CHUNK):
        block = xi[start:start + CHUNK]
        shifted = fn(block[:, None] - nodes[None, :])
        out[start:start + CHUNK] = (shifted - fn(block)[:, None]) @ weights
    return out


def verify_supersub(
    pair: SupersubPair,
    c: float,
    p: Params,
    dk1: DiscreteKernel,
    dk2: DiscreteKernel,
    grid,
) -> SupersubResidualReport:
    """
    Evaluate the four inequalities on `grid`, skipping a half-spacing
    neighbourhood of each breakpoint.

    (s1) d1 N1[phi_u] - c phi_u' + phi_u f(phi_u, psi_l) <= 0
    (s2) d1 N1[phi_l] - c phi_l' + phi_l f(phi_l, psi_u) >= 0
    (s3) d2 N2[psi_u] - c psi_u' + psi_u g(phi_u, psi_u) <= 0
    (s4) d2 N2[psi_l] - c psi_l' + psi_l g(phi_l, psi_l) >= 0

    Convolutions integrate the exact formulas with step h/4; each tolerance is
    1e-8 plus d * (kernel second moment) * (Lipschitz bound of the formula) * step.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise PreconditionError("verification grid needs at least two points")
    h = float(np.median(np.diff(grid)))
    keep = np.ones(grid.size, dtype=bool)
    for point in pair.exception_set:
        keep &= np.abs(grid - point) >= 0.5 * h
    xi = grid[keep]
    step = 0.25 * h

    phi_u, phi_l = pair.phi_upper(xi), pair.phi_lower(xi)
    psi_u, psi_l = pair.psi_upper(xi), pair.psi_lower(xi)

    cases = {
        "s1": (pair.phi_upper, pair.dphi_upper, p.d1, dk1, phi_u * reaction_f(phi_u, psi_l, p)),
        "s2": (pair.phi_lower, pair.dphi_lower, p.d1, dk1, phi_l * reaction_f(phi_l, psi_u, p)),
        "s3": (pair.psi_upper, pair.dpsi_upper, p.d2, dk2, psi_u * reaction_g(phi_u, psi_u, p)),
        "s4": (pair.psi_lower, pair.dpsi_lower, p.d2, dk2, psi_l * reaction_g(phi_l, psi_l, p)),
    }

    residuals, extremes, tolerances, passed = {}, {}, {}, {}
    nodes_cache = {}
    for name, (fn, dfn, d, dk, reaction) in cases.items():
        if id(dk) not in nodes_cache:
            nodes_cache[id(dk)] = quadrature_nodes(dk, step)
        nodes, weights = nodes_cache[id(dk)]
        slope = dfn(xi)
        lhs = d * formula_convolution(fn, xi, nodes, weights) - c * slope + reaction
        second = float(np.sum(weights * nodes ** 2))
        lipschitz = float(np.max(np.abs(slope))) if slope.size else 0.0
        tol = BASE_TOL + d * second * lipschitz * step

        residuals[name] = lhs
        tolerances[name] = tol
        if name in ("s1", "s3"):
            extremes[name] = float(lhs.max())
            passed[name] = extremes[name] <= tol
        else:
            extremes[name] = float(lhs.min())
            passed[name] = extremes[name] >= -tol

    summary = ", ".join(f"{k}={'pass' if v else 'FAIL'}" for k, v in passed.items())
    logger.info(f"supersub verification at c={c:.6g} on {xi.size} points: {summary}")
    return SupersubResidualReport(
        xi=xi, residuals=residuals, extremes=extremes, tolerances=tolerances, passed=passed
    )
