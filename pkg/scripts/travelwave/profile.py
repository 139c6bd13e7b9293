"""
Traveling-wave profile solver.

The wave system

    d1 N1[phi] - c phi' + phi f(phi, psi) = 0
    d2 N2[psi] - c psi' + psi g(phi, psi) = 0

is solved as the fixed point of

    P_i(w)(xi) = (1/c) int_{-inf}^{xi} e^{beta (y - xi)/c} F_i(w)(y) dy
    F_1 = beta phi + d1 N1[phi] + phi f(phi, psi)
    F_2 = beta psi + d2 N2[psi] + psi g(phi, psi)

P is order-preserving in the mixed quasi-monotone sense on the box
(1+b)/2 <= phi <= 1, 0 <= psi <= 1: raising phi raises both outputs, raising
psi lowers the first and raises the second. Iteration starts at the lower
solution and is projected onto the upper/lower sandwich after every sweep.
The speed c = c* is reached by continuation along c_n decreasing to c*.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, signal, stats
from tqdm import tqdm

from .bounds import build_supersub
from .dispersion import TANGENCY_RTOL, cstar, dispersion_report
from .errors import (
    DomainTooSmallError,
    InadmissibleParamsError,
    NoRootsError,
    NonConvergenceError,
    NormalizationError,
    PreconditionError,
    WindowError,
)
from .kernel import DiscreteKernel, Kernel, discretize, nonlocal_op
from .kinetics import (
    check_strong_allee_assumption,
    equilibria,
    reaction_f,
    reaction_g,
    reaction_slope_bounds,
)
from .models import (
    Classification,
    ContinuationOptions,
    ContinuationResult,
    DispersionReport,
    Params,
    QuasiMonotoneAudit,
    SolverOptions,
    WaveProfile,
)

logger = logging.getLogger(__name__)

BETA_MARGIN = 1.1
BOX_TOL = 1e-12
PROJECTION_TOL = 1e-12
MIN_RELAXATION = 0.125
OSCILLATION_COOLDOWN = 10
TAIL_SPAN = 20.0
RESOLUTION = 0.2
SERIES_CUTOFF = 1e-4
WINDOW_FLOOR = 1e-12
EXPLICIT_WINDOW_FLOOR = 1e-14
TAIL_FRACTION = 0.01

PREY_ONLY = (1.0, 0.0)


# ============================================================================
# OPERATOR
# ============================================================================

def beta_min(p: Params) -> float:
    """
    Shift that makes F_1, F_2 nondecreasing in their own argument on the box.

    Each F_i has own-slope at least beta - d_i - kappa_i, where kappa_i bounds
    the negative slope of the reaction term; the result carries a 10% margin.

    Example:
        >>> round(beta_min(Params(d1=1, d2=1, m=0.1, a=1, s=1, b=0.2)), 4)
        5.5429
    """
    kappa1, kappa2 = reaction_slope_bounds(p)
    return BETA_MARGIN * max(p.d1 + kappa1, p.d2 + kappa2)


@dataclass(frozen=True)
class _Recursion:
    """
    Exact-exponential trapezoid rule for the one-sided integral.

    With x = beta h / c and F/beta linear on each cell,
    P_j = e^{-x} P_{j-1} + current * G_j + previous * G_{j-1}.
    """
    decay: float
    current: float
    previous: float

    @classmethod
    def build(cls, beta: float, c: float, h: float) -> "_Recursion":
        x = beta * h / c
        decay = math.exp(-x)
        total = -math.expm1(-x)
        if x < SERIES_CUTOFF:
            previous = x / 2.0 - x * x / 3.0 + x ** 3 / 8.0
        else:
            previous = (total - x * decay) / x
        return cls(decay=decay, current=total - previous, previous=previous)

    def integrate(self, G: np.ndarray, g_left: float) -> np.ndarray:
        increments = self.current * G
        increments[0] += self.previous * g_left
        increments[1:] += self.previous * G[:-1]
        out, _ = signal.lfilter([1.0], [1.0, -self.decay], increments, zi=[self.decay * g_left])
        return out

    def response(self, lam: float, h: float) -> float:
        """Gain of the recursion on the mode e^{lam xi}."""
        z = math.exp(-lam * h)
        return (self.current + self.previous * z) / (1.0 - self.decay * z)


def apply_P(
    phi,
    psi,
    c: float,
    p: Params,
    dk1: DiscreteKernel,
    dk2: DiscreteKernel,
    beta: float,
    left_state: Tuple[float, float] = PREY_ONLY,
    method: str = "direct",
) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    One application of the integral operator P on a uniform grid.

    Fields are continued by `left_state` beyond the left end and by their own
    end values beyond the right end. The integral is seeded at the left end
    with the value it takes when the fields are constant at `left_state`.

    Returns:
        (phi_out, psi_out, violation): outputs clipped to the box and the
        amount by which they left it before clipping
    """
    if c <= 0:
        raise PreconditionError("apply_P needs c > 0")
    if dk1.h != dk2.h:
        raise PreconditionError("both kernels must be discretized on the same spacing")
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if phi.shape != psi.shape or phi.ndim != 1:
        raise PreconditionError("phi and psi must be 1-D arrays of equal length")

    phi_l, psi_l = (float(v) for v in left_state)
    spread1 = nonlocal_op(dk1, phi, "clamp", method, left_value=phi_l)
    spread2 = nonlocal_op(dk2, psi, "clamp", method, left_value=psi_l)
    g1 = phi + (p.d1 * spread1 + phi * reaction_f(phi, psi, p)) / beta
    g2 = psi + (p.d2 * spread2 + psi * reaction_g(phi, psi, p)) / beta
    g1_left = phi_l + phi_l * reaction_f(phi_l, psi_l, p) / beta
    g2_left = psi_l + psi_l * reaction_g(phi_l, psi_l, p) / beta

    rec = _Recursion.build(beta, c, dk1.h)
    out_phi = rec.integrate(g1, g1_left)
    out_psi = rec.integrate(g2, g2_left)

    lo = 0.5 * (1.0 + p.b)
    violation = max(
        0.0,
        lo - float(out_phi.min()),
        float(out_phi.max()) - 1.0,
        -float(out_psi.min()),
        float(out_psi.max()) - 1.0,
    )
    if violation > BOX_TOL:
        logger.debug(f"apply_P output left the box by {violation:.3g}; clamped")
    return np.clip(out_phi, lo, 1.0), np.clip(out_psi, 0.0, 1.0), violation


def discrete_tail_rate(c: float, p: Params, dk2: DiscreteKernel, beta: float, rep: DispersionReport) -> float:
    """
    Decay rate of the discretized operator's left tail.

    Root in (lambda1/2, lambda*) of
    [(beta + d2 (M_h(lam) - 1) + s)/beta] * R_h(lam) = 1, with M_h the discrete
    kernel moment and R_h the gain of the integral recursion. Falls back to
    the continuous lambda1 when no sign change brackets the root.
    """
    rec = _Recursion.build(beta, c, dk2.h)

    def characteristic(lam: float) -> float:
        gain = (beta + p.d2 * (dk2.moment(lam) - 1.0) + p.s) / beta
        return gain * rec.response(lam, dk2.h) - 1.0

    lo, hi = 0.5 * rep.lambda1, rep.lambda_star
    if not (characteristic(lo) > 0.0 > characteristic(hi)):
        logger.warning(f"no discrete tail rate bracketed in [{lo:.6g}, {hi:.6g}]; using lambda1")
        return rep.lambda1
    return float(optimize.brentq(characteristic, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps))


def wave_residual(phi, psi, c: float, p: Params, dk1: DiscreteKernel, dk2: DiscreteKernel) -> float:
    """Max-norm defect of the wave equations with centered differences, interior points only."""
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    h = dk1.h
    inner = slice(1, -1)
    spread1 = nonlocal_op(dk1, phi, "clamp", left_value=PREY_ONLY[0])[inner]
    spread2 = nonlocal_op(dk2, psi, "clamp", left_value=PREY_ONLY[1])[inner]
    d_phi = (phi[2:] - phi[:-2]) / (2.0 * h)
    d_psi = (psi[2:] - psi[:-2]) / (2.0 * h)
    ph, ps = phi[inner], psi[inner]
    r1 = p.d1 * spread1 - c * d_phi + ph * reaction_f(ph, ps, p)
    r2 = p.d2 * spread2 - c * d_psi + ps * reaction_g(ph, ps, p)
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


# ============================================================================
# SOLVER
# ============================================================================

def resolve_grid(opts: SolverOptions, rep: DispersionReport) -> Tuple[float, float]:
    """
    Half-width and spacing meeting L >= 20 max(1/eta, 1/lambda1) and h lambda2 < 0.2.

    With auto_grid the grid is enlarged/refined (logged); otherwise a violation
    raises.
    """
    L, h = opts.L, opts.h
    needed_L = TAIL_SPAN * max(1.0 / rep.eta, 1.0 / rep.lambda1)

    if h * rep.lambda2 >= RESOLUTION:
        if not opts.auto_grid:
            raise PreconditionError(
                f"h={h} does not resolve lambda2={rep.lambda2:.6g}; need h < {RESOLUTION / rep.lambda2:.6g}"
            )
        while h * rep.lambda2 >= RESOLUTION:
            h *= 0.5
        logger.warning(f"Refined grid spacing from {opts.h} to {h} to resolve lambda2={rep.lambda2:.6g}")

    if L < needed_L:
        if not opts.auto_grid:
            raise DomainTooSmallError(f"L={L} is below {needed_L:.6g}", suggested=needed_L)
        L = float(math.ceil(needed_L))
        logger.warning(f"Enlarged domain half-width from {opts.L} to {L}")
    return L, h


def make_grid(L: float, h: float) -> np.ndarray:
    """Symmetric grid h * (-n..n) with n = ceil(L/h); contains xi = 0."""
    n = int(math.ceil(L / h - 1e-9))
    return h * np.arange(-n, n + 1)


def _oscillating(history: Sequence[float], floor: float) -> bool:
    if len(history) < 4:
        return False
    last = history[-4:]
    if min(last) <= floor:
        return False
    steps = np.diff(last)
    return bool(steps[0] * steps[1] < 0 and steps[1] * steps[2] < 0)


def solve_profile(
    c: float,
    p: Params,
    k1: Kernel,
    k2: Kernel,
    opts: Optional[SolverOptions] = None,
    rep: Optional[DispersionReport] = None,
    initial: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> WaveProfile:
    """
    Solve for the wave profile at speed c > c*.

    Args:
        c: wave speed
        p: admissible model constants
        k1, k2: prey and predator kernels
        opts: grid and iteration controls
        rep: dispersion report at c (computed when missing)
        initial: starting fields on the solver grid; projected onto the sandwich.
            Defaults to the lower solution.

    Returns:
        WaveProfile: converged profile with residual and gap diagnostics

    Raises:
        InadmissibleParamsError: if the strong-Allee bound fails
        NoRootsError: if c <= c*
        NonConvergenceError: if max_iter is exhausted (carries the diff history)
        DomainTooSmallError: if the ends miss the limit states by more than boundary_tol
    """
    opts = opts or SolverOptions()
    record = check_strong_allee_assumption(p)
    if not record.admissible:
        raise InadmissibleParamsError(f"profile solver needs admissible parameters (violates {record.violated})", record)

    c_star = rep.c_star if rep is not None else cstar(p, k2)[0]
    if c <= c_star * (1.0 + TANGENCY_RTOL):
        raise NoRootsError(f"c = {c:.6g} is not above the minimal wave speed c* = {c_star:.6g}")
    if rep is None or rep.c != c or rep.lambda1 is None:
        rep = dispersion_report(p, k1, k2, c)
    u2 = equilibria(p).u2_star

    L, h = resolve_grid(opts, rep)
    xi = make_grid(L, h)
    h = float(xi[1] - xi[0])
    dk1, dk2 = discretize(k1, h), discretize(k2, h)
    beta = beta_min(p)

    lam1_h = discrete_tail_rate(c, p, dk2, beta, rep)
    pair = build_supersub(c, p, replace(rep, lambda1=lam1_h), k2)
    lower_phi, upper_phi = pair.phi_lower(xi), pair.phi_upper(xi)
    lower_psi, upper_psi = pair.psi_lower(xi), pair.psi_upper(xi)
    logger.info(
        f"Solving profile at c={c:.6g}: {xi.size} points, h={h:.4g}, beta={beta:.6g}, "
        f"lambda1_h={lam1_h:.8g} (lambda1={rep.lambda1:.8g})"
    )

    if initial is None:
        phi, psi = lower_phi.copy(), lower_psi.copy()
    else:
        phi, psi = (np.asarray(v, dtype=float) for v in initial)
        if phi.shape != xi.shape or psi.shape != xi.shape:
            raise PreconditionError(f"initial fields must have {xi.size} points")
        phi = np.clip(phi, lower_phi, upper_phi)
        psi = np.clip(psi, lower_psi, upper_psi)

    omega = opts.relaxation
    history = []
    since_change = 0
    gap = math.inf
    for iteration in range(1, opts.max_iter + 1):
        new_phi, new_psi, _ = apply_P(phi, psi, c, p, dk1, dk2, beta, method=opts.convolution)
        proj_phi = np.clip(new_phi, lower_phi, upper_phi)
        proj_psi = np.clip(new_psi, lower_psi, upper_psi)
        gap = float(max(np.max(np.abs(proj_phi - new_phi)), np.max(np.abs(proj_psi - new_psi))))
        diff = float(max(np.max(np.abs(proj_phi - phi)), np.max(np.abs(proj_psi - psi))))

        phi = phi + omega * (proj_phi - phi)
        psi = psi + omega * (proj_psi - psi)
        history.append(diff)
        since_change += 1

        if diff < opts.fix_tol and gap < PROJECTION_TOL:
            break
        if omega > MIN_RELAXATION and since_change >= OSCILLATION_COOLDOWN and _oscillating(history, opts.fix_tol):
            omega = max(MIN_RELAXATION, 0.5 * omega)
            since_change = 0
            logger.warning(f"Oscillating iterates at iteration {iteration}; relaxation lowered to {omega}")
        if iteration % 500 == 0:
            logger.debug(f"iteration {iteration}: diff={diff:.3e}, projection gap={gap:.3e}")
    else:
        raise NonConvergenceError(
            f"profile iteration did not converge in {opts.max_iter} iterations (last diff {history[-1]:.3e})",
            history=history,
        )

    check_phi, check_psi, _ = apply_P(phi, psi, c, p, dk1, dk2, beta, method=opts.convolution)
    fixed_gap = float(max(np.max(np.abs(check_phi - phi)), np.max(np.abs(check_psi - psi))))
    residual = wave_residual(phi, psi, c, p, dk1, dk2)

    left_err = max(abs(phi[0] - 1.0), abs(psi[0]))
    right_err = max(abs(phi[-1] - u2), abs(psi[-1] - u2))
    if max(left_err, right_err) > opts.boundary_tol:
        raise DomainTooSmallError(
            f"profile ends miss the limit states (left {left_err:.3g}, right {right_err:.3g}, "
            f"tolerance {opts.boundary_tol})",
            suggested=2.0 * L,
        )

    logger.info(
        f"Profile at c={c:.6g} converged after {iteration} iterations: "
        f"residual={residual:.3e}, fixed-point gap={fixed_gap:.3e}"
    )
    return WaveProfile(
        c=c,
        xi=xi,
        phi=phi,
        psi=psi,
        residual=residual,
        iterations=iteration,
        beta=beta,
        lambda1=lam1_h,
        fixed_point_gap=fixed_gap,
        projection_gap=gap,
        history=history,
    )


# ============================================================================
# CONTINUATION TO c = c*
# ============================================================================

def delta_limit(p: Params) -> float:
    """Upper bound min{(1+b)/8, u1*/2} on the normalization level."""
    eq = equilibria(p)
    if eq.classification != Classification.TWO_POSITIVE:
        raise InadmissibleParamsError("normalization needs two positive equilibria")
    return min((1.0 + p.b) / 8.0, eq.u1_star / 2.0)


def normalize_profile(wp: WaveProfile, delta: float) -> WaveProfile:
    """
    Translate so that psi(0) = delta at the first upward crossing of delta.

    Values beyond the grid ends are continued by the end values.

    Raises:
        NormalizationError: if psi never reaches delta
    """
    above = np.flatnonzero(wp.psi >= delta)
    if above.size == 0:
        raise NormalizationError(f"psi stays below delta={delta:.6g}")
    i = int(above[0])
    if i == 0:
        shift = float(wp.xi[0])
    else:
        lo, hi = wp.psi[i - 1], wp.psi[i]
        shift = float(wp.xi[i - 1] + (delta - lo) * (wp.xi[i] - wp.xi[i - 1]) / (hi - lo))
    moved = wp.xi + shift
    return replace(
        wp,
        phi=np.interp(moved, wp.xi, wp.phi),
        psi=np.interp(moved, wp.xi, wp.psi),
    )


def continuation_speeds(c_star: float, cont: ContinuationOptions) -> list:
    return [c_star * (1.0 + cont.factor * 2.0 ** (-n)) for n in range(cont.max_steps)]


def solve_profile_at_cstar(
    p: Params,
    k1: Kernel,
    k2: Kernel,
    opts: Optional[SolverOptions] = None,
    continuation: Optional[ContinuationOptions] = None,
    progress: bool = False,
) -> ContinuationResult:
    """
    Approach c = c* through c_n = c*(1 + factor 2^-n), n = 0, 1, ...

    Every solution is normalized to psi(0) = delta; the sequence stops once
    consecutive normalized profiles differ by less than the Cauchy tolerance.
    All speeds share one grid, sized for the most demanding of them, and each
    solve is warm-started from the previous solution.

    Raises:
        PreconditionError: if delta >= min{(1+b)/8, u1*/2}
    """
    opts = opts or SolverOptions()
    cont = continuation or ContinuationOptions()
    record = check_strong_allee_assumption(p)
    if not record.admissible:
        raise InadmissibleParamsError(f"continuation needs admissible parameters (violates {record.violated})", record)

    limit = delta_limit(p)
    delta = cont.delta if cont.delta is not None else 0.5 * limit
    if delta >= limit:
        raise PreconditionError(f"delta={delta} must be below min((1+b)/8, u1*/2) = {limit:.6g}")
    tol = cont.cauchy_tol

    c_star, lam_star = cstar(p, k2)
    speeds = continuation_speeds(c_star, cont)
    reports = [dispersion_report(p, k1, k2, c) for c in speeds]
    grids = [resolve_grid(opts, rep) for rep in reports]
    shared = opts.model_copy(
        update={"L": max(g[0] for g in grids), "h": min(g[1] for g in grids), "auto_grid": False}
    )
    logger.info(f"Continuation to c*={c_star:.8g} over {len(speeds)} speeds, delta={delta:.6g}, L={shared.L}")

    gaps = []
    used = []
    previous = None
    warm = None
    converged = False
    for c, rep in tqdm(list(zip(speeds, reports)), desc="Continuation", unit="speed", disable=not progress):
        wp = solve_profile(c, p, k1, k2, shared, rep=rep, initial=warm)
        warm = (wp.phi, wp.psi)
        normalized = normalize_profile(wp, delta)
        used.append(c)
        if previous is not None:
            gap = float(max(np.max(np.abs(normalized.phi - previous.phi)), np.max(np.abs(normalized.psi - previous.psi))))
            gaps.append(gap)
            logger.info(f"c={c:.8g}: normalized Cauchy gap {gap:.3e}")
            if gap < tol:
                converged = True
                previous = normalized
                break
        previous = normalized

    if not converged:
        logger.warning(f"Continuation stopped after {len(used)} speeds without reaching gap < {tol:.1e}")
    return ContinuationResult(
        profile=replace(previous, c=c_star),
        speeds=used,
        gaps=gaps,
        delta=delta,
        converged=converged,
    )


# ============================================================================
# TAIL DIAGNOSTICS
# ============================================================================

def tail_decay_rate(
    wp: WaveProfile,
    window: Optional[Tuple[int, int]] = None,
    u2_star: Optional[float] = None,
) -> float:
    """
    Least-squares slope of log psi over the left tail.

    Args:
        wp: solved or synthetic profile
        window: index range [start, stop); by default the run of points left of
            the first crossing of 0.01 u2* with psi > 1e-12
        u2_star: tail threshold reference; defaults to the right-end psi value

    Raises:
        WindowError: if the window leaves the tail or holds fewer than 3 points
    """
    psi = np.asarray(wp.psi, dtype=float)
    level = TAIL_FRACTION * (u2_star if u2_star is not None else float(psi[-1]))

    if window is None:
        above = np.flatnonzero(psi > level)
        stop = int(above[0]) if above.size else psi.size
        positive = np.flatnonzero(psi[:stop] > WINDOW_FLOOR)
        start = int(positive[0]) if positive.size else stop
    else:
        start, stop = window
        part = psi[start:stop]
        if part.size and (np.any(part <= EXPLICIT_WINDOW_FLOOR) or np.any(part > level)):
            raise WindowError(f"window [{start}, {stop}) leaves the tail region (0, {level:.3g}]")

    if stop - start < 3:
        raise WindowError(f"tail window [{start}, {stop}) holds fewer than 3 points")
    fit = stats.linregress(wp.xi[start:stop], np.log(psi[start:stop]))
    return float(fit.slope)


def log_derivative(wp: WaveProfile) -> np.ndarray:
    """Z(xi) = psi'/psi; NaN where psi vanishes."""
    slope = np.gradient(wp.psi, wp.h)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(wp.psi > 0, slope / wp.psi, np.nan)


def classify_left_limit(wp: WaveProfile, p: Params) -> Tuple[str, float]:
    """Kinetic equilibrium nearest to the profile's left end, with its distance."""
    eq = equilibria(p)
    candidates: Dict[str, Tuple[float, float]] = {"(b,0)": (p.b, 0.0), "(1,0)": (1.0, 0.0)}
    if eq.classification == Classification.TWO_POSITIVE:
        candidates["(u1*,u1*)"] = (eq.u1_star, eq.u1_star)
        candidates["(u2*,u2*)"] = (eq.u2_star, eq.u2_star)
    elif eq.classification == Classification.ONE_POSITIVE:
        candidates["(u*,u*)"] = (eq.u_star, eq.u_star)

    end = (float(wp.phi[0]), float(wp.psi[0]))
    distances = {name: math.hypot(end[0] - pt[0], end[1] - pt[1]) for name, pt in candidates.items()}
    label = min(distances, key=distances.get)
    return label, distances[label]


def right_tail_bounds(wp: WaveProfile, fraction: float = 0.1) -> Tuple[float, float, float, float]:
    """(phi_min, psi_min, psi_max, phi_max) over the last `fraction` of the grid."""
    count = max(1, int(round(fraction * wp.xi.size)))
    phi, psi = wp.phi[-count:], wp.psi[-count:]
    return float(phi.min()), float(psi.min()), float(psi.max()), float(phi.max())


def audit_quasi_monotone(
    c: float,
    p: Params,
    dk1: DiscreteKernel,
    dk2: DiscreteKernel,
    beta: float,
    rng: np.random.Generator,
    n_pairs: int = 50,
    n_points: int = 200,
    tol: float = 1e-12,
) -> QuasiMonotoneAudit:
    """
    Randomized dominance test of apply_P on the box.

    For random fields w and pointwise larger phi (resp. psi), checks that both
    outputs rise (resp. the first falls and the second rises).
    """
    lo = 0.5 * (1.0 + p.b)
    violations = 0
    worst = 0.0
    for _ in range(n_pairs):
        phi = rng.uniform(lo, 1.0, n_points)
        psi = rng.uniform(0.0, 1.0, n_points)
        phi_up = phi + rng.uniform(0.0, 1.0, n_points) * (1.0 - phi)
        psi_up = psi + rng.uniform(0.0, 1.0, n_points) * (1.0 - psi)

        base_phi, base_psi, _ = apply_P(phi, psi, c, p, dk1, dk2, beta)
        up1_phi, up1_psi, _ = apply_P(phi_up, psi, c, p, dk1, dk2, beta)
        up2_phi, up2_psi, _ = apply_P(phi, psi_up, c, p, dk1, dk2, beta)

        shortfall = max(
            float(np.max(base_phi - up1_phi)),
            float(np.max(base_psi - up1_psi)),
            float(np.max(up2_phi - base_phi)),
            float(np.max(base_psi - up2_psi)),
            0.0,
        )
        worst = max(worst, shortfall)
        if shortfall > tol:
            violations += 1

    if violations:
        logger.warning(f"quasi-monotone audit: {violations}/{n_pairs} pairs violate dominance (worst {worst:.3g})")
    return QuasiMonotoneAudit(n_pairs=n_pairs, violations=violations, worst=worst)
