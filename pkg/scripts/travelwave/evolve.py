"""
Time-domain simulation of the nonlocal predator-prey system

    u_t = d1 N1[u] + u (1-u)(u/b-1) - m u v/(u + a v)
    v_t = d2 N2[v] + s v (1 - v/u)

and of the scalar logistic comparison equation w_t = d2 N2[w] + s w (1 - w/K),
with front tracking for invasion and spreading speeds.
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from tqdm import tqdm

from .dispersion import cstar
from .errors import (
    BlowUpError,
    DomainTooSmallError,
    InadmissibleParamsError,
    InsufficientHistoryError,
    PreconditionError,
    TimeStepError,
)
from .kernel import DiscreteKernel, Kernel, discretize, nonlocal_op
from .kinetics import check_strong_allee_assumption, equilibria, reaction_f, reaction_g, reaction_slope_bounds
from .models import (
    Domain,
    InvasionResult,
    LogisticOptions,
    LogisticReport,
    Params,
    SimOptions,
    SimState,
    SpeedEstimate,
)

logger = logging.getLogger(__name__)

SAFETY = 0.9
BUMP_HALF_WIDTH = 1.0
MARGIN_RADII = 5.0
MIN_SAMPLES = 10
CONFIDENCE = 0.95
LEAK_LEVEL = 1e-3

Fields = Tuple[np.ndarray, ...]


# ============================================================================
# TIME STEPPING
# ============================================================================

def positivity_bound(p: Params) -> float:
    """Largest dt keeping the explicit step order-preserving on the invariant box."""
    kappa1, kappa2 = reaction_slope_bounds(p)
    return SAFETY / (max(p.d1, p.d2) + max(kappa1, kappa2))


def logistic_positivity_bound(p: Params) -> float:
    return SAFETY / (p.d2 + p.s)


def check_time_step(dt: float, bound: float) -> None:
    if dt > bound:
        raise TimeStepError(f"dt={dt} exceeds the positivity bound {bound:.6g}", bound=bound)


def _advance(fields: Fields, rhs: Callable[..., Fields], dt: float, stepper: str) -> Fields:
    if stepper == "euler":
        return tuple(w + dt * k for w, k in zip(fields, rhs(*fields)))
    if stepper != "rk4":
        raise PreconditionError(f"unknown stepper: {stepper}")
    k1 = rhs(*fields)
    k2 = rhs(*(w + 0.5 * dt * k for w, k in zip(fields, k1)))
    k3 = rhs(*(w + 0.5 * dt * k for w, k in zip(fields, k2)))
    k4 = rhs(*(w + dt * k for w, k in zip(fields, k3)))
    return tuple(
        w + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
        for w, a, b, c, d in zip(fields, k1, k2, k3, k4)
    )


def step(state: SimState, p: Params, dk1: DiscreteKernel, dk2: DiscreteKernel, opts: SimOptions) -> SimState:
    """
    Advance (u, v) by one time step.

    Raises:
        TimeStepError: if dt exceeds the positivity bound
        BlowUpError: if u drops below opts.u_floor
    """
    check_time_step(opts.dt, positivity_bound(p))

    def rhs(u, v):
        du = p.d1 * nonlocal_op(dk1, u, opts.extension) + u * reaction_f(u, v, p)
        dv = p.d2 * nonlocal_op(dk2, v, opts.extension) + v * reaction_g(u, v, p)
        return du, dv

    if state.u.min() < opts.u_floor:
        raise BlowUpError(f"prey density {state.u.min():.3g} below floor at t={state.t:.4g}")
    u, v = _advance((state.u, state.v), rhs, opts.dt, opts.stepper)
    if u.min() < opts.u_floor or not np.all(np.isfinite(u)):
        raise BlowUpError(f"prey density fell below {opts.u_floor} at t={state.t + opts.dt:.4g}")
    clipped = int(np.count_nonzero(v < 0.0))
    if clipped:
        logger.debug(f"t={state.t + opts.dt:.4g}: clipped {clipped} negative predator values (min {v.min():.3g})")
    return SimState(
        t=state.t + opts.dt,
        x=state.x,
        u=u,
        v=np.maximum(v, 0.0),
        front_history=state.front_history,
        probe_history=state.probe_history,
        v_clips=state.v_clips + clipped,
    )


def logistic_step(
    w: np.ndarray,
    p: Params,
    dk2: DiscreteKernel,
    dt: float,
    capacity: float,
    stepper: str = "euler",
    extension: str = "clamp",
) -> np.ndarray:
    """One step of w_t = d2 N2[w] + s w (1 - w/capacity)."""
    check_time_step(dt, logistic_positivity_bound(p))

    def rhs(field):
        return (p.d2 * nonlocal_op(dk2, field, extension) + p.s * field * (1.0 - field / capacity),)

    (out,) = _advance((np.asarray(w, dtype=float),), rhs, dt, stepper)
    return np.maximum(out, 0.0)


# ============================================================================
# FRONT TRACKING
# ============================================================================

def front_position(x: np.ndarray, v: np.ndarray, theta: float) -> float:
    """Rightmost x with v >= theta, linearly interpolated; NaN if v < theta everywhere."""
    above = np.flatnonzero(v >= theta)
    if above.size == 0:
        return math.nan
    i = int(above[-1])
    if i == v.size - 1:
        return float(x[-1])
    v0, v1 = v[i], v[i + 1]
    return float(x[i] + (v0 - theta) * (x[i + 1] - x[i]) / (v0 - v1))


def front_speed(
    history: Sequence[Tuple[float, float]],
    window: Optional[Tuple[float, float]] = None,
) -> SpeedEstimate:
    """
    Least-squares slope of front position against time with a 95% Student-t half-width.

    Args:
        history: (t, position) samples; NaN positions are ignored
        window: time range to fit; defaults to the second half of the samples

    Raises:
        InsufficientHistoryError: with fewer than 10 samples in the window
    """
    samples = [(t, xf) for t, xf in history if math.isfinite(xf)]
    if window is None:
        samples = samples[len(samples) // 2:]
    else:
        samples = [(t, xf) for t, xf in samples if window[0] <= t <= window[1]]
    if len(samples) < MIN_SAMPLES:
        raise InsufficientHistoryError(f"front speed needs {MIN_SAMPLES} samples, got {len(samples)}")

    times, positions = np.array(samples).T
    fit = stats.linregress(times, positions)
    n = len(samples)
    half_width = float(stats.t.ppf(0.5 + CONFIDENCE / 2.0, n - 2) * fit.stderr)
    return SpeedEstimate(speed=float(fit.slope), half_width=half_width, n_samples=n)


def translation_history(
    speed: float,
    x: np.ndarray,
    times: Sequence[float],
    theta: float = 0.5,
    ramp: float = 4.0,
) -> List[Tuple[float, float]]:
    """
    Track the exact translate v(x, t) = R(x - speed t) of a unit ramp of width
    `ramp`; linear interpolation recovers its level set without error.
    """
    history = []
    for t in times:
        v = np.clip(0.5 - (x - speed * t) / ramp, 0.0, 1.0)
        history.append((float(t), front_position(x, v, theta)))
    return history


# ============================================================================
# INVASION RUN
# ============================================================================

def run_invasion(
    p: Params,
    k1: Kernel,
    k2: Kernel,
    domain: Optional[Domain] = None,
    opts: Optional[SimOptions] = None,
) -> InvasionResult:
    """
    Predator invasion of the prey-only state.

    Starts from u = 1 and a predator bump of height u2*/2 on |x| <= 1, tracks
    the right front at level theta every record_interval, and fits its speed
    over the second half of the run. Probe rays x = c t listed in
    opts.probe_speeds record v along them.

    Raises:
        DomainTooSmallError: if the front comes within 5 kernel radii of the boundary
    """
    domain = domain or Domain()
    opts = opts or SimOptions()
    record = check_strong_allee_assumption(p)
    if not record.admissible:
        raise InadmissibleParamsError(f"invasion run needs admissible parameters (violates {record.violated})", record)
    check_time_step(opts.dt, positivity_bound(p))

    c_star = cstar(p, k2)[0]
    u2 = equilibria(p).u2_star
    theta = opts.theta if opts.theta is not None else 0.5 * u2

    x = domain.grid()
    h = float(x[1] - x[0])
    dk1, dk2 = discretize(k1, h), discretize(k2, h)
    margin = MARGIN_RADII * max(dk1.truncation_radius, dk2.truncation_radius)

    state = SimState(
        t=0.0,
        x=x,
        u=np.ones_like(x),
        v=np.where(np.abs(x) <= BUMP_HALF_WIDTH, 0.5 * u2, 0.0),
        probe_history={float(c): [] for c in opts.probe_speeds},
    )
    n_steps = int(round(opts.T / opts.dt))
    every = max(1, int(round(opts.record_interval / opts.dt)))
    logger.info(f"Invasion run: {x.size} points, dt={opts.dt}, T={opts.T}, theta={theta:.6g}, c*={c_star:.6g}")

    def record_front(st: SimState) -> None:
        front = front_position(st.x, st.v, theta)
        if math.isfinite(front) and front > st.x[-1] - margin:
            raise DomainTooSmallError(
                f"front at x={front:.4g} reached within {margin:.3g} of the boundary at t={st.t:.4g}",
                suggested=2.0 * domain.half_width,
            )
        st.front_history.append((st.t, front))
        for speed, samples in st.probe_history.items():
            samples.append((st.t, float(np.interp(speed * st.t, st.x, st.v))))

    record_front(state)
    for n in tqdm(range(1, n_steps + 1), desc="Invasion", unit="step", disable=not opts.progress):
        state = step(state, p, dk1, dk2, opts)
        if n % every == 0:
            record_front(state)

    if state.v_clips:
        logger.warning(f"Predator density was clipped at 0 in {state.v_clips} grid values over the run")
    speed = front_speed(state.front_history)
    logger.info(
        f"Measured invasion speed {speed.speed:.6g} +/- {speed.half_width:.2g} "
        f"(ratio to c* = {speed.speed / c_star:.4f})"
    )
    return InvasionResult(state=state, speed=speed, c_star=c_star, theta=theta)


def exclusion_ray(c0: float, c_star: float) -> float:
    """Ray speed (c0 + c*)/2 used to rule out waves slower than c*."""
    return 0.5 * (c0 + c_star)


def slow_wave_excluded(result: InvasionResult, c0: float, tail: float = 0.25) -> bool:
    """
    True when v along x = ((c0 + c*)/2) t stays at or above theta over the last
    `tail` fraction of the run, which no wave travelling at c0 < c* allows.

    Raises:
        PreconditionError: if c0 >= c* or the ray was not probed
    """
    if c0 >= result.c_star:
        raise PreconditionError(f"c0={c0} must be below c*={result.c_star:.6g}")
    ray = exclusion_ray(c0, result.c_star)
    key = next((c for c in result.state.probe_history if abs(c - ray) <= 1e-9 * max(1.0, ray)), None)
    if key is None:
        raise PreconditionError(f"ray speed {ray:.6g} was not probed; add it to probe_speeds")
    samples = result.state.probe_history[key]
    t_end = samples[-1][0]
    late = [v for t, v in samples if t >= (1.0 - tail) * t_end]
    return bool(late) and min(late) >= result.theta


# ============================================================================
# LOGISTIC COMPARISON
# ============================================================================

def bump_profile(x: np.ndarray, zeta: float, eps1: float) -> np.ndarray:
    """zeta/4 on |x| <= eps1/2, linear flanks down to 0 at |x| = eps1, zero beyond."""
    r = np.abs(np.asarray(x, dtype=float))
    flank = 0.25 * zeta * (eps1 - r) / (0.5 * eps1)
    return np.where(r <= 0.5 * eps1, 0.25 * zeta, np.clip(flank, 0.0, 0.25 * zeta))


def run_logistic_comparison(
    p: Params,
    k2: Kernel,
    domain: Optional[Domain] = None,
    opts: Optional[SimOptions] = None,
    logistic: Optional[LogisticOptions] = None,
    initial: Optional[np.ndarray] = None,
) -> LogisticReport:
    """
    Spread of the scalar logistic comparison equation from a small bump.

    Records inf over |x| < c t of w at every record time for c = fraction * c*
    per fraction in logistic.speed_fractions.

    Raises:
        TimeStepError: if dt exceeds 0.9/(d2 + s)
        DomainTooSmallError: if w rises above 1e-3 capacity within 5 kernel radii of the boundary
            (checked only when the initial data starts below that level there)
    """
    domain = domain or Domain()
    opts = opts or SimOptions(stepper="euler")
    logistic = logistic or LogisticOptions()
    check_time_step(opts.dt, logistic_positivity_bound(p))

    capacity = logistic.capacity if logistic.capacity is not None else 0.5 * (1.0 + p.b)
    c_star = cstar(p, k2)[0]
    speeds = c_star * np.asarray(logistic.speed_fractions, dtype=float)

    x = domain.grid()
    h = float(x[1] - x[0])
    dk2 = discretize(k2, h)
    margin = MARGIN_RADII * dk2.truncation_radius
    edge = np.abs(x) > x[-1] - margin

    w = bump_profile(x, logistic.zeta, logistic.eps1) if initial is None else np.asarray(initial, dtype=float)
    if w.shape != x.shape:
        raise PreconditionError(f"initial data must have {x.size} points")

    watch_edge = not np.any(w[edge] > LEAK_LEVEL * capacity)
    n_steps = int(round(opts.T / opts.dt))
    every = max(1, int(round(opts.record_interval / opts.dt)))
    times: List[float] = []
    floors: List[np.ndarray] = []
    logger.info(f"Logistic comparison: capacity={capacity:.6g}, speeds={np.round(speeds, 6).tolist()}")

    for n in tqdm(range(1, n_steps + 1), desc="Logistic", unit="step", disable=not opts.progress):
        w = logistic_step(w, p, dk2, opts.dt, capacity, opts.stepper, opts.extension)
        if n % every:
            continue
        t = n * opts.dt
        if watch_edge and np.any(w[edge] > LEAK_LEVEL * capacity):
            raise DomainTooSmallError(
                f"logistic solution reached the boundary layer at t={t:.4g}",
                suggested=2.0 * domain.half_width,
            )
        row = []
        for c in speeds:
            inside = np.abs(x) < c * t
            row.append(float(w[inside].min()) if inside.any() else float(np.interp(0.0, x, w)))
        times.append(t)
        floors.append(np.array(row))

    report = LogisticReport(
        times=np.array(times),
        speeds=speeds,
        floors=np.array(floors),
        capacity=capacity,
        c_star=c_star,
        x=x,
        final=w,
    )
    if floors:
        logger.info(f"Final floors relative to capacity: {np.round(report.final_floors / capacity, 4).tolist()}")
    return report
