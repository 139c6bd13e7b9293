"""
Tests for travelwave.evolve module.
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', '..'))

from scripts.travelwave.dispersion import cstar
from scripts.travelwave.errors import (
    BlowUpError,
    DomainTooSmallError,
    InadmissibleParamsError,
    InsufficientHistoryError,
    PreconditionError,
    TimeStepError,
)
from scripts.travelwave.evolve import (
    bump_profile,
    exclusion_ray,
    front_position,
    front_speed,
    logistic_positivity_bound,
    logistic_step,
    positivity_bound,
    run_invasion,
    run_logistic_comparison,
    slow_wave_excluded,
    step,
    translation_history,
)
from scripts.travelwave.kernel import GaussianKernel, discretize
from scripts.travelwave.models import Domain, LogisticOptions, SimOptions, SimState
from .fixtures import SQRT_E, U2_STAR, gaussian, make_reference_params, reference_params

SLOW_SPEEDS = (0.5, 0.8)


@pytest.fixture(scope="module")
def invasion():
    """Predator invasion on [-200, 200] up to T = 80 with probes on the exclusion rays."""
    p = make_reference_params()
    k = GaussianKernel(1.0)
    c_star = cstar(p, k)[0]
    probes = tuple(exclusion_ray(f * c_star, c_star) for f in SLOW_SPEEDS)
    opts = SimOptions(dt=0.1, T=80.0, stepper="rk4", probe_speeds=probes)
    return run_invasion(p, k, k, Domain(half_width=200.0, h=0.2), opts)


class TestTimeStep:
    """Test suite for the explicit step."""

    @pytest.fixture
    def setup(self, reference_params, gaussian):
        dk = discretize(gaussian, 0.2)
        x = np.linspace(-20.0, 20.0, 201)
        return reference_params, dk, x

    def test_positivity_bounds(self, reference_params):
        assert positivity_bound(reference_params) == pytest.approx(0.9 / (1.0 + 4.0 + 0.1 / 2.56))
        assert logistic_positivity_bound(reference_params) == pytest.approx(0.45)

    @pytest.mark.parametrize("stepper", ["euler", "rk4"])
    def test_prey_only_state_fixed(self, setup, stepper):
        p, dk, x = setup
        state = SimState(t=0.0, x=x, u=np.ones_like(x), v=np.zeros_like(x))
        out = step(state, p, dk, dk, SimOptions(dt=0.1, stepper=stepper))
        assert np.all(out.u == 1.0) and np.all(out.v == 0.0)
        assert out.t == pytest.approx(0.1)

    def test_coexistence_state_fixed(self, setup):
        p, dk, x = setup
        state = SimState(t=0.0, x=x, u=np.full_like(x, U2_STAR), v=np.full_like(x, U2_STAR))
        out = step(state, p, dk, dk, SimOptions(dt=0.1))
        assert np.allclose(out.u, U2_STAR, atol=1e-12)
        assert np.allclose(out.v, U2_STAR, atol=1e-12)

    def test_allee_state_fixed(self, setup):
        p, dk, x = setup
        state = SimState(t=0.0, x=x, u=np.full_like(x, p.b), v=np.zeros_like(x))
        out = step(state, p, dk, dk, SimOptions(dt=0.1))
        assert np.allclose(out.u, p.b, atol=1e-15)
        assert np.all(out.v == 0.0)

    def test_histories_carried_over(self, setup):
        p, dk, x = setup
        history = [(0.0, 1.0)]
        state = SimState(t=0.0, x=x, u=np.ones_like(x), v=np.zeros_like(x), front_history=history)
        out = step(state, p, dk, dk, SimOptions(dt=0.1))
        assert out.front_history is history

    def test_negative_predator_values_counted(self, setup):
        """A dip below zero spreads to its stencil; every clipped value is counted once."""
        p, dk, x = setup
        v = np.zeros_like(x)
        v[100] = -1e-3
        state = SimState(t=0.0, x=x, u=np.ones_like(x), v=v, v_clips=5)
        out = step(state, p, dk, dk, SimOptions(dt=0.1, stepper="euler"))
        assert out.v.min() == 0.0
        assert out.v_clips > 5
        again = step(out, p, dk, dk, SimOptions(dt=0.1, stepper="euler"))
        assert again.v_clips == out.v_clips

    def test_nonnegative_step_counts_nothing(self, setup):
        p, dk, x = setup
        state = SimState(t=0.0, x=x, u=np.ones_like(x), v=np.where(np.abs(x) < 2.0, 0.4, 0.0))
        assert step(state, p, dk, dk, SimOptions(dt=0.1)).v_clips == 0

    def test_time_step_above_bound(self, setup):
        p, dk, x = setup
        state = SimState(t=0.0, x=x, u=np.ones_like(x), v=np.zeros_like(x))
        with pytest.raises(TimeStepError) as excinfo:
            step(state, p, dk, dk, SimOptions(dt=0.5))
        assert excinfo.value.bound == pytest.approx(positivity_bound(p))

    def test_prey_below_floor(self, setup):
        p, dk, x = setup
        u = np.ones_like(x)
        u[50] = 1e-9
        state = SimState(t=0.0, x=x, u=u, v=np.zeros_like(x))
        with pytest.raises(BlowUpError):
            step(state, p, dk, dk, SimOptions(dt=0.1))

    def test_unknown_stepper(self, setup):
        p, dk, x = setup
        state = SimState(t=0.0, x=x, u=np.ones_like(x), v=np.zeros_like(x))
        opts = SimOptions.model_construct(**{**SimOptions().model_dump(), "stepper": "leapfrog"})
        with pytest.raises(PreconditionError):
            step(state, p, dk, dk, opts)


class TestFrontTracking:
    """Test suite for level-set tracking and speed fits."""

    def test_front_position_interpolates(self):
        x = np.linspace(0.0, 10.0, 11)
        v = np.clip(1.0 - 0.1 * x, 0.0, 1.0)
        assert front_position(x, v, 0.25) == pytest.approx(7.5)

    def test_front_position_rightmost_crossing(self):
        x = np.linspace(0.0, 10.0, 11)
        v = np.array([1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0], dtype=float)
        assert front_position(x, v, 0.5) == pytest.approx(4.5)

    def test_front_position_below_level(self):
        x = np.linspace(0.0, 10.0, 11)
        assert math.isnan(front_position(x, np.zeros_like(x), 0.5))

    def test_front_position_at_boundary(self):
        x = np.linspace(0.0, 10.0, 11)
        assert front_position(x, np.ones_like(x), 0.5) == 10.0

    def test_linear_history(self):
        history = [(float(t), 2.0 * t + 3.0) for t in range(40)]
        estimate = front_speed(history)
        assert estimate.speed == pytest.approx(2.0, abs=1e-12)
        assert estimate.half_width == pytest.approx(0.0, abs=1e-10)
        assert estimate.n_samples == 20

    def test_jittered_history(self):
        """Alternating jitter of size h moves the slope by less than h / span."""
        h = 0.2
        times = np.arange(40.0)
        history = [(t, 2.0 * t + h * (-1) ** i) for i, t in enumerate(times)]
        estimate = front_speed(history, window=(0.0, 39.0))
        assert abs(estimate.speed - 2.0) <= h / 39.0
        assert estimate.half_width > 0.0

    def test_nan_samples_ignored(self):
        history = [(float(t), math.nan) for t in range(5)] + [(float(t), 1.5 * t) for t in range(5, 45)]
        assert front_speed(history, window=(0.0, 50.0)).speed == pytest.approx(1.5)

    def test_empty_history(self):
        with pytest.raises(InsufficientHistoryError):
            front_speed([])

    def test_short_window(self):
        history = [(float(t), float(t)) for t in range(40)]
        with pytest.raises(InsufficientHistoryError):
            front_speed(history, window=(0.0, 5.0))

    def test_translation_is_tracked_exactly(self):
        x = np.linspace(-10.0, 200.0, 2101)
        history = translation_history(1.7, x, np.linspace(0.0, 100.0, 101))
        assert front_speed(history).speed == pytest.approx(1.7, abs=1e-8)


class TestInvasion:
    """Test suite for the predator invasion run."""

    def test_speed_matches_cstar(self, invasion):
        assert invasion.c_star == pytest.approx(SQRT_E, abs=1e-10)
        assert abs(invasion.ratio - 1.0) <= 0.05
        assert invasion.theta == pytest.approx(0.5 * U2_STAR)

    def test_front_history_recorded(self, invasion):
        history = invasion.state.front_history
        assert len(history) == 81
        assert history[0][0] == 0.0
        assert history[-1][0] == pytest.approx(80.0)
        assert invasion.state.t == pytest.approx(80.0)

    def test_prey_stays_in_box(self, invasion, reference_params):
        state = invasion.state
        assert state.u.min() >= 0.5 * (1.0 + reference_params.b) - 1e-6
        assert state.u.max() <= 1.0 + 1e-12
        assert state.v.min() >= 0.0

    @pytest.mark.parametrize("fraction", SLOW_SPEEDS)
    def test_slow_waves_excluded(self, invasion, fraction):
        assert slow_wave_excluded(invasion, fraction * invasion.c_star)

    def test_predator_never_clipped(self, invasion):
        assert invasion.state.v_clips == 0

    def test_speed_independent_of_level(self, invasion):
        """Tracking a lower level set gives the same asymptotic speed."""
        p = make_reference_params()
        k = GaussianKernel(1.0)
        low = run_invasion(p, k, k, Domain(half_width=200.0, h=0.2),
                           SimOptions(dt=0.1, T=80.0, stepper="rk4", theta=0.25 * U2_STAR))
        assert low.theta == pytest.approx(0.25 * U2_STAR)
        assert low.speed.speed == pytest.approx(invasion.speed.speed, rel=0.02)

    def test_doubling_growth_rate_scales_speed_like_cstar(self, invasion, gaussian):
        """s = 2 speeds the front up by the same factor as the minimal speed."""
        p = make_reference_params(s=2.0)
        fast = run_invasion(p, gaussian, gaussian, Domain(half_width=300.0, h=0.2),
                            SimOptions(dt=0.1, T=80.0, stepper="rk4"))
        expected = cstar(p, gaussian)[0] / cstar(make_reference_params(), gaussian)[0]
        assert expected == pytest.approx(1.5436, abs=1e-3)
        assert fast.speed.speed / invasion.speed.speed == pytest.approx(expected, rel=0.02)

    def test_speed_nondecreasing_in_growth_and_dispersal(self, gaussian):
        """Raising s, then d2, never slows the invasion."""
        speeds = []
        for s, d2 in [(1.0, 1.0), (1.5, 1.0), (1.5, 1.5)]:
            result = run_invasion(make_reference_params(s=s, d2=d2), gaussian, gaussian,
                                  Domain(half_width=200.0, h=0.2), SimOptions(dt=0.1, T=40.0, stepper="rk4"))
            speeds.append(result.speed.speed)
        assert speeds[0] <= speeds[1] <= speeds[2]

    def test_unprobed_ray(self, invasion):
        with pytest.raises(PreconditionError):
            slow_wave_excluded(invasion, 0.1 * invasion.c_star)

    def test_speed_not_below_cstar(self, invasion):
        with pytest.raises(PreconditionError):
            slow_wave_excluded(invasion, invasion.c_star)

    def test_exclusion_ray(self):
        assert exclusion_ray(1.0, 3.0) == 2.0

    def test_domain_too_small(self, reference_params, gaussian):
        with pytest.raises(DomainTooSmallError) as excinfo:
            run_invasion(reference_params, gaussian, gaussian, Domain(half_width=30.0, h=0.2), SimOptions(T=5.0))
        assert excinfo.value.suggested == 60.0

    def test_inadmissible(self, gaussian):
        with pytest.raises(InadmissibleParamsError):
            run_invasion(make_reference_params(m=0.5), gaussian, gaussian)


class TestLogisticComparison:
    """Test suite for the scalar comparison equation."""

    def test_bump_profile(self):
        x = np.linspace(-3.0, 3.0, 61)
        w = bump_profile(x, zeta=0.1, eps1=2.0)
        assert np.all(w[np.abs(x) <= 1.0] == pytest.approx(0.025))
        assert np.all(w[np.abs(x) >= 2.0] == 0.0)
        right = w[x >= 0]
        assert np.all(np.diff(right) <= 0.0)
        assert np.allclose(w, w[::-1])

    def test_uniform_data_follow_logistic_ode(self, reference_params, gaussian):
        """Spatially uniform data obey w' = s w (1 - w/K) with K = (1+b)/2."""
        p = reference_params
        domain = Domain(half_width=20.0, h=0.5)
        n = domain.grid().size
        w0 = 0.1
        report = run_logistic_comparison(
            p, gaussian, domain, SimOptions(T=10.0, dt=0.1, stepper="rk4"), initial=np.full(n, w0)
        )
        capacity = 0.5 * (1.0 + p.b)
        exact = capacity / (1.0 + (capacity / w0 - 1.0) * math.exp(-p.s * 10.0))
        assert report.capacity == pytest.approx(capacity)
        assert np.allclose(report.final, exact, rtol=1e-5)
        assert np.all(np.diff(report.floors[:, 0]) > 0.0)
        assert report.final.max() < capacity

    def test_ordered_pairs_stay_ordered(self, reference_params, gaussian):
        """Explicit Euler below the logistic bound preserves the order of 100 random pairs."""
        p = reference_params
        dk = discretize(gaussian, 0.25)
        capacity = 0.5 * (1.0 + p.b)
        rng = np.random.default_rng(5)
        for _ in range(100):
            low = rng.uniform(0.0, capacity, 120)
            high = low + rng.uniform(0.0, 1.0, 120) * (capacity - low)
            for _ in range(10):
                low = logistic_step(low, p, dk, 0.4, capacity)
                high = logistic_step(high, p, dk, 0.4, capacity)
                assert np.all(low <= high + 1e-15)

    def test_larger_initial_data_dominate(self, reference_params, gaussian):
        domain = Domain(half_width=80.0, h=0.25)
        x = domain.grid()
        opts = SimOptions(T=5.0, dt=0.2, stepper="euler")
        small = run_logistic_comparison(reference_params, gaussian, domain, opts,
                                        initial=bump_profile(x, 0.1, 2.0))
        large = run_logistic_comparison(reference_params, gaussian, domain, opts,
                                        initial=bump_profile(x, 0.2, 3.0))
        assert np.all(small.final <= large.final + 1e-15)

    def test_spreads_at_capacity(self, reference_params, gaussian):
        """inf over |x| < c t approaches (1+b)/2 for c below c*."""
        report = run_logistic_comparison(
            reference_params,
            gaussian,
            Domain(half_width=340.0, h=0.25),
            SimOptions(T=160.0, dt=0.2, stepper="rk4", record_interval=4.0),
            LogisticOptions(speed_fractions=(0.3, 0.6, 0.9)),
        )
        assert report.speeds == pytest.approx(np.array([0.3, 0.6, 0.9]) * SQRT_E)
        assert np.all(report.final_floors >= 0.98 * report.capacity)
        assert report.times[-1] == pytest.approx(160.0)

    def test_time_step_above_bound(self, reference_params, gaussian):
        with pytest.raises(TimeStepError):
            run_logistic_comparison(reference_params, gaussian, opts=SimOptions(dt=0.5))

    def test_initial_length_checked(self, reference_params, gaussian):
        with pytest.raises(PreconditionError):
            run_logistic_comparison(reference_params, gaussian, Domain(half_width=10.0, h=0.5),
                                    SimOptions(T=1.0, dt=0.1), initial=np.zeros(7))
