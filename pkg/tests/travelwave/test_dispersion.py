"""
Tests for travelwave.dispersion module.
"""

import math
import os
import sys
from unittest.mock import patch

import numpy as np
import pytest
from scipy import optimize

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', '..'))

from scripts.travelwave.dispersion import (
    check_sign_pattern,
    cstar,
    delta,
    dispersion_report,
    eta_select,
    lambda_roots,
    pi_value,
)
from scripts.travelwave.errors import EtaSelectionError, NoRootsError, PreconditionError, UnboundedMinimizerError
from scripts.travelwave.kernel import GaussianKernel, LaplaceKernel, MomentDefinedKernel
from .fixtures import SQRT_E, gaussian, local_kernel, make_reference_params, reference_params, reference_report


class TestCharacteristicFunctions:
    """Test suite for Delta and Pi."""

    @pytest.mark.parametrize("c", [0.0, 1.0, 7.5])
    def test_delta_at_zero(self, reference_params, gaussian, c):
        """Delta(0, c) = s."""
        assert delta(0.0, c, reference_params, gaussian) == pytest.approx(reference_params.s)

    @pytest.mark.parametrize("c", [0.0, 1.0, 7.5])
    def test_pi_at_zero(self, reference_params, gaussian, c):
        """Pi(0, c) = 0."""
        assert pi_value(0.0, c, reference_params, gaussian) == 0.0

    def test_local_reduction_values(self, reference_params, local_kernel):
        """M = 1 + lam^2: Delta(1, 2) = 0 and Delta(1, 3) = -1."""
        assert delta(1.0, 2.0, reference_params, local_kernel) == pytest.approx(0.0, abs=1e-15)
        assert delta(1.0, 3.0, reference_params, local_kernel) == pytest.approx(-1.0)

    def test_vectorized(self, reference_params, gaussian):
        lam = np.linspace(0.0, 2.0, 9)
        values = delta(lam, 2.0, reference_params, gaussian)
        assert values.shape == (9,)
        assert np.allclose(values, np.exp(0.5 * lam ** 2) - 1.0 - 2.0 * lam + 1.0)


class TestCstar:
    """Test suite for the minimal wave speed."""

    def test_local_reduction(self, reference_params, local_kernel):
        """inf (lam^2 + 1)/lam = 2 at lam = 1."""
        c_star, lam_star = cstar(reference_params, local_kernel)
        assert c_star == pytest.approx(2.0, abs=1e-10)
        assert lam_star == pytest.approx(1.0, abs=1e-6)

    def test_local_reduction_scaled(self, local_kernel):
        """d2 = 2, s = 3: c* = 2 sqrt(6) at lam = sqrt(3/2)."""
        c_star, lam_star = cstar(make_reference_params(d2=2.0, s=3.0), local_kernel)
        assert c_star == pytest.approx(2.0 * math.sqrt(6.0), abs=1e-10)
        assert lam_star == pytest.approx(math.sqrt(1.5), abs=1e-6)

    def test_gaussian(self, reference_params, gaussian):
        """e^{lam^2/2}/lam is minimized at lam = 1 with value sqrt(e)."""
        c_star, lam_star = cstar(reference_params, gaussian)
        assert c_star == pytest.approx(SQRT_E, abs=1e-10)
        assert lam_star == pytest.approx(1.0, abs=1e-6)

    def test_laplace_unit(self, reference_params):
        """1/(lam (1 - lam^2)) is minimized at 1/sqrt(3) with value 3 sqrt(3)/2."""
        c_star, lam_star = cstar(reference_params, LaplaceKernel(1.0))
        assert c_star == pytest.approx(1.5 * math.sqrt(3.0), abs=1e-10)
        assert lam_star == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-6)

    @pytest.mark.parametrize("d2,s", [(1.0, 1.0), (0.5, 1.0), (2.0, 1.0), (1.0, 0.5), (1.0, 3.0), (3.0, 2.0)])
    @pytest.mark.parametrize("kernel,cap", [(GaussianKernel(1.0), 6.0), (LaplaceKernel(2.0), 2.0)])
    def test_against_grid_search(self, d2, s, kernel, cap):
        """Brute-force grid of step 1e-5."""
        p = make_reference_params(d2=d2, s=s)
        lam = np.arange(1e-5, cap, 1e-5)
        q = (d2 * (kernel.moment(lam) - 1.0) + s) / lam
        c_star, _ = cstar(p, kernel)
        assert c_star == pytest.approx(float(q.min()), abs=1e-7)
        assert c_star <= float(q.min()) + 1e-12

    def test_unbounded_minimizer(self, reference_params):
        """M = 1 leaves s/lam decreasing forever."""
        flat = MomentDefinedKernel.from_coefficients([0.0])
        with pytest.raises(UnboundedMinimizerError):
            cstar(reference_params, flat)

    def test_increasing_in_s(self, gaussian):
        speeds = [cstar(make_reference_params(s=s), gaussian)[0] for s in (0.5, 1.0, 2.0)]
        assert speeds == sorted(speeds)
        assert speeds[0] < speeds[1] < speeds[2]


class TestLambdaRoots:
    """Test suite for the two decay rates."""

    def test_local_reduction(self, reference_params, local_kernel):
        """lam^2 - 2.5 lam + 1 = 0 has roots 0.5 and 2."""
        lam1, lam2 = lambda_roots(2.5, reference_params, local_kernel)
        assert lam1 == pytest.approx(0.5, abs=1e-10)
        assert lam2 == pytest.approx(2.0, abs=1e-10)

    def test_gaussian_against_brentq(self, reference_params, gaussian):
        c = 1.2 * SQRT_E
        lam1, lam2 = lambda_roots(c, reference_params, gaussian)

        def fn(lam):
            return math.exp(0.5 * lam * lam) - c * lam

        assert lam1 == pytest.approx(optimize.brentq(fn, 1e-9, 1.0, xtol=1e-15), abs=1e-10)
        assert lam2 == pytest.approx(optimize.brentq(fn, 1.0, 5.0, xtol=1e-15), abs=1e-10)
        assert lam1 == pytest.approx(0.61, abs=0.01)
        assert lam2 == pytest.approx(1.45, abs=0.01)

    def test_tangency_pair(self, reference_params, gaussian):
        c_star, lam_star = cstar(reference_params, gaussian)
        lam1, lam2 = lambda_roots(c_star, reference_params, gaussian)
        assert lam1 == lam2 == lam_star
        assert abs(lam1 - 1.0) < 1e-6

    def test_below_cstar(self, reference_params, gaussian):
        with pytest.raises(NoRootsError):
            lambda_roots(0.5 * SQRT_E, reference_params, gaussian)

    def test_roots_are_zeros(self, reference_params, gaussian):
        for factor in (1.05, 2.0, 5.0):
            c = factor * SQRT_E
            lam1, lam2 = lambda_roots(c, reference_params, gaussian)
            assert lam1 < lam2
            assert delta(lam1, c, reference_params, gaussian) == pytest.approx(0.0, abs=1e-9)
            assert delta(lam2, c, reference_params, gaussian) == pytest.approx(0.0, abs=1e-9)


class TestSignPattern:
    def test_reference_speed(self, reference_params, gaussian, reference_report):
        assert reference_report.sign_pattern_ok is True
        assert check_sign_pattern(
            reference_report.c, reference_params, gaussian, reference_report.lambda1, reference_report.lambda2
        )

    def test_swapped_roots_fail(self, reference_params, gaussian, reference_report):
        """Claiming a wrong interval breaks the pattern."""
        assert not check_sign_pattern(
            reference_report.c, reference_params, gaussian, 0.5 * reference_report.lambda1, reference_report.lambda2
        )


class TestEtaSelect:
    """Test suite for the prey decay rate."""

    def test_first_candidate_accepted(self, reference_params, gaussian, reference_report):
        eta = eta_select(reference_report.c, reference_params, gaussian, reference_report.lambda1)
        assert eta == pytest.approx(0.5 * reference_report.lambda1)
        assert pi_value(eta, reference_report.c, reference_params, gaussian) < 0.0

    def test_halving(self, reference_params):
        """A strongly dispersing prey forces smaller eta."""
        p = make_reference_params(d1=50.0)
        eta = eta_select(2.0, p, GaussianKernel(1.0), 1.0)
        assert eta < 0.5
        assert pi_value(eta, 2.0, p, GaussianKernel(1.0)) < 0.0

    def test_zero_lambda1(self, reference_params, gaussian):
        with pytest.raises(PreconditionError):
            eta_select(2.0, reference_params, gaussian, 0.0)

    def test_nonpositive_speed(self, reference_params, gaussian):
        with pytest.raises(PreconditionError):
            eta_select(0.0, reference_params, gaussian, 0.5)

    def test_exhausted_halvings(self, reference_params, gaussian):
        with patch('scripts.travelwave.dispersion.pi_value', return_value=1.0) as mock_pi:
            with pytest.raises(EtaSelectionError):
                eta_select(2.0, reference_params, gaussian, 0.5)
            assert mock_pi.call_count == 60


class TestDispersionReport:
    def test_without_speed(self, reference_params, gaussian):
        rep = dispersion_report(reference_params, gaussian, gaussian)
        assert rep.c_star == pytest.approx(SQRT_E, abs=1e-10)
        assert rep.c is None and rep.lambda1 is None and rep.eta is None

    def test_at_speed(self, reference_report):
        assert reference_report.c == pytest.approx(1.2 * SQRT_E)
        assert 0.0 < reference_report.eta < reference_report.lambda1 < reference_report.lambda_star
        assert reference_report.lambda_star < reference_report.lambda2

    def test_at_cstar_skips_sign_pattern(self, reference_params, gaussian):
        c_star, _ = cstar(reference_params, gaussian)
        rep = dispersion_report(reference_params, gaussian, gaussian, c=c_star)
        assert rep.lambda1 == rep.lambda2
        assert rep.sign_pattern_ok is None
