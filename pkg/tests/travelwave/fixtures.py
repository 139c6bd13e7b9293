"""
Shared test fixtures for travelwave module tests.
"""

import math
import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', '..'))

from scripts.travelwave.dispersion import dispersion_report
from scripts.travelwave.kernel import GaussianKernel, MomentDefinedKernel
from scripts.travelwave.models import Params

SQRT_E = math.sqrt(math.e)
U1_STAR = 0.21270166537925831
U2_STAR = 0.98729833462074170


def make_reference_params(**overrides) -> Params:
    """(d1, d2, m, a, s, b) = (1, 1, 0.1, 1, 1, 0.2), optionally overridden."""
    values = dict(d1=1.0, d2=1.0, m=0.1, a=1.0, s=1.0, b=0.2)
    values.update(overrides)
    return Params(**values)


@pytest.fixture
def reference_params():
    """Admissible reference parameter set"""
    return make_reference_params()


@pytest.fixture
def gaussian():
    """Gaussian kernel with unit standard deviation"""
    return GaussianKernel(1.0)


@pytest.fixture
def local_kernel():
    """Moment function 1 + lambda^2 of the local-diffusion reduction"""
    return MomentDefinedKernel.from_coefficients([1.0])


@pytest.fixture
def reference_report(reference_params, gaussian):
    """Dispersion report at 1.2 c* for Gaussian kernels"""
    return dispersion_report(reference_params, gaussian, gaussian, c=1.2 * SQRT_E)


def write_config(path, text: str):
    """Write a config file and return its path."""
    path.write_text(text)
    return path


REFERENCE_TOML = """
seed = 7

[params]
d1 = 1.0
d2 = 1.0
m = 0.1
a = 1.0
s = 1.0
b = 0.2

[kernel1]
shape = "gaussian"
sigma = 1.0

[kernel2]
shape = "gaussian"
sigma = 1.0
"""
