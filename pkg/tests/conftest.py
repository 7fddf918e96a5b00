import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from dispersion import build_profile  # noqa: E402
from initial_data import GaussianPulse, InitialDataSpec  # noqa: E402
from micromodulus import ExponentialKernel, GaussianKernel, TopHatKernel  # noqa: E402


@pytest.fixture(scope='session')
def gaussian_kernel():
    return GaussianKernel()


@pytest.fixture(scope='session')
def exponential_kernel():
    return ExponentialKernel()


@pytest.fixture(scope='session')
def tophat_kernel():
    return TopHatKernel()


@pytest.fixture(scope='session')
def gaussian_profile(gaussian_kernel):
    return build_profile(gaussian_kernel)


@pytest.fixture(scope='session')
def exponential_profile(exponential_kernel):
    return build_profile(exponential_kernel)


@pytest.fixture(scope='session')
def tophat_profile(tophat_kernel):
    return build_profile(tophat_kernel)


@pytest.fixture(scope='session')
def profiles(gaussian_profile, exponential_profile, tophat_profile):
    return {'gaussian': gaussian_profile, 'exponential': exponential_profile, 'tophat': tophat_profile}


@pytest.fixture
def unit_pulse():
    return InitialDataSpec(u_terms=(GaussianPulse(1.0, 0.0, 1.0),))
