import math

import numpy as np
import pytest

from dispersion import (audit_grid, build_profile, concavity_check, group_velocity, phase_velocity,
                        phi_derivative, psi_derivative, psi_value)
from errors import DegenerateKernelError
from micromodulus import TabulatedKernel

WAVE_SPEEDS = {
    'gaussian': math.sqrt(math.sqrt(math.pi) / 4.0),
    'exponential': math.sqrt(2.0),
    'tophat': 1.0 / math.sqrt(3.0),
}


@pytest.mark.parametrize('family', sorted(WAVE_SPEEDS))
def test_wave_speed(profiles, family):
    assert profiles[family].c == pytest.approx(WAVE_SPEEDS[family], rel=1e-12)
    assert profiles[family].phi_pp0 == pytest.approx(8.0 * math.pi ** 2 * WAVE_SPEEDS[family] ** 2, rel=1e-12)


@pytest.mark.parametrize('family', sorted(WAVE_SPEEDS))
def test_psi_vanishes_at_origin(profiles, family):
    assert profiles[family].psi(0.0) == 0.0


@pytest.mark.parametrize('family', sorted(WAVE_SPEEDS))
def test_psi_is_odd(profiles, family):
    xi = np.linspace(0.0, 20.0, 401)
    profile = profiles[family]
    np.testing.assert_array_equal(profile.psi(-xi), -profile.psi(xi))


@pytest.mark.parametrize('family', sorted(WAVE_SPEEDS))
def test_unit_slope_at_origin(profiles, family):
    assert psi_derivative(profiles[family], 0.0, 1) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize('family', sorted(WAVE_SPEEDS))
def test_slope_bounded_by_one(profiles, family):
    profile = profiles[family]
    grid = audit_grid(profile, 10000)
    assert np.max(np.abs(psi_derivative(profile, grid, 1))) <= 1.0 + 1e-6


@pytest.mark.parametrize('family', sorted(WAVE_SPEEDS))
def test_psi_bounded(profiles, family):
    profile = profiles[family]
    grid = audit_grid(profile)
    assert np.max(np.abs(profile.psi(grid))) <= profile.psi_bound + 1e-12


def test_gaussian_psi_approaches_asymptote(gaussian_profile):
    assert gaussian_profile.psi(50.0) == pytest.approx(gaussian_profile.psi_asymptote, rel=1e-12)
    assert gaussian_profile.psi_asymptote == pytest.approx(1.0 / math.pi, rel=1e-12)


def test_tophat_overshoots_asymptote(tophat_profile):
    grid = audit_grid(tophat_profile)
    peak = float(np.max(tophat_profile.psi(grid)))
    assert peak > tophat_profile.psi_asymptote
    assert peak <= tophat_profile.psi_bound


def test_exponential_closed_form(exponential_profile):
    xi = np.linspace(-20.0, 20.0, 4001)
    closed = xi / np.sqrt(1.0 + 4.0 * math.pi ** 2 * xi ** 2)
    np.testing.assert_allclose(exponential_profile.psi(xi), closed, rtol=0, atol=1e-9)


def test_exponential_slope_closed_form(exponential_profile):
    expected = (1.0 + 4.0 * math.pi ** 2) ** -1.5
    assert psi_derivative(exponential_profile, 1.0, 1) == pytest.approx(expected, rel=1e-7)


def test_second_derivative_vanishes_at_origin(gaussian_profile):
    assert psi_derivative(gaussian_profile, 0.0, 2) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize('family', sorted(WAVE_SPEEDS))
def test_branches_agree_near_switch(profiles, family):
    profile = profiles[family]
    xi = np.linspace(0.5, 2.0, 31) * profile.eps_switch
    direct = profile.psi_direct(xi)
    near = profile.psi_near_zero(xi)
    np.testing.assert_allclose(near, direct, rtol=1e-9)


def test_psi_squared_recovers_phi(gaussian_profile):
    xi = np.linspace(0.01, 3.0, 50)
    psi = gaussian_profile.psi(xi)
    np.testing.assert_allclose(gaussian_profile.phi_pp0 * psi ** 2 / 2.0, gaussian_profile.phi(xi), rtol=1e-12)


def test_velocities(exponential_profile):
    xi = np.array([-2.0, 0.0, 0.5])
    phase = phase_velocity(exponential_profile, xi)
    assert phase[1] == exponential_profile.c
    assert phase[0] == pytest.approx(exponential_profile.c / math.sqrt(1.0 + 16.0 * math.pi ** 2), rel=1e-10)
    group = group_velocity(exponential_profile, xi)
    assert group[1] == pytest.approx(exponential_profile.c, rel=1e-6)
    assert np.all(np.abs(group) <= exponential_profile.c * (1.0 + 1e-6))


def test_phi_derivative_matches_closed_form(exponential_profile):
    # phi = mu0 s / (1 + s), s = 4 pi^2 xi^2
    xi = 0.3
    K = 4.0 * math.pi ** 2
    expected = exponential_profile.mu0 * 2.0 * K * xi / (1.0 + K * xi ** 2) ** 2
    assert phi_derivative(exponential_profile, xi) == pytest.approx(expected, rel=1e-7)


@pytest.mark.parametrize('family', sorted(WAVE_SPEEDS))
def test_concavity(profiles, family):
    assert concavity_check(profiles[family]) <= 1e-8 * profiles[family].mu0


def test_summary_fields(gaussian_profile):
    summary = gaussian_profile.summary()
    assert summary['kernel']['name'] == 'gaussian'
    assert summary['c'] == gaussian_profile.c
    assert summary['xi_star'] > 0


def test_tabulated_profile_matches_builtin(gaussian_profile):
    x = np.linspace(-10.0, 10.0, 2001)
    profile = build_profile(TabulatedKernel(x, np.exp(-x ** 2)))
    assert profile.c == pytest.approx(gaussian_profile.c, rel=1e-10)
    assert profile.audit_limit <= 50.0


def test_invalid_kernel_is_degenerate():
    x = np.linspace(-8.0, 8.0, 801)
    with pytest.raises(DegenerateKernelError):
        build_profile(TabulatedKernel(x, np.exp(-(x - 1.0) ** 2)))


def test_psi_value_across_the_branch_switch(exponential_profile):
    eps = exponential_profile.eps_switch
    xi = np.array([-2.0 * eps, -0.5 * eps, 0.0, 0.5 * eps, 2.0 * eps, 3.0])
    closed = xi / np.sqrt(1.0 + 4.0 * math.pi ** 2 * xi ** 2)
    np.testing.assert_allclose(psi_value(exponential_profile, xi), closed, rtol=1e-9, atol=1e-15)
    assert psi_value(exponential_profile, 0.25) == pytest.approx(0.25 / math.sqrt(1.0 + math.pi ** 2 / 4.0), rel=1e-9)


def test_slope_matches_closed_form_on_a_fine_scan(exponential_profile):
    # covers the bands where difference tables used to stall
    xi = np.concatenate([np.linspace(0.0, 3.0, 3001), np.linspace(0.048, 0.195, 301),
                         np.linspace(0.2647, 0.2677, 61), np.linspace(0.5081, 2.7216, 401)])
    expected = (1.0 + 4.0 * math.pi ** 2 * xi ** 2) ** -1.5
    np.testing.assert_allclose(psi_derivative(exponential_profile, xi, 1), expected, rtol=1e-9, atol=1e-14)
    np.testing.assert_allclose(psi_derivative(exponential_profile, -xi, 1), expected, rtol=1e-9, atol=1e-14)


@pytest.mark.parametrize('family', sorted(WAVE_SPEEDS))
def test_difference_slope_agrees_with_closed_slope(profiles, family):
    profile = profiles[family]
    xi = np.array([0.05, 0.3, 0.9, 1.7])
    np.testing.assert_allclose(psi_derivative(profile, xi, 1, method='ridders'), profile.psi_prime(xi),
                               rtol=1e-6, atol=1e-9)


def test_second_derivative_on_wide_scan(gaussian_profile):
    xi = np.linspace(0.02, 3.0, 150)
    curvature = np.asarray(psi_derivative(gaussian_profile, xi, 2))
    assert np.all(np.isfinite(curvature))
    assert np.all(curvature <= 1e-6)


def test_derivative_order_is_checked(gaussian_profile):
    with pytest.raises(ValueError):
        psi_derivative(gaussian_profile, 0.5, 3)


@pytest.mark.parametrize('family, band', [('gaussian', (0.2647, 0.2677)), ('exponential', (0.0482, 0.1947)),
                                          ('tophat', (0.5081, 2.7216))])
def test_slope_on_dense_bands(profiles, family, band):
    xi = np.arange(band[0], band[1], 1e-4)
    slope = np.asarray(psi_derivative(profiles[family], xi, 1))
    assert np.all(np.isfinite(slope))
    assert np.max(np.abs(slope)) <= 1.0 + 1e-6
