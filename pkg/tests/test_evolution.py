import numpy as np
import pytest

from errors import DomainTooSmallError
from evolution import (SpectralState, characteristic_fields, evolve_characteristic, evolve_grid,
                       evolve_point, evolve_points, evolution_matrix, frequency_cutoff, required_period,
                       total_energy)
from initial_data import GaussianPulse, InitialDataSpec
from nonlocal_operator import FieldState, apply_D

MIXED = InitialDataSpec(u_terms=(GaussianPulse(1.0, 0.0, 1.0),), ut_terms=(GaussianPulse(0.5, 1.0, 1.2),))


def _state(data=MIXED, n=1024, dx=0.25):
    return FieldState.from_data(data, -0.5 * n * dx, dx, n)


def test_matrix_at_zero_frequency(gaussian_profile):
    cos, sin_over, minus_omega_sin = evolution_matrix(gaussian_profile, np.array([0.0]), 3.0)
    assert cos[0] == 1.0
    assert sin_over[0] == 3.0
    assert minus_omega_sin[0] == 0.0


def test_matrix_is_unimodular(exponential_profile):
    xi = np.linspace(-5.0, 5.0, 101)
    cos, sin_over, minus_omega_sin = evolution_matrix(exponential_profile, xi, 2.7)
    np.testing.assert_allclose(cos * cos - sin_over * minus_omega_sin, 1.0, atol=1e-12)


def test_time_zero_is_identity(gaussian_profile):
    state = _state()
    evolved = evolve_grid(gaussian_profile, state, 0.0)
    np.testing.assert_allclose(evolved.u, state.u, atol=1e-14)
    np.testing.assert_allclose(evolved.ut, state.ut, atol=1e-14)


@pytest.mark.parametrize('family', ['gaussian', 'exponential', 'tophat'])
def test_energy_is_conserved(profiles, family):
    profile = profiles[family]
    state = _state()
    e0 = total_energy(profile, state)
    for t in (1.0, 10.0, 40.0):
        assert abs(total_energy(profile, evolve_grid(profile, state, t)) - e0) <= 1e-10 * e0


def test_semigroup(gaussian_profile):
    state = _state()
    once = evolve_grid(gaussian_profile, state, 7.0)
    twice = evolve_grid(gaussian_profile, evolve_grid(gaussian_profile, state, 3.0), 4.0)
    scale = max(np.max(np.abs(once.u)), np.max(np.abs(once.ut)))
    assert np.max(np.abs(once.u - twice.u)) <= 1e-10 * scale
    assert np.max(np.abs(once.ut - twice.ut)) <= 1e-10 * scale


def test_time_reversal(exponential_profile):
    state = _state()
    back = evolve_grid(exponential_profile, evolve_grid(exponential_profile, state, 5.0), -5.0)
    np.testing.assert_allclose(back.u, state.u, atol=1e-12)
    np.testing.assert_allclose(back.ut, state.ut, atol=1e-12)


@pytest.mark.parametrize('family', ['gaussian', 'tophat'])
def test_characteristic_and_matrix_evolution_agree(profiles, family):
    profile = profiles[family]
    state = _state()
    matrix = evolve_grid(profile, state, 6.0)
    char = evolve_characteristic(profile, state, 6.0)
    np.testing.assert_allclose(char.u, matrix.u, atol=1e-12)
    np.testing.assert_allclose(char.ut, matrix.ut, atol=1e-12)


def test_characteristic_fields_split_u_t(gaussian_profile):
    state = _state()
    w_plus, w_minus = characteristic_fields(gaussian_profile, state)
    np.testing.assert_allclose(0.5 * (w_plus + w_minus), state.ut, atol=1e-13)
    q = gaussian_profile.c * apply_D(gaussian_profile, state.u, state.dx)
    np.testing.assert_allclose(0.5 * (w_plus - w_minus), q, atol=1e-13)


def test_spectral_state_is_conjugate_symmetric(gaussian_profile):
    assert SpectralState.from_field(_state()).conjugate_symmetry_defect() < 1e-12


def test_constant_stays_constant(gaussian_profile):
    data = InitialDataSpec(u_offset=2.0)
    state = FieldState.from_data(data, -32.0, 0.25, 256)
    evolved = evolve_grid(gaussian_profile, state, 3.0)
    np.testing.assert_allclose(evolved.u, 2.0, atol=1e-14)
    np.testing.assert_allclose(evolved.ut, 0.0, atol=1e-14)


def test_short_domain_is_rejected(gaussian_profile):
    state = FieldState.from_data(MIXED, -8.0, 0.25, 64)
    with pytest.raises(DomainTooSmallError) as excinfo:
        evolve_grid(gaussian_profile, state, 50.0)
    assert excinfo.value.required_period == pytest.approx(required_period(gaussian_profile, state, 50.0))
    assert excinfo.value.required_period > state.period


def test_point_evaluator_matches_grid(gaussian_profile):
    state = _state()
    t = 4.0
    grid = evolve_grid(gaussian_profile, state, t)
    q = gaussian_profile.c * apply_D(gaussian_profile, grid.u, grid.dx)
    for index in (512, 520, 530):
        x = float(state.x[index])
        sample = evolve_point(gaussian_profile, MIXED, t, x)
        assert sample.u == pytest.approx(grid.u[index], abs=1e-8)
        assert sample.p == pytest.approx(grid.ut[index], abs=1e-8)
        assert sample.q == pytest.approx(q[index], abs=1e-8)
        assert sample.energy_error < 1e-6


def test_point_evaluator_at_time_zero(exponential_profile):
    sample = evolve_point(exponential_profile, MIXED, 0.0, 0.4)
    assert sample.u == pytest.approx(float(MIXED.u(0.4)), abs=1e-9)
    assert sample.p == pytest.approx(float(MIXED.ut(0.4)), abs=1e-9)


def test_point_evaluator_on_trivial_data(gaussian_profile):
    zero = evolve_point(gaussian_profile, InitialDataSpec(), 3.0, 1.0)
    assert (zero.p, zero.q, zero.u) == (0.0, 0.0, 0.0)
    offset = evolve_point(gaussian_profile, InitialDataSpec(u_offset=1.5), 3.0, 1.0)
    assert offset.u == 1.5
    assert offset.energy == 0.0


def test_offset_is_carried_through(gaussian_profile):
    data = InitialDataSpec(u_terms=(GaussianPulse(1.0, 0.0, 1.0),))
    shifted = InitialDataSpec(u_terms=data.u_terms, u_offset=3.0)
    plain = evolve_point(gaussian_profile, data, 2.0, 0.5)
    moved = evolve_point(gaussian_profile, shifted, 2.0, 0.5)
    assert moved.u == pytest.approx(plain.u + 3.0, abs=1e-12)
    assert moved.p == pytest.approx(plain.p, abs=1e-12)


def test_evolve_points_preserves_order(gaussian_profile):
    points = [(1.0, 0.0), (2.0, 1.0), (1.0, -1.0)]
    batch = evolve_points(gaussian_profile, MIXED, points)
    for (t, x), sample in zip(points, batch):
        assert sample.u == evolve_point(gaussian_profile, MIXED, t, x).u


def test_frequency_cutoff_grows_with_time(gaussian_profile):
    assert frequency_cutoff(gaussian_profile, MIXED, 100.0) > frequency_cutoff(gaussian_profile, MIXED, 1.0)


def test_single_pulse_width_ignores_grid_mean(gaussian_profile, unit_pulse):
    state = _state(unit_pulse)
    assert state.data_width() == pytest.approx(np.sqrt(np.log(1e6)), abs=0.25)
    for t in (0.0, 10.0, 40.0):
        evolved = evolve_grid(gaussian_profile, state, t)
        assert np.all(np.isfinite(evolved.u))


def test_offset_pulse_width(gaussian_profile):
    data = InitialDataSpec(u_terms=(GaussianPulse(1.0, 0.0, 1.0),), u_offset=5.0)
    assert _state(data).data_width() == pytest.approx(_state(InitialDataSpec(u_terms=data.u_terms)).data_width())


def test_zero_mode_grows_linearly(exponential_profile):
    state = _state()
    Fu0 = np.fft.fft(state.u)[0]
    Fut0 = np.fft.fft(state.ut)[0]
    for t in (1.0, 7.5):
        evolved = evolve_grid(exponential_profile, state, t)
        assert np.fft.fft(evolved.u)[0].real == pytest.approx((Fu0 + t * Fut0).real, rel=1e-12)
        assert np.fft.fft(evolved.ut)[0].real == pytest.approx(Fut0.real, rel=1e-12)


def test_energy_holds_to_long_times(gaussian_profile):
    state = _state(n=4096)
    e0 = total_energy(gaussian_profile, state)
    assert abs(total_energy(gaussian_profile, evolve_grid(gaussian_profile, state, 100.0)) - e0) <= 1e-10 * e0
