import math

import numpy as np
import pandas as pd
import pytest

from errors import FieldInputError, MomentUnavailableError, PreconditionError
from micromodulus import (GaussianKernel, TabulatedKernel, convolve, fourier_J, load_tabulated_kernel,
                          make_kernel, moment, second_moment_transform, validate_kernel)


@pytest.mark.parametrize('family', ['gaussian', 'exponential', 'tophat'])
@pytest.mark.parametrize('k', [0, 2, 4])
def test_closed_form_moments_match_quadrature(family, k):
    kernel = make_kernel(family)
    closed = moment(kernel, k)
    quad = moment(kernel, k, method='quadrature')
    assert quad == pytest.approx(closed, rel=1e-10)


def test_known_moments():
    assert moment(make_kernel('gaussian'), 0) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert moment(make_kernel('exponential'), 2) == pytest.approx(4.0, rel=1e-14)
    assert moment(make_kernel('tophat'), 2) == pytest.approx(2.0 / 3.0, rel=1e-14)


def test_odd_moment_vanishes_and_absolute_does_not(gaussian_kernel):
    assert moment(gaussian_kernel, 1) == 0.0
    assert moment(gaussian_kernel, 1, absolute=True) == pytest.approx(1.0, rel=1e-10)


def test_moment_beyond_certified_order(gaussian_kernel):
    with pytest.raises(MomentUnavailableError) as excinfo:
        moment(gaussian_kernel, gaussian_kernel.max_moment_order + 2)
    assert excinfo.value.max_order == gaussian_kernel.max_moment_order


@pytest.mark.parametrize('family', ['gaussian', 'exponential', 'tophat'])
def test_fourier_transform_closed_form_matches_quadrature(family):
    kernel = make_kernel(family)
    xi = np.array([0.0, 0.1, 0.37, 1.0, 2.5])
    np.testing.assert_allclose(fourier_J(kernel, xi, method='quadrature'), fourier_J(kernel, xi), atol=1e-10)


@pytest.mark.parametrize('family', ['gaussian', 'exponential', 'tophat'])
def test_second_moment_transform_at_zero(family):
    kernel = make_kernel(family)
    assert float(second_moment_transform(kernel, 0.0)) == pytest.approx(
        4.0 * math.pi ** 2 * moment(kernel, 2), rel=1e-12)


@pytest.mark.parametrize('family', ['gaussian', 'exponential', 'tophat'])
def test_riemann_lebesgue_radius(family):
    kernel = make_kernel(family)
    far = kernel.riemann_lebesgue_radius() * np.linspace(1.0, 10.0, 200)
    assert np.max(np.abs(fourier_J(kernel, far))) < 0.01 * moment(kernel, 0)


@pytest.mark.parametrize('family', ['gaussian', 'exponential', 'tophat'])
def test_builtin_kernels_validate(family):
    report = validate_kernel(make_kernel(family))
    assert report.passed, report.failed()
    assert {c.name for c in report.checks} == {'evenness', 'non_negativity', 'integrability', 'finite_moments'}


def test_uneven_table_fails_evenness():
    x = np.linspace(-8.0, 8.0, 801)
    report = validate_kernel(TabulatedKernel(x, np.exp(-(x - 0.5) ** 2)))
    assert not report.passed
    assert 'evenness' in report.failed()


def test_evenness_compares_mirrored_nodes():
    half = np.geomspace(0.01, 4.0, 40)
    x = np.concatenate([-half[::-1], [0.0], half])
    even = validate_kernel(TabulatedKernel(x, np.exp(-x ** 2)))
    assert even.passed, even.failed()
    values = np.exp(-x ** 2)
    values[10] *= 1.001
    assert 'evenness' in validate_kernel(TabulatedKernel(x, values)).failed()


def test_negative_table_fails_non_negativity():
    x = np.linspace(-8.0, 8.0, 801)
    report = validate_kernel(TabulatedKernel(x, np.exp(-x ** 2) - 0.01))
    assert 'non_negativity' in report.failed()


def test_tabulated_moments_match_gaussian():
    x = np.linspace(-10.0, 10.0, 2001)
    table = TabulatedKernel(x, np.exp(-x ** 2))
    assert moment(table, 0) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert moment(table, 2) == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-12)
    with pytest.raises(MomentUnavailableError):
        moment(table, 4)


def test_tabulated_transform_matches_gaussian():
    x = np.linspace(-10.0, 10.0, 2001)
    table = TabulatedKernel(x, np.exp(-x ** 2))
    xi = np.linspace(0.0, 2.0, 9)
    np.testing.assert_allclose(fourier_J(table, xi), fourier_J(GaussianKernel(), xi), atol=1e-12)


@pytest.mark.parametrize('x, values', [
    (np.array([-1.0, 0.0, 2.0]), np.ones(3)),
    (np.array([-1.0, 1.0, 0.0]), np.ones(3)),
    (np.array([-1.0, 0.0, 1.0]), np.array([1.0, np.nan, 1.0])),
    (np.array([-1.0, 0.0, 1.0]), np.ones(2)),
    (np.array([-2.0, -1.5, -0.2, 0.7, 1.1, 2.0]), np.ones(6)),
])
def test_malformed_tables_rejected(x, values):
    with pytest.raises(FieldInputError):
        TabulatedKernel(x, values)


def test_load_tabulated_kernel(tmp_path):
    x = np.linspace(-6.0, 6.0, 601)
    path = tmp_path / 'kernel.csv'
    pd.DataFrame({'x': x, 'J': np.exp(-np.abs(x))}).to_csv(path, index=False)
    kernel = load_tabulated_kernel(str(path), max_moment_order=2)
    assert kernel.name == 'tabulated'
    assert kernel.describe()['params']['samples'] == 601
    assert moment(kernel, 0) == pytest.approx(2.0 * (1.0 - math.exp(-6.0)), rel=1e-4)


def test_load_tabulated_kernel_missing_column(tmp_path):
    path = tmp_path / 'kernel.csv'
    pd.DataFrame({'x': [-1.0, 0.0, 1.0], 'value': [0.0, 1.0, 0.0]}).to_csv(path, index=False)
    with pytest.raises(FieldInputError):
        load_tabulated_kernel(str(path))


def test_make_kernel_rejects_unknown_family_and_bad_width():
    with pytest.raises(PreconditionError):
        make_kernel('lorentzian')
    with pytest.raises(PreconditionError):
        make_kernel('gaussian', width=-1.0)


def test_convolve_gaussians(gaussian_kernel):
    # exp(-y^2) * exp(-y^2) = sqrt(pi / 2) exp(-x^2 / 2)
    def f(y):
        return math.exp(-y ** 2)

    for x in (0.0, 0.7, 2.0):
        assert convolve(gaussian_kernel, f, x) == pytest.approx(
            math.sqrt(math.pi / 2.0) * math.exp(-x ** 2 / 2.0), rel=1e-10)
