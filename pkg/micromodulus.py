"""
Micromodulus kernels J: built-in families, tabulated kernels, moments and
Fourier transforms under the convention (FJ)(xi) = int J(x) e(-xi x) dx with
e(z) = exp(2 pi i z).
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from errors import FieldInputError, MomentUnavailableError, PreconditionError
from lab_config import config
from quadrature import checked_quad

logger = logging.getLogger(__name__)

# Built-in families have moments of every order; this is the order we certify.
BUILTIN_MAX_MOMENT_ORDER = 16
EVENNESS_TOL = 1e-12


class MicromodulusKernel:
    """Non-negative even integrable interaction kernel"""

    name = 'abstract'
    nonnegative_transform = False

    def __init__(self, params, max_moment_order=BUILTIN_MAX_MOMENT_ORDER):
        self.params = dict(params)
        self.max_moment_order = int(max_moment_order)
        if self.max_moment_order < 2:
            raise PreconditionError(f"max_moment_order must be at least 2, got {max_moment_order}")

    def eval(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.eval(x)

    def closed_form_moment(self, k):
        """Absolute moment nu_k in closed form, or None"""
        return None

    def analytic_ft(self, xi):
        """Closed-form FJ, or None when the family has none"""
        return None

    def analytic_phi(self, xi):
        """Cancellation-free mu0 - FJ, or None"""
        return None

    def analytic_phi_p(self, xi):
        """Closed-form phi' = -(FJ)', or None"""
        return None

    def analytic_phi_pp(self, xi):
        """Closed-form phi'' = -(FJ)'', or None"""
        return None

    def support_radius(self, k=0):
        """Radius beyond which |x|^k J(x) is below the configured tail cutoff"""
        raise NotImplementedError

    def breakpoints(self):
        """Points in [0, R] where J is not smooth"""
        return []

    def riemann_lebesgue_radius(self):
        """Frequency beyond which |FJ| < 0.01 mu0, or None if unknown"""
        return None

    def describe(self):
        return {'name': self.name, 'params': self.params, 'max_moment_order': self.max_moment_order}

    def __repr__(self):
        args = ', '.join(f"{k}={v!r}" for k, v in self.params.items())
        return f'<{type(self).__name__} {args}>'


class GaussianKernel(MicromodulusKernel):
    """J(x) = a exp(-(x/sigma)^2)"""

    name = 'gaussian'
    nonnegative_transform = True

    def __init__(self, width=1.0, amplitude=1.0):
        super().__init__({'width': float(width), 'amplitude': float(amplitude)})
        self.sigma = float(width)
        self.amplitude = float(amplitude)

    def eval(self, x):
        return self.amplitude * np.exp(-(np.asarray(x, dtype=float) / self.sigma) ** 2)

    def closed_form_moment(self, k):
        return self.amplitude * self.sigma ** (k + 1) * math.gamma((k + 1) / 2)

    def analytic_ft(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.amplitude * self.sigma * math.sqrt(math.pi) * np.exp(-(math.pi * self.sigma * xi) ** 2)

    def analytic_phi(self, xi):
        mu0 = self.closed_form_moment(0)
        return -mu0 * np.expm1(-(math.pi * self.sigma * np.asarray(xi, dtype=float)) ** 2)

    def analytic_phi_p(self, xi):
        xi = np.asarray(xi, dtype=float)
        b = (math.pi * self.sigma) ** 2
        return self.closed_form_moment(0) * 2.0 * b * xi * np.exp(-b * xi ** 2)

    def analytic_phi_pp(self, xi):
        xi = np.asarray(xi, dtype=float)
        b = (math.pi * self.sigma) ** 2
        return self.closed_form_moment(0) * np.exp(-b * xi ** 2) * (2.0 * b - 4.0 * b ** 2 * xi ** 2)

    def support_radius(self, k=0):
        return self.sigma * (math.sqrt(-math.log(config.tail_cutoff)) + math.sqrt(k) + 1.0)

    def riemann_lebesgue_radius(self):
        # just past the radius where FJ / mu0 = 0.01
        return 1.01 * math.sqrt(math.log(100.0)) / (math.pi * self.sigma)


class ExponentialKernel(MicromodulusKernel):
    """J(x) = a exp(-|x|/sigma)"""

    name = 'exponential'
    nonnegative_transform = True

    def __init__(self, width=1.0, amplitude=1.0):
        super().__init__({'width': float(width), 'amplitude': float(amplitude)})
        self.sigma = float(width)
        self.amplitude = float(amplitude)

    def eval(self, x):
        return self.amplitude * np.exp(-np.abs(np.asarray(x, dtype=float)) / self.sigma)

    def closed_form_moment(self, k):
        return 2.0 * self.amplitude * self.sigma ** (k + 1) * math.factorial(k)

    def _stiffness(self):
        return (2.0 * math.pi * self.sigma) ** 2

    def analytic_ft(self, xi):
        xi = np.asarray(xi, dtype=float)
        return 2.0 * self.amplitude * self.sigma / (1.0 + self._stiffness() * xi ** 2)

    def analytic_phi(self, xi):
        s = self._stiffness() * np.asarray(xi, dtype=float) ** 2
        return self.closed_form_moment(0) * s / (1.0 + s)

    def analytic_phi_p(self, xi):
        xi = np.asarray(xi, dtype=float)
        K = self._stiffness()
        return 2.0 * self.closed_form_moment(0) * K * xi / (1.0 + K * xi ** 2) ** 2

    def analytic_phi_pp(self, xi):
        K = self._stiffness()
        s = K * np.asarray(xi, dtype=float) ** 2
        return 2.0 * self.closed_form_moment(0) * K * (1.0 - 3.0 * s) / (1.0 + s) ** 3

    def support_radius(self, k=0):
        return self.sigma * (-math.log(config.tail_cutoff) + 2.0 * k * math.log(k + 2.0) + 5.0)

    def breakpoints(self):
        return [0.0]

    def riemann_lebesgue_radius(self):
        return math.sqrt(99.0) / (2.0 * math.pi * self.sigma)


class TopHatKernel(MicromodulusKernel):
    """J = a on [-delta, delta], zero outside"""

    name = 'tophat'

    def __init__(self, width=1.0, amplitude=1.0):
        super().__init__({'width': float(width), 'amplitude': float(amplitude)})
        self.delta = float(width)
        self.amplitude = float(amplitude)

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= self.delta, self.amplitude, 0.0)

    def closed_form_moment(self, k):
        return 2.0 * self.amplitude * self.delta ** (k + 1) / (k + 1)

    def analytic_ft(self, xi):
        xi = np.asarray(xi, dtype=float)
        return 2.0 * self.amplitude * self.delta * np.sinc(2.0 * self.delta * xi)

    def analytic_phi(self, xi):
        # mu0 (1 - sin y / y), Taylor series near y = 0
        y = 2.0 * math.pi * self.delta * np.abs(np.asarray(xi, dtype=float))
        small = y < 0.1
        y2 = np.where(small, y, 0.0) ** 2
        series = y2 / 6.0 - y2 ** 2 / 120.0 + y2 ** 3 / 5040.0 - y2 ** 4 / 362880.0
        safe = np.where(small, 1.0, y)
        direct = 1.0 - np.sin(safe) / safe
        return self.closed_form_moment(0) * np.where(small, series, direct)

    def analytic_phi_p(self, xi):
        # -mu0 2 pi delta g'(y), y signed so that phi' is odd
        y = 2.0 * math.pi * self.delta * np.asarray(xi, dtype=float)
        small = np.abs(y) < 0.2
        ys = np.where(small, y, 0.0)
        y2 = ys ** 2
        series = ys * (-1.0 / 3.0 + y2 / 30.0 - y2 ** 2 / 840.0 + y2 ** 3 / 45360.0 - y2 ** 4 / 3991680.0)
        safe = np.where(small, 1.0, y)
        direct = np.cos(safe) / safe - np.sin(safe) / safe ** 2
        return -self.closed_form_moment(0) * 2.0 * math.pi * self.delta * np.where(small, series, direct)

    def analytic_phi_pp(self, xi):
        # -2a delta (2 pi delta)^2 g''(y) with g(y) = sin y / y
        y = 2.0 * math.pi * self.delta * np.abs(np.asarray(xi, dtype=float))
        small = y < 0.2
        y2 = np.where(small, y, 0.0) ** 2
        series = -1.0 / 3.0 + y2 / 10.0 - y2 ** 2 / 168.0 + y2 ** 3 / 6480.0 - y2 ** 4 / 443520.0
        safe = np.where(small, 1.0, y)
        direct = -np.sin(safe) / safe - 2.0 * np.cos(safe) / safe ** 2 + 2.0 * np.sin(safe) / safe ** 3
        g_pp = np.where(small, series, direct)
        return -self.closed_form_moment(0) * (2.0 * math.pi * self.delta) ** 2 * g_pp

    def support_radius(self, k=0):
        return self.delta

    def breakpoints(self):
        return [self.delta]

    def riemann_lebesgue_radius(self):
        return 100.0 / (2.0 * math.pi * self.delta)


class TabulatedKernel(MicromodulusKernel):
    """Kernel sampled on nodes mirrored about 0, integrated by the trapezoid rule"""

    name = 'tabulated'

    def __init__(self, x, values, max_moment_order=2, source=None):
        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.shape != values.shape or x.size < 3:
            raise FieldInputError("Tabulated kernel needs matching one-dimensional x and J columns")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(values)):
            raise FieldInputError("Tabulated kernel contains non-finite samples")
        if np.any(np.diff(x) <= 0):
            raise FieldInputError("Tabulated kernel x column must be strictly increasing")
        extent = max(abs(x[0]), abs(x[-1]))
        if np.max(np.abs(x + x[::-1])) > 1e-12 * extent:
            raise FieldInputError(f"Tabulated kernel nodes on [{x[0]}, {x[-1]}] are not mirrored about 0")
        super().__init__({'source': source or 'inline', 'samples': int(x.size)}, max_moment_order)
        self.x = x
        self.values = values

    def eval(self, x):
        return np.interp(np.asarray(x, dtype=float), self.x, self.values, left=0.0, right=0.0)

    def tabulated_moment(self, k, absolute=True):
        weight = np.abs(self.x) ** k if absolute else self.x ** k
        return float(trapezoid(weight * self.values, self.x))

    def tabulated_cosine_transform(self, xi, power=0, trig=np.cos):
        """int x^power J(x) trig(2 pi xi x) dx over the table, vectorized in xi"""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        weighted = self.x ** power * self.values
        out = np.empty(xi.shape)
        for start in range(0, xi.size, 256):
            block = xi[start:start + 256]
            out[start:start + 256] = trapezoid(weighted[None, :] * trig(2.0 * np.pi * block[:, None] * self.x[None, :]),
                                               self.x, axis=1)
        return out

    def nyquist_frequency(self):
        return 0.5 / float(np.min(np.diff(self.x)))

    def support_radius(self, k=0):
        return float(self.x[-1])


KERNEL_FAMILIES = {
    'gaussian': GaussianKernel,
    'exponential': ExponentialKernel,
    'tophat': TopHatKernel,
}


def make_kernel(family, **params):
    """Build a built-in kernel by family name"""
    try:
        cls = KERNEL_FAMILIES[family]
    except KeyError:
        raise PreconditionError(f"Unknown kernel family '{family}'; expected one of {sorted(KERNEL_FAMILIES)}")
    for key in ('width', 'amplitude'):
        if key in params and not params[key] > 0:
            raise PreconditionError(f"Kernel {key} must be positive, got {params[key]}")
    return cls(**params)


def load_tabulated_kernel(path, max_moment_order=2):
    """Read a two-column CSV (x, J) with header"""
    logger.info(f"Loading tabulated kernel from {path}")
    frame = pd.read_csv(path)
    missing = {'x', 'J'} - set(frame.columns)
    if missing:
        raise FieldInputError(f"Tabulated kernel file {path} is missing columns {sorted(missing)}")
    return TabulatedKernel(frame['x'].to_numpy(), frame['J'].to_numpy(),
                           max_moment_order=max_moment_order, source=str(path))


def moment(kernel, k, absolute=False, method='auto'):
    """
    mu_k = int x^k J(x) dx, or nu_k = int |x|^k J(x) dx with absolute=True.
    Odd plain moments are exactly zero by evenness.
    """
    if k < 0:
        raise PreconditionError(f"Moment order must be non-negative, got {k}")
    if k > kernel.max_moment_order:
        raise MomentUnavailableError(k, kernel.max_moment_order)
    if k % 2 == 1 and not absolute:
        return 0.0

    if isinstance(kernel, TabulatedKernel):
        return kernel.tabulated_moment(k, absolute=True)

    closed = kernel.closed_form_moment(k) if method == 'auto' else None
    if closed is not None:
        return float(closed)

    radius = kernel.support_radius(k)
    points = [p for p in kernel.breakpoints() if 0.0 < p < radius] or None
    value, _ = checked_quad(lambda x: x ** k * kernel.eval(x), 0.0, radius,
                            f"moment {k} of {kernel.name}", points=points)
    return 2.0 * value


def _quadrature_cosine_transform(kernel, xi, power, weight='cos'):
    """2 int_0^R x^power J(x) weight(2 pi xi x) dx for xi >= 0"""
    radius = kernel.support_radius(power)
    points = [p for p in kernel.breakpoints() if 0.0 < p < radius] or None
    out = np.empty(xi.shape)
    for i, frequency in enumerate(xi.ravel()):
        integrand = (lambda x: x ** power * kernel.eval(x)) if power else kernel.eval
        if frequency == 0.0:
            value = 0.0 if weight == 'sin' else checked_quad(integrand, 0.0, radius, f"transform of {kernel.name} at 0",
                                                             points=points)[0]
        else:
            value, _ = checked_quad(integrand, 0.0, radius, f"transform of {kernel.name} at {frequency:.6g}",
                                    weight=weight, wvar=2.0 * math.pi * frequency)
        out.flat[i] = 2.0 * value
    return out


def fourier_J(kernel, xi, method='auto'):
    """(FJ)(xi), real and even; closed form when the family provides one"""
    xi = np.asarray(xi, dtype=float)
    analytic = kernel.analytic_ft(xi) if method == 'auto' else None
    if analytic is not None:
        return analytic
    if isinstance(kernel, TabulatedKernel):
        return kernel.tabulated_cosine_transform(xi).reshape(xi.shape)
    return _quadrature_cosine_transform(kernel, np.abs(np.atleast_1d(xi)), 0).reshape(xi.shape)


def first_moment_transform(kernel, xi, method='auto'):
    """phi'(xi) = 2 pi int x J(x) sin(2 pi xi x) dx, odd in xi"""
    xi = np.asarray(xi, dtype=float)
    analytic = kernel.analytic_phi_p(xi) if method == 'auto' else None
    if analytic is not None:
        return analytic
    if isinstance(kernel, TabulatedKernel):
        values = kernel.tabulated_cosine_transform(xi, power=1, trig=np.sin).reshape(xi.shape)
    else:
        flat = np.atleast_1d(xi)
        values = (np.sign(flat) * _quadrature_cosine_transform(kernel, np.abs(flat), 1, weight='sin')).reshape(xi.shape)
    return 2.0 * math.pi * values


def second_moment_transform(kernel, xi, method='auto'):
    """phi''(xi) = 4 pi^2 int x^2 J(x) cos(2 pi xi x) dx"""
    xi = np.asarray(xi, dtype=float)
    analytic = kernel.analytic_phi_pp(xi) if method == 'auto' else None
    if analytic is not None:
        return analytic
    if isinstance(kernel, TabulatedKernel):
        values = kernel.tabulated_cosine_transform(xi, power=2).reshape(xi.shape)
    else:
        values = _quadrature_cosine_transform(kernel, np.abs(np.atleast_1d(xi)), 2).reshape(xi.shape)
    return 4.0 * math.pi ** 2 * values


def convolve(kernel, f, x):
    """(J * f)(x) = int J(y) f(x - y) dy by adaptive quadrature"""
    radius = kernel.support_radius(0)
    points = sorted({-p for p in kernel.breakpoints()} | set(kernel.breakpoints()))
    points = [p for p in points if -radius < p < radius] or None
    value, _ = checked_quad(lambda y: float(kernel.eval(y) * f(x - y)), -radius, radius,
                            f"convolution with {kernel.name} at x={x:.6g}", points=points)
    return value


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    detail: str = ''


@dataclass
class ValidationReport:
    kernel: str
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def failed(self):
        return [check.name for check in self.checks if not check.passed]

    def as_records(self):
        return [{'kernel': self.kernel, 'check': c.name, 'passed': c.passed, 'residual': c.residual, 'detail': c.detail}
                for c in self.checks]


def _symmetric_samples(kernel):
    if isinstance(kernel, TabulatedKernel):
        return kernel.x, kernel.values, kernel.values[::-1]
    radius = kernel.support_radius(0)
    x = np.linspace(-radius, radius, 2001)
    return x, kernel.eval(x), kernel.eval(-x)


def validate_kernel(kernel):
    """Check evenness, non-negativity, integrability and finite moments"""
    report = ValidationReport(kernel=kernel.name)
    x, values, mirrored = _symmetric_samples(kernel)
    scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)

    asymmetry = float(np.max(np.abs(values - mirrored))) / scale
    report.checks.append(CheckResult('evenness', asymmetry <= EVENNESS_TOL, asymmetry,
                                     f"max |J(x) - J(-x)| relative to peak over {x.size} samples"))

    minimum = float(np.min(values))
    report.checks.append(CheckResult('non_negativity', minimum >= 0.0, minimum, 'minimum sampled J'))

    try:
        mu0 = moment(kernel, 0)
        integrable = bool(np.isfinite(mu0) and mu0 > 0)
    except Exception as e:
        logger.warning(f"Zeroth moment of {kernel.name} failed: {str(e)}")
        mu0, integrable = float('nan'), False
    report.checks.append(CheckResult('integrability', integrable, mu0, 'mu_0'))

    worst, finite = 0.0, True
    for k in range(0, kernel.max_moment_order + 1, 2):
        try:
            value = moment(kernel, k)
        except Exception as e:
            logger.warning(f"Moment {k} of {kernel.name} failed: {str(e)}")
            finite = False
            break
        finite = finite and bool(np.isfinite(value) and value > 0)
        if kernel.closed_form_moment(k) is not None and k <= 8:
            quad_value = moment(kernel, k, method='quadrature')
            worst = max(worst, abs(quad_value - value) / value)
    report.checks.append(CheckResult('finite_moments', finite, worst,
                                     f"even moments through order {kernel.max_moment_order}; "
                                     f"residual is worst quadrature/closed-form mismatch"))

    logger.info(f"Validated kernel {kernel!r}: passed={report.passed}")
    return report
