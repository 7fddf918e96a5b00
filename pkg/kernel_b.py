"""
Regularized fundamental-solution kernels

    b_j(t, z) = int alpha(xi)^-1 cos(2 pi xi z) (2 pi c psi(xi))^j theta_j(2 pi c t psi(xi)) dxi

with alpha(xi) = 1 + 4 pi^2 A xi^2 and theta_j(zeta) = cos(zeta + j pi / 2), so that
d/dzeta theta_(j-1) = theta_j and d/dt b_(j-1) = b_j. The solution of the
peridynamic equation is b_j(t) * (L d^k u)(0) + b_(j-1)(t) * (L d^k u_t)(0)
with L = 1 - A d^2/dx^2.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.linear_model import LinearRegression

from errors import PreconditionError
from lab_config import config
from quadrature import fourier_cos_quad, panel_integrate

logger = logging.getLogger(__name__)

SUPPORTED_J = (-1, 0, 1, 2)
MIN_CONE_DISTANCE = 1.0
MIN_TAIL_SAMPLES = 3
TIME_PANEL_ORDER = 10


def theta(j, zeta):
    """cos(zeta + j pi / 2), written per residue of j mod 4"""
    zeta = np.asarray(zeta, dtype=float)
    residue = j % 4
    if residue == 0:
        return np.cos(zeta)
    if residue == 1:
        return -np.sin(zeta)
    if residue == 2:
        return -np.cos(zeta)
    return np.sin(zeta)


def alpha(A, xi):
    return 1.0 + 4.0 * math.pi ** 2 * A * np.asarray(xi, dtype=float) ** 2


def lorentzian_b0(A, z):
    """b_0(0, z), the Green's function of L: exp(-|z| / sqrt(A)) / (2 sqrt(A))"""
    root = math.sqrt(A)
    return np.exp(-np.abs(np.asarray(z, dtype=float)) / root) / (2.0 * root)


def _symbol(profile, j, A, t):
    """Even frequency weight of b_j excluding the cosine in z"""
    def weight(xi):
        omega = float(profile.omega(xi))
        if j == -1:
            return float(t * np.sinc(omega * t / math.pi)) / float(alpha(A, xi))
        return omega ** j * float(theta(j, omega * t)) / float(alpha(A, xi))
    return weight


def _check_arguments(j, A):
    if j not in SUPPORTED_J:
        raise PreconditionError(f"Kernel index j must be one of {SUPPORTED_J}, got {j}")
    if not A > 0:
        raise PreconditionError(f"Regularization A must be positive, got {A}")


def _fourier_b(profile, j, A, t, z):
    value, _ = fourier_cos_quad(_symbol(profile, j, A, t), 2.0 * math.pi * abs(z),
                                f"b_{j}(t={t:g}, z={z:g})", scale=trivial_bound(profile, j, A, t))
    return 2.0 * value


def _time_integrated_b(profile, A, t, z):
    """b_(-1)(t, z) = int_0^t b_0(s, z) ds by Gauss-Legendre doubling"""
    if t == 0.0:
        return 0.0
    lo, hi = sorted((0.0, t))

    def integrand(s):
        return np.array([_fourier_b(profile, 0, A, float(si), z) for si in np.atleast_1d(s)])

    pieces = int(math.ceil(abs(t) * 2.0 * math.pi * profile.c * profile.psi_bound)) + 1
    value, _ = panel_integrate(integrand, [lo, hi], pieces, config.scaled(1e-12),
                               f"time integral of b_0 at z={z:g}", order=TIME_PANEL_ORDER)
    return float(value) if t > 0 else -float(value)


def eval_b(profile, j, A, t, z, method='time'):
    """
    b_j(t, z). j >= 0 is a Fourier-weighted quadrature; j = -1 integrates b_0
    in time from b_(-1)(0, z) = 0, or with method='direct' integrates
    alpha^-1 sin(omega t) / omega directly.
    """
    _check_arguments(j, A)
    t, z = float(t), float(z)
    if j == -1 and method == 'time':
        return _time_integrated_b(profile, A, t, z)
    return _fourier_b(profile, j, A, t, z)


def trivial_bound(profile, j, A, t=0.0):
    """C_j with |b_j(t, z)| <= C_j for every z"""
    _check_arguments(j, A)
    base = 1.0 / (2.0 * math.sqrt(A))
    if j == -1:
        return abs(t) * base
    return math.sqrt(profile.sup_phi) ** j * base


@dataclass
class KernelSample:
    """b_j(t, z) on a z grid"""

    j: int
    A: float
    t: float
    z_grid: list
    b_vals: list
    bound: float = float('nan')

    @property
    def max_abs(self):
        return float(np.max(np.abs(self.b_vals))) if self.b_vals else 0.0

    @property
    def within_bound(self):
        return self.max_abs <= self.bound * (1.0 + 1e-9) + config.kernel_epsabs

    def frame(self, c):
        distance = np.abs(np.asarray(self.z_grid)) - c * abs(self.t)
        return pd.DataFrame({'z': self.z_grid, 'b': self.b_vals, 'cone_distance': distance},
                            columns=['z', 'b', 'cone_distance'])


def sample_b(profile, j, A, t, z_grid, method='time'):
    """eval_b over a z grid, in grid order"""
    _check_arguments(j, A)
    z_grid = [float(z) for z in z_grid]
    logger.info(f"Sampling b_{j} at t={t:g}, A={A:g} on {len(z_grid)} points")
    values = Parallel(n_jobs=config.n_jobs)(
        delayed(eval_b)(profile, j, A, t, z, method) for z in z_grid
    )
    return KernelSample(j=j, A=A, t=float(t), z_grid=z_grid, b_vals=[float(v) for v in values],
                        bound=trivial_bound(profile, j, A, t))


@dataclass
class TailReport:
    """Fitted decay of |b_j| against distance beyond the cone"""

    j: int
    t: float
    distances: list
    values: list
    floor: float
    order: float
    slope: float = float('nan')
    residual: float = float('nan')
    used: int = 0
    status: str = 'inconclusive'
    local_slopes: list = field(default_factory=list)

    @property
    def passed(self):
        return self.status == 'pass'

    @property
    def inconclusive(self):
        return self.status == 'inconclusive'


def local_slopes(distances, values):
    """d log|b| / d log(distance) by finite differences"""
    d = np.log(np.asarray(distances, dtype=float))
    magnitude = np.maximum(np.abs(np.asarray(values, dtype=float)), 1e-300)
    if d.size < 2:
        return [float('nan')] * d.size
    return np.gradient(np.log(magnitude), d).tolist()


def tail_check(profile, j, A, t, z_list, order, sampler=None, floor=None):
    """
    Fit log|b_j| against log(|z| - c|t|) for z beyond the cone; the tail passes
    when the slope is at most -order. Samples at or below the noise floor are
    dropped, and a report with fewer than MIN_TAIL_SAMPLES left is inconclusive.
    """
    _check_arguments(j, A)
    z_list = [float(z) for z in z_list]
    distances = [abs(z) - profile.c * abs(t) for z in z_list]
    if any(d < MIN_CONE_DISTANCE for d in distances):
        raise PreconditionError(f"tail_check needs |z| - c|t| >= {MIN_CONE_DISTANCE} for every z")

    if sampler is None:
        values = sample_b(profile, j, A, t, z_list).b_vals
    else:
        values = [float(sampler(z)) for z in z_list]
    floor = 10.0 * config.scaled(config.kernel_epsabs) if floor is None else floor

    report = TailReport(j=j, t=float(t), distances=distances, values=values, floor=floor, order=order,
                        local_slopes=local_slopes(distances, values))
    keep = [(d, abs(v)) for d, v in zip(distances, values) if abs(v) > floor]
    report.used = len(keep)
    if len(keep) < MIN_TAIL_SAMPLES:
        logger.warning(f"Tail of b_{j} at t={t:g} inconclusive: {len(keep)} samples above floor {floor:.1e}")
        return report

    log_d = np.log([d for d, _ in keep]).reshape(-1, 1)
    log_b = np.log([v for _, v in keep])
    model = LinearRegression().fit(log_d, log_b)
    report.slope = float(model.coef_[0])
    report.residual = float(np.sqrt(np.mean((model.predict(log_d) - log_b) ** 2)))
    report.status = 'pass' if report.slope <= -order else 'fail'
    logger.info(f"Tail of b_{j} at t={t:g}: slope {report.slope:.3f} ({report.status})")
    return report


def outside_cone_value(profile, A, t, offset):
    """|b_0(t, c t + offset)|, nonzero for every kernel whose phi is not quadratic"""
    return abs(eval_b(profile, 0, A, t, profile.c * abs(t) + offset))


def _convolution_breakpoints(profile, data, t, x):
    lo, hi = data.extent(1e-17)
    reach = profile.c * abs(t)
    inner = [p for p in (x - reach, x, x + reach) if lo < p < hi]
    return [lo] + sorted(set(inner)) + [hi]


def solve_via_kernels(profile, A, data, t, x, j, k):
    """
    d^j_t d^k_x u(t, x) = (b_j(t) * L d^k u(0))(x) + (b_(j-1)(t) * L d^k u_t(0))(x),
    integrated in y on Gauss-Legendre panels split at x and x +- c t.
    b_(-1) is taken from the direct integral.
    """
    if j not in (0, 1):
        raise PreconditionError(f"solve_via_kernels supports j in (0, 1), got {j}")
    if k not in (0, 1, 2):
        raise PreconditionError(f"solve_via_kernels supports k in (0, 1, 2), got {k}")
    _check_arguments(j, A)
    t, x = float(t), float(x)

    channels = []
    if data.u_terms:
        channels.append((j, 'u'))
    if data.ut_terms:
        channels.append((j - 1, 'ut'))

    def integrand(y):
        y = np.atleast_1d(y)
        total = np.zeros(y.shape)
        for index, which in channels:
            weights = data.apply_L(which, y, k, A) - (data.u_offset if which == 'u' and k == 0 else 0.0)
            kernel = [eval_b(profile, index, A, t, x - yi, method='direct') for yi in y]
            total += np.asarray(kernel) * weights
        return total

    value = 0.0
    if channels:
        breakpoints = _convolution_breakpoints(profile, data, t, x)
        pieces = max(2, int(math.ceil((breakpoints[-1] - breakpoints[0]) / (2.0 * data.min_width()))))
        amplitude = max(abs(term.amplitude) for term in data.terms)
        value, _ = panel_integrate(integrand, breakpoints, pieces, config.scaled(1e-9) * amplitude,
                                   f"kernel representation at t={t:g}, x={x:g}", order=16)
        value = float(value)
    if j == 0 and k == 0:
        value += data.u_offset
    logger.debug(f"solve_via_kernels(j={j}, k={k}, A={A}) at t={t}, x={x}: {value:.12g}")
    return value
