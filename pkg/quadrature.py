"""
Quadrature helpers shared by the kernel, evolution and kernel-tail modules

checked_quad wraps scipy.integrate.quad and turns non-convergence into
QuadratureAccuracyError; panel_integrate is a composite Gauss-Legendre rule
with doubling refinement for vector-valued oscillatory integrands.
"""
import logging
import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate

from errors import QuadratureAccuracyError
from lab_config import config

logger = logging.getLogger(__name__)

FOURIER_ACCEPT = 1e-8


@lru_cache(maxsize=16)
def gauss_legendre(order):
    """Nodes and weights on [-1, 1]"""
    return np.polynomial.legendre.leggauss(order)


def checked_quad(func, a, b, what, epsabs=None, epsrel=None, **kwargs):
    """Adaptive quadrature that raises when scipy reports non-convergence"""
    epsabs = config.scaled(config.quad_epsabs if epsabs is None else epsabs)
    epsrel = config.scaled(config.quad_epsrel if epsrel is None else epsrel)
    kwargs.setdefault('limit', config.quad_limit)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', integrate.IntegrationWarning)
        value, abserr = integrate.quad(func, a, b, epsabs=epsabs, epsrel=epsrel, **kwargs)[:2]

    requested = max(epsabs, epsrel * abs(value))
    if not np.isfinite(value) or not np.isfinite(abserr):
        raise QuadratureAccuracyError(what, float('inf'), requested)
    if caught and abserr > requested:
        logger.debug(f"Quadrature warning for {what}: {caught[0].message}")
        raise QuadratureAccuracyError(what, abserr, requested)
    return value, abserr


def fourier_cos_quad(func, frequency, what, epsabs=None, scale=0.0):
    """
    Integral of func(x) * cos(frequency * x) over [0, inf). A result scipy
    flags is kept when its error is below FOURIER_ACCEPT relative to the
    value or to `scale`, a bound on the integral's magnitude.
    """
    epsabs = config.scaled(config.kernel_epsabs if epsabs is None else epsabs)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', integrate.IntegrationWarning)
        if frequency == 0.0:
            value, abserr = integrate.quad(func, 0.0, np.inf, epsabs=epsabs, epsrel=1e-13,
                                           limit=config.quad_limit)[:2]
        else:
            value, abserr = integrate.quad(func, 0.0, np.inf, weight='cos', wvar=abs(frequency),
                                           epsabs=epsabs, limlst=config.kernel_limlst,
                                           limit=config.quad_limit)[:2]

    accepted = max(epsabs, config.scaled(FOURIER_ACCEPT) * max(abs(value), abs(scale)))
    if not np.isfinite(value) or not np.isfinite(abserr):
        raise QuadratureAccuracyError(what, float('inf'), accepted)
    if caught and abserr > accepted:
        logger.debug(f"Fourier quadrature warning for {what}: {caught[0].message}")
        raise QuadratureAccuracyError(what, abserr, accepted)
    return value, abserr


def _panel_edges(breakpoints, pieces):
    edges = []
    for left, right in zip(breakpoints[:-1], breakpoints[1:]):
        edges.append(np.linspace(left, right, pieces + 1)[:-1])
    edges.append(np.array([breakpoints[-1]]))
    return np.concatenate(edges)


def panel_sum(func, edges, order):
    """Composite Gauss-Legendre sum of a (possibly vector-valued) integrand"""
    nodes, weights = gauss_legendre(order)
    left = edges[:-1, None]
    half = 0.5 * np.diff(edges)[:, None]
    x = (left + half * (nodes[None, :] + 1.0)).ravel()
    w = (half * weights[None, :]).ravel()
    values = np.asarray(func(x))
    return values @ w if values.ndim > 1 else np.dot(values, w)


def panel_integrate(func, breakpoints, pieces, tol, what, order=None, max_refinements=None):
    """
    Integrate func over [breakpoints[0], breakpoints[-1]] on panels that never
    straddle a breakpoint, doubling the panel count until two successive
    estimates agree to tol. Returns (estimate, error estimate).
    """
    order = order or config.panel_order
    max_refinements = config.max_refinements if max_refinements is None else max_refinements
    breakpoints = np.unique(np.asarray(breakpoints, dtype=float))

    previous = panel_sum(func, _panel_edges(breakpoints, pieces), order)
    for level in range(max_refinements):
        pieces *= 2
        current = panel_sum(func, _panel_edges(breakpoints, pieces), order)
        error = float(np.max(np.abs(current - previous)))
        if error <= tol:
            return current, error
        previous = current

    raise QuadratureAccuracyError(what, error, tol)
