"""
Dispersion function phi = mu0 - FJ, effective wave speed c and the odd
square-root multiplier psi with psi^2 = 2 phi / phi''(0).

With these conventions 2 pi c |psi(xi)| = sqrt(phi(xi)), the temporal
frequency of the spatial mode xi.
"""
import logging
import math

import numpy as np
from scipy.optimize import brentq

from errors import DegenerateKernelError, PositivityViolationError, QuadratureAccuracyError
from micromodulus import (TabulatedKernel, first_moment_transform, fourier_J, moment,
                          second_moment_transform, validate_kernel)
from quadrature import gauss_legendre

logger = logging.getLogger(__name__)

SWITCH_FRACTION = 1e-6        # near-zero branch where phi < SWITCH_FRACTION * mu0
POSITIVITY_TOL = 1e-9
AUDIT_POINTS = 10000
NEAR_ZERO_NODES = 32

# Ridders extrapolation for psi derivatives
RIDDERS_SHRINK = 1.4
RIDDERS_LEVELS = 10
RIDDERS_SAFE = 2.0
RIDDERS_ACCEPT = 1e-6
RIDDERS_STARTS = (1.0, 0.25, 0.0625)


class DispersionProfile:
    """mu0, mu2, c, phi''(0) and the phi / psi evaluators of one kernel"""

    def __init__(self, kernel, mu0, mu2):
        self.kernel = kernel
        self.mu0 = float(mu0)
        self.mu2 = float(mu2)
        self.c = math.sqrt(self.mu2 / 2.0)
        self.phi_pp0 = 4.0 * math.pi ** 2 * self.mu2
        self.length_scale = math.sqrt(self.mu2 / self.mu0)
        self.frequency_scale = 1.0 / (2.0 * math.pi * self.length_scale)
        self.sup_phi = self.mu0 if kernel.nonnegative_transform else 2.0 * self.mu0
        self.psi_asymptote = math.sqrt(2.0 * self.mu0 / self.phi_pp0)
        self.psi_bound = math.sqrt(2.0 * self.sup_phi / self.phi_pp0)
        self.eps_switch = None
        self.xi_star = None
        self.audit_limit = None

    # -- phi -----------------------------------------------------------------
    def phi(self, xi):
        xi = np.asarray(xi, dtype=float)
        closed = self.kernel.analytic_phi(xi)
        if closed is not None:
            return closed
        return self.mu0 - fourier_J(self.kernel, xi)

    def phi_p(self, xi):
        return first_moment_transform(self.kernel, xi)

    def phi_pp(self, xi):
        return second_moment_transform(self.kernel, xi)

    def fourier_J(self, xi):
        return fourier_J(self.kernel, xi)

    # -- psi -----------------------------------------------------------------
    def psi_direct(self, xi):
        """sign(xi) sqrt(2 phi(|xi|) / phi''(0))"""
        xi = np.asarray(xi, dtype=float)
        magnitude = np.sqrt(2.0 * np.maximum(self.phi(np.abs(xi)), 0.0) / self.phi_pp0)
        return np.sign(xi) * magnitude

    def psi_near_zero(self, xi):
        """xi sqrt(2 int_0^1 (1 - tau) phi''(tau xi) / phi''(0) dtau)"""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        nodes, weights = gauss_legendre(NEAR_ZERO_NODES)
        tau = 0.5 * (nodes + 1.0)
        w = 0.5 * weights * (1.0 - tau)
        samples = self.phi_pp(np.abs(xi)[:, None] * tau[None, :]) / self.phi_pp0
        integral = samples @ w
        return xi * np.sqrt(2.0 * np.maximum(integral, 0.0))

    def psi(self, xi):
        xi = np.asarray(xi, dtype=float)
        flat = np.atleast_1d(xi).astype(float)
        out = np.empty(flat.shape)
        near = np.abs(flat) < self.eps_switch
        if np.any(~near):
            out[~near] = self.psi_direct(flat[~near])
        if np.any(near):
            out[near] = self.psi_near_zero(flat[near])
        return out.reshape(xi.shape) if xi.ndim else float(out[0])

    def psi_prime(self, xi):
        """
        psi' from 2 psi psi' = 2 phi' / phi''(0). Near zero both phi'/xi and
        psi/xi come from integrals of phi'' so nothing cancels; psi'(0) = 1.
        """
        xi = np.asarray(xi, dtype=float)
        flat = np.atleast_1d(xi).astype(float)
        out = np.empty(flat.shape)
        near = np.abs(flat) < self.eps_switch
        if np.any(~near):
            far = flat[~near]
            out[~near] = self.phi_p(far) / (self.phi_pp0 * self.psi_direct(far))
        if np.any(near):
            nodes, weights = gauss_legendre(NEAR_ZERO_NODES)
            tau = 0.5 * (nodes + 1.0)
            samples = self.phi_pp(np.abs(flat[near])[:, None] * tau[None, :]) / self.phi_pp0
            slope = samples @ (0.5 * weights)
            ratio = np.sqrt(2.0 * np.maximum(samples @ (0.5 * weights * (1.0 - tau)), 0.0))
            out[near] = slope / ratio
        return out.reshape(xi.shape) if xi.ndim else float(out[0])

    def omega(self, xi):
        """Signed temporal frequency 2 pi c psi(xi)"""
        return 2.0 * math.pi * self.c * np.asarray(self.psi(xi))

    def summary(self):
        return {
            'kernel': self.kernel.describe(),
            'mu0': self.mu0,
            'mu2': self.mu2,
            'c': self.c,
            'phi_pp0': self.phi_pp0,
            'xi_star': self.xi_star,
            'eps_switch': self.eps_switch,
            'psi_asymptote': self.psi_asymptote,
            'psi_bound': self.psi_bound
        }

    def __repr__(self):
        return f'<DispersionProfile {self.kernel.name} c={self.c:.10g}>'


def _find_switch(profile):
    """Largest xi with phi(xi) below SWITCH_FRACTION * mu0"""
    target = SWITCH_FRACTION * profile.mu0
    guess = math.sqrt(target / (2.0 * math.pi ** 2 * profile.mu2))

    def excess(xi):
        return float(profile.phi(xi)) - target

    lo, hi = 0.25 * guess, 4.0 * guess
    if excess(lo) < 0.0 < excess(hi):
        return brentq(excess, lo, hi, xtol=1e-15 * guess, rtol=1e-12)
    logger.debug(f"phi not bracketed around {guess:.3e}; using the quadratic estimate")
    return guess


def _find_xi_star(profile):
    """First xi_k = 2^k / l with |FJ| <= mu0/2 on the whole decade [xi_k, 10 xi_k]"""
    base = 1.0 / profile.length_scale
    for k in range(-8, 48):
        start = base * 2.0 ** k
        decade = np.geomspace(start, 10.0 * start, 64)
        if np.all(np.abs(profile.phi(decade) - profile.mu0) <= 0.5 * profile.mu0):
            return start
    raise DegenerateKernelError(f"No frequency found beyond which |FJ| <= mu0/2 for {profile.kernel!r}")


def audit_grid(profile, points=AUDIT_POINTS):
    """Non-negative audit frequencies up to the audit limit"""
    return np.linspace(0.0, profile.audit_limit, points)


def _audit_positivity(profile):
    grid = audit_grid(profile)
    values = profile.phi(grid)
    worst = float(np.min(values))
    if worst < -POSITIVITY_TOL:
        raise PositivityViolationError(f"phi reaches {worst:.3e} at xi={grid[np.argmin(values)]:.6g}")
    off_origin = grid >= profile.eps_switch
    if np.any(values[off_origin] <= 1e-12 * profile.mu0):
        bad = grid[off_origin][np.argmin(values[off_origin])]
        raise PositivityViolationError(f"phi vanishes away from the origin near xi={bad:.6g}")
    logger.debug(f"phi audit: min {worst:.3e} over {grid.size} points up to {profile.audit_limit:.4g}")


def build_profile(kernel):
    """Derive the dispersion profile of a validated kernel"""
    logger.info(f"Building dispersion profile for {kernel!r}")
    report = validate_kernel(kernel)
    if not report.passed:
        raise DegenerateKernelError(f"Kernel {kernel.name} failed validation: {', '.join(report.failed())}")

    mu0 = moment(kernel, 0)
    mu2 = moment(kernel, 2)
    if not (np.isfinite(mu0) and mu0 > 0):
        raise DegenerateKernelError(f"mu0 must be finite and positive, got {mu0}")
    if not (np.isfinite(mu2) and mu2 > 0):
        raise DegenerateKernelError(f"mu2 must be finite and positive, got {mu2}")

    profile = DispersionProfile(kernel, mu0, mu2)
    profile.eps_switch = _find_switch(profile)
    profile.xi_star = _find_xi_star(profile)
    profile.audit_limit = 50.0 * profile.xi_star
    if isinstance(kernel, TabulatedKernel):
        profile.audit_limit = min(profile.audit_limit, kernel.nyquist_frequency())
    _audit_positivity(profile)

    logger.info(f"Profile ready: c={profile.c:.10g}, xi_star={profile.xi_star:.4g}, "
                f"eps_switch={profile.eps_switch:.3e}")
    return profile


def psi_value(profile, xi):
    return profile.psi(xi)


def _difference(func, xi, h):
    return (func(xi + h) - func(xi - h)) / (2.0 * h)


def _ridders(func, flat, h):
    """Ridders extrapolation of central differences of func; (estimate, error) per point"""
    table = np.zeros((RIDDERS_LEVELS, RIDDERS_LEVELS, flat.size))
    table[0, 0] = _difference(func, flat, h)
    best = table[0, 0].copy()
    error = np.full(flat.size, np.inf)
    active = np.ones(flat.size, dtype=bool)
    factor2 = RIDDERS_SHRINK ** 2

    for i in range(1, RIDDERS_LEVELS):
        h /= RIDDERS_SHRINK
        table[0, i] = _difference(func, flat, h)
        fac = factor2
        for j in range(1, i + 1):
            table[j, i] = (table[j - 1, i] * fac - table[j - 1, i - 1]) / (fac - 1.0)
            fac *= factor2
            candidate = np.maximum(np.abs(table[j, i] - table[j - 1, i]),
                                   np.abs(table[j, i] - table[j - 1, i - 1]))
            improve = active & (candidate <= error)
            error[improve] = candidate[improve]
            best[improve] = table[j, i][improve]
        diverging = np.abs(table[i, i] - table[i - 1, i - 1]) >= RIDDERS_SAFE * error
        active &= ~diverging
        if not np.any(active):
            break
    return best, error


def psi_derivative(profile, xi, order=1, h0=None, method='auto'):
    """
    psi' or psi''. The first derivative comes from phi' in closed form
    (method='auto'); method='ridders' and the second derivative use central
    differences with Ridders extrapolation, restarted from smaller steps
    where the table does not settle.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    xi = np.asarray(xi, dtype=float)
    if order == 1 and method == 'auto':
        return profile.psi_prime(xi)

    flat = np.atleast_1d(xi).astype(float)
    func = profile.psi if order == 1 else profile.psi_prime
    h = 0.5 * profile.frequency_scale if h0 is None else float(h0)
    if not h > 1e-150:
        raise QuadratureAccuracyError(f"psi derivative step at xi={flat[0]:.6g}", h, 1e-150)

    best = np.zeros(flat.size)
    error = np.full(flat.size, np.inf)
    for shrink in RIDDERS_STARTS:
        pending = error / np.maximum(1.0, np.abs(best)) > RIDDERS_ACCEPT
        if not np.any(pending):
            break
        estimate, estimate_error = _ridders(func, flat[pending], h * shrink)
        better = estimate_error < error[pending]
        index = np.nonzero(pending)[0][better]
        best[index], error[index] = estimate[better], estimate_error[better]

    relative = error / np.maximum(1.0, np.abs(best))
    worst = float(np.max(relative))
    if not np.isfinite(worst) or worst > RIDDERS_ACCEPT:
        bad = flat[int(np.argmax(relative))]
        raise QuadratureAccuracyError(f"psi derivative of order {order} at xi={bad:.6g}", worst, RIDDERS_ACCEPT)
    return best.reshape(xi.shape) if xi.ndim else float(best[0])


def group_velocity(profile, xi):
    return profile.c * np.asarray(psi_derivative(profile, xi, 1))


def phase_velocity(profile, xi):
    """c psi(xi) / xi, with the limit c at xi = 0"""
    xi = np.asarray(xi, dtype=float)
    safe = np.where(xi == 0.0, 1.0, xi)
    return np.where(xi == 0.0, profile.c, profile.c * np.asarray(profile.psi(safe)) / safe)


def phi_derivative(profile, xi):
    """phi' = phi''(0) psi psi', taken from the kernel's first-moment transform"""
    return profile.phi_p(np.asarray(xi, dtype=float))


def concavity_check(profile, points=41, span=3.0):
    """
    Largest violation of phi(eta) <= phi(xi) + phi'(xi)(eta - xi) + phi''(0)(eta - xi)^2 / 2
    over a deterministic grid of pairs in [-span xi_star, span xi_star]
    """
    grid = np.linspace(-span * profile.xi_star, span * profile.xi_star, points)
    xi, eta = np.meshgrid(grid, grid, indexing='ij')
    xi, eta = xi.ravel(), eta.ravel()
    bound = profile.phi(xi) + phi_derivative(profile, xi) * (eta - xi) + 0.5 * profile.phi_pp0 * (eta - xi) ** 2
    violation = float(np.max(profile.phi(eta) - bound))
    logger.debug(f"Concavity spot-check over {xi.size} pairs: worst excess {violation:.3e}")
    return violation
