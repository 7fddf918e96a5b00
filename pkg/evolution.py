"""
Exact-in-time evolution of u_tt + mu0 u = J * u.

Per frequency the solution is the matrix
    M(omega, t) = [[cos(omega t), sin(omega t) / omega], [-omega sin(omega t), cos(omega t)]]
with omega = sqrt(phi(xi)) = 2 pi c |psi(xi)|. The characteristic variables
w+- = u_t +- c D u evolve by the unimodular multipliers e(+-c psi(xi) t).
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from joblib import Parallel, delayed

from dispersion import psi_derivative
from errors import DomainTooSmallError
from lab_config import config
from nonlocal_operator import d_multiplier
from quadrature import panel_integrate

logger = logging.getLogger(__name__)

# Gaussian transforms are negligible once exp(-pi^2 w^2 xi^2) drops below this
SPECTRAL_CUTOFF = 1e-18
STATIONARY_GRID = 513


@dataclass
class SpectralState:
    """Fourier mirror of a FieldState"""

    xi: np.ndarray
    Fu: np.ndarray
    Fut: np.ndarray

    @classmethod
    def from_field(cls, state):
        return cls(state.xi, np.fft.fft(state.u), np.fft.fft(state.ut))

    def conjugate_symmetry_defect(self):
        """max |F(-xi) - conj F(xi)| over both channels, zero for real fields"""
        def defect(values):
            mirrored = np.roll(values[::-1], 1)
            return float(np.max(np.abs(mirrored - np.conj(values))))
        return max(defect(self.Fu), defect(self.Fut))


@dataclass
class PointSample:
    """p = u_t, q = c Du and u at one space-time point, with error estimates"""

    p: float
    q: float
    u: float
    p_err: float
    q_err: float
    u_err: float

    @property
    def energy(self):
        return self.p ** 2 + self.q ** 2

    @property
    def energy_error(self):
        return 2.0 * (abs(self.p) * self.p_err + abs(self.q) * self.q_err) + self.p_err ** 2 + self.q_err ** 2


def required_period(profile, state, t):
    width = state.data_width()
    margin = config.margin_widths * width
    return 2.0 * (profile.c * abs(t) + width + margin)


def audit_periodization(profile, state, t):
    """Raise DomainTooSmallError when the period cannot hold the evolved data"""
    needed = required_period(profile, state, t)
    if state.period < needed:
        logger.error(f"Periodization audit failed at t={t}: period {state.period:.6g} < {needed:.6g}")
        raise DomainTooSmallError(state.period, needed)


def evolution_matrix(profile, xi, t):
    """Entries (cos, sin/omega, -omega sin) of M(omega, t), zero-safe at omega = 0"""
    omega = np.abs(profile.omega(xi))
    cos = np.cos(omega * t)
    sin_over = t * np.sinc(omega * t / math.pi)
    return cos, sin_over, -omega * np.sin(omega * t)


def evolve_grid(profile, state0, t):
    """State at time t by per-frequency application of M"""
    audit_periodization(profile, state0, t)
    spectral = SpectralState.from_field(state0)
    cos, sin_over, minus_omega_sin = evolution_matrix(profile, spectral.xi, t)
    Fu = cos * spectral.Fu + sin_over * spectral.Fut
    Fut = minus_omega_sin * spectral.Fu + cos * spectral.Fut
    logger.debug(f"evolve_grid: n={state0.n}, t={t}")
    return state0.copy_with(np.fft.ifft(Fu).real, np.fft.ifft(Fut).real)


def characteristic_spectra(profile, state):
    """Fourier transforms of w+ = p + q and w- = p - q with q = c D u"""
    Fp = np.fft.fft(state.ut)
    Fq = profile.c * d_multiplier(profile, state.n, state.dx) * np.fft.fft(state.u)
    return Fp + Fq, Fp - Fq


def characteristic_fields(profile, state):
    """(w+, w-) on the grid"""
    Fwp, Fwm = characteristic_spectra(profile, state)
    return np.fft.ifft(Fwp).real, np.fft.ifft(Fwm).real


def evolve_characteristic(profile, state0, t):
    """
    Evolve w+- by e(+-c psi t) and rebuild u_t = (w+ + w-) / 2. The u row
    uses the cos / sinc entries of M, never a division by psi.
    """
    audit_periodization(profile, state0, t)
    xi = state0.xi
    Fwp, Fwm = characteristic_spectra(profile, state0)
    phase = 2j * math.pi * profile.c * np.asarray(profile.psi(xi)) * t
    Fwp_t = np.exp(phase) * Fwp
    Fwm_t = np.exp(-phase) * Fwm
    Fut = 0.5 * (Fwp_t + Fwm_t)

    cos, sin_over, _ = evolution_matrix(profile, xi, t)
    Fu = cos * np.fft.fft(state0.u) + sin_over * np.fft.fft(state0.ut)
    return state0.copy_with(np.fft.ifft(Fu).real, np.fft.ifft(Fut).real)


def energy_density(profile, state):
    """u_t^2 + c^2 (Du)^2 on the grid"""
    q = profile.c * np.fft.ifft(d_multiplier(profile, state.n, state.dx) * np.fft.fft(state.u)).real
    return state.ut ** 2 + q ** 2


def total_energy(profile, state):
    """sum (u_t^2 + c^2 (Du)^2) dx"""
    return float(np.sum(energy_density(profile, state)) * state.dx)


def frequency_cutoff(profile, data, t):
    """xi beyond which every transformed term, after evolution, is below SPECTRAL_CUTOFF"""
    growth = max(1.0, abs(t)) * max(1.0, 2.0 * math.pi * profile.c * profile.psi_bound)
    return math.sqrt(math.log(growth / SPECTRAL_CUTOFF)) / (math.pi * data.min_width())


@lru_cache(maxsize=64)
def _psi_prime_table(profile, xi_max):
    grid = np.linspace(0.0, xi_max, STATIONARY_GRID)
    return grid, np.asarray(psi_derivative(profile, grid, 1))


def stationary_points(profile, offsets, t, xi_max):
    """Approximate roots in (0, xi_max) of offset +- c t psi'(xi) for each offset"""
    if t == 0:
        return []
    grid, slope = _psi_prime_table(profile, float(xi_max))
    roots = []
    for offset in offsets:
        for sign in (1.0, -1.0):
            phase_rate = offset + sign * profile.c * t * slope
            flips = np.nonzero(np.sign(phase_rate[:-1]) * np.sign(phase_rate[1:]) < 0)[0]
            roots.extend(0.5 * (grid[flips] + grid[flips + 1]))
    return sorted(roots)


def initial_energy_peak(profile, data):
    """Peak of u_t^2 + c^2 (Du)^2 at t = 0 over the data extent"""
    lo, hi = data.extent(1e-6)
    xs = np.linspace(lo, hi, 65) if hi > lo else np.array([lo])
    peak = 0.0
    for x in xs:
        sample = _point_integral(profile, data, 0.0, float(x), tol=None)
        peak = max(peak, sample.energy)
    return peak


def _point_integral(profile, data, t, x, tol):
    xi_max = frequency_cutoff(profile, data, t)
    offsets = [x - term.center for term in data.terms]
    spread = max(abs(o) for o in offsets) if offsets else 0.0
    oscillations = xi_max * (spread + profile.c * abs(t))
    pieces = int(math.ceil(2.0 * oscillations)) + 16
    breakpoints = [0.0] + stationary_points(profile, offsets, t, xi_max) + [xi_max]

    def integrand(xi):
        cos, sin_over, minus_omega_sin = evolution_matrix(profile, xi, t)
        U = data.fourier('u', xi)
        V = data.fourier('ut', xi)
        carrier = np.exp(2j * math.pi * xi * x)
        u_hat = cos * U + sin_over * V
        p_hat = minus_omega_sin * U + cos * V
        q_hat = 1j * profile.omega(xi) * u_hat
        return np.vstack([carrier * p_hat, carrier * q_hat, carrier * u_hat])

    if tol is None:
        amplitude = max([abs(term.amplitude) for term in data.terms] + [1.0])
        tol = config.scaled(config.point_rel_tol) * amplitude
    values, error = panel_integrate(integrand, breakpoints, pieces, tol / 2.0,
                                    f"point evaluation at t={t:g}, x={x:g}")
    p, q, u = (2.0 * values.real).tolist()
    err = 2.0 * error
    return PointSample(p, q, u + data.u_offset, err, err, err)


def evolve_point(profile, data, t, x, tol=None):
    """
    Grid-free (p, q, u) at (t, x) from the oscillatory Fourier integrals of
    the closed-form data. The absolute tolerance defaults to point_rel_tol
    times the initial energy density peak.
    """
    if data.is_zero or not data.terms:
        return PointSample(0.0, 0.0, data.u_offset, 0.0, 0.0, 0.0)
    if tol is None:
        tol = config.scaled(config.point_rel_tol) * max(initial_energy_peak_cached(profile, data), 1e-300)
    return _point_integral(profile, data, float(t), float(x), tol)


@lru_cache(maxsize=64)
def initial_energy_peak_cached(profile, data):
    return initial_energy_peak(profile, data)


def evolve_points(profile, data, points, tol=None):
    """evolve_point over (t, x) pairs, in input order"""
    initial_energy_peak_cached(profile, data)
    return Parallel(n_jobs=config.n_jobs)(
        delayed(evolve_point)(profile, data, t, x, tol) for t, x in points
    )
