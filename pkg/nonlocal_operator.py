"""
The nonlocal derivative D as the Fourier multiplier 2 pi i psi(xi) on
periodic grids, and the checks that characterize it:
c^2 D^2 = J* - mu0, the scaling limit h^-1 S_h D S_h^-1 -> d/dx, and the
positivity of -iHD.
"""
import logging
import math
import numbers
from dataclasses import dataclass

import numpy as np

from errors import FieldInputError
from initial_data import GaussianPulse, InitialDataSpec
from micromodulus import convolve
from quadrature import checked_quad, panel_integrate, panel_sum

logger = logging.getLogger(__name__)

SPECTRAL_TAIL_TOL = 1e-10
IMAG_RESIDUE_TOL = 1e-10
TAIL_FRACTION = 0.1


@dataclass
class FieldState:
    """Sampled (u, u_t) on the periodic grid x_k = x0 + k dx, k < n"""

    x0: float
    dx: float
    n: int
    u: np.ndarray
    ut: np.ndarray

    def __post_init__(self):
        if self.dx <= 0:
            raise FieldInputError(f"Grid spacing must be positive, got {self.dx}")
        if self.n < 2 or self.n & (self.n - 1):
            raise FieldInputError(f"Sample count must be a power of two, got {self.n}")
        self.u = np.asarray(self.u, dtype=float)
        self.ut = np.asarray(self.ut, dtype=float)
        for name in ('u', 'ut'):
            values = getattr(self, name)
            if values.shape != (self.n,):
                raise FieldInputError(f"Field {name} has shape {values.shape}, expected ({self.n},)")
            if not np.all(np.isfinite(values)):
                raise FieldInputError(f"Field {name} contains non-finite samples")

    @property
    def period(self):
        return self.n * self.dx

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def xi(self):
        return np.fft.fftfreq(self.n, self.dx)

    @classmethod
    def from_data(cls, data, x0, dx, n):
        """Sample closed-form initial data on the grid"""
        x = x0 + dx * np.arange(n)
        return cls(x0, dx, n, data.u(x), data.ut(x))

    def data_width(self, rel=1e-6):
        """
        Half-extent, about the grid centre, of the region where u departs from
        its edge level or u_t is nonzero, by at least rel * peak
        """
        baseline = 0.5 * (self.u[0] + self.u[-1])
        magnitude = np.maximum(np.abs(self.u - baseline), np.abs(self.ut))
        peak = float(np.max(magnitude))
        if peak == 0.0:
            return 0.0
        x = self.x
        centre = self.x0 + 0.5 * self.period
        inside = x[magnitude >= rel * peak]
        return float(np.max(np.abs(inside - centre)))

    def copy_with(self, u, ut):
        return FieldState(self.x0, self.dx, self.n, u, ut)


@dataclass
class OperatorDiagnostics:
    spectral_tail: float
    imag_residue: float

    @property
    def tail_warning(self):
        return self.spectral_tail > SPECTRAL_TAIL_TOL


def spectral_tail(f):
    """Largest |Ff| in the top frequency band, relative to the largest |Ff|"""
    spectrum = np.abs(np.fft.fft(np.asarray(f, dtype=float)))
    peak = float(np.max(spectrum))
    if peak == 0.0:
        return 0.0
    n = spectrum.size
    index = np.abs(np.fft.fftfreq(n)) * n
    band = index >= (0.5 - 0.5 * TAIL_FRACTION) * n
    return float(np.max(spectrum[band])) / peak


def d_multiplier(profile, n, dx):
    """2 pi i psi(xi_m) with the Nyquist mode of an even grid set to 0"""
    xi = np.fft.fftfreq(n, dx)
    multiplier = 2j * math.pi * np.asarray(profile.psi(xi))
    if n % 2 == 0:
        multiplier[n // 2] = 0.0
    return multiplier


def apply_D(profile, field, dx, return_diagnostics=False):
    """D f on a uniform periodic grid"""
    f = np.asarray(field, dtype=float)
    if not np.all(np.isfinite(f)):
        raise FieldInputError("apply_D received non-finite samples")

    tail = spectral_tail(f)
    if tail > SPECTRAL_TAIL_TOL:
        logger.warning(f"Field is under-resolved: spectral tail {tail:.2e} exceeds {SPECTRAL_TAIL_TOL:.0e}")

    result = np.fft.ifft(d_multiplier(profile, f.size, dx) * np.fft.fft(f))
    peak = max(float(np.max(np.abs(result))), np.finfo(float).tiny)
    residue = float(np.max(np.abs(result.imag))) / peak
    if residue > IMAG_RESIDUE_TOL:
        logger.warning(f"apply_D imaginary residue {residue:.2e} of peak")

    if return_diagnostics:
        return result.real, OperatorDiagnostics(tail, residue)
    return result.real


def _as_spec(test_field):
    if isinstance(test_field, GaussianPulse):
        return InitialDataSpec(u_terms=(test_field,))
    return test_field


def scaling_residual(profile, h, v, w):
    """
    |<h^-1 S_h D S_h^-1 v - v_x, w>| through the multiplier identity
    F(S_h D S_h^-1 v)(xi) = 2 pi i h^-1 psi(h xi) (Fv)(xi).
    A constant v has its transform at xi = 0 only, where both multipliers vanish.
    """
    if isinstance(v, numbers.Real) or isinstance(w, numbers.Real):
        return 0.0
    v, w = _as_spec(v), _as_spec(w)
    widths = [t.width for t in v.u_terms] + [t.width for t in w.u_terms]
    if not widths:
        return 0.0
    cutoff = math.sqrt(80.0) / (math.pi * min(widths))

    def integrand(xi):
        symbol = np.asarray(profile.psi(h * xi)) / h - xi
        return 2j * math.pi * symbol * v.fourier('u', xi) * np.conj(w.fourier('u', xi))

    pieces = max(8, int(math.ceil(4.0 * cutoff * max(abs(t.center) for t in v.u_terms + w.u_terms) + 8)))
    breakpoints = [-cutoff, 0.0, cutoff]
    edges = np.linspace(-cutoff, cutoff, 2 * pieces + 1)
    rough = float(panel_sum(lambda xi: np.abs(integrand(xi)), edges, 20))
    # psi(h xi) / h - xi cancels to rounding level of the v_x pairing itself
    pairing = float(panel_sum(lambda xi: 2.0 * math.pi * np.abs(xi * v.fourier('u', xi) * w.fourier('u', xi)),
                              edges, 20))
    tol = max(1e-10 * rough, 1e-13 * pairing, 1e-300)
    value, _ = panel_integrate(integrand, breakpoints, pieces, tol=tol,
                               what=f"scaling residual at h={h:g}", max_refinements=12)
    return float(abs(value))


def pairing_scale(v, w):
    """||v_x||_2 ||w||_2 for Gaussian test fields"""
    v, w = _as_spec(v), _as_spec(w)
    lo_v, hi_v = v.extent(1e-20)
    lo_w, hi_w = w.extent(1e-20)
    vx_sq, _ = checked_quad(lambda x: float(v.derivative('u', x, 1)) ** 2, lo_v, hi_v, 'norm of v_x')
    w_sq, _ = checked_quad(lambda x: float(w.u(x)) ** 2, lo_w, hi_w, 'norm of w')
    return math.sqrt(vx_sq * w_sq)


def hd_positivity(profile, grid):
    """min over grid of pi sign(xi) psi(xi)"""
    grid = np.asarray(grid, dtype=float)
    return float(np.min(math.pi * np.sign(grid) * np.asarray(profile.psi(grid))))


def operator_consistency(profile, state, probe_stride=8):
    """
    max |c^2 D^2 u - (J*u - mu0 u)| / max |u| at every probe_stride-th grid point,
    with J*u by direct quadrature of the closed-form data.
    `state` is a (FieldState, InitialDataSpec) pair.
    """
    field, data = state
    du = apply_D(profile, field.u, field.dx)
    d2u = profile.c ** 2 * apply_D(profile, du, field.dx)
    x = field.x
    probes = range(field.n // 4, 3 * field.n // 4, probe_stride)
    worst = 0.0
    for k in probes:
        oracle = convolve(profile.kernel, data.u, x[k]) - profile.mu0 * field.u[k]
        worst = max(worst, abs(d2u[k] - oracle))
    relative = worst / float(np.max(np.abs(field.u)))
    logger.info(f"Operator consistency for {profile.kernel.name}: {relative:.3e}")
    return relative
