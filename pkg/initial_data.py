"""
Closed-form initial data: finite sums of Gaussian pulses for u(0) and u_t(0)

Every quantity the solvers need (values, x-derivatives, Fourier transforms,
antiderivatives, L = 1 - A d^2/dx^2 applied to derivatives) is exact.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite
from scipy.special import erf

from errors import FieldInputError

logger = logging.getLogger(__name__)

# exp(-s^2) < 1e-300 beyond this many widths
TRUNCATION_WIDTHS = math.sqrt(300.0 * math.log(10.0))


@dataclass(frozen=True)
class GaussianPulse:
    """a * exp(-((x - center) / width)^2)"""

    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        for name in ('amplitude', 'center', 'width'):
            if not math.isfinite(getattr(self, name)):
                raise FieldInputError(f"Gaussian pulse {name} must be finite, got {getattr(self, name)}")
        if self.width <= 0:
            raise FieldInputError(f"Gaussian pulse width must be positive, got {self.width}")

    def _scaled(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.width

    def eval(self, x):
        return self.amplitude * np.exp(-self._scaled(x) ** 2)

    def derivative(self, x, k):
        """d^k/dx^k via physicists' Hermite polynomials"""
        if k == 0:
            return self.eval(x)
        s = self._scaled(x)
        coefficients = np.zeros(k + 1)
        coefficients[k] = 1.0
        return self.amplitude * (-1.0) ** k * hermite.hermval(s, coefficients) * np.exp(-s ** 2) / self.width ** k

    def apply_L(self, x, k, A):
        """(1 - A d^2/dx^2) d^k/dx^k"""
        return self.derivative(x, k) - A * self.derivative(x, k + 2)

    def antiderivative(self, x):
        """Integral from -inf to x"""
        return 0.5 * self.amplitude * self.width * math.sqrt(math.pi) * (1.0 + erf(self._scaled(x)))

    def fourier(self, xi):
        """int g(x) e(-xi x) dx"""
        xi = np.asarray(xi, dtype=float)
        envelope = self.amplitude * self.width * math.sqrt(math.pi) * np.exp(-(math.pi * self.width * xi) ** 2)
        return envelope * np.exp(-2j * math.pi * xi * self.center)

    def truncated(self, x):
        """Compact-support surrogate: exactly zero beyond TRUNCATION_WIDTHS widths"""
        s = self._scaled(x)
        return np.where(np.abs(s) <= TRUNCATION_WIDTHS, self.amplitude * np.exp(-s ** 2), 0.0)

    def reach(self, rel):
        """Half-width beyond which the pulse is below rel of its own peak"""
        return self.width * math.sqrt(math.log(1.0 / rel))


def _sum_terms(terms, method, *args):
    total = None
    for term in terms:
        value = getattr(term, method)(*args)
        total = value if total is None else total + value
    return total


@dataclass(frozen=True)
class InitialDataSpec:
    """u(0) and u_t(0) as sums of Gaussian pulses, plus a constant offset in u(0)"""

    u_terms: tuple = field(default_factory=tuple)
    ut_terms: tuple = field(default_factory=tuple)
    u_offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'u_terms', tuple(self.u_terms))
        object.__setattr__(self, 'ut_terms', tuple(self.ut_terms))

    @property
    def is_zero(self):
        return self.u_offset == 0.0 and not any(t.amplitude for t in self.u_terms + self.ut_terms)

    @property
    def terms(self):
        return self.u_terms + self.ut_terms

    def min_width(self):
        widths = [t.width for t in self.terms]
        return min(widths) if widths else 1.0

    def _channel(self, which):
        return self.u_terms if which == 'u' else self.ut_terms

    def value(self, which, x):
        x = np.asarray(x, dtype=float)
        total = _sum_terms(self._channel(which), 'eval', x)
        base = np.zeros_like(x) if total is None else total
        return base + self.u_offset if which == 'u' else base

    def u(self, x):
        return self.value('u', x)

    def ut(self, x):
        return self.value('ut', x)

    def derivative(self, which, x, k):
        x = np.asarray(x, dtype=float)
        if k == 0:
            return self.value(which, x)
        total = _sum_terms(self._channel(which), 'derivative', x, k)
        return np.zeros_like(x) if total is None else total

    def apply_L(self, which, x, k, A):
        x = np.asarray(x, dtype=float)
        total = _sum_terms(self._channel(which), 'apply_L', x, k, A)
        base = np.zeros_like(x) if total is None else total
        if which == 'u' and k == 0:
            base = base + self.u_offset
        return base

    def fourier(self, which, xi):
        """Transform of the pulse sum; the constant offset has no regular transform and is excluded"""
        xi = np.asarray(xi, dtype=float)
        total = _sum_terms(self._channel(which), 'fourier', xi)
        return np.zeros(xi.shape, dtype=complex) if total is None else total

    def antiderivative_ut(self, x):
        x = np.asarray(x, dtype=float)
        total = _sum_terms(self.ut_terms, 'antiderivative', x)
        return np.zeros_like(x) if total is None else total

    def truncated(self, which, x):
        x = np.asarray(x, dtype=float)
        total = _sum_terms(self._channel(which), 'truncated', x)
        return np.zeros_like(x) if total is None else total

    def extent(self, rel=1e-6):
        """(lo, hi) outside which every pulse is below rel of its peak"""
        if not self.terms:
            return 0.0, 0.0
        lo = min(t.center - t.reach(rel) for t in self.terms)
        hi = max(t.center + t.reach(rel) for t in self.terms)
        return lo, hi

    def support(self):
        """Support of the truncated surrogate"""
        if not self.terms:
            return 0.0, 0.0
        lo = min(t.center - TRUNCATION_WIDTHS * t.width for t in self.terms)
        hi = max(t.center + TRUNCATION_WIDTHS * t.width for t in self.terms)
        return lo, hi

    def reflected(self):
        """Data mirrored through x = 0"""
        def mirror(terms):
            return tuple(GaussianPulse(t.amplitude, -t.center, t.width) for t in terms)
        return InitialDataSpec(mirror(self.u_terms), mirror(self.ut_terms), self.u_offset)

    def describe(self):
        def rows(terms):
            return [[t.amplitude, t.center, t.width] for t in terms]
        return {'u': rows(self.u_terms), 'ut': rows(self.ut_terms), 'u_offset': self.u_offset}


def single_pulse(amplitude=1.0, center=0.0, width=1.0, channel='u'):
    pulse = GaussianPulse(amplitude, center, width)
    if channel == 'u':
        return InitialDataSpec(u_terms=(pulse,))
    return InitialDataSpec(ut_terms=(pulse,))
