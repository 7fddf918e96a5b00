"""
d'Alembert reference solution of u_tt = c^2 u_xx, the local wave equation
with the same speed c, used to contrast finite and almost finite speed of
propagation.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from dispersion import DispersionProfile
from errors import PreconditionError
from evolution import evolve_point, initial_energy_peak_cached
from initial_data import TRUNCATION_WIDTHS
from lab_config import config

logger = logging.getLogger(__name__)

CONE_OFFSETS = (0.5, 1.0, 2.0, 3.0, 5.0)


@dataclass(frozen=True)
class DalembertSolution:
    c: float
    data: object

    def __post_init__(self):
        if not self.c > 0:
            raise PreconditionError(f"Wave speed must be positive, got {self.c}")


def _truncated_antiderivative(data, x):
    total = np.zeros_like(x)
    for term in data.ut_terms:
        reach = TRUNCATION_WIDTHS * term.width
        total += term.antiderivative(np.clip(x, term.center - reach, term.center + reach))
    return total


def dalembert_eval(sol, t, x, truncated=False):
    """(u, u_t) at (t, x); truncated=True uses the compactly supported surrogate"""
    x = np.asarray(x, dtype=float)
    c, data = sol.c, sol.data
    right, left = x + c * t, x - c * t
    if truncated:
        f_right = data.truncated('u', right) + data.u_offset
        f_left = data.truncated('u', left) + data.u_offset
        g_right, g_left = data.truncated('ut', right), data.truncated('ut', left)
        G_right, G_left = _truncated_antiderivative(data, right), _truncated_antiderivative(data, left)
    else:
        f_right, f_left = data.u(right), data.u(left)
        g_right, g_left = data.ut(right), data.ut(left)
        G_right, G_left = data.antiderivative_ut(right), data.antiderivative_ut(left)
    u = 0.5 * (f_right + f_left) + (G_right - G_left) / (2.0 * c)
    ut = 0.5 * c * (data.derivative('u', right, 1) - data.derivative('u', left, 1)) + 0.5 * (g_right + g_left)
    return u, ut


def dalembert_energy_density(sol, t, x):
    """u_t^2 + c^2 u_x^2"""
    x = np.asarray(x, dtype=float)
    c, data = sol.c, sol.data
    right, left = x + c * t, x - c * t
    _, ut = dalembert_eval(sol, t, x)
    ux = 0.5 * (data.derivative('u', right, 1) + data.derivative('u', left, 1)) \
        + (data.ut(right) - data.ut(left)) / (2.0 * c)
    return ut ** 2 + c ** 2 * ux ** 2


def decay_onset_time(sol, v, x0, rel):
    """
    Time after which every pulse is far enough from both characteristics
    through the ray x0 + v t that the energy density there is below rel of its peak.
    """
    if abs(abs(v) - sol.c) < 1e-12 * sol.c:
        raise PreconditionError("Ray speed equals the wave speed; the energy never leaves the ray")
    onset = 0.0
    for term in sol.data.terms:
        reach = term.width * math.sqrt(0.5 * math.log(1.0 / rel) + 4.0)
        for sign in (1.0, -1.0):
            closing = abs(v + sign * sol.c)
            onset = max(onset, (reach + abs(x0 - term.center)) / closing)
    return onset


def pde_residual(sol, t, x, h=1e-3):
    """u_tt - c^2 u_xx by second differences"""
    u0 = dalembert_eval(sol, t, x)[0]
    u_tt = (dalembert_eval(sol, t + h, x)[0] - 2.0 * u0 + dalembert_eval(sol, t - h, x)[0]) / h ** 2
    u_xx = (dalembert_eval(sol, t, x + h)[0] - 2.0 * u0 + dalembert_eval(sol, t, x - h)[0]) / h ** 2
    return u_tt - sol.c ** 2 * u_xx


def cone_probes(c, data, t, offsets=CONE_OFFSETS):
    """Points offset beyond [support_lo - c t, support_hi + c t] on both sides"""
    lo, hi = data.support()
    reach = c * abs(t)
    return [hi + reach + d for d in offsets] + [lo - reach - d for d in offsets]


def cone_leak(solver, data, t, offsets=CONE_OFFSETS):
    """
    max |u(t, x)| over probes outside the cone of the truncated data. The
    solver is either a DalembertSolution or a DispersionProfile (nonlocal).
    """
    if isinstance(solver, DispersionProfile):
        c = solver.c
        probes = cone_probes(c, data, t, offsets)
        values = [evolve_point(solver, data, t, x).u - data.u_offset for x in probes]
    else:
        c = solver.c
        probes = cone_probes(c, data, t, offsets)
        values = (dalembert_eval(solver, t, np.asarray(probes), truncated=True)[0] - data.u_offset).tolist()
    leak = float(np.max(np.abs(values)))
    logger.info(f"Cone leak at t={t:g} for {type(solver).__name__}: {leak:.3e}")
    return leak


def data_peak(data):
    """max |u(0)| sampled across the data extent"""
    lo, hi = data.extent(1e-6)
    x = np.linspace(lo, hi, 2001)
    return float(np.max(np.abs(data.u(x) - data.u_offset)))


def nonlocal_floor(profile, data):
    """Absolute tolerance of the grid-free evaluator for this data"""
    return config.scaled(config.point_rel_tol) * max(initial_energy_peak_cached(profile, data), 1e-300)
