"""
Energy density along rays x = x0 + v t and fitted log-log decay exponents
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.linear_model import LinearRegression

from dispersion import audit_grid, psi_derivative
from errors import InsufficientDataError, PeriwaveError, PreconditionError
from evolution import evolve_point, initial_energy_peak_cached
from lab_config import config

logger = logging.getLogger(__name__)

ENERGY_FLOOR = 1e-300
NOISE_FACTOR = 10.0
MIN_FIT_SAMPLES = 5


@dataclass
class RaySeries:
    """Energy density samples e(t) = u_t^2 + c^2 (Du)^2 at (t, x0 + v t)"""

    v: float
    x0: float
    times: list
    e_vals: list
    e_errs: list = field(default_factory=list)
    valid: list = field(default_factory=list)
    speed_ratio: float = float('nan')
    fitted_exponent: float = float('nan')
    fit_residual: float = float('nan')
    fit_window: tuple = (float('nan'), float('nan'))

    def __post_init__(self):
        if len(self.times) != len(self.e_vals):
            raise PreconditionError("times and e_vals must have the same length")
        if not self.e_errs:
            self.e_errs = [0.0] * len(self.times)
        if not self.valid:
            self.valid = [e > ENERGY_FLOOR for e in self.e_vals]

    @property
    def supersonic(self):
        return self.speed_ratio > 1.0


def geometric_times(t_min, t_max, ratio):
    """t_min * ratio^k for every k with the value <= t_max (inclusive to rounding)"""
    if t_min <= 0 or t_max < t_min or ratio <= 1.0:
        raise PreconditionError(f"Need 0 < t_min <= t_max and ratio > 1, got {t_min}, {t_max}, {ratio}")
    count = int(math.floor(math.log(t_max / t_min) / math.log(ratio) + 1e-9)) + 1
    return [t_min * ratio ** k for k in range(count)]


def _check_times(times):
    times = [float(t) for t in times]
    if not times:
        raise PreconditionError("Ray needs at least one sample time")
    if times[0] <= 0 or any(b <= a for a, b in zip(times[:-1], times[1:])):
        raise PreconditionError("Ray sample times must be positive and strictly increasing")
    return times


def _guarded_sample(profile, data, t, x):
    try:
        sample = evolve_point(profile, data, t, x)
        return sample.energy, sample.energy_error
    except PeriwaveError as e:
        logger.warning(f"Ray sample at t={t:g}, x={x:g} excluded: {str(e)}")
        return float('nan'), float('inf')


def sample_ray(profile, data, v, x0, times):
    """Fill e(t) along x0 + v t with the grid-free point evaluator"""
    times = _check_times(times)
    ratio = abs(v) / profile.c
    logger.info(f"Sampling ray v={v:.6g} ({ratio:.3g} c) from x0={x0:.6g} at {len(times)} times")
    if abs(ratio - 1.0) < 1e-12:
        logger.warning("Ray speed equals c; no decay statement applies on the cone")

    initial_energy_peak_cached(profile, data)
    results = Parallel(n_jobs=config.n_jobs)(
        delayed(_guarded_sample)(profile, data, t, x0 + v * t) for t in times
    )
    e_vals = [e for e, _ in results]
    e_errs = [err for _, err in results]
    valid = [bool(np.isfinite(e) and e > max(NOISE_FACTOR * err, ENERGY_FLOOR)) for e, err in results]
    excluded = len(valid) - sum(valid)
    if excluded:
        logger.debug(f"Ray v={v:.6g}: {excluded} of {len(valid)} samples below the noise floor")
    return RaySeries(v=v, x0=x0, times=times, e_vals=e_vals, e_errs=e_errs, valid=valid, speed_ratio=ratio)


def fit_exponent(series, window):
    """
    Least-squares slope of log e against log t over valid samples inside the
    window. Stores slope, RMS residual and window on the series.
    """
    t_min, t_max = window
    t = np.asarray(series.times, dtype=float)
    e = np.asarray(series.e_vals, dtype=float)
    keep = np.asarray(series.valid, dtype=bool) & (t >= t_min) & (t <= t_max) & (e > ENERGY_FLOOR)
    if int(np.sum(keep)) < MIN_FIT_SAMPLES:
        raise InsufficientDataError(
            f"Ray v={series.v:.6g} has {int(np.sum(keep))} valid samples in [{t_min}, {t_max}], "
            f"need {MIN_FIT_SAMPLES}")

    log_t = np.log(t[keep]).reshape(-1, 1)
    log_e = np.log(e[keep])
    model = LinearRegression().fit(log_t, log_e)
    residual = float(np.sqrt(np.mean((model.predict(log_t) - log_e) ** 2)))

    series.fitted_exponent = float(model.coef_[0])
    series.fit_residual = residual
    series.fit_window = (t_min, t_max)
    logger.info(f"Ray v={series.v:.6g}: exponent {series.fitted_exponent:.4f} (rms {residual:.2e})")
    return series.fitted_exponent


def phase_speed_margin(profile, v, grid=None):
    """min over the grid of |v| +- c psi'(xi); at least |v| - c since |psi'| <= 1"""
    grid = audit_grid(profile) if grid is None else np.asarray(grid, dtype=float)
    slope = profile.c * np.asarray(psi_derivative(profile, grid, 1))
    return float(min(np.min(abs(v) + slope), np.min(abs(v) - slope)))


def series_frame(series_list):
    """Long-format samples: one row per (v, t)"""
    rows = []
    for series in series_list:
        for t, e, err, ok in zip(series.times, series.e_vals, series.e_errs, series.valid):
            rows.append({'v': series.v, 'v_over_c': series.speed_ratio, 'x0': series.x0, 't': t,
                         'e': e, 'e_err': err, 'valid': int(ok)})
    return pd.DataFrame(rows, columns=['v', 'v_over_c', 'x0', 't', 'e', 'e_err', 'valid'])


def exponent_frame(series_list):
    """One row per ray with its fitted exponent"""
    rows = [{'v': s.v, 'v_over_c': s.speed_ratio, 'supersonic': int(s.supersonic),
             't_min': s.fit_window[0], 't_max': s.fit_window[1],
             'exponent': s.fitted_exponent, 'residual': s.fit_residual,
             'valid_samples': int(sum(s.valid))} for s in series_list]
    return pd.DataFrame(rows, columns=['v', 'v_over_c', 'supersonic', 't_min', 't_max', 'exponent',
                                       'residual', 'valid_samples'])
