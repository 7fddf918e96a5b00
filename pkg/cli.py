"""
Command-line surface: validate, dispersion, evolve, ray-scan, kernels, compare

Every subcommand writes CSV tables and a summary.json into the output
directory. The exit status is 0 only when every check in the summary passed.
"""
import argparse
import logging
import math
import sys
from dataclasses import dataclass

import numpy as np
import pandas as pd

from acceptance_config import AcceptanceConfig
from artifact_store import ArtifactStore
from classical_wave import (DalembertSolution, cone_leak, dalembert_energy_density, data_peak,
                            nonlocal_floor)
from dispersion import (audit_grid, build_profile, concavity_check, group_velocity, phase_velocity,
                        psi_derivative)
from errors import ConfigError, InsufficientDataError, PeriwaveError
from evolution import (evolve_characteristic, evolve_grid, evolve_point, total_energy)
from initial_data import GaussianPulse, InitialDataSpec
from kernel_b import outside_cone_value, tail_check, trivial_bound
from lab_config import config
from micromodulus import ExponentialKernel, TabulatedKernel, fourier_J, moment, validate_kernel
from nonlocal_operator import (FieldState, apply_D, hd_positivity, operator_consistency,
                               pairing_scale, scaling_residual)
from ray_probe import (exponent_frame, fit_exponent, geometric_times, phase_speed_margin,
                       sample_ray, series_frame)
from run_config import default_config, load_config
from workflow_manager import ExperimentWorkflow

logger = logging.getLogger(__name__)

COMMANDS = ('validate', 'dispersion', 'evolve', 'ray-scan', 'kernels', 'compare')

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_STAGE_FAILED = 3


@dataclass
class Check:
    """One pass/fail entry of summary.json"""

    name: str
    value: float
    threshold: float
    passed: bool
    relation: str

    def as_dict(self):
        return {'name': self.name, 'value': self.value, 'threshold': self.threshold,
                'passed': bool(self.passed), 'relation': self.relation}


def at_most(name, value, threshold):
    value = float(value)
    return Check(name, value, float(threshold), bool(np.isfinite(value) and value <= threshold), '<=')


def at_least(name, value, threshold):
    value = float(value)
    return Check(name, value, float(threshold), bool(np.isfinite(value) and value >= threshold), '>=')


def greater_than(name, value, threshold):
    value = float(value)
    return Check(name, value, float(threshold), bool(np.isfinite(value) and value > threshold), '>')


# -- validate ------------------------------------------------------------------

def dispersion_checks(profile):
    """Identities of psi, c and phi for one profile"""
    kernel = profile.kernel
    grid = audit_grid(profile, AcceptanceConfig.AUDIT_GRID_POINTS)
    checks = [
        at_most('psi_at_zero', abs(profile.psi(0.0)), 0.0),
        at_most('psi_prime_at_zero', abs(psi_derivative(profile, 0.0, 1) - 1.0), AcceptanceConfig.PSI_PRIME_ZERO_TOL),
        at_most('psi_prime_sup', float(np.max(np.abs(psi_derivative(profile, grid, 1)))),
                1.0 + AcceptanceConfig.PSI_PRIME_SUP_SLACK),
        at_most('psi_bound', float(np.max(np.abs(profile.psi(grid)))), profile.psi_bound + 1e-9),
    ]

    if not isinstance(kernel, TabulatedKernel):
        reference = math.sqrt(moment(kernel, 2, method='quadrature') / 2.0)
        checks.append(at_most('wave_speed', abs(profile.c - reference) / reference,
                              AcceptanceConfig.WAVE_SPEED_REL_TOL))
        radius = kernel.riemann_lebesgue_radius()
        far = radius * np.linspace(1.0, 10.0, 200)
        checks.append(at_most('riemann_lebesgue', float(np.max(np.abs(fourier_J(kernel, far)))) / profile.mu0, 0.01))

    eps = profile.eps_switch
    annulus = np.linspace(0.5 * eps, 2.0 * eps, 41)
    direct, near = profile.psi_direct(annulus), profile.psi_near_zero(annulus)
    checks.append(at_most('psi_branches', float(np.max(np.abs(direct - near) / np.abs(direct))), 1e-9))
    checks.append(at_most('concavity', concavity_check(profile) / profile.mu0, 1e-8))
    checks.append(at_least('hd_positivity', hd_positivity(profile, np.linspace(-100.0, 100.0, 2001)), 0.0))

    if isinstance(kernel, ExponentialKernel):
        xi = np.linspace(-20.0, 20.0, 4001)
        closed = xi / np.sqrt(1.0 + (2.0 * math.pi * kernel.sigma * xi) ** 2)
        checks.append(at_most('psi_closed_form', float(np.max(np.abs(profile.psi(xi) - closed))),
                              AcceptanceConfig.PSI_CLOSED_FORM_TOL))
    return checks


def operator_checks(profile):
    """c^2 D^2 = J* - mu0 on a resolved grid and the scaling limit"""
    data = InitialDataSpec(u_terms=(GaussianPulse(1.0, 0.0, 1.0),))
    field = FieldState.from_data(data, -32.0, 0.25, 256)
    checks = [at_most('operator_consistency', operator_consistency(profile, (field, data)),
                      AcceptanceConfig.OPERATOR_CONSISTENCY_TOL)]

    v, w = GaussianPulse(1.0, 0.3, 1.0), GaussianPulse(1.0, -0.2, 0.8)
    residuals = [scaling_residual(profile, h, v, w) for h in AcceptanceConfig.SCALING_STEPS]
    increases = [later - earlier for earlier, later in zip(residuals[:-1], residuals[1:])]
    checks.append(at_most('scaling_monotone', max(increases), AcceptanceConfig.SCALING_MONOTONE_SLACK))
    checks.append(at_most('scaling_final', residuals[-1] / pairing_scale(v, w), AcceptanceConfig.SCALING_FINAL_TOL))
    return checks, residuals


def run_validate(run_config, workflow):
    kernel = workflow.run_stage('Build Kernel', run_config.build_kernel)
    report = validate_kernel(kernel)
    kernel_checks = [Check(f'kernel_{c.name}', c.residual, float('nan'), c.passed, 'report') for c in report.checks]
    tables = {
        'validation.csv': pd.DataFrame(report.as_records(), columns=['kernel', 'check', 'passed', 'residual', 'detail']),
    }
    if not report.passed:
        logger.warning(f"Kernel {kernel.name} fails {', '.join(report.failed())}; profile checks skipped")
        return None, kernel_checks, tables, {'profile_skipped': True}

    profile = workflow.run_stage('Build Profile', build_profile, kernel)

    def compute():
        checks = kernel_checks + dispersion_checks(profile)
        more, residuals = operator_checks(profile)
        return checks + more, residuals

    checks, residuals = workflow.run_stage('Compute', compute)
    tables.update({
        'scaling.csv': pd.DataFrame({'h': AcceptanceConfig.SCALING_STEPS, 'residual': residuals},
                                    columns=['h', 'residual']),
    })
    return profile, checks, tables, {}


# -- dispersion ----------------------------------------------------------------

def run_dispersion(run_config, workflow):
    kernel = workflow.run_stage('Build Kernel', run_config.build_kernel)
    profile = workflow.run_stage('Build Profile', build_profile, kernel)
    section = run_config.section('dispersion')

    def compute():
        xi = np.linspace(section['xi_min'], section['xi_max'], section['points'])
        return pd.DataFrame({
            'xi': xi,
            'FJ': fourier_J(kernel, xi),
            'phi': profile.phi(xi),
            'psi': profile.psi(xi),
            'psi_prime': psi_derivative(profile, xi, 1),
            'group_velocity': group_velocity(profile, xi),
            'phase_velocity': phase_velocity(profile, xi),
        }, columns=['xi', 'FJ', 'phi', 'psi', 'psi_prime', 'group_velocity', 'phase_velocity'])

    frame = workflow.run_stage('Compute', compute)
    mirrored = np.asarray(profile.psi(-frame['xi'].to_numpy()))
    checks = [
        at_most('psi_odd', float(np.max(np.abs(mirrored + frame['psi'].to_numpy()))), 0.0),
        at_most('psi_prime_sup', float(np.max(np.abs(frame['psi_prime']))), 1.0 + AcceptanceConfig.PSI_PRIME_SUP_SLACK),
        at_least('phi_min', float(np.min(frame['phi'])), -1e-12),
    ]
    return profile, checks, {'dispersion.csv': frame}, {}


# -- evolve --------------------------------------------------------------------

def run_evolve(run_config, workflow):
    kernel = workflow.run_stage('Build Kernel', run_config.build_kernel)
    profile = workflow.run_stage('Build Profile', build_profile, kernel)
    data = run_config.build_data()
    grid = run_config.section('grid')
    times = run_config.get('evolve', 'times')

    def compute():
        state0 = FieldState.from_data(data, run_config.grid_origin(), grid['dx'], grid['n'])
        energy0 = total_energy(profile, state0)
        snapshots, rows = {}, []
        worst_drift, worst_char = 0.0, 0.0
        for index, t in enumerate(times):
            state = evolve_grid(profile, state0, t)
            char = evolve_characteristic(profile, state0, t)
            du = apply_D(profile, state.u, state.dx)
            q_char = profile.c * apply_D(profile, char.u, char.dx)
            scale = max(float(np.max(np.abs(state.ut))), float(np.max(np.abs(profile.c * du))), 1e-300)
            char_diff = max(float(np.max(np.abs(state.ut - char.ut))),
                            float(np.max(np.abs(profile.c * du - q_char)))) / scale
            energy = total_energy(profile, state)
            drift = abs(energy - energy0) / energy0 if energy0 > 0 else abs(energy)
            worst_drift, worst_char = max(worst_drift, drift), max(worst_char, char_diff)
            rows.append({'t': t, 'energy': energy, 'relative_drift': drift, 'characteristic_difference': char_diff})
            snapshots[f'snapshot_{index:03d}.csv'] = pd.DataFrame(
                {'x': state.x, 'u': state.u, 'ut': state.ut, 'Du': du}, columns=['x', 'u', 'ut', 'Du'])

        t_end = times[-1] if times else 0.0
        once = evolve_grid(profile, state0, t_end)
        twice = evolve_grid(profile, evolve_grid(profile, state0, 0.5 * t_end), 0.5 * t_end)
        peak = max(float(np.max(np.abs(once.u))), float(np.max(np.abs(once.ut))), 1e-300)
        semigroup = max(float(np.max(np.abs(once.u - twice.u))), float(np.max(np.abs(once.ut - twice.ut)))) / peak
        return snapshots, rows, worst_drift, worst_char, semigroup

    snapshots, rows, drift, char_diff, semigroup = workflow.run_stage('Compute', compute)
    checks = [
        at_most('energy_drift', drift, AcceptanceConfig.ENERGY_DRIFT_TOL),
        at_most('characteristic_agreement', char_diff, AcceptanceConfig.CHARACTERISTIC_TOL),
        at_most('semigroup', semigroup, AcceptanceConfig.SEMIGROUP_TOL),
    ]
    tables = dict(snapshots)
    tables['energy.csv'] = pd.DataFrame(rows, columns=['t', 'energy', 'relative_drift', 'characteristic_difference'])
    return profile, checks, tables, {'snapshots': sorted(snapshots)}


# -- ray-scan ------------------------------------------------------------------

def ray_checks(profile, series_list, decay_order):
    checks = []
    supersonic = [s for s in series_list if s.supersonic]
    subsonic = [s for s in series_list if s.speed_ratio < 1.0]
    for s in supersonic:
        checks.append(at_most(f'decay_v{s.speed_ratio:.6g}c', s.fitted_exponent, -2.0 * decay_order))
        checks.append(at_least(f'phase_margin_v{s.speed_ratio:.6g}c', phase_speed_margin(profile, s.v),
                               abs(s.v) - profile.c - 1e-9))
    if supersonic and subsonic:
        # the slowest supersonic decay must stay SUBSONIC_SEPARATION below every subsonic exponent
        gap = min(s.fitted_exponent for s in subsonic) - max(s.fitted_exponent for s in supersonic)
        checks.append(at_least('supersonic_subsonic_separation', gap, AcceptanceConfig.SUBSONIC_SEPARATION))
    return checks


def run_ray_scan(run_config, workflow):
    kernel = workflow.run_stage('Build Kernel', run_config.build_kernel)
    profile = workflow.run_stage('Build Profile', build_profile, kernel)
    data = run_config.build_data()
    section = run_config.section('ray')

    def compute():
        times = geometric_times(section['t_min'], section['t_max'], section['ratio'])
        series_list = []
        for velocity in section['velocities']:
            series = sample_ray(profile, data, velocity.resolve(profile.c), section['x0'], times)
            try:
                fit_exponent(series, (section['t_min'], section['t_max']))
            except InsufficientDataError as e:
                logger.warning(str(e))
            series_list.append(series)
        return series_list

    series_list = workflow.run_stage('Compute', compute)
    checks = workflow.run_stage('Checks', ray_checks, profile, series_list, section['decay_order'])
    tables = {'ray_samples.csv': series_frame(series_list), 'ray_exponents.csv': exponent_frame(series_list)}
    return profile, checks, tables, {}


# -- kernels -------------------------------------------------------------------

def run_kernels(run_config, workflow):
    kernel = workflow.run_stage('Build Kernel', run_config.build_kernel)
    profile = workflow.run_stage('Build Profile', build_profile, kernel)
    section = run_config.section('kernels')
    j, A, t = section['j'], section['A'], section['t']

    def compute():
        distances = np.linspace(section['distance_min'], section['distance_max'], section['points'])
        z_list = (profile.c * abs(t) + distances).tolist()
        report = tail_check(profile, j, A, t, z_list, section['tail_order'])
        leak = outside_cone_value(profile, A, t, 5.0) if t != 0 else float('nan')
        return report, leak

    report, leak = workflow.run_stage('Compute', compute)
    bound = trivial_bound(profile, j, A, t)
    frame = pd.DataFrame({'z': [profile.c * abs(t) + d for d in report.distances], 'b': report.values,
                          'cone_distance': report.distances, 'local_slope': report.local_slopes},
                         columns=['z', 'b', 'cone_distance', 'local_slope'])
    checks = [
        at_most('tail_slope', report.slope, -section['tail_order']),
        at_most('trivial_bound', float(np.max(np.abs(report.values))), bound * (1.0 + 1e-9) + config.kernel_epsabs),
    ]
    if t != 0:
        checks.append(greater_than('outside_cone_nonzero', leak, report.floor))
    extra = {'tail_status': report.status, 'tail_slope': report.slope, 'trivial_bound': bound,
             'samples_used': report.used}
    return profile, checks, {'kernel_tail.csv': frame}, extra


# -- compare -------------------------------------------------------------------

def run_compare(run_config, workflow):
    kernel = workflow.run_stage('Build Kernel', run_config.build_kernel)
    profile = workflow.run_stage('Build Profile', build_profile, kernel)
    data = run_config.build_data()
    section = run_config.section('compare')
    cone_data = InitialDataSpec(u_terms=tuple(GaussianPulse(*p) for p in section['cone_pulse']))

    def compute():
        classical = DalembertSolution(profile.c, data)
        rows = []
        for velocity in section['velocities']:
            v = velocity.resolve(profile.c)
            for t in section['times']:
                x = section['x0'] + v * t
                rows.append({'v': v, 'v_over_c': v / profile.c, 't': t, 'x': x,
                             'e_classical': float(dalembert_energy_density(classical, t, x)),
                             'e_nonlocal': evolve_point(profile, data, t, x).energy})

        t_cone = section['cone_time']
        offsets = (section['probe_offset'],)
        classical_leak = cone_leak(DalembertSolution(profile.c, cone_data), cone_data, t_cone, offsets)
        nonlocal_leak = cone_leak(profile, cone_data, t_cone, offsets)
        cone = pd.DataFrame([
            {'solver': 'classical', 't': t_cone, 'probe_offset': offsets[0], 'leak': classical_leak},
            {'solver': 'nonlocal', 't': t_cone, 'probe_offset': offsets[0], 'leak': nonlocal_leak},
        ], columns=['solver', 't', 'probe_offset', 'leak'])
        return pd.DataFrame(rows, columns=['v', 'v_over_c', 't', 'x', 'e_classical', 'e_nonlocal']), cone

    rays, cone = workflow.run_stage('Compute', compute)
    peak = data_peak(cone_data)
    floor = nonlocal_floor(profile, cone_data)
    classical_leak = float(cone.loc[cone['solver'] == 'classical', 'leak'].iloc[0])
    nonlocal_leak = float(cone.loc[cone['solver'] == 'nonlocal', 'leak'].iloc[0])
    checks = [
        at_most('classical_cone_leak', classical_leak / peak, AcceptanceConfig.CLASSICAL_LEAK_TOL),
        greater_than('nonlocal_cone_leak', nonlocal_leak, AcceptanceConfig.CONE_FLOOR_FACTOR * floor),
    ]
    return profile, checks, {'compare_rays.csv': rays, 'cone.csv': cone}, {'nonlocal_floor': floor}


HANDLERS = {
    'validate': run_validate,
    'dispersion': run_dispersion,
    'evolve': run_evolve,
    'ray-scan': run_ray_scan,
    'kernels': run_kernels,
    'compare': run_compare,
}


def run(command, run_config, out_dir=None):
    """Run one subcommand; returns (exit status, summary dict)"""
    out_dir = out_dir or run_config.get('run', 'out_dir')
    workflow = ExperimentWorkflow(command)
    config_text = workflow.run_stage('Load Config', run_config.to_text)
    store = ArtifactStore(out_dir)
    summary = {'command': command, 'config': config_text,
               'thresholds': AcceptanceConfig.get_config_dict(), 'numerics': config.get_config_summary()}

    try:
        profile, checks, tables, extra = HANDLERS[command](run_config, workflow)
    except Exception as e:
        stage = workflow.failed_stage or 'Compute'
        summary.update({'passed': False, 'failed_stage': stage, 'error': str(e), 'checks': []})
        store.write_summary(summary)
        logger.error(f"{command} failed in stage '{stage}': {str(e)}", exc_info=not isinstance(e, PeriwaveError))
        return EXIT_STAGE_FAILED, summary

    def write():
        for name, frame in tables.items():
            store.write_csv(name, frame)
        summary.update({
            'profile': profile.summary() if profile is not None else None,
            'checks': [check.as_dict() for check in checks],
            'passed': all(check.passed for check in checks),
            'extra': extra,
        })
        store.write_summary(summary)

    workflow.run_stage('Write Artifacts', write)
    failed = [check.name for check in checks if not check.passed]
    if failed:
        logger.warning(f"{command}: {len(failed)} check(s) failed: {', '.join(failed)}")
        return EXIT_CHECKS_FAILED, summary
    logger.info(f"{command}: all {len(checks)} checks passed")
    return EXIT_OK, summary


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH', help='INI run configuration (defaults apply when omitted)')
    common.add_argument('--out', metavar='DIR', help='output directory (overrides run.out_dir)')
    common.add_argument('--tolerance-scale', type=float, metavar='FLOAT', help='multiply every numerical tolerance')
    common.add_argument('--verbose', action='store_true', help='debug logging')

    parser = argparse.ArgumentParser(prog='periwave', description='Peridynamic wave laboratory')
    sub = parser.add_subparsers(dest='command', required=True)
    descriptions = {
        'validate': 'kernel hypotheses, dispersion identities and operator checks',
        'dispersion': 'tabulate FJ, phi, psi and velocities on a frequency grid',
        'evolve': 'spectral snapshots with energy and semigroup checks',
        'ray-scan': 'energy decay along rays and fitted exponents',
        'kernels': 'kernel b_j tails beyond the cone',
        'compare': "nonlocal versus d'Alembert rays and cone leakage",
    }
    for command in COMMANDS:
        sub.add_parser(command, parents=[common], help=descriptions[command])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        run_config = load_config(args.config) if args.config else default_config()
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except OSError as e:
        print(f"Cannot read configuration: {str(e)}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    config.tolerance_scale = args.tolerance_scale or run_config.get('run', 'tolerance_scale')
    config.n_jobs = run_config.get('run', 'n_jobs')
    status, _ = run(args.command, run_config, args.out)
    return status


if __name__ == '__main__':
    sys.exit(main())
