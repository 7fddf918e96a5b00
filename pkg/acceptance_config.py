# Acceptance thresholds and standard scenarios
# Every pass/fail decision written to summary.json reads its threshold from here

class AcceptanceConfig:
    """Thresholds and reference scenarios for the acceptance checks"""

    # Built-in kernel families used by the dispersion checks
    BUILTIN_FAMILIES = ['gaussian', 'exponential', 'tophat']

    # Dispersion identities
    PSI_PRIME_ZERO_TOL = 1e-6        # |psi'(0) - 1|
    PSI_PRIME_SUP_SLACK = 1e-6       # sup |psi'| <= 1 + slack
    AUDIT_GRID_POINTS = 10000
    WAVE_SPEED_REL_TOL = 1e-10
    PSI_CLOSED_FORM_TOL = 1e-9       # exponential kernel, xi in [-20, 20]

    # Operator checks
    OPERATOR_CONSISTENCY_TOL = 1e-8  # ||c^2 D^2 f - (J*f - mu0 f)|| / ||f||
    SCALING_STEPS = [1e-1, 1e-2, 1e-3, 1e-4]
    SCALING_FINAL_TOL = 1e-6
    SCALING_MONOTONE_SLACK = 1e-12

    # Evolution
    ENERGY_DRIFT_TOL = 1e-10
    SEMIGROUP_TOL = 1e-10
    CHARACTERISTIC_TOL = 1e-10

    # Ray decay
    RAY_DECAY_ORDER = 3              # slope <= -2l
    RAY_WINDOW = (10.0, 100.0)
    RAY_TIME_RATIO = 1.02
    SUPERSONIC_SPEED = 1.5           # multiples of c
    SUBSONIC_SPEED = 0.5
    SUBSONIC_SEPARATION = 3.0
    RAY_PULSE = {'amplitude': 1.0, 'center': 0.0, 'width': 1.5}

    # Kernel tails
    TAIL_TIME = 5.0
    TAIL_DISTANCES = (2.0, 20.0)
    TAIL_SLOPE_MAX = -4.0
    DEFAULT_REGULARIZATION = 1.0

    # Cone contrast
    CONE_TIME = 2.0
    CONE_PROBE_OFFSET = 3.0
    CONE_FLOOR_FACTOR = 10.0
    CLASSICAL_LEAK_TOL = 1e-12
    CONE_PULSE = {'amplitude': 1.0, 'center': 0.0, 'width': 0.1}

    # Representation cross-check
    REPRESENTATION_TOL = 1e-5
    REPRESENTATION_A_VALUES = [0.5, 2.0]

    @classmethod
    def get_config_dict(cls):
        """Return thresholds as a dictionary for summaries"""
        return {
            'dispersion': {
                'psi_prime_zero_tol': cls.PSI_PRIME_ZERO_TOL,
                'psi_prime_sup_slack': cls.PSI_PRIME_SUP_SLACK,
                'audit_grid_points': cls.AUDIT_GRID_POINTS,
                'wave_speed_rel_tol': cls.WAVE_SPEED_REL_TOL,
                'psi_closed_form_tol': cls.PSI_CLOSED_FORM_TOL
            },
            'operator': {
                'consistency_tol': cls.OPERATOR_CONSISTENCY_TOL,
                'scaling_steps': cls.SCALING_STEPS,
                'scaling_final_tol': cls.SCALING_FINAL_TOL
            },
            'evolution': {
                'energy_drift_tol': cls.ENERGY_DRIFT_TOL,
                'semigroup_tol': cls.SEMIGROUP_TOL,
                'characteristic_tol': cls.CHARACTERISTIC_TOL
            },
            'ray': {
                'decay_order': cls.RAY_DECAY_ORDER,
                'window': list(cls.RAY_WINDOW),
                'supersonic_speed': cls.SUPERSONIC_SPEED,
                'subsonic_speed': cls.SUBSONIC_SPEED,
                'subsonic_separation': cls.SUBSONIC_SEPARATION
            },
            'kernels': {
                'tail_time': cls.TAIL_TIME,
                'tail_distances': list(cls.TAIL_DISTANCES),
                'tail_slope_max': cls.TAIL_SLOPE_MAX
            },
            'cone': {
                'time': cls.CONE_TIME,
                'probe_offset': cls.CONE_PROBE_OFFSET,
                'classical_leak_tol': cls.CLASSICAL_LEAK_TOL
            },
            'representation': {
                'tol': cls.REPRESENTATION_TOL,
                'A_values': cls.REPRESENTATION_A_VALUES
            }
        }
