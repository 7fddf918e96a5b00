"""
Numerical configuration for the peridynamic wave laboratory
Tolerances and worker counts, overridable through PERIWAVE_* environment variables
"""
import os


class LabConfig:
    """Process-wide numerical settings"""

    def __init__(self):
        self.tolerance_scale = float(os.environ.get('PERIWAVE_TOLERANCE_SCALE', '1.0'))

        # Adaptive quadrature (moments, transforms, convolutions)
        self.quad_epsabs = float(os.environ.get('PERIWAVE_QUAD_EPSABS', '1e-12'))
        self.quad_epsrel = float(os.environ.get('PERIWAVE_QUAD_EPSREL', '1e-12'))
        self.quad_limit = int(os.environ.get('PERIWAVE_QUAD_LIMIT', '500'))
        self.tail_cutoff = float(os.environ.get('PERIWAVE_TAIL_CUTOFF', '1e-14'))

        # Fourier-weighted quadrature for the b_j kernels
        self.kernel_epsabs = float(os.environ.get('PERIWAVE_KERNEL_EPSABS', '1e-14'))
        self.kernel_limlst = int(os.environ.get('PERIWAVE_KERNEL_LIMLST', '200'))

        # Grid-free oscillatory point evaluator
        self.point_rel_tol = float(os.environ.get('PERIWAVE_POINT_REL_TOL', '1e-10'))
        self.panel_order = int(os.environ.get('PERIWAVE_PANEL_ORDER', '20'))
        self.max_refinements = int(os.environ.get('PERIWAVE_MAX_REFINEMENTS', '9'))

        # Periodization audit margin, in data widths
        self.margin_widths = float(os.environ.get('PERIWAVE_MARGIN_WIDTHS', '10'))

        self.n_jobs = int(os.environ.get('PERIWAVE_N_JOBS', '1'))

    def scaled(self, tolerance):
        """Apply the global tolerance scale"""
        return tolerance * self.tolerance_scale

    def get_config_summary(self):
        """Return configuration summary for logging"""
        return {
            'tolerance_scale': self.tolerance_scale,
            'quad_epsabs': self.quad_epsabs,
            'quad_epsrel': self.quad_epsrel,
            'quad_limit': self.quad_limit,
            'kernel_epsabs': self.kernel_epsabs,
            'point_rel_tol': self.point_rel_tol,
            'panel_order': self.panel_order,
            'max_refinements': self.max_refinements,
            'margin_widths': self.margin_widths,
            'n_jobs': self.n_jobs
        }


# Global configuration instance
config = LabConfig()
