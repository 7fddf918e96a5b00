"""
Exception types raised by the peridynamic wave laboratory.

Validation outcomes (kernel reports, tail reports, cone leaks) are returned as
data; only conditions that stop a computation are raised.
"""


class PeriwaveError(Exception):
    """Base class for all laboratory failures"""


class MomentUnavailableError(PeriwaveError):
    """Requested moment order exceeds what the kernel certifies"""

    def __init__(self, order, max_order):
        self.order = order
        self.max_order = max_order
        super().__init__(f"Moment of order {order} unavailable (kernel certifies up to {max_order})")


class QuadratureAccuracyError(PeriwaveError):
    """A quadrature did not reach its requested tolerance"""

    def __init__(self, what, achieved, requested):
        self.what = what
        self.achieved = achieved
        self.requested = requested
        super().__init__(f"Quadrature for {what} did not converge: achieved {achieved:.3e}, requested {requested:.3e}")


class DegenerateKernelError(PeriwaveError):
    """Kernel moments do not define a wave speed"""


class PositivityViolationError(PeriwaveError):
    """Dispersion function is negative or vanishes away from the origin"""


class FieldInputError(PeriwaveError):
    """Non-finite or malformed field samples"""


class DomainTooSmallError(PeriwaveError):
    """Periodic domain too short for the requested evolution time"""

    def __init__(self, period, required_period):
        self.period = period
        self.required_period = required_period
        super().__init__(f"Periodic domain of length {period:.6g} is too small; need at least {required_period:.6g}")


class InsufficientDataError(PeriwaveError):
    """Too few valid samples for a fit"""


class PreconditionError(PeriwaveError):
    """Operation called outside its documented domain"""


class ConfigError(PeriwaveError):
    """Run configuration failed validation; carries every problem found"""

    def __init__(self, problems):
        self.problems = list(problems)
        lines = [f"{key}: {message}" for key, message in self.problems]
        super().__init__("Invalid configuration:\n  " + "\n  ".join(lines))
