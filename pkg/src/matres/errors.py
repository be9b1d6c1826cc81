"""Exception and warning types shared across the toolkit.

Separate classes (rather than bare ValueError) so callers can tell a bad
argument from a computation that revealed an unusable configuration.
"""


class MatresError(Exception):
    """Base class for toolkit errors."""


class DegenerateWeight(MatresError):
    """Weight exponent s <= 1/2: m'(r) vanishes or flips sign."""


class ProfileNotSmooth(MatresError):
    """Requested transition profile cannot supply three continuous derivatives."""


class NoFeasibleWeight(MatresError):
    """Weight search exhausted its budget with every candidate margin <= 0."""

    def __init__(self, msg, best_margin=None, trace=None):
        super().__init__(msg)
        self.best_margin = best_margin
        self.trace = trace or []


class EmptySurface(MatresError):
    """Energy window lies below every potential branch on the whole grid."""


class TestFunctionEscapesGrid(MatresError):
    """Test function support touches the grid boundary."""


class DimensionNotSupported(MatresError):
    """Spatial dimension outside {1, 3} (d = 2 is excluded)."""


class AngleTooLarge(MatresError):
    """Scaling angle at or beyond the potential's analyticity angle."""


class ContourSingularity(MatresError):
    """Scaled contour hits a singularity of the potential."""

    def __init__(self, msg, location=None):
        super().__init__(msg)
        self.location = location


class Singular(MatresError):
    """Exact pivot breakdown: the shift equals a discrete eigenvalue."""


class NoConvergence(MatresError):
    """Iteration hit max_iter before reaching the requested tolerance."""

    def __init__(self, msg, last_value=None, gap_estimate=None):
        super().__init__(msg)
        self.last_value = last_value
        self.gap_estimate = gap_estimate


class DegenerateFit(MatresError):
    """Zero variance in the fit regressor."""


class UnmatchedResonance(MatresError):
    """Candidate counts differ between two distortion angles."""


class TrackingLost(MatresError):
    """No candidate resonance to track in the requested window."""


class CertificateMissing(MatresError):
    """Log-window region check requested without a passing escape certificate."""


class ConfigError(MatresError):
    """Base class for config-file problems (CLI exit code 2)."""


class UnknownKey(ConfigError):
    """Config key not in the schema."""


class TypeMismatch(ConfigError):
    """Config value cannot be coerced to the declared type."""


class MissingRequired(ConfigError):
    """Required config key absent."""


class WindowTouchesRays(UserWarning):
    """Eigenvalue window overlaps a rotated-continuum tube; results are tagged."""
