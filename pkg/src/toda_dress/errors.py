"""Exception taxonomy shared across the package."""


class TodaDressError(Exception):
    """Base class for all package-specific errors."""


class SpectralConstructionError(TodaDressError):
    """Eigen-structure could not be built or verified for the given pair."""


class PoleCollisionError(TodaDressError):
    """Pole positions violate the required p-th power separation."""


class SolutionSingularityError(TodaDressError):
    """The solution has a pole at the requested point; values are not fabricated."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DegenerateConfigurationError(TodaDressError):
    """Soliton data hits a vanishing denominator or a singular constant matrix."""


class NullSectorUnsupportedError(TodaDressError):
    """Closed-form evolution requested with nonzero null-sector coefficients."""


class EmptyReportError(TodaDressError):
    """Every grid point of a verification run was singular; no certificate exists."""


class ConfigError(TodaDressError):
    """Configuration file is invalid; ``field`` addresses the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
