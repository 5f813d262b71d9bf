"""Exception hierarchy. The CLI maps these onto process exit codes."""


class TFSampError(Exception):
    """Base class for all library errors."""


class DimensionError(TFSampError):
    """Operands live in incompatible ambient dimensions, or L is invalid."""


class RegionError(TFSampError):
    """A time-frequency region request cannot be realized on the grid."""


class ParameterError(TFSampError):
    """A numeric parameter is outside the formula's admissible range."""


class ConfigError(TFSampError):
    """Configuration file is missing, malformed, or fails validation.

    CLI exit code 2.
    """


class NumericalError(TFSampError):
    """An iterative solver failed to converge to its tolerance.

    CLI exit code 3.
    """


class InfeasibleError(TFSampError):
    """The requested object provably does not exist for these inputs.

    CLI exit code 4 (e.g. witness construction with no admissible index,
    distinct sampling with r larger than the region).
    """
