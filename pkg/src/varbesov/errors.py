"""Exception hierarchy. Every error raised on purpose by the package derives from VarBesovError."""


class VarBesovError(ValueError):
    pass


class DimensionError(VarBesovError):
    """Array shape does not match the grid."""


class SymmetryError(VarBesovError):
    """Coefficient array is not Hermitian symmetric when a real field is required."""


class ZeroModeError(VarBesovError):
    """Zero-frequency content conflicts with the zero-mode policy or a singular symbol."""


class ComponentError(VarBesovError):
    """Wrong number of field components for the operation."""


class ResolutionError(VarBesovError):
    """Grid too coarse, or content outside the resolved frequency range."""


class PartitionIndexError(VarBesovError, IndexError):
    """Dyadic index outside the partition range."""


class ExponentRangeError(VarBesovError):
    """Exponent values leave the admissible range."""


class ParameterError(VarBesovError):
    """Parameters violate the relations an estimate is stated under."""


class QuadratureError(VarBesovError):
    """Time quadrature impossible on the given nodes."""


class CoverageError(VarBesovError):
    """Forcing trajectory does not cover the requested time interval."""


class ConfigError(VarBesovError):
    """Invalid experiment configuration."""


class HypothesisError(ParameterError):
    """Exponents or alpha outside the range the nonlinear estimates are stated for."""


class ConvergenceError(VarBesovError):
    """A fixed-point solve did not converge where convergence was required."""
