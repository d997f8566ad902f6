"""Exception types shared across the package."""


class StructuralError(ValueError):
    """A growth history violates its construction invariants."""


class LabelingError(ValueError):
    """Membership labels are missing, inconsistent, or out of range."""


class ParameterError(ValueError):
    """A model parameter lies outside its admissible domain."""


class DataFormatError(ValueError):
    """An input data file does not conform to the expected format."""


class ConfigError(ValueError):
    """A config file violates its schema; messages carry the field path."""


class SizeGuardError(ValueError):
    """An exact-enumeration routine was asked to exceed its size guard."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""
