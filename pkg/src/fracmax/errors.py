"""Exception types shared across the package."""


class FracmaxError(ValueError):
    """Base class for all argument/state errors raised by this package."""


class DomainMismatchError(FracmaxError):
    """A cube or function does not live on the expected grid."""


class FamilyError(FracmaxError):
    """The cube family is empty, leaves cells uncovered, or is not
    replacement-closed where an identity check requires it."""


class ExponentClassError(FracmaxError):
    """A variable exponent violates 1 < p_minus <= p_plus < inf, or a
    shifted exponent falls outside the admissible range."""


class HypothesisViolationError(FracmaxError):
    """An input violates a stated hypothesis of the checked inequality
    (e.g. a signed symbol where nonnegativity is required)."""


class CorpusError(FracmaxError):
    """Unknown corpus symbol, bad parameters, or a singular generator
    evaluated on a grid center at its singularity."""


class ConfigError(FracmaxError):
    """A verification-suite config file failed to parse or validate."""
