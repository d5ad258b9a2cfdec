"""Exception types shared across the package."""


class PossimError(Exception):
    """Base class for errors raised by this package."""


class EmptyAssertionError(PossimError):
    """Assertion selects no point of the contour's domain."""


class AlphaOutOfRangeError(PossimError):
    """Cut level outside [0, 1)."""


class ShapeMismatchError(PossimError):
    """Data does not match the model's declared shape."""


class InvalidParameterError(PossimError):
    """Parameter outside the model's parameter space."""


class DegenerateDataError(PossimError):
    """Data admits no interior maximum-likelihood fit."""


class UnsupportedStrategyError(PossimError):
    """Model does not support the requested likelihood reduction."""


class DegenerateNormalizerError(PossimError):
    """Prior-weighted likelihood has numerically zero supremum."""


class ModelMismatchError(PossimError):
    """Operation applied to a model outside its supported family."""


class MissingIndependenceError(PossimError):
    """Combination rule requires conditional independence that was not declared."""


class DegenerateSplitError(PossimError):
    """Data split leaves a chunk too small to fit."""
