"""Exception types raised across the package."""


class AnchorsError(ValueError):
    """Base class for all input and hypothesis errors."""


class EmptyDocument(AnchorsError):
    pass


class EmptyCorpus(AnchorsError):
    pass


class BothEmpty(AnchorsError):
    pass


class DegenerateLabels(AnchorsError):
    pass


class InvalidRange(AnchorsError):
    pass


class TooLarge(AnchorsError):
    """Exact enumeration would exceed the outcome cap."""


class TooManyAnchors(AnchorsError):
    pass


class InvalidEpsilon(AnchorsError):
    pass


class HypothesisViolated(AnchorsError):
    """An instance does not meet the assumptions of a theoretical result."""


class RankTies(HypothesisViolated):
    pass


class EmptyBucket(AnchorsError):
    pass


class HypothesisWarning(UserWarning):
    """Computation is defined but the theoretical guarantee does not apply."""
