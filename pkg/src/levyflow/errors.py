"""Exception hierarchy shared by all levyflow modules."""


class LevyflowError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(LevyflowError):
    pass


class UnsupportedMeasure(LevyflowError):
    pass


class NotRealValued(LevyflowError):
    pass


class EmptyGrid(LevyflowError):
    pass


class ExponentOutOfRange(LevyflowError):
    pass


class GridMismatch(LevyflowError):
    pass


class BetaOutOfRange(LevyflowError):
    pass


class NonpositiveDt(LevyflowError):
    pass


class OutOfHorizon(LevyflowError):
    pass


class NyquistViolation(LevyflowError):
    pass


class SolverDiverged(LevyflowError):
    pass


class ConfigInvalid(LevyflowError):
    pass


class NoAliveParticles(LevyflowError):
    pass


class InvariantViolation(LevyflowError):
    """A runtime invariant was broken; the message names the invariant."""


class EnsembleSampleError(LevyflowError):
    """A Monte Carlo sample failed; carries the seed needed to replay it."""

    def __init__(self, base_seed, sample_index, cause):
        self.base_seed = base_seed
        self.sample_index = sample_index
        self.cause = cause
        super().__init__(
            f"sample {sample_index} failed (base_seed={base_seed}, "
            f"stream_index={sample_index}): {cause!r}"
        )
