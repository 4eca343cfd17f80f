"""Exception hierarchy shared across the package."""


class RingEvoError(Exception):
    """Base class for all package errors."""


class ConfigError(RingEvoError, ValueError):
    pass


class DuplicateGeneType(RingEvoError, KeyError):
    pass


class EmptyRegistry(RingEvoError, ValueError):
    pass


class InvalidMove(RingEvoError, ValueError):
    pass


class NotPermutation(RingEvoError, ValueError):
    pass


class LayoutMismatch(RingEvoError, ValueError):
    pass


class LengthPolicyError(RingEvoError, ValueError):
    pass


class RepairFailed(RingEvoError, RuntimeError):
    pass


class WeightError(RingEvoError, ValueError):
    pass


class PenaltyRangeError(RingEvoError, ValueError):
    pass


class ShapeError(RingEvoError, ValueError):
    pass


class SeedValidationError(RingEvoError, ValueError):
    pass


class LsApplicabilityError(RingEvoError, ValueError):
    pass


class InstanceError(RingEvoError, ValueError):
    pass


class TooLarge(RingEvoError, ValueError):
    pass


class InsufficientData(RingEvoError, ValueError):
    pass


class TuneFailure(RingEvoError, RuntimeError):
    pass


class EvaluationError(RingEvoError, RuntimeError):
    """Evaluator failure, annotated with the ring slot that triggered it."""

    def __init__(self, slot, cause):
        super().__init__(f"evaluation failed at slot {slot}: {cause!r}")
        self.slot = slot
        self.cause = cause
