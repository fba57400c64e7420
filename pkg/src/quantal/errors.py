"""Exception types raised across the package."""


class QuantalError(Exception):
    """Base class for every error raised by this package."""


class SpaceError(QuantalError):
    """Invalid history space (duplicate/empty labels, too many histories)."""


class OverCapError(SpaceError):
    """A history count exceeds the configured enumeration cap."""


class MixedSpaceError(QuantalError):
    """Objects from two different history spaces were combined."""


class PartitionError(QuantalError):
    pass


class MeasureError(QuantalError):
    """Malformed measure specification."""


class NotWeaklyPositive(MeasureError):
    """The measure of some event came out negative."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class TotalPreclusion(QuantalError):
    """The whole history space is precluded, so no preclusive coevent exists."""


class NotPreclusive(QuantalError):
    pass


class NotDisjoint(QuantalError):
    pass


class ProofError(QuantalError):
    """Structurally malformed proof (dangling or forward citations, bad JSON)."""


class ScenarioError(QuantalError):
    """Scenario file could not be parsed or validated."""
