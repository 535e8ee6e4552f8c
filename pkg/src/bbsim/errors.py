"""Exception types shared across the simulator."""


class BbsimError(Exception):
    """Base class for all library errors."""


class NoPathError(BbsimError):
    """Two routers are not connected by intra-domain links."""


class MismatchedKeyError(BbsimError):
    """Compared availability records refer to different (edge domain, class) keys."""


class StaleMessageError(BbsimError):
    """A received availability record was already past its validity time."""


class UnknownDestinationError(BbsimError):
    """No stored route for the requested (edge domain, class)."""


class NotLocalSourceError(BbsimError):
    """A demand was submitted at a broker that does not manage its source edge."""


class DuplicateIdError(BbsimError):
    """A demand id was submitted twice."""


class UnknownLinkError(BbsimError):
    """A link id is not tracked by the reservation ledger."""


class NegativeTargetError(BbsimError):
    """Admission target below zero."""


class UnknownOriginError(BbsimError):
    """A rejection notice references demand ids with no archived forward record."""


class NoLocalEdgeDomainsError(BbsimError):
    """Bootstrap requested on a broker with no directly attached edge domains."""


class ParseError(BbsimError):
    """Malformed input document. Carries a position (line or byte offset)."""

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at {position})")
        self.position = position


class SchemaError(BbsimError):
    """Well-formed document with missing, extra, or out-of-range content."""


class ValidationError(BbsimError):
    """A parsed topology or scenario violates structural invariants."""

    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class ScenarioError(BbsimError):
    """A scenario references unknown ids or schedules actions outside the horizon."""


class InvariantViolationError(BbsimError):
    """A checked-mode run detected a broken invariant; aborts with the event index."""

    def __init__(self, event_index, violations):
        super().__init__(f"invariant violation at event {event_index}: " + "; ".join(violations))
        self.event_index = event_index
        self.violations = list(violations)
