"""Availability records and the cost algebra they are folded over.

An AvailabilityInfo describes how one edge domain can be reached in one
service class: bandwidth, delays, jitter and loss, plus the broker that
originated the advertisement and a soft-state validity time.  Crossing a
transit segment composes a TransitCost onto the record: delays and jitter
add, bandwidth is clipped at the segment bottleneck, and loss combines on
survival probabilities.  Records with the same key are ranked by a strict
total order, delay first, so that exactly one "best" record exists and
composition never reorders two records (isotonicity).  Both properties are
what make hop-by-hop propagation agree with a centralized route search.

Delays and jitter are integer microseconds, bandwidth is integer kbit/s,
loss is a float in [0, 1].  The unbounded bottleneck is represented by
None, never by a magic number.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import MismatchedKeyError

# Service classes mirror a 6-bit code point: 0..63.
MAX_SERVICE_CLASS = 63

BETTER = -1
EQUAL = 0
WORSE = 1


def check_service_class(value: int) -> int:
    if not 0 <= value <= MAX_SERVICE_CLASS:
        raise ValueError(f"service class {value} outside 0..{MAX_SERVICE_CLASS}")
    return value


@dataclass(frozen=True)
class AvailabilityInfo:
    """Advertised reachability of one edge domain in one service class."""

    edge_domain: str
    service_class: int
    bandwidth: int          # kbit/s
    avg_delay: int          # microseconds
    max_delay: int          # microseconds
    jitter: int             # microseconds
    loss: float             # probability in [0, 1]
    origin_broker: str
    valid_until: int        # simulation time

    def __post_init__(self):
        check_service_class(self.service_class)
        if self.bandwidth < 0:
            raise ValueError("bandwidth must be non-negative")
        if self.avg_delay > self.max_delay:
            raise ValueError("avg_delay exceeds max_delay")
        if not 0.0 <= self.loss <= 1.0:
            raise ValueError("loss outside [0, 1]")

    @property
    def key(self) -> tuple[str, int]:
        return (self.edge_domain, self.service_class)


@dataclass(frozen=True)
class TransitCost:
    """Additive cost of crossing a sequence of links."""

    avg_delay: int = 0
    max_delay: int = 0
    jitter: int = 0
    bottleneck: int | None = None   # None means unbounded
    loss: float = 0.0

    def __post_init__(self):
        if self.avg_delay > self.max_delay:
            raise ValueError("avg_delay exceeds max_delay")
        if not 0.0 <= self.loss <= 1.0:
            raise ValueError("loss outside [0, 1]")
        if self.bottleneck is not None and self.bottleneck < 0:
            raise ValueError("bottleneck must be non-negative")


#: Identity element of merge_costs: zero delay, unbounded bandwidth, no loss.
IDENTITY_COST = TransitCost()


def _rank(ai: AvailabilityInfo):
    # Lexicographic rank, lower is better.  Delay leads: a bandwidth-first
    # order would not survive min-composition at bottlenecks and the
    # distributed protocol could then disagree with the route oracle.
    # origin_broker last makes the order total, hence quiescence unique.
    return (ai.avg_delay, ai.max_delay, ai.loss, ai.jitter, -ai.bandwidth, ai.origin_broker)


def compare_ai(a: AvailabilityInfo, b: AvailabilityInfo) -> int:
    """Rank two records for the same key.

    Returns BETTER (-1) if a is preferable to b, EQUAL (0) if every ranked
    field ties, WORSE (1) otherwise.  Raises MismatchedKeyError when the
    records describe different (edge domain, class) keys.
    """
    if a.key != b.key:
        raise MismatchedKeyError(f"cannot compare {a.key} with {b.key}")
    ra, rb = _rank(a), _rank(b)
    if ra < rb:
        return BETTER
    if ra > rb:
        return WORSE
    return EQUAL


def combine_loss(a: float, b: float) -> float:
    """Loss of two segments in sequence, composed on survival probability.

    Zero short-circuits so the identity element is exact under floats.
    """
    if a == 0.0:
        return b
    if b == 0.0:
        return a
    return 1.0 - (1.0 - a) * (1.0 - b)


def min_capacity(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return a if a <= b else b


def merge_costs(t1: TransitCost, t2: TransitCost) -> TransitCost:
    """Concatenate two transit segments, t1 crossed first.

    Componentwise: delays and jitter add, bottleneck takes the minimum,
    loss multiplies on survival.  Associative, with IDENTITY_COST as the
    identity element.
    """
    return TransitCost(
        avg_delay=t1.avg_delay + t2.avg_delay,
        max_delay=t1.max_delay + t2.max_delay,
        jitter=t1.jitter + t2.jitter,
        bottleneck=min_capacity(t1.bottleneck, t2.bottleneck),
        loss=combine_loss(t1.loss, t2.loss),
    )


def compose(t: TransitCost, ai: AvailabilityInfo) -> AvailabilityInfo:
    """Extend a record across one transit segment.

    Key, origin and validity are preserved; every QoS field moves toward
    "worse", which is what keeps the ranking isotone under composition.
    """
    bw = ai.bandwidth if t.bottleneck is None else min(ai.bandwidth, t.bottleneck)
    return replace(
        ai,
        bandwidth=bw,
        avg_delay=ai.avg_delay + t.avg_delay,
        max_delay=ai.max_delay + t.max_delay,
        jitter=ai.jitter + t.jitter,
        loss=combine_loss(t.loss, ai.loss),
    )
