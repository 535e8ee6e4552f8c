"""Inter-broker message variants.

Messages only ever travel between adjacent brokers; the engine delivers
them in process and the wire module owns their external XML form.  All
variants are immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .qos import AvailabilityInfo


@dataclass(frozen=True)
class Ai:
    """A plain availability advertisement."""

    sender: str
    receiver: str
    ai: AvailabilityInfo


@dataclass(frozen=True)
class NewAi:
    """Header-flagged advertisement sent when a broker stands up.

    Handling differs from Ai only in the reply: the receiver returns its
    whole availability database to the sender.
    """

    sender: str
    receiver: str
    ai: AvailabilityInfo


@dataclass(frozen=True)
class AiDatabaseTransfer:
    """Full database reply to a NewAi, already composed toward the receiver."""

    sender: str
    receiver: str
    entries: tuple[AvailabilityInfo, ...]


@dataclass(frozen=True)
class AggregatedDs:
    """Destination-merged bandwidth demand restated once per term.

    origin is the broker that built this aggregate; component_ids carries
    the original demand ids, flattened through every aggregation step.
    """

    sender: str
    receiver: str
    dest_edge: str
    service_class: int
    bandwidth: int
    term: int
    origin: str
    component_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class RejectionNotice:
    """Travels the reverse of the forwarding chain back toward demand sources."""

    sender: str
    receiver: str
    dest_edge: str
    service_class: int
    term: int
    origin: str          # the rejecting broker
    reason: str
    component_ids: tuple[str, ...] = ()


InterDomainMessage = Union[Ai, NewAi, AiDatabaseTransfer, AggregatedDs, RejectionNotice]
