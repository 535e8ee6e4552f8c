"""Per-term demand collection, destination aggregation and admission.

Each broker runs a three-phase cycle on its own unsynchronized clock:
users submit demands at the beginning of a term, everything received since
the previous mid-cycle is merged per destination and forwarded at
mid-cycle, and the term's receipts are admitted in arrival order at the
end.  Demands restate an absolute level every term, so forwarding is a
persistence forecast: this term's observations are what goes onward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .admission import AggregateKey, build_filter_table
from .errors import (
    DuplicateIdError,
    NoPathError,
    NotLocalSourceError,
    UnknownDestinationError,
    UnknownOriginError,
)
from .messages import AggregatedDs, InterDomainMessage, RejectionNotice
from .propagation import BrokerState, route_next_hop
from .qos import check_service_class

REASON_UNKNOWN_DEST = "unknown-destination"


@dataclass(frozen=True)
class DemandSpec:
    """One user demand from an edge domain, issued for one term."""

    id: str
    src_edge: str
    dest_edge: str
    service_class: int
    bandwidth: int
    issued_term: int

    def __post_init__(self):
        check_service_class(self.service_class)
        if self.bandwidth < 0:
            raise ValueError(f"demand {self.id} has negative bandwidth")
        if self.src_edge == self.dest_edge:
            raise ValueError(f"demand {self.id} has identical source and destination")


@dataclass(frozen=True)
class DemandReceipt:
    """One queued demand: a local submission or an upstream aggregate."""

    term: int
    source: str | None              # upstream broker, None for local users
    ingress: str                    # border router where the traffic enters
    dest_edge: str
    service_class: int
    bandwidth: int
    component_ids: tuple[str, ...]


@dataclass(frozen=True)
class TermClock:
    """Begin, mid and end markers of one broker's cycle."""

    term_length: int
    phase_offset: int = 0

    def __post_init__(self):
        if not 0 <= self.phase_offset < self.term_length:
            raise ValueError("phase offset must lie within one term")

    def begin(self, term: int) -> int:
        return self.phase_offset + term * self.term_length

    def mid(self, term: int) -> int:
        return self.begin(term) + self.term_length // 2

    def end(self, term: int) -> int:
        return self.begin(term) + self.term_length


@dataclass(frozen=True)
class ArchiveRecord:
    term: int
    kind: str
    detail: str


class DemandArchive:
    """Append-only demand log, replayable and exportable as text lines.

    Besides the audit trail it remembers where each component id entered
    this broker, which is what lets a rejection notice retrace the
    forwarding chain.
    """

    def __init__(self):
        self.records: list[ArchiveRecord] = []
        self._source: dict[str, str | None] = {}

    def append(self, term: int, kind: str, detail: str):
        self.records.append(ArchiveRecord(term, kind, detail))

    def remember_source(self, component_id: str, source: str | None):
        self._source[component_id] = source

    def source_of(self, component_id: str) -> str | None:
        if component_id not in self._source:
            raise UnknownOriginError(component_id)
        return self._source[component_id]

    def knows(self, component_id: str) -> bool:
        return component_id in self._source

    def lines(self) -> list[str]:
        return [f"term={r.term} {r.kind} {r.detail}" for r in self.records]


@dataclass(frozen=True)
class UserRejection:
    """What the submitting user finally sees for an unsatisfiable demand."""

    term: int
    dest_edge: str
    service_class: int
    reason: str
    component_ids: tuple[str, ...]


@dataclass(frozen=True)
class AdmissionDecision:
    term: int
    key: AggregateKey
    target: int
    admitted: bool
    bottleneck: str | None
    reason: str | None
    component_ids: tuple[str, ...]


@dataclass
class EndOfCycleResult:
    decisions: list[AdmissionDecision] = field(default_factory=list)
    messages: list[InterDomainMessage] = field(default_factory=list)
    released: list[AggregateKey] = field(default_factory=list)


def submit_ds(state: BrokerState, ds: DemandSpec, now: int) -> None:
    """Queue one locally submitted demand for the current term."""
    if ds.src_edge not in state.local_edges:
        raise NotLocalSourceError(f"{ds.src_edge} is not attached to {state.broker_id}")
    if ds.service_class not in state.config.classes:
        raise ValueError(f"service class {ds.service_class} not configured")
    if ds.id in state.seen_demand_ids:
        raise DuplicateIdError(ds.id)
    state.seen_demand_ids.add(ds.id)
    att = state.attachment(ds.src_edge)
    state.receipts.append(DemandReceipt(
        term=state.current_term,
        source=None,
        ingress=att.transit_router,
        dest_edge=ds.dest_edge,
        service_class=ds.service_class,
        bandwidth=ds.bandwidth,
        component_ids=(ds.id,),
    ))
    state.archive.remember_source(ds.id, None)
    state.archive.append(state.current_term, "submit",
                         f"id={ds.id} src={ds.src_edge} dst={ds.dest_edge} "
                         f"class={ds.service_class} bw={ds.bandwidth}")


def receive_aggregated_ds(state: BrokerState, msg: AggregatedDs, now: int) -> None:
    """Queue an upstream aggregate; its components entered at the peering router."""
    state.receipts.append(DemandReceipt(
        term=state.current_term,
        source=msg.sender,
        ingress=state.peer_router[msg.sender],
        dest_edge=msg.dest_edge,
        service_class=msg.service_class,
        bandwidth=msg.bandwidth,
        component_ids=msg.component_ids,
    ))
    for cid in msg.component_ids:
        state.archive.remember_source(cid, msg.sender)
    state.archive.append(state.current_term, "receive",
                         f"from={msg.sender} dst={msg.dest_edge} "
                         f"class={msg.service_class} bw={msg.bandwidth} "
                         f"ids={','.join(msg.component_ids)}")


def _dispatch_rejection(state: BrokerState, dest: str, service_class: int,
                        term: int, origin: str, reason: str,
                        component_ids) -> list[InterDomainMessage]:
    """Split rejected ids between local users and upstream senders."""
    local: list[str] = []
    upstream: dict[str, list[str]] = {}
    for cid in component_ids:
        source = state.archive.source_of(cid)
        if source is None:
            local.append(cid)
        else:
            upstream.setdefault(source, []).append(cid)
    out: list[InterDomainMessage] = []
    if local:
        state.user_rejections.append(UserRejection(
            term=term, dest_edge=dest, service_class=service_class,
            reason=reason, component_ids=tuple(local)))
        state.archive.append(term, "user-reject",
                             f"dst={dest} class={service_class} reason={reason} "
                             f"ids={','.join(local)}")
    for source in sorted(upstream):
        out.append(RejectionNotice(
            sender=state.broker_id, receiver=source, dest_edge=dest,
            service_class=service_class, term=term, origin=origin,
            reason=reason, component_ids=tuple(upstream[source])))
    return out


def mid_cycle(state: BrokerState, now: int) -> list[InterDomainMessage]:
    """Merge everything received since the last mid-cycle and send it on.

    One aggregate per (destination, class) goes to the stored next hop;
    local destinations need no message and unroutable keys bounce straight
    back as rejections, which fully disposes of those receipts (the end of
    the cycle must not reject them a second time).  Everything is archived
    either way.
    """
    start = state.mid_cursor
    batch = state.receipts[start:]
    state.mid_cursor = len(state.receipts)

    merged: dict[tuple[str, int], tuple[int, list[str], list[int]]] = {}
    for offset, r in enumerate(batch):
        bw, ids, indices = merged.get((r.dest_edge, r.service_class), (0, [], []))
        merged[(r.dest_edge, r.service_class)] = (
            bw + r.bandwidth, ids + list(r.component_ids), indices + [start + offset])

    out: list[InterDomainMessage] = []
    for (dest, cls) in sorted(merged):
        bw, ids, indices = merged[(dest, cls)]
        try:
            next_hop = route_next_hop(state, dest, cls)
        except UnknownDestinationError:
            state.archive.append(state.current_term, "aggregate",
                                 f"dst={dest} class={cls} bw={bw} next=unknown")
            state.bounced_receipts.update(indices)
            out.extend(_dispatch_rejection(
                state, dest, cls, state.current_term, state.broker_id,
                REASON_UNKNOWN_DEST, ids))
            continue
        state.archive.append(state.current_term, "aggregate",
                             f"dst={dest} class={cls} bw={bw} "
                             f"next={next_hop or 'local'} ids={','.join(ids)}")
        if next_hop is None:
            continue  # terminates here; admission happens at end of cycle
        out.append(AggregatedDs(
            sender=state.broker_id, receiver=next_hop, dest_edge=dest,
            service_class=cls, bandwidth=bw, term=state.current_term,
            origin=state.broker_id, component_ids=tuple(ids)))
    return out


def _admission_path(state: BrokerState, ingress: str, dest: str,
                    next_hop: str | None) -> list[str]:
    if next_hop is None:
        att = state.attachment(dest)
        egress, out_link = att.transit_router, att.link
    else:
        egress, out_link = state.peer_router[next_hop], state.peer_link[next_hop]
    return state.intra_route(ingress, egress) + [out_link]


def end_of_cycle(state: BrokerState, now: int) -> EndOfCycleResult:
    """Admit the term's receipts in arrival order, then decay stale keys.

    Receipts sharing (ingress, destination, class) merge into one absolute
    target before admission, so restating a level twice cannot double it.
    Rejections leave the ledger untouched and are bounced to whoever sent
    the components.  The border filter table is rebuilt afterwards.
    """
    start = state.end_cursor
    batch = state.receipts[start:]
    state.end_cursor = len(state.receipts)

    groups: dict[AggregateKey, tuple[int, list[str]]] = {}
    for offset, r in enumerate(batch):
        if (start + offset) in state.bounced_receipts:
            state.bounced_receipts.discard(start + offset)  # bounced at mid-cycle
            continue
        key = AggregateKey(r.ingress, r.dest_edge, r.service_class)
        bw, ids = groups.get(key, (0, []))
        groups[key] = (bw + r.bandwidth, ids + list(r.component_ids))

    result = EndOfCycleResult()
    for key, (target, ids) in groups.items():  # dict keeps first-arrival order
        try:
            next_hop = route_next_hop(state, key.dest_edge, key.service_class)
            path = _admission_path(state, key.ingress, key.dest_edge, next_hop)
        except (UnknownDestinationError, NoPathError) as exc:
            reason = (REASON_UNKNOWN_DEST if isinstance(exc, UnknownDestinationError)
                      else "no-path")
            decision = AdmissionDecision(state.current_term, key, target, False,
                                         None, reason, tuple(ids))
            result.decisions.append(decision)
            state.archive.append(state.current_term, "decision",
                                 f"key={key.ingress}/{key.dest_edge}/{key.service_class} "
                                 f"bw={target} rejected reason={reason} "
                                 f"ids={','.join(ids)}")
            result.messages.extend(_dispatch_rejection(
                state, key.dest_edge, key.service_class, state.current_term,
                state.broker_id, reason, ids))
            continue

        verdict = state.ledger.admit(path, key, target, state.current_term)
        if verdict.admitted:
            decision = AdmissionDecision(state.current_term, key, target, True,
                                         None, None, tuple(ids))
            state.archive.append(state.current_term, "decision",
                                 f"key={key.ingress}/{key.dest_edge}/{key.service_class} "
                                 f"bw={target} admitted ids={','.join(ids)}")
        else:
            reason = f"capacity:{verdict.bottleneck}"
            decision = AdmissionDecision(state.current_term, key, target, False,
                                         verdict.bottleneck, reason, tuple(ids))
            state.archive.append(state.current_term, "decision",
                                 f"key={key.ingress}/{key.dest_edge}/{key.service_class} "
                                 f"bw={target} rejected reason={reason} "
                                 f"ids={','.join(ids)}")
            result.messages.extend(_dispatch_rejection(
                state, key.dest_edge, key.service_class, state.current_term,
                state.broker_id, reason, ids))
        result.decisions.append(decision)

    result.released = state.ledger.release_stale(state.current_term,
                                                 state.config.hold_terms)
    for key in result.released:
        state.archive.append(state.current_term, "release",
                             f"key={key.ingress}/{key.dest_edge}/{key.service_class}")

    routes = {}
    for key in state.ledger.level:
        pair = (key.dest_edge, key.service_class)
        if pair not in routes:
            try:
                routes[pair] = route_next_hop(state, *pair)
            except UnknownDestinationError:
                routes[pair] = None
    state.filter_table = build_filter_table(state.ledger, routes)
    return result


def handle_rejection(state: BrokerState, notice: RejectionNotice) -> list[InterDomainMessage]:
    """Walk a rejection one hop back along the recorded forwarding chain."""
    return _dispatch_rejection(state, notice.dest_edge, notice.service_class,
                               notice.term, notice.origin, notice.reason,
                               notice.component_ids)
