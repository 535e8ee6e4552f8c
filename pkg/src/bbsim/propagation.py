"""Per-broker availability protocol: best-record database and its handlers.

Each broker stores at most one availability record per (edge domain,
class) key, the best one seen so far, which is what keeps propagation
finite on cyclic domain graphs.  A sender always composes its own domain
crossing plus the inter-domain link before emitting, so a received record
reads as "the path from my border router onward".  Records are soft
state: they carry a validity time, are refreshed by their origin, and
silently expire everywhere once the origin goes quiet.
"""

from __future__ import annotations

from dataclasses import dataclass

from .admission import ReservationLedger
from .errors import (
    NoLocalEdgeDomainsError,
    NoPathError,
    StaleMessageError,
    UnknownDestinationError,
)
from .messages import Ai, AiDatabaseTransfer, InterDomainMessage, NewAi
from .qos import (
    BETTER,
    EQUAL,
    AvailabilityInfo,
    TransitCost,
    compare_ai,
    compose,
    merge_costs,
)
from .topology import INTRA, NetworkTopology, domain_transit_cost, intra_path


@dataclass(frozen=True)
class BrokerConfig:
    term_length: int
    phase_offset: int = 0
    refresh_interval: int = 0       # 0: defaults to term_length
    validity_window: int = 0        # 0: defaults to 3 * refresh interval
    hold_terms: int = 2
    classes: tuple[int, ...] = (0,)

    @property
    def refresh(self) -> int:
        return self.refresh_interval or self.term_length

    @property
    def validity(self) -> int:
        return self.validity_window or 3 * self.refresh


@dataclass(frozen=True)
class StoredAi:
    ai: AvailabilityInfo
    learned_from: str | None        # None: locally originated
    stored_at: int


class BrokerState:
    """Everything one broker owns: database, ledger, demand book, clock phase.

    Mutated only by the handler functions in this module and in demand.py,
    which the engine invokes sequentially in event order.
    """

    def __init__(self, topo: NetworkTopology, broker_id: str, config: BrokerConfig):
        self.topo = topo
        self.broker_id = broker_id
        self.domain = topo.domain_of_broker[broker_id]
        self.config = config

        peerings = topo.transit_peerings.get(broker_id, ())
        self.neighbors: tuple[str, ...] = tuple(p[0] for p in peerings)
        self.peer_link = {p[0]: p[1] for p in peerings}
        self.peer_router = {p[0]: p[2] for p in peerings}
        self.local_edges: tuple[str, ...] = topo.attached_edges.get(broker_id, ())

        capacities = {}
        for link in topo.links:
            if link.kind == INTRA:
                if topo.router_domain.get(link.a) == self.domain:
                    capacities[link.id] = link.capacity
            else:
                da = topo.router_domain.get(link.a)
                db_ = topo.router_domain.get(link.b)
                if self.domain in (da, db_):
                    capacities[link.id] = link.capacity
        self.ledger = ReservationLedger(capacities)

        self.db: dict[tuple[str, int], StoredAi] = {}
        from .demand import DemandArchive  # deferred: demand imports this module
        self.archive = DemandArchive()
        self.receipts: list = []
        self.mid_cursor = 0
        self.end_cursor = 0
        self.bounced_receipts: set[int] = set()
        self.seen_demand_ids: set[str] = set()
        self.user_rejections: list = []
        self.filter_table: dict = {}

        self.current_term = -1
        self.joined = False
        self.inert = False
        self.sent_first_new_ai = False
        self.counters = {"stale_dropped": 0}
        self.ledger_history: list[dict] = []  # last two end-of-term snapshots
        self._crossing_cache: dict[tuple[str, str], TransitCost | None] = {}
        self._intra_cache: dict[tuple[str, str], list[str]] = {}

    # -- composition helpers -------------------------------------------------

    def attachment(self, edge_domain: str):
        return self.topo.edge_attachments[edge_domain]

    def entry_egress(self, entry: StoredAi) -> str:
        """Border router where traffic for this entry leaves the domain."""
        if entry.learned_from is None:
            return self.attachment(entry.ai.edge_domain).transit_router
        return self.peer_router[entry.learned_from]

    def usable(self, link) -> int:
        """Bandwidth a link contributes to advertised bottlenecks.

        Raw capacity, deliberately not net of reservations: feeding the
        ledger back into advertisements makes every admission ripple into
        a changed record, which the refresh rules treat as a new route and
        the network never settles into a constant state.  The ledger stays
        the sole admission authority.
        """
        return link.capacity

    def cost_toward(self, neighbor: str, egress: str) -> TransitCost | None:
        """Crossing cost a neighbor's traffic pays through this domain.

        Inter link first, then the intra path from the neighbor-facing
        border router to the egress.  None when the domain cannot carry
        the traffic between those routers.  Pure given the topology, so
        results are cached per (neighbor, egress) pair.
        """
        pair = (neighbor, egress)
        if pair in self._crossing_cache:
            return self._crossing_cache[pair]
        inter = self.topo.link_by_id[self.peer_link[neighbor]]
        try:
            intra = domain_transit_cost(
                self.topo, self.domain,
                self.peer_router[neighbor], egress,
                capacity_of=self.usable,
            )
            crossing = merge_costs(inter.cost(self.usable(inter)), intra)
        except NoPathError:
            crossing = None
        self._crossing_cache[pair] = crossing
        return crossing

    def intra_route(self, ingress: str, egress: str) -> list[str]:
        """Cached deterministic intra path between two own border routers."""
        pair = (ingress, egress)
        if pair not in self._intra_cache:
            self._intra_cache[pair] = intra_path(self.topo, self.domain, ingress, egress)
        return list(self._intra_cache[pair])

    def emission(self, neighbor: str, entry: StoredAi) -> AvailabilityInfo | None:
        segment = self.cost_toward(neighbor, self.entry_egress(entry))
        if segment is None:
            return None
        return compose(segment, entry.ai)

    def local_ai(self, edge_domain: str, service_class: int, now: int) -> AvailabilityInfo:
        att = self.attachment(edge_domain)
        link = self.topo.link_by_id[att.link]
        return AvailabilityInfo(
            edge_domain=edge_domain,
            service_class=service_class,
            bandwidth=self.usable(link),
            avg_delay=link.avg_delay,
            max_delay=link.max_delay,
            jitter=0,
            loss=link.loss,
            origin_broker=self.broker_id,
            valid_until=now + self.config.validity,
        )

    def db_params(self) -> dict[tuple[str, int], tuple]:
        """Ranked fields of every stored record; validity excluded."""
        return {
            key: (e.ai.bandwidth, e.ai.avg_delay, e.ai.max_delay,
                  e.ai.jitter, e.ai.loss, e.ai.origin_broker)
            for key, e in self.db.items()
        }


# -- local origination -------------------------------------------------------

def install_local_ais(state: BrokerState, now: int) -> None:
    """(Re)originate records for every directly attached edge domain."""
    for edge in state.local_edges:
        for cls in state.config.classes:
            ai = state.local_ai(edge, cls, now)
            state.db[(edge, cls)] = StoredAi(ai, None, now)


def _forward(state: BrokerState, entry: StoredAi, exclude: str | None,
             as_new_ai: bool = False) -> list[InterDomainMessage]:
    out: list[InterDomainMessage] = []
    kind = NewAi if as_new_ai else Ai
    for neighbor in state.neighbors:
        if neighbor == exclude:
            continue
        value = state.emission(neighbor, entry)
        if value is not None:
            out.append(kind(sender=state.broker_id, receiver=neighbor, ai=value))
    return out


# -- message handlers ---------------------------------------------------------

def _store_or_refresh(state: BrokerState, sender: str, ai: AvailabilityInfo,
                      now: int, first_relay_flags: bool) -> list[InterDomainMessage]:
    """Shared storage logic: store-if-better, refresh-if-equal, else silent.

    A strictly better record replaces the stored one and is forwarded to
    every neighbor except the sender.  An equal record from the stored
    next hop is a refresh: only the validity advances, provided it actually
    advances (stops duplicates circling zero-cost loops), and the refresh
    is passed through so downstream validity keeps advancing too.  Equal
    records from other neighbors are ignored, which pins the route and
    rules out flapping between identical paths.
    """
    if ai.valid_until <= now:
        state.counters["stale_dropped"] += 1
        raise StaleMessageError(f"{ai.key} expired at {ai.valid_until}, now {now}")

    stored = state.db.get(ai.key)
    if stored is None or compare_ai(ai, stored.ai) == BETTER:
        state.db[ai.key] = StoredAi(ai, sender, now)
        # A broker that had nothing to announce at standup flags its first
        # relayed record instead, soliciting database transfers back.
        as_new = (first_relay_flags and not state.sent_first_new_ai
                  and not state.local_edges)
        state.sent_first_new_ai = True
        return _forward(state, state.db[ai.key], exclude=sender, as_new_ai=as_new)

    if (compare_ai(ai, stored.ai) == EQUAL and stored.learned_from == sender
            and ai.valid_until > stored.ai.valid_until):
        state.db[ai.key] = StoredAi(ai, sender, now)
        return _forward(state, state.db[ai.key], exclude=sender)

    return []


def handle_ai(state: BrokerState, sender: str, ai: AvailabilityInfo,
              now: int) -> list[InterDomainMessage]:
    """Process one plain advertisement; see _store_or_refresh for the rules."""
    return _store_or_refresh(state, sender, ai, now, first_relay_flags=True)


def handle_new_ai(state: BrokerState, sender: str, ai: AvailabilityInfo,
                  now: int) -> list[InterDomainMessage]:
    """Like handle_ai, plus a full database transfer back to the sender.

    Forwarded copies go out as plain records ("makes a simple AI"); the
    transfer reply carries everything this broker knew before the new
    record arrived, composed toward the sender, which is how a standing-up
    broker learns the whole network in one round trip.
    """
    if ai.valid_until <= now:
        state.counters["stale_dropped"] += 1
        raise StaleMessageError(f"{ai.key} expired at {ai.valid_until}, now {now}")

    prior = [state.db[key] for key in sorted(state.db)]
    out = _store_or_refresh(state, sender, ai, now, first_relay_flags=False)
    entries = []
    for entry in prior:
        value = state.emission(sender, entry)
        if value is not None:
            entries.append(value)
    out.append(AiDatabaseTransfer(sender=state.broker_id, receiver=sender,
                                  entries=tuple(entries)))
    return out


def handle_db_transfer(state: BrokerState, sender: str, ais,
                       now: int) -> list[InterDomainMessage]:
    """Process each transferred record exactly as a plain advertisement."""
    out: list[InterDomainMessage] = []
    for ai in ais:
        try:
            out.extend(handle_ai(state, sender, ai, now))
        except StaleMessageError:
            pass  # counted by handle_ai; remaining elements still apply
    return out


def bootstrap(state: BrokerState, now: int) -> list[InterDomainMessage]:
    """Stand-up announcement: first local record flagged, the rest plain.

    The flagged record makes every neighbor answer with its database, so
    the new broker converges in one exchange instead of waiting out a
    refresh cycle.  A broker with no attached edge domains has nothing to
    announce and raises; it will flag its first relayed record instead.
    """
    if not state.local_edges:
        raise NoLocalEdgeDomainsError(state.broker_id)
    local_keys = sorted(k for k, e in state.db.items() if e.learned_from is None)
    out: list[InterDomainMessage] = []
    for neighbor in state.neighbors:
        for i, key in enumerate(local_keys):
            value = state.emission(neighbor, state.db[key])
            if value is None:
                continue
            kind = NewAi if i == 0 else Ai
            out.append(kind(sender=state.broker_id, receiver=neighbor, ai=value))
    state.sent_first_new_ai = True
    return out


def emit_refresh(state: BrokerState, now: int) -> list[InterDomainMessage]:
    """Periodic re-origination of every local record to all neighbors."""
    install_local_ais(state, now)
    out: list[InterDomainMessage] = []
    local_keys = sorted(k for k, e in state.db.items() if e.learned_from is None)
    for key in local_keys:
        out.extend(_forward(state, state.db[key], exclude=None))
    return out


def expire_stale(state: BrokerState, now: int) -> list[tuple[str, int]]:
    """Drop every record whose validity has run out; expiry is inclusive.

    No withdrawal is sent: remote copies die by the same clock, and
    recovery rides on the next refresh wave.
    """
    removed = sorted(k for k, e in state.db.items() if e.ai.valid_until <= now)
    for key in removed:
        del state.db[key]
    return removed


def route_next_hop(state: BrokerState, edge_domain: str, service_class: int) -> str | None:
    """Next-hop broker for a destination, None when attached locally."""
    entry = state.db.get((edge_domain, service_class))
    if entry is None:
        raise UnknownDestinationError(f"({edge_domain}, {service_class})")
    return entry.learned_from
