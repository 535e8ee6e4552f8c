"""Deterministic discrete-event engine and the centralized route oracle.

The engine owns every broker state, delivers messages with a configurable
latency, fires term phases and refresh timers, and executes scenario
actions (stand-up, blackout, seeded ledger faults).  Runs are a pure
function of (scenario, seed): events are processed in (time, seq) order
with seq assigned at scheduling time, so repeating a run yields an
identical trace hash.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from dataclasses import dataclass, field, replace

from . import demand as demand_mod
from . import propagation as prop
from .admission import AggregateKey, ReservationLedger
from .demand import DemandSpec, TermClock
from .errors import (
    InvariantViolationError,
    NoPathError,
    ScenarioError,
    StaleMessageError,
)
from .messages import (
    AggregatedDs,
    Ai,
    AiDatabaseTransfer,
    InterDomainMessage,
    NewAi,
    RejectionNotice,
)
from .propagation import BrokerConfig, BrokerState
from .qos import AvailabilityInfo, compare_ai, compose, merge_costs
from .topology import INTER, NetworkTopology, domain_transit_cost, validate

ORACLE_TRANSIT_CAP = 8


# -- scenario ------------------------------------------------------------------

@dataclass(frozen=True)
class DemandRule:
    """One recurring demand: restated every term in [first_term, last_term]."""

    id: str
    src_edge: str
    dest_edge: str
    service_class: int
    bandwidth: int
    first_term: int = 0
    last_term: int | None = None    # None: until the horizon

    def active(self, term: int) -> bool:
        return term >= self.first_term and (self.last_term is None or term <= self.last_term)


@dataclass(frozen=True)
class JoinAction:
    broker: str
    at: int


@dataclass(frozen=True)
class BlackoutAction:
    broker: str
    at: int


@dataclass(frozen=True)
class FaultAction:
    """Seeded ledger corruption, used to prove the checked mode bites."""

    broker: str
    at: int
    link: str
    kbps: int


@dataclass(frozen=True)
class Scenario:
    topology: NetworkTopology
    classes: tuple[int, ...] = (0,)
    term_length: int = 1000
    latency: int = 100
    latency_choices: tuple[int, ...] | None = None
    refresh_interval: int = 0       # 0: one term
    validity_window: int = 0        # 0: three refresh intervals
    hold_terms: int = 2
    horizon_terms: int = 10
    demands: tuple[DemandRule, ...] = ()
    actions: tuple = ()


# -- run results ---------------------------------------------------------------

@dataclass
class MetricsRow:
    broker: str
    term: int
    ai_sent: int = 0
    newai_sent: int = 0
    aidb_sent: int = 0
    ds_sent: int = 0
    reject_sent: int = 0
    stale_dropped: int = 0
    expired: int = 0
    admitted_kbps: int = 0
    rejected_kbps: int = 0
    db_size: int = 0
    reserved_total: int = 0
    max_link_util: float = 0.0
    quiescent: bool = False
    admitted_by_class: dict = field(default_factory=dict)
    rejected_by_class: dict = field(default_factory=dict)


METRICS_COLUMNS = (
    "term", "broker", "ai_sent", "newai_sent", "aidb_sent", "ds_sent",
    "reject_sent", "stale_dropped", "expired", "admitted_kbps",
    "rejected_kbps", "db_size", "reserved_total", "max_link_util",
    "quiescent", "adm_by_class", "rej_by_class",
)


class Metrics:
    """Per (term, broker) counters, exportable as tab-separated text."""

    def __init__(self):
        self.rows: dict[tuple[str, int], MetricsRow] = {}

    def row(self, broker: str, term: int) -> MetricsRow:
        key = (broker, max(term, 0))
        if key not in self.rows:
            self.rows[key] = MetricsRow(broker=key[0], term=key[1])
        return self.rows[key]

    def to_tsv(self) -> str:
        lines = ["\t".join(METRICS_COLUMNS)]
        for (broker, term) in sorted(self.rows, key=lambda k: (k[1], k[0])):
            r = self.rows[(broker, term)]
            adm = ",".join(f"{c}={v}" for c, v in sorted(r.admitted_by_class.items()))
            rej = ",".join(f"{c}={v}" for c, v in sorted(r.rejected_by_class.items()))
            lines.append("\t".join(str(x) for x in (
                r.term, r.broker, r.ai_sent, r.newai_sent, r.aidb_sent,
                r.ds_sent, r.reject_sent, r.stale_dropped, r.expired,
                r.admitted_kbps, r.rejected_kbps, r.db_size, r.reserved_total,
                f"{r.max_link_util:.4f}", int(r.quiescent), adm or "-", rej or "-",
            )))
        return "\n".join(lines) + "\n"


@dataclass
class RunResult:
    trace: list[str]
    trace_hash: str
    metrics: Metrics
    states: dict[str, BrokerState]
    events_processed: int
    in_flight: int
    quiescent: bool
    horizon_time: int

    def db_params(self) -> dict[str, dict]:
        return {b: st.db_params() for b, st in self.states.items()}


# -- invariants ----------------------------------------------------------------

def assert_invariants(states) -> list[str]:
    """Full invariant sweep over broker states; empty means healthy."""
    out: list[str] = []
    for broker in sorted(states):
        st = states[broker]
        for msg in st.ledger.check():
            out.append(f"{broker}: {msg}")
        rebuilt = ReservationLedger.replay(st.ledger.capacities, st.ledger.decisions)
        if not rebuilt.equal_state(st.ledger):
            out.append(f"{broker}: ledger does not equal replay of its decision log")
        for key, entry in st.db.items():
            if entry.ai.key != key:
                out.append(f"{broker}: db key {key} holds record for {entry.ai.key}")
            if entry.ai.valid_until <= entry.stored_at:
                out.append(f"{broker}: db entry {key} stored at or after expiry")
            if entry.learned_from is not None and entry.learned_from not in st.neighbors:
                out.append(f"{broker}: db entry {key} learned from non-neighbor")
    return out


def check_quiescence(states, in_flight: int) -> bool:
    """No messages in flight and the last two end-of-term ledgers equal."""
    if in_flight != 0:
        return False
    for st in states.values():
        if not st.joined or st.inert:
            continue
        if len(st.ledger_history) < 2:
            return False
        if st.ledger_history[-1] != st.ledger_history[-2]:
            return False
    return True


# -- centralized oracle ---------------------------------------------------------

def oracle_best_routes(topology: NetworkTopology, classes=(0,)):
    """Best composed record per (broker, edge domain, class), by route search.

    Enumerates every simple domain-level route outward from each edge
    domain's attachment, composing the identical crossing costs a relaying
    broker would apply (inter link first, then the intra path between the
    involved border routers), and keeps the minimum under the record
    order.  Uses raw link capacities, so it describes an unloaded network.
    Returns {(broker, edge, class): (AvailabilityInfo, next_hop)} with
    next_hop None for locally attached entries; unreachable keys are
    simply absent.
    """
    if len(topology.transit_domains) > ORACLE_TRANSIT_CAP:
        raise ValueError(f"oracle capped at {ORACLE_TRANSIT_CAP} transit domains")

    # transit adjacency: domain -> ((peer domain, link, own router, peer router), ...)
    adj: dict[str, list[tuple[str, str, str, str]]] = {d: [] for d in topology.transit_domains}
    for link in topology.links:
        if link.kind != INTER:
            continue
        da = topology.router_domain.get(link.a)
        db_ = topology.router_domain.get(link.b)
        if da in adj and db_ in adj:
            adj[da].append((db_, link.id, link.a, link.b))
            adj[db_].append((da, link.id, link.b, link.a))
    for entries in adj.values():
        entries.sort()

    best: dict[tuple[str, str, int], tuple[AvailabilityInfo, str | None]] = {}

    def consider(broker: str, value: AvailabilityInfo, next_hop: str | None):
        key = (broker, value.edge_domain, value.service_class)
        cur = best.get(key)
        if cur is None or compare_ai(value, cur[0]) < 0:
            best[key] = (value, next_hop)

    def walk(dom: str, egress: str, value: AvailabilityInfo, visited: frozenset):
        # egress: border router of dom where traffic toward the edge leaves.
        for (peer, link_id, own_r, peer_r) in adj[dom]:
            if peer in visited:
                continue
            link = topology.link_by_id[link_id]
            try:
                crossing = merge_costs(
                    link.cost(),
                    domain_transit_cost(topology, dom, own_r, egress),
                )
            except NoPathError:
                continue
            forwarded = compose(crossing, value)
            consider(topology.broker_of_domain[peer], forwarded,
                     topology.broker_of_domain[dom])
            walk(peer, peer_r, forwarded, visited | {peer})

    for edge in topology.edge_domains:
        att = topology.edge_attachments.get(edge)
        if att is None:
            continue
        link = topology.link_by_id[att.link]
        origin_broker = topology.broker_of_domain[att.transit_domain]
        for cls in classes:
            local = AvailabilityInfo(
                edge_domain=edge, service_class=cls, bandwidth=link.capacity,
                avg_delay=link.avg_delay, max_delay=link.max_delay, jitter=0,
                loss=link.loss, origin_broker=origin_broker, valid_until=0,
            )
            consider(origin_broker, local, None)
            walk(att.transit_domain, att.transit_router, local,
                 frozenset({att.transit_domain}))
    return best


# -- the engine -----------------------------------------------------------------

class _Engine:
    def __init__(self, scenario: Scenario, seed: int, horizon_terms: int | None,
                 checked: bool, stop_on_quiescence: bool, collect_trace: bool):
        problems = validate(scenario.topology)
        if problems:
            raise ScenarioError("topology invalid: " + "; ".join(problems))
        self.scenario = scenario
        self.topo = scenario.topology
        self.seed = seed
        self.checked = checked
        self.horizon_terms = horizon_terms or scenario.horizon_terms
        self.horizon_time = self.horizon_terms * scenario.term_length
        self._validate_scenario()

        self.stop_on_quiescence = stop_on_quiescence and not scenario.demands
        self.latency_rng = random.Random(f"{seed}:latency")

        self.states: dict[str, BrokerState] = {}
        self.clocks: dict[str, TermClock] = {}
        self.join_at = {b: 0 for b in self.topo.brokers}
        for action in scenario.actions:
            if isinstance(action, JoinAction):
                self.join_at[action.broker] = action.at
        for broker in self.topo.brokers:
            offset = random.Random(f"{seed}:{broker}:offset").randrange(scenario.term_length)
            config = BrokerConfig(
                term_length=scenario.term_length,
                phase_offset=offset,
                refresh_interval=scenario.refresh_interval,
                validity_window=scenario.validity_window,
                hold_terms=scenario.hold_terms,
                classes=tuple(sorted(set(scenario.classes))),
            )
            self.states[broker] = BrokerState(self.topo, broker, config)
            self.clocks[broker] = TermClock(scenario.term_length, offset)

        self.heap: list = []
        self.seq = 0
        self.in_flight = 0
        self.trace_on = collect_trace
        self.trace: list[str] = []
        self.shadows: dict[str, list] = {}  # broker -> [replay shadow, log cursor]
        self.metrics = Metrics()
        self.events = 0
        self.last_change = 0
        self.pending_action_times = sorted(a.at for a in scenario.actions)

        for broker in self.topo.brokers:
            at = self.join_at[broker]
            self._push(at, ("action", "standup", broker))
            clock = self.clocks[broker]
            first_term = 0
            while clock.begin(first_term) < at:
                first_term += 1
            if clock.begin(first_term) < self.horizon_time:
                self._push(clock.begin(first_term), ("phase", "begin", broker, first_term))
            refresh_at = at + self.states[broker].config.refresh
            if refresh_at < self.horizon_time:
                self._push(refresh_at, ("refresh", broker))
        for action in scenario.actions:
            if isinstance(action, BlackoutAction):
                self._push(action.at, ("action", "blackout", action.broker))
            elif isinstance(action, FaultAction):
                self._push(action.at, ("action", "fault", action.broker,
                                       action.link, action.kbps))

    def _validate_scenario(self):
        sc = self.scenario
        if not sc.classes:
            raise ScenarioError("scenario declares no service classes")
        for cls in sc.classes:
            if not 0 <= cls <= 63:
                raise ScenarioError(f"service class {cls} outside 0..63")
        edge_set = set(self.topo.edge_domains)
        for rule in sc.demands:
            if rule.src_edge not in edge_set:
                raise ScenarioError(f"demand {rule.id}: unknown source edge {rule.src_edge}")
            if rule.dest_edge not in edge_set:
                raise ScenarioError(f"demand {rule.id}: unknown destination edge {rule.dest_edge}")
            if rule.src_edge == rule.dest_edge:
                raise ScenarioError(f"demand {rule.id}: source equals destination")
            if rule.service_class not in sc.classes:
                raise ScenarioError(f"demand {rule.id}: class {rule.service_class} not declared")
            if rule.bandwidth < 0:
                raise ScenarioError(f"demand {rule.id}: negative bandwidth")
            if rule.first_term < 0 or (rule.last_term is not None
                                       and rule.last_term < rule.first_term):
                raise ScenarioError(f"demand {rule.id}: bad term window")
        brokers = set(self.topo.brokers)
        joined_twice: set[str] = set()
        for action in sc.actions:
            if action.broker not in brokers:
                raise ScenarioError(f"action references unknown broker {action.broker}")
            if action.at < 0 or action.at > self.horizon_time:
                raise ScenarioError(f"action at {action.at} outside horizon")
            if isinstance(action, JoinAction):
                if action.broker in joined_twice:
                    raise ScenarioError(f"broker {action.broker} joins twice")
                joined_twice.add(action.broker)
            if isinstance(action, FaultAction):
                if action.link not in self.topo.link_by_id:
                    raise ScenarioError(f"fault references unknown link {action.link}")

    # -- scheduling -----------------------------------------------------------

    def _push(self, time: int, payload):
        heapq.heappush(self.heap, (time, self.seq, payload))
        self.seq += 1

    def _latency(self) -> int:
        choices = self.scenario.latency_choices
        if choices:
            return self.latency_rng.choice(choices)
        return self.scenario.latency

    def _send(self, now: int, messages):
        sender_rows = {}
        for msg in messages:
            st = self.states[msg.sender]
            row = sender_rows.get(msg.sender)
            if row is None:
                row = self.metrics.row(msg.sender, st.current_term)
                sender_rows[msg.sender] = row
            if isinstance(msg, Ai):
                row.ai_sent += 1
            elif isinstance(msg, NewAi):
                row.newai_sent += 1
            elif isinstance(msg, AiDatabaseTransfer):
                row.aidb_sent += 1
            elif isinstance(msg, AggregatedDs):
                row.ds_sent += 1
            elif isinstance(msg, RejectionNotice):
                row.reject_sent += 1
            self._push(now + self._latency(), ("deliver", msg))
            self.in_flight += 1

    # -- event dispatch ---------------------------------------------------------

    def run(self) -> RunResult:
        while self.heap:
            time, seq, payload = heapq.heappop(self.heap)
            if time > self.horizon_time:
                break
            self.events += 1
            kind = payload[0]
            if kind == "deliver":
                self._on_deliver(time, seq, payload[1])
            elif kind == "phase":
                self._on_phase(time, seq, payload[1], payload[2], payload[3])
            elif kind == "refresh":
                self._on_refresh(time, seq, payload[1])
            elif kind == "action":
                self._on_action(time, seq, payload)
            if self.checked:
                self._check_event(time)
            if self.stop_on_quiescence and self._quiet(time):
                break

        remaining = sum(1 for (_, _, p) in self.heap if p[0] == "deliver")
        quiescent = check_quiescence(self.states, remaining)
        text = "\n".join(self.trace)
        return RunResult(
            trace=self.trace,
            trace_hash=hashlib.sha256(text.encode()).hexdigest(),
            metrics=self.metrics,
            states=self.states,
            events_processed=self.events,
            in_flight=remaining,
            quiescent=quiescent,
            horizon_time=self.horizon_time,
        )

    def _quiet(self, now: int) -> bool:
        if self.in_flight != 0:
            return False
        if any(t > now for t in self.pending_action_times):
            return False
        window = max(self.scenario.term_length,
                     max(st.config.validity for st in self.states.values()))
        return now - self.last_change > window + self.scenario.latency

    def _touch(self, now: int):
        self.last_change = now

    def _trace(self, line: str):
        if self.trace_on:
            self.trace.append(line)

    def _check_event(self, now: int):
        # conservation against cached totals per event; the full sweep with
        # cache verification and replay equality runs at every term end
        errs = []
        for broker in self._touched:
            st = self.states[broker]
            errs.extend(f"{broker}: {m}" for m in st.ledger.check_totals())
            for key, entry in st.db.items():
                if entry.ai.key != key or entry.ai.valid_until <= entry.stored_at:
                    errs.append(f"{broker}: corrupt db entry for {key}")
        if errs:
            raise InvariantViolationError(self.events, errs)

    def _check_term(self, broker: str, st: BrokerState):
        """Term-boundary sweep: full ledger check plus replay equality.

        Replay is kept linear by folding only the decisions logged since
        the previous boundary into a per-broker shadow ledger.
        """
        errs = [f"{broker}: {m}" for m in st.ledger.check()]
        entry = self.shadows.get(broker)
        if entry is None:
            entry = [ReservationLedger(st.ledger.capacities), 0]
            self.shadows[broker] = entry
        shadow, cursor = entry
        for decision in st.ledger.decisions[cursor:]:
            shadow.apply_logged(decision)
        entry[1] = len(st.ledger.decisions)
        if not shadow.equal_state(st.ledger):
            errs.append(f"{broker}: ledger does not equal replay of its decision log")
        for key, rec in st.db.items():
            if rec.ai.key != key or rec.ai.valid_until <= rec.stored_at:
                errs.append(f"{broker}: corrupt db entry for {key}")
            if rec.learned_from is not None and rec.learned_from not in st.neighbors:
                errs.append(f"{broker}: db entry {key} learned from non-neighbor")
        if errs:
            raise InvariantViolationError(self.events, errs)

    def _expire(self, st: BrokerState, now: int):
        removed = prop.expire_stale(st, now)
        if removed:
            self._touch(now)
            self.metrics.row(st.broker_id, st.current_term).expired += len(removed)
        return removed

    def _on_deliver(self, now: int, seq: int, msg: InterDomainMessage):
        self.in_flight -= 1
        st = self.states[msg.receiver]
        self._touched = [msg.receiver]
        label = type(msg).__name__.lower()
        if not st.joined or st.inert:
            self._trace(f"t={now} seq={seq} deliver {label} "
                              f"{msg.sender}->{msg.receiver} outcome=dropped")
            return
        self._expire(st, now)
        params_before = st.db_params() if self.stop_on_quiescence else None
        out = []
        outcome = "ok"
        try:
            if isinstance(msg, Ai):
                before = st.db.get(msg.ai.key)
                out = prop.handle_ai(st, msg.sender, msg.ai, now)
                if self.trace_on:
                    outcome = self._ai_outcome(before, st.db.get(msg.ai.key))
            elif isinstance(msg, NewAi):
                before = st.db.get(msg.ai.key)
                out = prop.handle_new_ai(st, msg.sender, msg.ai, now)
                if self.trace_on:
                    outcome = self._ai_outcome(before, st.db.get(msg.ai.key))
            elif isinstance(msg, AiDatabaseTransfer):
                out = prop.handle_db_transfer(st, msg.sender, msg.entries, now)
                outcome = f"n={len(msg.entries)}"
            elif isinstance(msg, AggregatedDs):
                demand_mod.receive_aggregated_ds(st, msg, now)
                outcome = f"bw={msg.bandwidth}"
            elif isinstance(msg, RejectionNotice):
                out = demand_mod.handle_rejection(st, msg)
                outcome = f"ids={len(msg.component_ids)}"
        except StaleMessageError:
            outcome = "stale"
            self.metrics.row(msg.receiver, st.current_term).stale_dropped += 1
        if params_before is not None and st.db_params() != params_before:
            self._touch(now)  # validity-only refreshes do not reset the quiet clock
        detail = ""
        if isinstance(msg, (Ai, NewAi)):
            detail = f" key={msg.ai.edge_domain}/{msg.ai.service_class}"
        self._trace(f"t={now} seq={seq} deliver {label} "
                          f"{msg.sender}->{msg.receiver}{detail} "
                          f"outcome={outcome} out={len(out)}")
        self._send(now, out)

    @staticmethod
    def _ai_outcome(before, after) -> str:
        if after is None:
            return "ignored"
        if before is None or before.ai is not after.ai:
            if before is not None and before.learned_from == after.learned_from \
                    and before.ai == replace(after.ai, valid_until=before.ai.valid_until):
                return "refresh"
            return "stored"
        return "ignored"

    def _on_phase(self, now: int, seq: int, which: str, broker: str, term: int):
        st = self.states[broker]
        self._touched = [broker]
        if st.inert:
            self._trace(f"t={now} seq={seq} phase {which} broker={broker} "
                              f"term={term} outcome=inert")
            return
        clock = self.clocks[broker]
        out = []
        if which == "begin":
            st.current_term = term
            self._expire(st, now)
            injected = 0
            for rule in self.scenario.demands:
                if rule.active(term) and rule.src_edge in st.local_edges:
                    demand_mod.submit_ds(st, DemandSpec(
                        id=f"{rule.id}.t{term}", src_edge=rule.src_edge,
                        dest_edge=rule.dest_edge, service_class=rule.service_class,
                        bandwidth=rule.bandwidth, issued_term=term), now)
                    injected += 1
            if injected:
                self._touch(now)
            self._push(clock.mid(term), ("phase", "mid", broker, term))
            self._trace(f"t={now} seq={seq} phase begin broker={broker} "
                              f"term={term} demands={injected}")
        elif which == "mid":
            self._expire(st, now)
            out = demand_mod.mid_cycle(st, now)
            self._push(clock.end(term), ("phase", "end", broker, term))
            self._trace(f"t={now} seq={seq} phase mid broker={broker} "
                              f"term={term} out={len(out)}")
        elif which == "end":
            self._expire(st, now)
            result = demand_mod.end_of_cycle(st, now)
            out = result.messages
            row = self.metrics.row(broker, term)
            for d in result.decisions:
                cls = d.key.service_class
                if d.admitted:
                    row.admitted_kbps += d.target
                    row.admitted_by_class[cls] = row.admitted_by_class.get(cls, 0) + d.target
                else:
                    row.rejected_kbps += d.target
                    row.rejected_by_class[cls] = row.rejected_by_class.get(cls, 0) + d.target
            if result.decisions or result.released:
                self._touch(now)
            st.ledger_history.append(st.ledger.snapshot())
            if len(st.ledger_history) > 2:
                st.ledger_history.pop(0)
            row.db_size = len(st.db)
            row.reserved_total = sum(st.ledger.totals.values())
            utils = [st.ledger.totals[l] / c for l, c in st.ledger.capacities.items() if c > 0]
            row.max_link_util = max(utils) if utils else 0.0
            row.quiescent = check_quiescence(self.states, self.in_flight)
            # fast mode still verifies invariants once per term; checked mode
            # adds the per-event conservation check on top
            self._check_term(broker, st)
            nxt = term + 1
            if clock.begin(nxt) < self.horizon_time:
                self._push(clock.begin(nxt), ("phase", "begin", broker, nxt))
            self._trace(f"t={now} seq={seq} phase end broker={broker} "
                              f"term={term} decisions={len(result.decisions)} "
                              f"released={len(result.released)} out={len(out)}")
        self._send(now, out)

    def _on_refresh(self, now: int, seq: int, broker: str):
        st = self.states[broker]
        self._touched = [broker]
        if st.inert or not st.joined:
            self._trace(f"t={now} seq={seq} refresh broker={broker} outcome=inert")
            return
        self._expire(st, now)
        out = prop.emit_refresh(st, now)
        nxt = now + st.config.refresh
        if nxt < self.horizon_time:
            self._push(nxt, ("refresh", broker))
        self._trace(f"t={now} seq={seq} refresh broker={broker} out={len(out)}")
        self._send(now, out)

    def _on_action(self, now: int, seq: int, payload):
        name = payload[1]
        broker = payload[2]
        st = self.states[broker]
        self._touched = [broker]
        out = []
        if name == "standup":
            st.joined = True
            prop.install_local_ais(st, now)
            if st.local_edges:
                out = prop.bootstrap(st, now)
            self._touch(now)
        elif name == "blackout":
            st.inert = True
            self._touch(now)
        elif name == "fault":
            link, kbps = payload[3], payload[4]
            key = AggregateKey(ingress="fault", dest_edge="fault", service_class=0)
            if link in st.ledger.reserved:
                st.ledger.reserved[link][key] = kbps
                st.ledger.totals[link] += kbps
                st.ledger.level[key] = kbps
                st.ledger.key_links[key] = (link,)
            self._touch(now)
        self._trace(f"t={now} seq={seq} action {name} broker={broker} out={len(out)}")
        self._send(now, out)


def run(scenario: Scenario, seed: int, horizon_terms: int | None = None,
        checked: bool = False, stop_on_quiescence: bool = False,
        collect_trace: bool = True) -> RunResult:
    """Execute a scenario deterministically; see the module docstring.

    Raises ScenarioError on an unusable scenario and, in checked mode,
    InvariantViolationError at the first event that breaks an invariant.
    collect_trace=False skips trace-line accumulation for bulk campaigns;
    the run itself is unaffected.
    """
    return _Engine(scenario, seed, horizon_terms, checked,
                   stop_on_quiescence, collect_trace).run()
