"""Immutable multi-domain network model.

Transit domains hold routers, intra links and exactly one broker; edge
domains are leaf endpoints attached to a transit domain by a single inter
link.  The model is built leniently so that validate() can report broken
invariants as data; everything else assumes a topology that validated
clean.  After construction the object is read-only and safe to share.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property

from .errors import NoPathError
from .qos import IDENTITY_COST, TransitCost, merge_costs

DomainId = str
BrokerId = str
RouterId = str
LinkId = str

INTRA = "intra"
INTER = "inter"
TRANSIT = "transit"
EDGE = "edge"


@dataclass(frozen=True)
class Domain:
    id: DomainId
    kind: str                      # TRANSIT or EDGE
    broker: BrokerId | None = None  # exactly one for transit, none for edge


@dataclass(frozen=True)
class Link:
    id: LinkId
    a: RouterId
    b: RouterId
    capacity: int                  # kbit/s
    avg_delay: int                 # microseconds
    max_delay: int
    loss: float
    kind: str                      # INTRA or INTER

    def other(self, router: RouterId) -> RouterId:
        return self.b if router == self.a else self.a

    def cost(self, capacity: int | None = None) -> TransitCost:
        """Cost of crossing this link; capacity overrides the bottleneck.

        Links carry no jitter of their own, so path jitter starts at zero
        and only grows through records that already carry some.
        """
        bottleneck = self.capacity if capacity is None else capacity
        return TransitCost(
            avg_delay=self.avg_delay,
            max_delay=self.max_delay,
            jitter=0,
            bottleneck=bottleneck,
            loss=self.loss,
        )


@dataclass(frozen=True)
class EdgeAttachment:
    """How one edge domain hangs off its transit domain."""

    edge_domain: DomainId
    link: LinkId
    edge_router: RouterId
    transit_domain: DomainId
    transit_router: RouterId


@dataclass(frozen=True)
class NetworkTopology:
    """Raw declarations plus derived indexes.

    router_decls keeps the (domain, router) pairs exactly as declared so
    the validator can spot duplicates; the derived maps take the first
    declaration and are only meaningful on a clean topology.
    """

    domains: tuple[Domain, ...]
    router_decls: tuple[tuple[DomainId, RouterId], ...]
    links: tuple[Link, ...]
    source: str = field(default="", compare=False)

    @cached_property
    def domain_by_id(self) -> dict[DomainId, Domain]:
        return {d.id: d for d in self.domains}

    @cached_property
    def link_by_id(self) -> dict[LinkId, Link]:
        return {l.id: l for l in self.links}

    @cached_property
    def router_domain(self) -> dict[RouterId, DomainId]:
        out: dict[RouterId, DomainId] = {}
        for dom, router in self.router_decls:
            out.setdefault(router, dom)
        return out

    @cached_property
    def domain_routers(self) -> dict[DomainId, tuple[RouterId, ...]]:
        acc: dict[DomainId, list[RouterId]] = {d.id: [] for d in self.domains}
        seen: set[RouterId] = set()
        for dom, router in self.router_decls:
            if router not in seen and dom in acc:
                acc[dom].append(router)
                seen.add(router)
        return {dom: tuple(sorted(rs)) for dom, rs in acc.items()}

    @cached_property
    def intra_adjacency(self) -> dict[RouterId, tuple[tuple[LinkId, RouterId], ...]]:
        """router -> ((link, neighbor router), ...) over intra links, sorted by link id."""
        acc: dict[RouterId, list[tuple[LinkId, RouterId]]] = {}
        for link in self.links:
            if link.kind != INTRA:
                continue
            acc.setdefault(link.a, []).append((link.id, link.b))
            acc.setdefault(link.b, []).append((link.id, link.a))
        return {r: tuple(sorted(entries)) for r, entries in acc.items()}

    @cached_property
    def edge_attachments(self) -> dict[DomainId, EdgeAttachment]:
        out: dict[DomainId, EdgeAttachment] = {}
        for link in self.links:
            if link.kind != INTER:
                continue
            for edge_r, transit_r in ((link.a, link.b), (link.b, link.a)):
                edge_dom = self.router_domain.get(edge_r)
                transit_dom = self.router_domain.get(transit_r)
                if edge_dom is None or transit_dom is None:
                    continue
                dom = self.domain_by_id.get(edge_dom)
                other = self.domain_by_id.get(transit_dom)
                if dom and dom.kind == EDGE and other and other.kind == TRANSIT:
                    out.setdefault(edge_dom, EdgeAttachment(
                        edge_domain=edge_dom,
                        link=link.id,
                        edge_router=edge_r,
                        transit_domain=transit_dom,
                        transit_router=transit_r,
                    ))
        return out

    @cached_property
    def edge_domains(self) -> tuple[DomainId, ...]:
        return tuple(sorted(d.id for d in self.domains if d.kind == EDGE))

    @cached_property
    def transit_domains(self) -> tuple[DomainId, ...]:
        return tuple(sorted(d.id for d in self.domains if d.kind == TRANSIT))

    @cached_property
    def broker_of_domain(self) -> dict[DomainId, BrokerId]:
        return {d.id: d.broker for d in self.domains if d.kind == TRANSIT and d.broker}

    @cached_property
    def domain_of_broker(self) -> dict[BrokerId, DomainId]:
        return {b: d for d, b in self.broker_of_domain.items()}

    @cached_property
    def brokers(self) -> tuple[BrokerId, ...]:
        return tuple(sorted(self.domain_of_broker))

    @cached_property
    def transit_peerings(self) -> dict[BrokerId, tuple[tuple[BrokerId, LinkId, RouterId], ...]]:
        """broker -> ((neighbor broker, inter link, own border router), ...)."""
        acc: dict[BrokerId, list[tuple[BrokerId, LinkId, RouterId]]] = {b: [] for b in self.brokers}
        for link in self.links:
            if link.kind != INTER:
                continue
            dom_a = self.router_domain.get(link.a)
            dom_b = self.router_domain.get(link.b)
            if dom_a is None or dom_b is None:
                continue
            da = self.domain_by_id.get(dom_a)
            db = self.domain_by_id.get(dom_b)
            if not (da and db and da.kind == TRANSIT and db.kind == TRANSIT):
                continue
            if da.broker and db.broker:
                acc[da.broker].append((db.broker, link.id, link.a))
                acc[db.broker].append((da.broker, link.id, link.b))
        return {b: tuple(sorted(entries)) for b, entries in acc.items()}

    @cached_property
    def attached_edges(self) -> dict[BrokerId, tuple[DomainId, ...]]:
        acc: dict[BrokerId, list[DomainId]] = {b: [] for b in self.brokers}
        for att in self.edge_attachments.values():
            broker = self.broker_of_domain.get(att.transit_domain)
            if broker is not None:
                acc[broker].append(att.edge_domain)
        return {b: tuple(sorted(es)) for b, es in acc.items()}


def validate(topology: NetworkTopology) -> list[str]:
    """Check every structural invariant; return one message per violation.

    Violations are data, not failures: an empty list means the topology is
    well formed.  The check is pure and idempotent.
    """
    out: list[str] = []

    seen_domains: set[DomainId] = set()
    for d in topology.domains:
        if not d.id:
            out.append("domain with empty id")
        if d.id in seen_domains:
            out.append(f"duplicate domain id {d.id}")
        seen_domains.add(d.id)
        if d.kind not in (TRANSIT, EDGE):
            out.append(f"domain {d.id} has unknown kind {d.kind}")
        if d.kind == TRANSIT and not d.broker:
            out.append(f"transit domain {d.id} has no broker")
        if d.kind == EDGE and d.broker:
            out.append(f"edge domain {d.id} must not declare a broker")

    brokers_seen: set[BrokerId] = set()
    for d in topology.domains:
        if d.broker:
            if d.broker in brokers_seen:
                out.append(f"broker {d.broker} assigned to multiple domains")
            brokers_seen.add(d.broker)

    router_home: dict[RouterId, DomainId] = {}
    for dom, router in topology.router_decls:
        if not router:
            out.append("router with empty id")
            continue
        if dom not in seen_domains:
            out.append(f"router {router} declared in unknown domain {dom}")
        if router in router_home and router_home[router] != dom:
            out.append(f"router {router} in multiple domains ({router_home[router]}, {dom})")
        elif router in router_home:
            out.append(f"duplicate router declaration {router}")
        router_home.setdefault(router, dom)

    seen_links: set[LinkId] = set()
    pairings: set[tuple[DomainId, DomainId]] = set()
    for link in topology.links:
        if not link.id:
            out.append("link with empty id")
        if link.id in seen_links:
            out.append(f"duplicate link id {link.id}")
        seen_links.add(link.id)
        if link.capacity < 0:
            out.append(f"link {link.id} has negative capacity")
        if not 0.0 <= link.loss <= 1.0:
            out.append(f"link {link.id} loss {link.loss} outside [0, 1]")
        if link.avg_delay < 0 or link.max_delay < 0:
            out.append(f"link {link.id} has negative delay")
        if link.avg_delay > link.max_delay:
            out.append(f"link {link.id} avg_delay exceeds max_delay")
        if link.a == link.b:
            out.append(f"link {link.id} is a self loop")
        dom_a = router_home.get(link.a)
        dom_b = router_home.get(link.b)
        if dom_a is None:
            out.append(f"link {link.id} endpoint {link.a} is not a declared router")
        if dom_b is None:
            out.append(f"link {link.id} endpoint {link.b} is not a declared router")
        if dom_a is None or dom_b is None:
            continue
        if link.kind == INTRA and dom_a != dom_b:
            out.append(f"intra link {link.id} spans domains {dom_a} and {dom_b}")
        if link.kind == INTER:
            if dom_a == dom_b:
                out.append(f"inter link {link.id} stays inside domain {dom_a}")
            else:
                pair = tuple(sorted((dom_a, dom_b)))
                if pair in pairings:
                    out.append(f"parallel inter link {link.id} between {pair[0]} and {pair[1]}")
                pairings.add(pair)
        if link.kind not in (INTRA, INTER):
            out.append(f"link {link.id} has unknown kind {link.kind}")

    for d in topology.domains:
        if d.kind != EDGE:
            continue
        routers = [r for r, home in router_home.items() if home == d.id]
        if len(routers) != 1:
            out.append(f"edge domain {d.id} must have exactly one router, has {len(routers)}")
        incident = [l for l in topology.links
                    if router_home.get(l.a) == d.id or router_home.get(l.b) == d.id]
        inter = [l for l in incident if l.kind == INTER]
        if len(incident) != 1 or len(inter) != 1:
            out.append(f"edge domain {d.id} must attach by exactly one inter link")
        else:
            other_end = inter[0].a if router_home.get(inter[0].b) == d.id else inter[0].b
            other_dom = topology.domain_by_id.get(router_home.get(other_end, ""))
            if other_dom is None or other_dom.kind != TRANSIT:
                out.append(f"edge domain {d.id} does not attach to a transit domain")

    # Connectivity over the domain graph; multiple components are reported
    # so the caller can decide whether a partitioned layout is intentional.
    if not out:
        comps = _domain_components(topology)
        if len(comps) > 1:
            rendered = " | ".join(",".join(sorted(c)) for c in comps)
            out.append(f"topology is partitioned into {len(comps)} components: {rendered}")
    return out


def _domain_components(topology: NetworkTopology) -> list[set[DomainId]]:
    neighbors: dict[DomainId, set[DomainId]] = {d.id: set() for d in topology.domains}
    for link in topology.links:
        if link.kind != INTER:
            continue
        da = topology.router_domain.get(link.a)
        db = topology.router_domain.get(link.b)
        if da and db:
            neighbors[da].add(db)
            neighbors[db].add(da)
    comps: list[set[DomainId]] = []
    todo = set(neighbors)
    while todo:
        start = min(todo)
        comp = {start}
        stack = [start]
        while stack:
            cur = stack.pop()
            for nxt in neighbors[cur]:
                if nxt not in comp:
                    comp.add(nxt)
                    stack.append(nxt)
        todo -= comp
        comps.append(comp)
    return comps


def intra_path(topology: NetworkTopology, domain: DomainId,
               ingress: RouterId, egress: RouterId) -> list[LinkId]:
    """Deterministic minimal-hop path between two routers of one domain.

    Ties between equal-hop paths go to the lexicographically smallest link
    id sequence, so every caller (admission, propagation, the oracle) sees
    the identical path.  Raises NoPathError when the routers are not
    connected by the domain's intra links.
    """
    if topology.router_domain.get(ingress) != domain:
        raise ValueError(f"router {ingress} not in domain {domain}")
    if topology.router_domain.get(egress) != domain:
        raise ValueError(f"router {egress} not in domain {domain}")
    if ingress == egress:
        return []

    adjacency = topology.intra_adjacency
    in_domain = set(topology.domain_routers.get(domain, ()))
    # (hops, link id sequence) ordering; heap pops the unique minimum first.
    best: dict[RouterId, tuple[int, tuple[LinkId, ...]]] = {ingress: (0, ())}
    heap: list[tuple[int, tuple[LinkId, ...], RouterId]] = [(0, (), ingress)]
    settled: set[RouterId] = set()
    while heap:
        hops, path, router = heapq.heappop(heap)
        if router in settled:
            continue
        settled.add(router)
        if router == egress:
            return list(path)
        for link_id, neighbor in adjacency.get(router, ()):
            if neighbor not in in_domain or neighbor in settled:
                continue
            cand = (hops + 1, path + (link_id,))
            if neighbor not in best or cand < best[neighbor]:
                best[neighbor] = cand
                heapq.heappush(heap, (cand[0], cand[1], neighbor))
    raise NoPathError(f"no intra path {ingress} -> {egress} in {domain}")


def path_cost(topology: NetworkTopology, link_ids, capacity_of=None) -> TransitCost:
    """Fold link costs over a path, in path order, starting from identity.

    capacity_of optionally maps a link to its usable bandwidth, letting the
    caller price in reservations; default is the raw link capacity.
    """
    cost = IDENTITY_COST
    for link_id in link_ids:
        link = topology.link_by_id[link_id]
        cap = capacity_of(link) if capacity_of is not None else None
        cost = merge_costs(cost, link.cost(cap))
    return cost


def domain_transit_cost(topology: NetworkTopology, domain: DomainId,
                        ingress: RouterId, egress: RouterId,
                        capacity_of=None) -> TransitCost:
    """Cost of crossing a domain between two of its routers.

    The empty path (ingress == egress) costs the identity element.
    NoPathError propagates from intra_path.
    """
    return path_cost(topology, intra_path(topology, domain, ingress, egress), capacity_of)
