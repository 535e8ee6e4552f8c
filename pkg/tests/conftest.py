"""Shared builders, random topology generators and reference oracles."""

from __future__ import annotations

import random

from bbsim.engine import Scenario
from bbsim.errors import NoPathError
from bbsim.qos import AvailabilityInfo, compare_ai, compose, merge_costs
from bbsim.topology import (
    EDGE,
    INTER,
    INTRA,
    TRANSIT,
    Domain,
    Link,
    NetworkTopology,
    domain_transit_cost,
)


def make_topo(domains, routers, links) -> NetworkTopology:
    """Terse constructor used throughout the tests.

    domains: (id, kind, broker-or-None); routers: (domain, router);
    links: (id, kind, a, b, cap, avg, max, loss).
    """
    return NetworkTopology(
        domains=tuple(Domain(id=d, kind=k, broker=b) for d, k, b in domains),
        router_decls=tuple(routers),
        links=tuple(Link(id=i, kind=k, a=a, b=b, capacity=c,
                         avg_delay=avg, max_delay=mx, loss=loss)
                    for i, k, a, b, c, avg, mx, loss in links),
    )


def line3_topology() -> NetworkTopology:
    """Three transit domains in a line, one edge domain on each."""
    return make_topo(
        domains=[("TA", TRANSIT, "BA"), ("TB", TRANSIT, "BB"), ("TC", TRANSIT, "BC"),
                 ("EA", EDGE, None), ("EB", EDGE, None), ("EC", EDGE, None)],
        routers=[("TA", "a1"), ("TA", "a2"), ("TB", "b1"), ("TB", "b2"),
                 ("TC", "c1"), ("TC", "c2"), ("EA", "ea"), ("EB", "eb"), ("EC", "ec")],
        links=[
            ("LA", INTRA, "a1", "a2", 1_000_000, 2000, 3000, 0.001),
            ("LB", INTRA, "b1", "b2", 1_000_000, 2000, 3000, 0.001),
            ("LC", INTRA, "c1", "c2", 1_000_000, 2000, 3000, 0.001),
            ("XAB", INTER, "a1", "b1", 100_000, 5000, 8000, 0.002),
            ("XBC", INTER, "b1", "c1", 100_000, 5000, 8000, 0.002),
            ("XEA", INTER, "a2", "ea", 50_000, 1000, 1500, 0.0005),
            ("XEB", INTER, "b2", "eb", 50_000, 1000, 1500, 0.0005),
            ("XEC", INTER, "c2", "ec", 50_000, 1000, 1500, 0.0005),
        ],
    )


def two_routes_topology() -> NetworkTopology:
    """Source and destination joined by a fast narrow route and a slow wide one."""
    return make_topo(
        domains=[("TS", TRANSIT, "BS"), ("TF", TRANSIT, "BF"),
                 ("TW", TRANSIT, "BW"), ("TD", TRANSIT, "BD"),
                 ("ES", EDGE, None), ("ED", EDGE, None)],
        routers=[("TS", "s1"), ("TS", "s2"), ("TF", "f1"), ("TW", "w1"),
                 ("TD", "d1"), ("TD", "d2"), ("ES", "es"), ("ED", "ed")],
        links=[
            ("LS", INTRA, "s1", "s2", 1_000_000, 500, 800, 0.0),
            ("LD", INTRA, "d1", "d2", 1_000_000, 500, 800, 0.0),
            ("XSF", INTER, "s1", "f1", 200_000, 1000, 1500, 0.0),
            ("XFD", INTER, "f1", "d1", 40_000, 1000, 1500, 0.0),   # the narrow link
            ("XSW", INTER, "s1", "w1", 200_000, 9000, 12000, 0.0),
            ("XWD", INTER, "w1", "d1", 200_000, 9000, 12000, 0.0),
            ("XES", INTER, "s2", "es", 200_000, 300, 400, 0.0),
            ("XED", INTER, "d2", "ed", 200_000, 300, 400, 0.0),
        ],
    )


def ring_topology(n_transit: int = 6, n_edges: int = 2) -> NetworkTopology:
    """Transit ring with uniform inter-link costs and a few attached edges."""
    domains = [(f"T{i}", TRANSIT, f"B{i}") for i in range(n_transit)]
    routers = [(f"T{i}", f"t{i}c") for i in range(n_transit)]
    links = []
    for i in range(n_transit):
        j = (i + 1) % n_transit
        links.append((f"X{i:02d}", INTER, f"t{i}c", f"t{j}c",
                      100_000, 1000, 1500, 0.001))
    for e in range(n_edges):
        host = (e * (n_transit // max(n_edges, 1))) % n_transit
        domains.append((f"E{e}", EDGE, None))
        routers.append((f"E{e}", f"e{e}r"))
        links.append((f"XE{e}", INTER, f"t{host}c", f"e{e}r",
                      50_000, 500, 800, 0.0005))
    return make_topo(domains, routers, links)


def complete_topology(n_transit: int = 5, n_edges: int = 2) -> NetworkTopology:
    """Complete transit graph, uniform inter-link costs."""
    domains = [(f"T{i}", TRANSIT, f"B{i}") for i in range(n_transit)]
    routers = [(f"T{i}", f"t{i}c") for i in range(n_transit)]
    links = []
    n = 0
    for i in range(n_transit):
        for j in range(i + 1, n_transit):
            links.append((f"X{n:02d}", INTER, f"t{i}c", f"t{j}c",
                          100_000, 1000, 1500, 0.001))
            n += 1
    for e in range(n_edges):
        domains.append((f"E{e}", EDGE, None))
        routers.append((f"E{e}", f"e{e}r"))
        links.append((f"XE{e}", INTER, f"t{e % n_transit}c", f"e{e}r",
                      50_000, 500, 800, 0.0005))
    return make_topo(domains, routers, links)


def _dyadic_loss(rng: random.Random) -> float:
    # binary fractions keep survival products float-exact
    return rng.randrange(0, 32) / 1024.0


def gen_core_topology(rng: random.Random, n_transit: int, n_edges: int) -> NetworkTopology:
    """Random connected topology whose transit peerings all share one border
    router per domain.

    With a single interconnect router per transit domain a relay's crossing
    cost does not depend on its own next hop, which is exactly the regime
    where hop-by-hop best-record routing provably equals the centralized
    route minimum.  Edge domains attach at arbitrary routers, so origin
    crossings still exercise the intra-domain paths.
    """
    domains = []
    routers = []
    links = []
    link_n = 0

    def add_link(kind, a, b, cap, avg, mx, loss):
        nonlocal link_n
        links.append((f"{'L' if kind == INTRA else 'X'}{link_n:03d}",
                      kind, a, b, cap, avg, mx, loss))
        link_n += 1

    domain_routers = {}
    for i in range(n_transit):
        dom = f"T{i}"
        domains.append((dom, TRANSIT, f"B{i}"))
        rs = [f"t{i}c"] + [f"t{i}r{j}" for j in range(rng.randrange(0, 3))]
        domain_routers[dom] = rs
        for r in rs:
            routers.append((dom, r))
        for j in range(1, len(rs)):  # random tree over the domain's routers
            other = rs[rng.randrange(0, j)]
            avg = rng.randrange(1, 40)
            add_link(INTRA, other, rs[j], rng.choice([200, 400, 800]) * 1000,
                     avg, avg + rng.randrange(0, 20), _dyadic_loss(rng))

    connected = [0]
    pairs = set()
    for i in range(1, n_transit):
        j = rng.choice(connected)
        avg = rng.randrange(1, 60)
        add_link(INTER, f"t{i}c", f"t{j}c", rng.choice([50, 100, 150]) * 1000,
                 avg, avg + rng.randrange(0, 30), _dyadic_loss(rng))
        pairs.add((min(i, j), max(i, j)))
        connected.append(i)
    for _ in range(rng.randrange(0, 3)):  # a few extra peerings make cycles
        i, j = rng.randrange(n_transit), rng.randrange(n_transit)
        if i == j or (min(i, j), max(i, j)) in pairs:
            continue
        avg = rng.randrange(1, 60)
        add_link(INTER, f"t{i}c", f"t{j}c", rng.choice([50, 100, 150]) * 1000,
                 avg, avg + rng.randrange(0, 30), _dyadic_loss(rng))
        pairs.add((min(i, j), max(i, j)))

    for e in range(n_edges):
        dom = f"E{e}"
        domains.append((dom, EDGE, None))
        routers.append((dom, f"e{e}r"))
        host = f"T{rng.randrange(n_transit)}"
        attach = rng.choice(domain_routers[host])
        avg = rng.randrange(1, 30)
        add_link(INTER, attach, f"e{e}r", rng.choice([20, 40, 60]) * 1000,
                 avg, avg + rng.randrange(0, 10), _dyadic_loss(rng))
    return make_topo(domains, routers, links)


def gen_general_topology(rng: random.Random, n_transit: int, n_edges: int) -> NetworkTopology:
    """Random topology with multi-router peerings, for safety fuzzing."""
    domains = []
    routers = []
    links = []
    link_n = 0

    def add_link(kind, a, b, cap, avg, mx, loss):
        nonlocal link_n
        links.append((f"{'L' if kind == INTRA else 'X'}{link_n:03d}",
                      kind, a, b, cap, avg, mx, loss))
        link_n += 1

    domain_routers = {}
    for i in range(n_transit):
        dom = f"T{i}"
        domains.append((dom, TRANSIT, f"B{i}"))
        rs = [f"t{i}r{j}" for j in range(rng.randrange(1, 4))]
        domain_routers[dom] = rs
        for r in rs:
            routers.append((dom, r))
        for j in range(1, len(rs)):
            other = rs[rng.randrange(0, j)]
            avg = rng.randrange(1, 40)
            add_link(INTRA, other, rs[j], rng.choice([100, 200, 400]) * 1000,
                     avg, avg + rng.randrange(0, 20), _dyadic_loss(rng))

    connected = [0]
    pairs = set()
    for i in range(1, n_transit):
        j = rng.choice(connected)
        avg = rng.randrange(1, 60)
        add_link(INTER, rng.choice(domain_routers[f"T{i}"]),
                 rng.choice(domain_routers[f"T{j}"]),
                 rng.choice([50, 100, 150]) * 1000,
                 avg, avg + rng.randrange(0, 30), _dyadic_loss(rng))
        pairs.add((min(i, j), max(i, j)))
        connected.append(i)
    for _ in range(rng.randrange(0, 4)):
        i, j = rng.randrange(n_transit), rng.randrange(n_transit)
        if i == j or (min(i, j), max(i, j)) in pairs:
            continue
        avg = rng.randrange(1, 60)
        add_link(INTER, rng.choice(domain_routers[f"T{i}"]),
                 rng.choice(domain_routers[f"T{j}"]),
                 rng.choice([50, 100, 150]) * 1000,
                 avg, avg + rng.randrange(0, 30), _dyadic_loss(rng))
        pairs.add((min(i, j), max(i, j)))

    for e in range(n_edges):
        dom = f"E{e}"
        domains.append((dom, EDGE, None))
        routers.append((dom, f"e{e}r"))
        host = f"T{rng.randrange(n_transit)}"
        avg = rng.randrange(1, 30)
        add_link(INTER, rng.choice(domain_routers[host]), f"e{e}r",
                 rng.choice([20, 40, 60]) * 1000,
                 avg, avg + rng.randrange(0, 10), _dyadic_loss(rng))
    return make_topo(domains, routers, links)


def exhaustive_simple_paths(topo: NetworkTopology, domain: str,
                            start: str, goal: str):
    """Every simple intra-domain path as a link id sequence, by brute force."""
    adjacency = topo.intra_adjacency
    in_domain = set(topo.domain_routers.get(domain, ()))
    paths = []

    def dfs(router, visited, acc):
        if router == goal:
            paths.append(tuple(acc))
            return
        for link_id, neighbor in adjacency.get(router, ()):
            if neighbor in in_domain and neighbor not in visited:
                dfs(neighbor, visited | {neighbor}, acc + [link_id])

    dfs(start, {start}, [])
    return paths


def relaxation_oracle(topo: NetworkTopology, classes=(0,)):
    """Second oracle: greedy settling instead of route enumeration.

    Settles transit domains in value order (the classic shortest-path
    relaxation lifted to the record algebra), relaxing each neighbor
    through the settled domain's crossing.  Independent of both the
    propagation handlers and the enumeration oracle.
    """
    inter_adj: dict[str, list] = {d: [] for d in topo.transit_domains}
    for link in topo.links:
        if link.kind != INTER:
            continue
        da = topo.router_domain.get(link.a)
        db = topo.router_domain.get(link.b)
        if da in inter_adj and db in inter_adj:
            inter_adj[da].append((db, link.id, link.a, link.b))
            inter_adj[db].append((da, link.id, link.b, link.a))
    for entries in inter_adj.values():
        entries.sort()

    best = {}
    for edge in topo.edge_domains:
        att = topo.edge_attachments[edge]
        link = topo.link_by_id[att.link]
        origin = topo.broker_of_domain[att.transit_domain]
        for cls in classes:
            local = AvailabilityInfo(
                edge_domain=edge, service_class=cls, bandwidth=link.capacity,
                avg_delay=link.avg_delay, max_delay=link.max_delay, jitter=0,
                loss=link.loss, origin_broker=origin, valid_until=0)
            frontier = {att.transit_domain: (local, att.transit_router, None)}
            settled = {}
            while frontier:
                dom = min(frontier,
                          key=lambda d: ((frontier[d][0].avg_delay,
                                          frontier[d][0].max_delay,
                                          frontier[d][0].loss,
                                          frontier[d][0].jitter,
                                          -frontier[d][0].bandwidth,
                                          frontier[d][0].origin_broker), d))
                value, egress, next_hop = frontier.pop(dom)
                settled[dom] = (value, next_hop)
                best[(topo.broker_of_domain[dom], edge, cls)] = (value, next_hop)
                for peer, link_id, own_r, peer_r in inter_adj[dom]:
                    if peer in settled:
                        continue
                    l = topo.link_by_id[link_id]
                    try:
                        crossing = merge_costs(
                            l.cost(), domain_transit_cost(topo, dom, own_r, egress))
                    except NoPathError:
                        continue
                    cand = compose(crossing, value)
                    cur = frontier.get(peer)
                    if cur is None or compare_ai(cand, cur[0]) < 0:
                        frontier[peer] = (cand, peer_r, topo.broker_of_domain[dom])
    return best


def propagation_scenario(topology, **overrides) -> Scenario:
    defaults = dict(topology=topology, classes=(0,), term_length=1000,
                    latency=100, horizon_terms=8)
    defaults.update(overrides)
    return Scenario(**defaults)
