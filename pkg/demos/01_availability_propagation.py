"""Availability propagation walkthrough.

Builds a small four-domain network in code, lets every broker stand up,
and watches the availability records spread until each broker holds
exactly one best record per (edge domain, service class).  The final
databases are then compared against the centralized route oracle.

Run from the repository root:  python demos/01_availability_propagation.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from bbsim import Scenario, oracle_best_routes, run
from bbsim.topology import Domain, Link, NetworkTopology

# Four transit domains in a diamond, one edge domain on each side.  Every
# transit-to-transit link hangs off the domain's single border router, and
# the two edge domains attach one hop into their hosts, so both inter and
# intra links contribute to the advertised QoS.
topology = NetworkTopology(
    domains=(
        Domain("T0", "transit", broker="B0"),
        Domain("T1", "transit", broker="B1"),
        Domain("T2", "transit", broker="B2"),
        Domain("T3", "transit", broker="B3"),
        Domain("EWEST", "edge"),
        Domain("EEAST", "edge"),
    ),
    router_decls=(
        ("T0", "t0c"), ("T0", "t0a"),
        ("T1", "t1c"),
        ("T2", "t2c"),
        ("T3", "t3c"), ("T3", "t3a"),
        ("EWEST", "ew"), ("EEAST", "ee"),
    ),
    links=(
        Link("L0", "t0c", "t0a", 800_000, 150, 250, 0.0, "intra"),
        Link("L3", "t3c", "t3a", 800_000, 150, 250, 0.0, "intra"),
        # the northern route is quicker, the southern one wider
        Link("XN0", "t0c", "t1c", 80_000, 1_000, 1_500, 0.001, "inter"),
        Link("XN1", "t1c", "t3c", 80_000, 1_000, 1_500, 0.001, "inter"),
        Link("XS0", "t0c", "t2c", 150_000, 4_000, 6_000, 0.002, "inter"),
        Link("XS1", "t2c", "t3c", 150_000, 4_000, 6_000, 0.002, "inter"),
        Link("XEW", "t0a", "ew", 50_000, 500, 700, 0.0005, "inter"),
        Link("XEE", "t3a", "ee", 50_000, 500, 700, 0.0005, "inter"),
    ),
)

# No demands: this run is pure propagation.  stop_on_quiescence ends the
# run once a full refresh cycle passes without a single database change.
scenario = Scenario(topology=topology, classes=(0,), horizon_terms=10)
result = run(scenario, seed=42, stop_on_quiescence=True)

print(f"run finished after {result.events_processed} events, "
      f"{result.in_flight} messages in flight, quiescent={result.quiescent}")
print()

print("stored availability records (bandwidth kbit/s, delays us):")
for broker in sorted(result.states):
    state = result.states[broker]
    for key in sorted(state.db):
        entry = state.db[key]
        ai = entry.ai
        via = entry.learned_from or "local"
        print(f"  {broker} -> {ai.edge_domain}/{ai.service_class}: "
              f"bw={ai.bandwidth} avg={ai.avg_delay} max={ai.max_delay} "
              f"loss={ai.loss:.6f} via {via}")
print()

# The oracle enumerates every simple domain-level route and composes the
# same crossing costs the brokers applied hop by hop.
oracle = oracle_best_routes(topology, (0,))
mismatches = 0
for (broker, edge, cls), (want, _) in sorted(oracle.items()):
    got = result.states[broker].db[(edge, cls)].ai
    same = (got.bandwidth == want.bandwidth and got.avg_delay == want.avg_delay
            and abs(got.loss - want.loss) <= 1e-12)
    mismatches += 0 if same else 1
print(f"oracle comparison: {len(oracle)} records checked, {mismatches} mismatches")

# B0 reaches EEAST through the quick northern route even though the
# southern route offers more bandwidth: delay leads the record order.
east = result.states["B0"].db[("EEAST", 0)]
print(f"B0 routes to EEAST via {east.learned_from} "
      f"(avg {east.ai.avg_delay} us, bw {east.ai.bandwidth} kbit/s)")
