"""Demand cycle walkthrough on a three-domain line.

Users at the edges restate bandwidth demands every term; each broker
aggregates what it received, forwards one aggregate per destination at
mid-cycle, and admits against its per-link ledger at the end of the
cycle.  The script shows the pipeline filling, a demand that overflows
the destination's attachment link being bounced back to its user, and
the border filter tables the admissions produce.

Run from the repository root:  python demos/02_demand_admission.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from bbsim import DemandRule, Scenario, run
from bbsim.wire import parse_topology

LINE = """\
bbtopo 1
domain TA transit broker=BA
domain TB transit broker=BB
domain TC transit broker=BC
domain EA edge
domain EC edge
router TA a1
router TA a2
router TB b1
router TC c1
router TC c2
router EA ea
router EC ec
link LA intra a1 a2 cap=1000000 avg=2000 max=3000 loss=0.001
link LC intra c1 c2 cap=1000000 avg=2000 max=3000 loss=0.001
link XAB inter a1 b1 cap=100000 avg=5000 max=8000 loss=0.002
link XBC inter b1 c1 cap=100000 avg=5000 max=8000 loss=0.002
link XEA inter a2 ea cap=50000 avg=1000 max=1500 loss=0.0005
link XEC inter c2 ec cap=50000 avg=1000 max=1500 loss=0.0005
"""

topology = parse_topology(LINE)

scenario = Scenario(
    topology=topology,
    demands=(
        DemandRule("steady", "EC", "EA", 0, 30_000),          # fits everywhere
        DemandRule("burst", "EA", "EC", 0, 60_000, first_term=2),  # overflows XEC
    ),
    horizon_terms=10,
)
result = run(scenario, seed=7)

print("aggregates on the wire (sender -> receiver, kbit/s):")
for line in result.trace:
    if "deliver aggregatedds" in line:
        print(" ", line)
print()

print("per-term admission totals:")
print(result.metrics.to_tsv())

print("final reservation ledgers:")
for broker in sorted(result.states):
    ledger = result.states[broker].ledger
    for link in sorted(ledger.reserved):
        for key, kbps in sorted(ledger.reserved[link].items()):
            print(f"  {broker} {link}: {key.ingress}->{key.dest_edge}"
                  f"/{key.service_class} = {kbps}")
print()

print("border filter tables (ingress router: destination, admitted, next hop):")
for broker in sorted(result.states):
    for router, entries in sorted(result.states[broker].filter_table.items()):
        for e in entries:
            print(f"  {broker} {router}: {e.key.dest_edge}/{e.key.service_class} "
                  f"{e.bandwidth} kbit/s via {e.next_hop or 'local'}")
print()

print("what the users were told:")
for broker in sorted(result.states):
    for rejection in result.states[broker].user_rejections:
        print(f"  {broker}: term {rejection.term} {rejection.dest_edge}"
              f"/{rejection.service_class} rejected ({rejection.reason}) "
              f"ids={','.join(rejection.component_ids)}")
