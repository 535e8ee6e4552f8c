"""Soft-state expiry after a broker blackout.

Availability records carry a validity time and stay alive only while
their origin keeps refreshing them.  This script blacks out the broker
that originates the records for edge domain EA mid-run and tracks how
the rest of the network forgets the destination: records expire, demands
start bouncing as unroutable, and the stale reservations decay once they
stop being restated.

Run from the repository root:  python demos/03_soft_state_blackout.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from bbsim import BlackoutAction, DemandRule, Scenario, run
from bbsim.wire import parse_topology

LINE = (Path(__file__).resolve().parent / "02_demand_admission.py").read_text()
LINE = LINE.split('LINE = """\\\n')[1].split('"""')[0]  # reuse the fixture text

topology = parse_topology(LINE)

TERM = 1000
BLACKOUT_AT = 5 * TERM + 137
scenario = Scenario(
    topology=topology,
    term_length=TERM,
    demands=(DemandRule("d", "EC", "EA", 0, 20_000),),
    actions=(BlackoutAction("BA", at=BLACKOUT_AT),),
    horizon_terms=16,
)
result = run(scenario, seed=2)

validity = result.states["BB"].config.validity
print(f"blackout of BA at t={BLACKOUT_AT}; records live {validity} ticks "
      f"past their last refresh")
print()

print("expiry and rejection timeline:")
for line in result.trace:
    if " action blackout" in line:
        print(f"  {line}   <- origin goes dark")
for (broker, term), row in sorted(result.metrics.rows.items(),
                                  key=lambda kv: (kv[0][1], kv[0][0])):
    notes = []
    if row.expired:
        notes.append(f"expired {row.expired} records")
    if row.rejected_kbps:
        notes.append(f"rejected {row.rejected_kbps} kbit/s")
    if row.reserved_total:
        notes.append(f"{row.reserved_total} kbit/s reserved")
    if notes and broker != "BA":
        print(f"  term {term:2d} {broker}: " + ", ".join(notes))
print()

for broker in ("BB", "BC"):
    state = result.states[broker]
    assert ("EA", 0) not in state.db
    leftovers = [k for k in state.ledger.level if k.dest_edge == "EA"]
    print(f"{broker}: EA record gone, {len(leftovers)} stale reservations left")

print()
print("users at EC were told their demand became unroutable:")
for rejection in result.states["BC"].user_rejections[-3:]:
    print(f"  term {rejection.term}: {rejection.reason} "
          f"ids={','.join(rejection.component_ids)}")
