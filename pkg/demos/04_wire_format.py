"""The XML message encoding and the text file formats.

Every inter-broker message has one canonical XML form: fixed element and
attribute order, loss printed with exactly nine significant digits, no
insignificant whitespace.  Canonical bytes make golden-file comparisons
byte exact, while the decoder stays tolerant about attribute order and
whitespace on input.

Run from the repository root:  python demos/04_wire_format.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from bbsim import AggregatedDs, Ai, AvailabilityInfo, NewAi
from bbsim.wire import decode_message, encode_message, format_loss

record = AvailabilityInfo(
    edge_domain="EA", service_class=3, bandwidth=48_000,
    avg_delay=8_000, max_delay=12_500, jitter=300,
    loss=1 - (1 - 0.002) * (1 - 0.0005),   # two lossy hops composed
    origin_broker="BA", valid_until=9_000,
)

print("a plain advertisement:")
print(" ", encode_message(Ai(sender="BA", receiver="BB", ai=record)).decode())
print()
print("the same record flagged for stand-up (only the element name differs):")
print(" ", encode_message(NewAi(sender="BA", receiver="BB", ai=record)).decode())
print()

print("loss rendering, nine significant digits regardless of magnitude:")
for value in (0.0, 0.5, 0.0298, 1e-6, 1.0):
    print(f"  {value!r:12} -> {format_loss(value)}")
print()

aggregate = AggregatedDs(sender="BC", receiver="BB", dest_edge="EA",
                         service_class=0, bandwidth=35_000, term=4,
                         origin="BC", component_ids=("d1.t4", "d2.t4"))
encoded = encode_message(aggregate)
print("an aggregated demand, component ids as children:")
print(" ", encoded.decode())
print()

# decode tolerates reordering and whitespace but rejects wrong content
scrambled = """
  <bb to="BB" from="BC">
     <ds origin="BC" term="4" bw_kbps="35000" class="0" dest="EA">
        <c id="d1.t4"/><c id="d2.t4"/>
     </ds>
  </bb>
"""
assert decode_message(scrambled) == aggregate
print("scrambled attribute order decodes to the same message: ok")
assert encode_message(decode_message(encoded)) == encoded
print("decode then encode reproduces the canonical bytes: ok")

try:
    decode_message(encoded.replace(b'class="0"', b'class="64"'))
except Exception as exc:
    print(f"service class 64 is rejected: {type(exc).__name__}: {exc}")
