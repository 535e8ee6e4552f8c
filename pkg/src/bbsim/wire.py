"""External formats: XML message encoding, topology and scenario files.

Message encoding is canonical so golden-file tests can be byte exact:
one `bb` root carrying the sender and receiver, one child element per
message kind, a fixed attribute order, loss printed with exactly nine
significant decimal digits, UTF-8, and no insignificant whitespace.

    <bb from="B1" to="B2"><ai edge="E1" class="0" bw_kbps="1000"
    avg_us="5000" max_us="8000" jitter_us="0" loss="0.00000000"
    origin="B1" valid_until="3000"/></bb>

Element kinds: `ai`, `newai`, `aidb` (with `ai` children), `ds` and
`reject` (demand ids as `c` children).  Decoding tolerates attribute
reordering and surrounding whitespace but is strict about the attribute
set and value ranges.

Topology and scenario files are line-oriented text with a version header;
they configure the artifact and are not part of the standardized message
format.  See parse_topology and parse_scenario for the grammar.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET

from .engine import (
    BlackoutAction,
    DemandRule,
    FaultAction,
    JoinAction,
    Scenario,
)
from .errors import ParseError, SchemaError, ValidationError
from .messages import (
    AggregatedDs,
    Ai,
    AiDatabaseTransfer,
    InterDomainMessage,
    NewAi,
    RejectionNotice,
)
from .qos import MAX_SERVICE_CLASS, AvailabilityInfo
from .topology import EDGE, INTER, INTRA, TRANSIT, Domain, Link, NetworkTopology, validate

TOPOLOGY_MAGIC = "bbtopo"
SCENARIO_MAGIC = "bbscen"
FORMAT_VERSION = "1"


# -- loss formatting -------------------------------------------------------------

def format_loss(value: float) -> str:
    """Render a loss probability with exactly nine significant digits.

    Zero is the fixed form "0.00000000".  Values are plain decimal, never
    exponent notation, which keeps the documents readable.
    """
    if value == 0:
        return "0.00000000"
    exponent = math.floor(math.log10(value))
    for _ in range(3):
        decimals = 8 - exponent
        rendered = f"{value:.{decimals}f}"
        bumped = math.floor(math.log10(float(rendered))) if float(rendered) else exponent
        if bumped == exponent:
            return rendered
        exponent = bumped  # rounding carried into the next decade
    raise AssertionError("loss formatting did not settle")


def canonical_loss(value: float) -> float:
    """Quantize a loss to the precision the wire carries."""
    return float(format_loss(value))


def _escape(value: str) -> str:
    return (value.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


# -- encoding --------------------------------------------------------------------

_AI_ATTRS = ("edge", "class", "bw_kbps", "avg_us", "max_us",
             "jitter_us", "loss", "origin", "valid_until")
_DS_ATTRS = ("dest", "class", "bw_kbps", "term", "origin")
_REJECT_ATTRS = ("dest", "class", "term", "origin", "reason")


def _ai_element(tag: str, ai: AvailabilityInfo) -> str:
    values = {
        "edge": ai.edge_domain,
        "class": str(ai.service_class),
        "bw_kbps": str(ai.bandwidth),
        "avg_us": str(ai.avg_delay),
        "max_us": str(ai.max_delay),
        "jitter_us": str(ai.jitter),
        "loss": format_loss(ai.loss),
        "origin": ai.origin_broker,
        "valid_until": str(ai.valid_until),
    }
    attrs = " ".join(f'{name}="{_escape(values[name])}"' for name in _AI_ATTRS)
    return f"<{tag} {attrs}/>"


def _component_children(ids) -> str:
    return "".join(f'<c id="{_escape(cid)}"/>' for cid in ids)


def encode_message(message: InterDomainMessage) -> bytes:
    """Canonical UTF-8 bytes for one inter-broker message."""
    if isinstance(message, Ai):
        body = _ai_element("ai", message.ai)
    elif isinstance(message, NewAi):
        body = _ai_element("newai", message.ai)
    elif isinstance(message, AiDatabaseTransfer):
        children = "".join(_ai_element("ai", ai) for ai in message.entries)
        body = f"<aidb>{children}</aidb>" if children else "<aidb/>"
    elif isinstance(message, AggregatedDs):
        attrs = (f'dest="{_escape(message.dest_edge)}" '
                 f'class="{message.service_class}" '
                 f'bw_kbps="{message.bandwidth}" '
                 f'term="{message.term}" '
                 f'origin="{_escape(message.origin)}"')
        children = _component_children(message.component_ids)
        body = f"<ds {attrs}>{children}</ds>" if children else f"<ds {attrs}/>"
    elif isinstance(message, RejectionNotice):
        attrs = (f'dest="{_escape(message.dest_edge)}" '
                 f'class="{message.service_class}" '
                 f'term="{message.term}" '
                 f'origin="{_escape(message.origin)}" '
                 f'reason="{_escape(message.reason)}"')
        children = _component_children(message.component_ids)
        body = f"<reject {attrs}>{children}</reject>" if children else f"<reject {attrs}/>"
    else:
        raise TypeError(f"not an inter-domain message: {message!r}")
    doc = f'<bb from="{_escape(message.sender)}" to="{_escape(message.receiver)}">{body}</bb>'
    return doc.encode("utf-8")


# -- decoding --------------------------------------------------------------------

def _require_attrs(element, expected, extra_ok=()):
    present = set(element.keys())
    missing = set(expected) - present
    extra = present - set(expected) - set(extra_ok)
    if missing:
        raise SchemaError(f"<{element.tag}> missing attributes: {sorted(missing)}")
    if extra:
        raise SchemaError(f"<{element.tag}> unexpected attributes: {sorted(extra)}")


def _int_attr(element, name, minimum=0) -> int:
    raw = element.get(name)
    try:
        value = int(raw)
    except (TypeError, ValueError):
        raise SchemaError(f"<{element.tag}> {name}={raw!r} is not an integer")
    if value < minimum:
        raise SchemaError(f"<{element.tag}> {name}={value} below {minimum}")
    return value


def _class_attr(element) -> int:
    value = _int_attr(element, "class")
    if value > MAX_SERVICE_CLASS:
        raise SchemaError(f"<{element.tag}> class={value} above {MAX_SERVICE_CLASS}")
    return value


def _decode_ai(element) -> AvailabilityInfo:
    _require_attrs(element, _AI_ATTRS)
    loss_raw = element.get("loss")
    try:
        loss = float(loss_raw)
    except ValueError:
        raise SchemaError(f"loss={loss_raw!r} is not a number")
    if not 0.0 <= loss <= 1.0:
        raise SchemaError(f"loss={loss} outside [0, 1]")
    avg = _int_attr(element, "avg_us")
    mx = _int_attr(element, "max_us")
    if avg > mx:
        raise SchemaError(f"avg_us={avg} exceeds max_us={mx}")
    return AvailabilityInfo(
        edge_domain=element.get("edge"),
        service_class=_class_attr(element),
        bandwidth=_int_attr(element, "bw_kbps"),
        avg_delay=avg,
        max_delay=mx,
        jitter=_int_attr(element, "jitter_us"),
        loss=loss,
        origin_broker=element.get("origin"),
        valid_until=_int_attr(element, "valid_until"),
    )


def _component_ids(element) -> tuple[str, ...]:
    ids = []
    for child in element:
        if child.tag != "c":
            raise SchemaError(f"<{element.tag}> has unexpected child <{child.tag}>")
        cid = child.get("id")
        if not cid:
            raise SchemaError("<c> without id")
        ids.append(cid)
    return tuple(ids)


def decode_message(data) -> InterDomainMessage:
    """Parse one message document; the inverse of encode_message.

    Raises ParseError for malformed XML (with the parser's position) and
    SchemaError for structurally wrong or out-of-range content.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise ParseError(str(exc), position=getattr(exc, "position", None))
    if root.tag != "bb":
        raise SchemaError(f"root element is <{root.tag}>, expected <bb>")
    _require_attrs(root, ("from", "to"))
    sender, receiver = root.get("from"), root.get("to")
    children = list(root)
    if len(children) != 1:
        raise SchemaError(f"<bb> must hold exactly one message, found {len(children)}")
    el = children[0]
    if el.tag == "ai":
        return Ai(sender, receiver, _decode_ai(el))
    if el.tag == "newai":
        return NewAi(sender, receiver, _decode_ai(el))
    if el.tag == "aidb":
        _require_attrs(el, ())
        entries = []
        for child in el:
            if child.tag != "ai":
                raise SchemaError(f"<aidb> has unexpected child <{child.tag}>")
            entries.append(_decode_ai(child))
        return AiDatabaseTransfer(sender, receiver, tuple(entries))
    if el.tag == "ds":
        _require_attrs(el, _DS_ATTRS)
        return AggregatedDs(
            sender, receiver,
            dest_edge=el.get("dest"),
            service_class=_class_attr(el),
            bandwidth=_int_attr(el, "bw_kbps"),
            term=_int_attr(el, "term"),
            origin=el.get("origin"),
            component_ids=_component_ids(el),
        )
    if el.tag == "reject":
        _require_attrs(el, _REJECT_ATTRS)
        return RejectionNotice(
            sender, receiver,
            dest_edge=el.get("dest"),
            service_class=_class_attr(el),
            term=_int_attr(el, "term"),
            origin=el.get("origin"),
            reason=el.get("reason"),
            component_ids=_component_ids(el),
        )
    raise SchemaError(f"unknown message element <{el.tag}>")


# -- topology files ---------------------------------------------------------------

def _split_fields(parts, line_no):
    """Separate positional tokens from key=value options."""
    positional, options = [], {}
    for part in parts:
        if "=" in part:
            key, _, value = part.partition("=")
            if key in options:
                raise ParseError(f"duplicate option {key}", position=f"line {line_no}")
            options[key] = value
        else:
            if options:
                raise ParseError("positional token after options",
                                 position=f"line {line_no}")
            positional.append(part)
    return positional, options


def _content_lines(text):
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line_no, line.split()


def _check_header(tokens, magic, line_no):
    if len(tokens) != 2 or tokens[0] != magic or tokens[1] != FORMAT_VERSION:
        raise ParseError(f"expected header '{magic} {FORMAT_VERSION}'",
                         position=f"line {line_no}")


def parse_topology(data) -> NetworkTopology:
    """Parse the line-oriented topology format and validate the result.

    Grammar, one statement per line, '#' starts a comment:

        bbtopo 1
        domain <id> transit broker=<broker>
        domain <id> edge
        router <domain> <router>
        link <id> intra <r1> <r2> cap=<kbps> avg=<us> max=<us> loss=<p>
        link <id> inter <r1> <r2> cap=<kbps> avg=<us> max=<us> loss=<p>

    Raises ParseError with a line number on malformed input and
    ValidationError listing every structural violation.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    domains: list[Domain] = []
    routers: list[tuple[str, str]] = []
    links: list[Link] = []
    header_seen = False
    for line_no, tokens in _content_lines(data):
        if not header_seen:
            _check_header(tokens, TOPOLOGY_MAGIC, line_no)
            header_seen = True
            continue
        keyword = tokens[0]
        positional, options = _split_fields(tokens[1:], line_no)
        if keyword == "domain":
            if len(positional) != 2 or positional[1] not in (TRANSIT, EDGE):
                raise ParseError("expected: domain <id> transit|edge",
                                 position=f"line {line_no}")
            broker = options.pop("broker", None)
            if options:
                raise ParseError(f"unknown options {sorted(options)}",
                                 position=f"line {line_no}")
            domains.append(Domain(id=positional[0], kind=positional[1], broker=broker))
        elif keyword == "router":
            if len(positional) != 2 or options:
                raise ParseError("expected: router <domain> <router>",
                                 position=f"line {line_no}")
            routers.append((positional[0], positional[1]))
        elif keyword == "link":
            if len(positional) != 4 or positional[1] not in (INTRA, INTER):
                raise ParseError("expected: link <id> intra|inter <r1> <r2> ...",
                                 position=f"line {line_no}")
            try:
                link = Link(
                    id=positional[0], a=positional[2], b=positional[3],
                    capacity=int(options.pop("cap")),
                    avg_delay=int(options.pop("avg")),
                    max_delay=int(options.pop("max")),
                    loss=float(options.pop("loss")),
                    kind=positional[1],
                )
            except KeyError as exc:
                raise ParseError(f"link missing option {exc.args[0]}",
                                 position=f"line {line_no}")
            except ValueError as exc:
                raise ParseError(f"bad link value: {exc}", position=f"line {line_no}")
            if options:
                raise ParseError(f"unknown options {sorted(options)}",
                                 position=f"line {line_no}")
            links.append(link)
        else:
            raise ParseError(f"unknown keyword {keyword}", position=f"line {line_no}")
    if not header_seen:
        raise ParseError("empty document", position="line 1")
    topo = NetworkTopology(domains=tuple(domains), router_decls=tuple(routers),
                           links=tuple(links), source=data)
    problems = validate(topo)
    if problems:
        raise ValidationError(problems)
    return topo


# -- scenario files ----------------------------------------------------------------

def parse_scenario(data, topology: NetworkTopology) -> Scenario:
    """Parse the scenario format against an already-parsed topology.

    Grammar, defaults in brackets:

        bbscen 1
        classes <n> [<n> ...]            [0]
        term <ticks>                     [1000]
        latency <ticks>                  [term / 10]
        refresh <ticks>                  [term]
        validity <ticks>                 [3 * refresh]
        hold <terms>                     [2]
        horizon <terms>                  [10]
        demand <id> src=<edge> dst=<edge> class=<n> bw=<kbps> from=<term> [to=<term>]
        join <broker> at=<time>
        blackout <broker> at=<time>
        fault <broker> at=<time> link=<link> kbps=<n>
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    settings = {}
    classes: tuple[int, ...] = (0,)
    demands: list[DemandRule] = []
    actions: list = []
    header_seen = False
    seen_rule_ids: set[str] = set()

    def int_option(options, name, line_no):
        if name not in options:
            raise ParseError(f"missing option {name}", position=f"line {line_no}")
        try:
            return int(options[name])
        except ValueError:
            raise ParseError(f"option {name} must be an integer",
                             position=f"line {line_no}")

    for line_no, tokens in _content_lines(data):
        if not header_seen:
            _check_header(tokens, SCENARIO_MAGIC, line_no)
            header_seen = True
            continue
        keyword = tokens[0]
        positional, options = _split_fields(tokens[1:], line_no)
        if keyword == "classes":
            try:
                classes = tuple(int(p) for p in positional)
            except ValueError:
                raise ParseError("classes must be integers", position=f"line {line_no}")
            if not classes:
                raise ParseError("classes needs at least one value",
                                 position=f"line {line_no}")
        elif keyword in ("term", "latency", "refresh", "validity", "hold", "horizon"):
            if len(positional) != 1:
                raise ParseError(f"expected: {keyword} <value>", position=f"line {line_no}")
            try:
                settings[keyword] = int(positional[0])
            except ValueError:
                raise ParseError(f"{keyword} must be an integer", position=f"line {line_no}")
        elif keyword == "demand":
            if len(positional) != 1:
                raise ParseError("expected: demand <id> key=value ...",
                                 position=f"line {line_no}")
            rule_id = positional[0]
            if rule_id in seen_rule_ids:
                raise ParseError(f"duplicate demand id {rule_id}",
                                 position=f"line {line_no}")
            seen_rule_ids.add(rule_id)
            last = int(options["to"]) if "to" in options else None
            demands.append(DemandRule(
                id=rule_id,
                src_edge=options.get("src", ""),
                dest_edge=options.get("dst", ""),
                service_class=int_option(options, "class", line_no),
                bandwidth=int_option(options, "bw", line_no),
                first_term=int(options.get("from", "0")),
                last_term=last,
            ))
        elif keyword in ("join", "blackout"):
            if len(positional) != 1:
                raise ParseError(f"expected: {keyword} <broker> at=<time>",
                                 position=f"line {line_no}")
            at = int_option(options, "at", line_no)
            cls = JoinAction if keyword == "join" else BlackoutAction
            actions.append(cls(broker=positional[0], at=at))
        elif keyword == "fault":
            if len(positional) != 1:
                raise ParseError("expected: fault <broker> at=<time> link=<id> kbps=<n>",
                                 position=f"line {line_no}")
            actions.append(FaultAction(
                broker=positional[0],
                at=int_option(options, "at", line_no),
                link=options.get("link", ""),
                kbps=int_option(options, "kbps", line_no),
            ))
        else:
            raise ParseError(f"unknown keyword {keyword}", position=f"line {line_no}")
    if not header_seen:
        raise ParseError("empty document", position="line 1")

    term = settings.get("term", 1000)
    scenario = Scenario(
        topology=topology,
        classes=classes,
        term_length=term,
        latency=settings.get("latency", max(1, term // 10)),
        refresh_interval=settings.get("refresh", 0),
        validity_window=settings.get("validity", 0),
        hold_terms=settings.get("hold", 2),
        horizon_terms=settings.get("horizon", 10),
        demands=tuple(demands),
        actions=tuple(actions),
    )
    _validate_scenario_refs(scenario, topology)
    return scenario


def _validate_scenario_refs(scenario: Scenario, topology: NetworkTopology):
    problems = []
    edges = set(topology.edge_domains)
    brokers = set(topology.brokers)
    for rule in scenario.demands:
        if rule.src_edge not in edges:
            problems.append(f"demand {rule.id}: unknown source edge {rule.src_edge}")
        if rule.dest_edge not in edges:
            problems.append(f"demand {rule.id}: unknown destination edge {rule.dest_edge}")
    for action in scenario.actions:
        if action.broker not in brokers:
            problems.append(f"action references unknown broker {action.broker}")
        if isinstance(action, FaultAction) and action.link not in topology.link_by_id:
            problems.append(f"fault references unknown link {action.link}")
    if problems:
        raise ValidationError(problems)
