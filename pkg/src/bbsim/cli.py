"""Command line front end.

Exit codes: 0 success, 1 invariant violation or quiescent-state mismatch,
2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .engine import assert_invariants, oracle_best_routes, run
from .errors import (
    InvariantViolationError,
    ParseError,
    ScenarioError,
    SchemaError,
    ValidationError,
)
from .wire import parse_scenario, parse_topology


def _load_topology(path: str):
    return parse_topology(Path(path).read_text())


def _load_scenario(path: str, topology):
    return parse_scenario(Path(path).read_text(), topology)


def _cmd_validate(args) -> int:
    try:
        topology = _load_topology(args.topology)
    except ValidationError as exc:
        for violation in exc.violations:
            print(f"violation: {violation}")
        return 1
    print(f"topology ok: {len(topology.transit_domains)} transit domains, "
          f"{len(topology.edge_domains)} edge domains, {len(topology.links)} links")
    if args.scenario:
        scenario = parse_scenario(Path(args.scenario).read_text(), topology)
        print(f"scenario ok: {len(scenario.demands)} demand rules, "
              f"{len(scenario.actions)} actions, horizon {scenario.horizon_terms} terms")
    return 0


def _cmd_run(args) -> int:
    # invariants are verified per term either way; --checked adds the
    # per-event conservation check
    topology = _load_topology(args.topology)
    scenario = _load_scenario(args.scenario, topology)
    try:
        result = run(scenario, seed=args.seed, horizon_terms=args.terms,
                     checked=args.checked)
    except InvariantViolationError as exc:
        print(f"invariant violation at event {exc.event_index}:")
        for violation in exc.violations:
            print(f"  {violation}")
        return 1
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trace.txt").write_text("\n".join(result.trace) + "\n")
        (out / "metrics.tsv").write_text(result.metrics.to_tsv())
        lines = []
        for broker in sorted(result.states):
            for router, entries in sorted(result.states[broker].filter_table.items()):
                for e in entries:
                    lines.append(f"{broker}\t{router}\t{e.key.dest_edge}\t"
                                 f"{e.key.service_class}\t{e.bandwidth}\t"
                                 f"{e.next_hop or 'local'}")
        (out / "filters.tsv").write_text(
            "broker\tingress\tdest\tclass\tkbps\tnext_hop\n"
            + ("\n".join(lines) + "\n" if lines else ""))
    violations = assert_invariants(result.states)
    print(f"events={result.events_processed} in_flight={result.in_flight} "
          f"quiescent={result.quiescent}")
    print(f"trace_hash={result.trace_hash}")
    if violations:
        for violation in violations:
            print(f"violation: {violation}")
        return 1
    return 0


def _cmd_oracle(args) -> int:
    topology = _load_topology(args.topology)
    classes = tuple(int(c) for c in args.classes.split(",")) if args.classes else (0,)
    best = oracle_best_routes(topology, classes)
    for (broker, edge, cls) in sorted(best):
        ai, next_hop = best[(broker, edge, cls)]
        print(f"{broker} {edge}/{cls} via={next_hop or 'local'} "
              f"bw={ai.bandwidth} avg={ai.avg_delay} max={ai.max_delay} "
              f"jitter={ai.jitter} loss={ai.loss:.12f}")
    return 0


def _cmd_diff_quiescent(args) -> int:
    topology = _load_topology(args.topology)
    scenario = _load_scenario(args.scenario, topology)
    try:
        result = run(scenario, seed=args.seed, horizon_terms=args.terms,
                     stop_on_quiescence=True)
    except InvariantViolationError as exc:
        print(f"invariant violation at event {exc.event_index}")
        return 1
    best = oracle_best_routes(topology, scenario.classes)
    expected: dict[str, dict] = {b: {} for b in topology.brokers}
    for (broker, edge, cls), (ai, _) in best.items():
        expected[broker][(edge, cls)] = (ai.bandwidth, ai.avg_delay, ai.max_delay,
                                         ai.jitter, ai.loss, ai.origin_broker)
    diffs = 0
    for broker in sorted(topology.brokers):
        got = result.states[broker].db_params()
        want = expected[broker]
        for key in sorted(set(got) | set(want)):
            if got.get(key) != want.get(key):
                diffs += 1
                print(f"diff {broker} {key[0]}/{key[1]}: "
                      f"run={got.get(key)} oracle={want.get(key)}")
    print(f"{diffs} differences")
    return 0 if diffs == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bbsim",
        description="Deterministic bandwidth-broker protocol simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="lint a topology (and optionally a scenario)")
    p.add_argument("--topology", required=True)
    p.add_argument("--scenario")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("run", help="execute a scenario")
    p.add_argument("--topology", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--terms", type=int, default=None, help="horizon override")
    p.add_argument("--out", help="directory for trace.txt and metrics.tsv")
    p.add_argument("--checked", action="store_true",
                   help="verify invariants after every event")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("oracle", help="print centralized best routes")
    p.add_argument("--topology", required=True)
    p.add_argument("--classes", help="comma separated service classes, default 0")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("diff-quiescent",
                       help="compare a run's final databases against the oracle")
    p.add_argument("--topology", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--terms", type=int, default=None)
    p.set_defaults(func=_cmd_diff_quiescent)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ParseError, SchemaError, ValidationError, ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
