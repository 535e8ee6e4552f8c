"""Per-link reservation ledger and all-or-nothing path admission.

The ledger is the admission safety authority: for every link it tracks
reserved bandwidth broken down by aggregate key, and no event sequence may
push a link's total past its capacity.  Demands restate an absolute target
each term (replacement semantics), so an admit sets the key's level rather
than adding to it, and a key that stops being restated decays out after a
configurable number of terms.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NegativeTargetError, UnknownLinkError


@dataclass(frozen=True, order=True)
class AggregateKey:
    """One admitted flow aggregate: where it enters and where it is headed."""

    ingress: str
    dest_edge: str
    service_class: int


@dataclass(frozen=True)
class AdmitResult:
    admitted: bool
    bottleneck: str | None = None   # first insufficient link on rejection


@dataclass(frozen=True)
class FilterEntry:
    key: AggregateKey
    bandwidth: int
    next_hop: str | None            # None: local delivery or currently unroutable


#: FilterTable: border router -> tuple of entries, exactly the nonzero keys.
FilterTable = dict[str, tuple[FilterEntry, ...]]


@dataclass
class LedgerDecision:
    """One accepted ledger mutation, kept so state can be replayed from scratch."""

    op: str                          # "admit" or "release"
    key: AggregateKey
    path: tuple[str, ...]
    target: int
    term: int


class ReservationLedger:
    """Reserved capacity per link, keyed by aggregate.

    Totals are cached per link so safety checks stay cheap in checked-mode
    runs; replay() rebuilds a ledger from the decision log and must always
    reproduce the live state bit for bit.
    """

    def __init__(self, capacities: dict[str, int]):
        self.capacities = dict(capacities)
        self.reserved: dict[str, dict[AggregateKey, int]] = {l: {} for l in capacities}
        self.totals: dict[str, int] = {l: 0 for l in capacities}
        self.level: dict[AggregateKey, int] = {}
        self.key_links: dict[AggregateKey, tuple[str, ...]] = {}
        self.last_refreshed: dict[AggregateKey, int] = {}
        self.decisions: list[LedgerDecision] = []

    def free_capacity(self, link: str) -> int:
        """Capacity minus everything reserved on the link."""
        if link not in self.capacities:
            raise UnknownLinkError(link)
        return self.capacities[link] - self.totals[link]

    def admit(self, path, key: AggregateKey, target: int, term: int) -> AdmitResult:
        """Set the key's reservation to target along path, all links or none.

        Admission succeeds when every path link can absorb the change from
        the key's previous level on that link; rejection reports the first
        link that cannot and leaves the ledger untouched.  On success any
        residue the key left on links outside the new path is cleared, so
        a key's reservation always describes exactly one path.
        """
        if target < 0:
            raise NegativeTargetError(f"target {target} for {key}")
        path = tuple(path)
        for link in path:
            if link not in self.capacities:
                raise UnknownLinkError(link)
        for link in path:
            prev = self.reserved[link].get(key, 0)
            delta = target - prev
            if delta > 0 and delta > self.capacities[link] - self.totals[link]:
                return AdmitResult(admitted=False, bottleneck=link)
        self._apply_admit(key, path, target, term)
        self.decisions.append(LedgerDecision("admit", key, path, target, term))
        return AdmitResult(admitted=True)

    def _apply_admit(self, key: AggregateKey, path: tuple[str, ...], target: int, term: int):
        for link in self.key_links.get(key, ()):
            if link not in path:
                self._set(link, key, 0)
        for link in path:
            self._set(link, key, target)
        if target > 0:
            self.level[key] = target
            self.key_links[key] = path
            self.last_refreshed[key] = term
        else:
            self.level.pop(key, None)
            self.key_links.pop(key, None)
            self.last_refreshed.pop(key, None)

    def _set(self, link: str, key: AggregateKey, value: int):
        prev = self.reserved[link].pop(key, 0)
        if value > 0:
            self.reserved[link][key] = value
        self.totals[link] += value - prev

    def release(self, key: AggregateKey, term: int):
        """Drop a key's reservation from every link."""
        for link in self.key_links.get(key, ()):
            self._set(link, key, 0)
        self.level.pop(key, None)
        self.key_links.pop(key, None)
        self.last_refreshed.pop(key, None)
        self.decisions.append(LedgerDecision("release", key, (), 0, term))

    def release_stale(self, current_term: int, hold_terms: int) -> list[AggregateKey]:
        """Release every key not restated within the last hold_terms terms."""
        stale = sorted(k for k, t in self.last_refreshed.items()
                       if t <= current_term - hold_terms)
        for key in stale:
            self.release(key, current_term)
        return stale

    def snapshot(self) -> dict[str, dict[AggregateKey, int]]:
        """Reserved amounts per link, for quiescence and equality checks."""
        return {l: dict(res) for l, res in self.reserved.items() if res}

    def check_totals(self) -> list[str]:
        """The conservation law against cached totals; O(links)."""
        out = []
        for link, total in self.totals.items():
            if total > self.capacities[link]:
                out.append(f"link {link} over-reserved: {total} > {self.capacities[link]}")
            if total < 0:
                out.append(f"link {link} has negative total {total}")
        return out

    def check(self) -> list[str]:
        """Full consistency sweep, cache recomputed; empty when sound."""
        out = self.check_totals()
        for link, res in self.reserved.items():
            total = sum(res.values())
            if total != self.totals[link]:
                out.append(f"ledger total cache wrong on {link}")
            for key, value in res.items():
                if value <= 0:
                    out.append(f"non-positive reservation {value} for {key} on {link}")
        return out

    def apply_logged(self, decision: "LedgerDecision"):
        """Fold one logged decision into this ledger, without re-logging."""
        if decision.op == "admit":
            self._apply_admit(decision.key, decision.path, decision.target,
                              decision.term)
        elif decision.op == "release":
            for link in self.key_links.get(decision.key, ()):
                self._set(link, decision.key, 0)
            self.level.pop(decision.key, None)
            self.key_links.pop(decision.key, None)
            self.last_refreshed.pop(decision.key, None)

    @classmethod
    def replay(cls, capacities: dict[str, int], decisions) -> "ReservationLedger":
        """Rebuild a ledger by folding the accepted-decision log from scratch."""
        ledger = cls(capacities)
        for d in decisions:
            ledger.apply_logged(d)
        return ledger

    def equal_state(self, other: "ReservationLedger") -> bool:
        return (self.capacities == other.capacities
                and self.snapshot() == other.snapshot()
                and self.level == other.level
                and self.key_links == other.key_links
                and self.last_refreshed == other.last_refreshed)


def free_capacity(ledger: ReservationLedger, link: str) -> int:
    return ledger.free_capacity(link)


def build_filter_table(ledger: ReservationLedger, routes: dict) -> FilterTable:
    """Derive ingress filter configuration from the ledger.

    routes maps (dest_edge, service_class) to the current next-hop broker,
    None meaning local delivery.  The table is a pure function of its
    inputs: regenerating it after any event sequence gives the same result.
    """
    acc: dict[str, list[FilterEntry]] = {}
    for key in sorted(ledger.level):
        entry = FilterEntry(
            key=key,
            bandwidth=ledger.level[key],
            next_hop=routes.get((key.dest_edge, key.service_class)),
        )
        acc.setdefault(key.ingress, []).append(entry)
    return {router: tuple(entries) for router, entries in acc.items()}
