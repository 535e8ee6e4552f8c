"""Reservation ledger: safety, replacement semantics, replay equality."""

import random

import pytest

from bbsim.admission import (
    AggregateKey,
    ReservationLedger,
    build_filter_table,
)
from bbsim.errors import NegativeTargetError, UnknownLinkError

CAPS = {"L1": 100_000, "L2": 100_000, "L3": 60_000}


def key(ingress="r1", dest="E1", cls=0):
    return AggregateKey(ingress=ingress, dest_edge=dest, service_class=cls)


def test_free_capacity_without_reservations():
    ledger = ReservationLedger(CAPS)
    assert ledger.free_capacity("L1") == 100_000


def test_free_capacity_subtracts_reservations():
    ledger = ReservationLedger(CAPS)
    assert ledger.admit(["L1"], key(), 60_000, term=0).admitted
    assert ledger.free_capacity("L1") == 40_000


def test_unknown_link_raises():
    ledger = ReservationLedger(CAPS)
    with pytest.raises(UnknownLinkError):
        ledger.free_capacity("nope")
    with pytest.raises(UnknownLinkError):
        ledger.admit(["nope"], key(), 10, term=0)


def test_negative_target_raises():
    ledger = ReservationLedger(CAPS)
    with pytest.raises(NegativeTargetError):
        ledger.admit(["L1"], key(), -1, term=0)


def test_admit_into_empty_ledger():
    ledger = ReservationLedger(CAPS)
    assert ledger.admit(["L1", "L2"], key(), 50_000, term=0).admitted


def test_reject_reports_first_insufficient_link():
    ledger = ReservationLedger(CAPS)
    assert ledger.admit(["L1"], key(dest="E9"), 60_000, term=0).admitted
    verdict = ledger.admit(["L2", "L1"], key(), 50_000, term=0)
    assert not verdict.admitted
    assert verdict.bottleneck == "L1"  # first along the path that cannot fit


def test_rejection_leaves_ledger_untouched():
    ledger = ReservationLedger(CAPS)
    ledger.admit(["L1", "L3"], key(dest="E9"), 50_000, term=0)
    before = (ledger.snapshot(), dict(ledger.totals), dict(ledger.level),
              dict(ledger.last_refreshed), len(ledger.decisions))
    verdict = ledger.admit(["L1", "L3"], key(), 20_000, term=1)
    assert not verdict.admitted and verdict.bottleneck == "L3"
    after = (ledger.snapshot(), dict(ledger.totals), dict(ledger.level),
             dict(ledger.last_refreshed), len(ledger.decisions))
    assert before == after


def test_lowering_a_target_frees_capacity():
    ledger = ReservationLedger(CAPS)
    ledger.admit(["L1"], key(), 40_000, term=0)
    assert ledger.admit(["L1"], key(), 30_000, term=1).admitted
    assert ledger.free_capacity("L1") == 70_000


def test_replacement_is_idempotent():
    ledger = ReservationLedger(CAPS)
    ledger.admit(["L1", "L2"], key(), 40_000, term=3)
    state = (ledger.snapshot(), dict(ledger.totals), dict(ledger.level))
    ledger.admit(["L1", "L2"], key(), 40_000, term=3)
    assert (ledger.snapshot(), dict(ledger.totals), dict(ledger.level)) == state


def test_target_zero_clears_the_key():
    ledger = ReservationLedger(CAPS)
    ledger.admit(["L1"], key(), 40_000, term=0)
    assert ledger.admit(["L1"], key(), 0, term=1).admitted
    assert ledger.snapshot() == {}
    assert key() not in ledger.level


def test_path_change_moves_the_reservation():
    ledger = ReservationLedger(CAPS)
    ledger.admit(["L1", "L2"], key(), 40_000, term=0)
    ledger.admit(["L3"], key(), 40_000, term=1)
    assert ledger.reserved["L1"] == {} and ledger.reserved["L2"] == {}
    assert ledger.reserved["L3"] == {key(): 40_000}


def test_release_stale_none():
    ledger = ReservationLedger(CAPS)
    ledger.admit(["L1"], key(), 10_000, term=5)
    assert ledger.release_stale(current_term=5, hold_terms=2) == []


def test_release_stale_drops_unrefreshed_keys():
    ledger = ReservationLedger(CAPS)
    ledger.admit(["L1"], key(dest="Eold"), 10_000, term=3)
    ledger.admit(["L2"], key(dest="Enew"), 10_000, term=5)
    released = ledger.release_stale(current_term=5, hold_terms=1)
    assert released == [key(dest="Eold")]
    assert ledger.free_capacity("L1") == 100_000


def test_ledger_equals_replay_after_random_history():
    rng = random.Random(42)
    ledger = ReservationLedger(CAPS)
    keys = [key(ingress=r, dest=d, cls=c)
            for r in ("r1", "r2") for d in ("E1", "E2", "E3") for c in (0, 1)]
    links = list(CAPS)
    for step in range(1000):
        k = rng.choice(keys)
        if rng.random() < 0.75:
            path = rng.sample(links, rng.randrange(1, len(links) + 1))
            ledger.admit(path, k, rng.randrange(0, 80_000), term=step // 50)
        else:
            ledger.release(k, term=step // 50)
        if step % 100 == 0:
            rebuilt = ReservationLedger.replay(CAPS, ledger.decisions)
            assert rebuilt.equal_state(ledger)
            assert ledger.check() == []
    rebuilt = ReservationLedger.replay(CAPS, ledger.decisions)
    assert rebuilt.equal_state(ledger)
    # free capacity equals from-scratch recomputation over the snapshot
    snap = ledger.snapshot()
    for link in links:
        assert ledger.free_capacity(link) == CAPS[link] - sum(snap.get(link, {}).values())


def test_filter_table_empty_ledger():
    assert build_filter_table(ReservationLedger(CAPS), {}) == {}


def test_filter_table_groups_by_ingress():
    ledger = ReservationLedger(CAPS)
    ledger.admit(["L1"], key(dest="E1"), 10_000, term=0)
    ledger.admit(["L2"], key(dest="E2"), 20_000, term=0)
    routes = {("E1", 0): "B2", ("E2", 0): None}
    table = build_filter_table(ledger, routes)
    assert set(table) == {"r1"}
    entries = table["r1"]
    assert len(entries) == 2
    assert {(e.key.dest_edge, e.bandwidth, e.next_hop) for e in entries} == {
        ("E1", 10_000, "B2"), ("E2", 20_000, None)}


def test_filter_table_is_pure_function_of_ledger_and_routes():
    rng = random.Random(7)
    ledger = ReservationLedger(CAPS)
    routes = {("E1", 0): "B2", ("E2", 0): "B3", ("E3", 0): None,
              ("E1", 1): "B2", ("E2", 1): "B3", ("E3", 1): None}
    for step in range(200):
        k = key(ingress=rng.choice(["r1", "r2"]), dest=rng.choice(["E1", "E2", "E3"]),
                cls=rng.choice([0, 1]))
        ledger.admit([rng.choice(list(CAPS))], k, rng.randrange(0, 30_000), term=step)
    assert build_filter_table(ledger, routes) == build_filter_table(ledger, routes)
