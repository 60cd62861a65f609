"""Route filtering, the multi-objective metric, and policy selection."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgrsim.contact_plan import Contact
from cgrsim.forwarding import (
    INFINITE_TTL,
    DegenerateScenario,
    Packet,
    Policy,
    PolicyKind,
    VolumeLedger,
    filter_routes,
    mo_metric,
    select_route,
)
from cgrsim.routing import Route, build_contact_graph, k_best_routes


def make_route(ids_nodes, t_now=0.0, capacity=10, spacing=10.0):
    """Chain a route through the given node sequence, one contact per hop."""
    contacts = []
    for i, (frm, to) in enumerate(zip(ids_nodes, ids_nodes[1:])):
        contacts.append(
            Contact(100 + i, frm, to, i * spacing, (i + 1) * spacing, capacity)
        )
    return Route.from_contacts(tuple(contacts), t_now)


@pytest.fixture
def fig2_routes(fig2_plan):
    return k_best_routes(build_contact_graph(fig2_plan, 1, 3, 0.0), 5)


def packet(ttl, horizon=30.0, created=0.0):
    return Packet.create(1, 1, 3, created, ttl, horizon)


class TestFilter:
    def test_keeps_both_with_ttl_30(self, fig2_routes):
        kept = filter_routes(fig2_routes, packet(30.0), 0.0)
        assert [r.ids for r in kept] == [(1, 2), (3,)]

    def test_ttl_15_drops_late_route(self, fig2_routes):
        kept = filter_routes(fig2_routes, packet(15.0), 0.0)
        assert [r.ids for r in kept] == [(1, 2)]

    def test_exhausted_volume_excluded(self, fig2_routes):
        ledger = VolumeLedger()
        for _ in range(10):
            ledger.commit(fig2_routes[0])
        kept = filter_routes(fig2_routes, packet(30.0), 0.0, ledger)
        assert [r.ids for r in kept] == [(3,)]

    def test_expired_route_excluded(self, fig2_routes):
        kept = filter_routes(fig2_routes, packet(30.0), 12.0)
        assert [r.ids for r in kept] == [(3,)]  # first route expired at 10

    def test_infinite_ttl_reduces_to_validity(self, fig2_routes):
        kept = filter_routes(fig2_routes, packet(INFINITE_TTL), 0.0)
        assert len(kept) == 2

    @given(ttl_a=st.floats(0.0, 100.0), ttl_b=st.floats(0.0, 100.0))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_ttl(self, ttl_a, ttl_b):
        routes = [make_route([1, 2, 3]), make_route([1, 3], spacing=25.0)]
        lo, hi = sorted([ttl_a, ttl_b])
        kept_lo = {r.ids for r in filter_routes(routes, packet(lo), 0.0)}
        kept_hi = {r.ids for r in filter_routes(routes, packet(hi), 0.0)}
        assert kept_lo <= kept_hi


class TestMoMetric:
    def test_reference_value(self, fig2_routes):
        r1 = fig2_routes[0]  # hops=2, edt=10
        assert mo_metric(r1, 3, 30.0, 0.25) == pytest.approx(5 / 12, abs=1e-12)

    def test_w0_is_normalized_edt(self, fig2_routes):
        r1 = fig2_routes[0]
        assert mo_metric(r1, 3, 30.0, 0.0) == r1.edt / 30.0

    def test_w1_is_normalized_hops(self, fig2_routes):
        r1 = fig2_routes[0]
        assert mo_metric(r1, 3, 30.0, 1.0) == r1.hops / 3

    def test_zero_horizon_rejected(self, fig2_routes):
        with pytest.raises(DegenerateScenario):
            mo_metric(fig2_routes[0], 3, 0.0, 0.5)


class TestSelect:
    def test_fig2_policies(self, fig2_routes):
        pkt = packet(30.0)
        cases = [
            (Policy.deltime(), (1, 2)),
            (Policy.hops(), (3,)),
            (Policy.mo(0.25), (1, 2)),
            (Policy.mo(0.75), (3,)),
            (Policy.mo(0.5), (3,)),  # exact tie, broken by fewer hops
        ]
        for policy, expected in cases:
            chosen = select_route(fig2_routes, policy, pkt, 0.0, 3, 30.0)
            assert chosen.ids == expected, policy.label

    def test_none_when_filtered_empty(self, fig2_routes):
        assert select_route(fig2_routes, Policy.deltime(), packet(5.0), 0.0, 3, 30.0) is None

    def test_selection_decrements_ledger(self, fig2_routes):
        ledger = VolumeLedger()
        pkt = packet(30.0)
        chosen = select_route(fig2_routes, Policy.deltime(), pkt, 0.0, 3, 30.0, ledger)
        assert chosen.ids == (1, 2)
        assert ledger.used(1) == 1 and ledger.used(2) == 1 and ledger.used(3) == 0

    def test_selected_route_meets_deadline_and_volume(self, fig2_routes):
        ledger = VolumeLedger()
        pkt = packet(30.0)
        for _ in range(25):
            chosen = select_route(
                fig2_routes, Policy.deltime(), pkt, 0.0, 3, 30.0, ledger
            )
            if chosen is None:
                break
            assert chosen.edt <= pkt.deadline
            assert ledger.residual(chosen) >= 0
        assert chosen is None  # 20 units of volume in total


from conftest import random_route_set


class TestPolicyCollapse:
    def test_mo_w0_matches_deltime_and_w1_matches_hops(self):
        rng = random.Random(99)
        horizon = 400.0
        checked_dt = checked_hops = 0
        for _ in range(300):
            routes = random_route_set(rng)
            pkt = Packet.create(1, 1, routes[0].contacts[-1].to, 0.0, INFINITE_TTL, horizon)
            edts = [r.edt for r in routes]
            if edts.count(min(edts)) == 1:
                a = select_route(routes, Policy.deltime(), pkt, 0.0, 30, horizon)
                b = select_route(routes, Policy.mo(0.0), pkt, 0.0, 30, horizon)
                assert a is b
                checked_dt += 1
            hops = [r.hops for r in routes]
            if hops.count(min(hops)) == 1:
                a = select_route(routes, Policy.hops(), pkt, 0.0, 30, horizon)
                b = select_route(routes, Policy.mo(1.0), pkt, 0.0, 30, horizon)
                assert a is b
                checked_hops += 1
        assert checked_dt > 50 and checked_hops > 50


class TestPolicyType:
    def test_mo_requires_weight(self):
        with pytest.raises(ValueError):
            Policy(PolicyKind.MO)
        with pytest.raises(ValueError):
            Policy(PolicyKind.DELTIME, w=0.5)

    def test_parse(self):
        assert Policy.parse("deltime").kind is PolicyKind.DELTIME
        assert Policy.parse("hops").kind is PolicyKind.HOPS
        assert Policy.parse("mo:0.25") == Policy.mo(0.25)
        with pytest.raises(ValueError):
            Policy.parse("fastest")

    def test_infinite_ttl_deadline_is_horizon(self):
        pkt = Packet.create(1, 1, 2, 5.0, INFINITE_TTL, 77.0)
        assert pkt.deadline == 77.0
        assert math.isinf(pkt.ttl)
