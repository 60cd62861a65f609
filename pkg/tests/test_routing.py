"""Contact graph structure and route search against the brute-force oracle."""

import random

import pytest

from cgrsim.contact_plan import ContactPlan, generate_random_network
from cgrsim.routing import (
    Route,
    UnknownNode,
    build_contact_graph,
    earliest_route,
    k_best_routes,
    RouteCache,
)

from conftest import brute_force_routes


class TestContactGraph:
    def test_fig2_structure(self, fig2_plan):
        g = build_contact_graph(fig2_plan, 1, 3, 0.0)
        assert g.root_out == (1, 3)
        assert g.terminal_in == (2, 3)
        assert g.edges() == {(1, 2)}

    def test_empty_plan(self):
        g = build_contact_graph(ContactPlan.of([], extra_nodes=[1, 2]), 1, 2, 0.0)
        assert g.vertices == ()
        assert earliest_route(g) is None

    def test_late_query_drops_expired_contacts(self, fig2_plan):
        g = build_contact_graph(fig2_plan, 1, 3, 25.0)
        assert [c.id for c in g.vertices] == [3]

    def test_unknown_node(self, fig2_plan):
        with pytest.raises(UnknownNode):
            build_contact_graph(fig2_plan, 1, 99, 0.0)

    def test_same_source_and_dest(self, fig2_plan):
        with pytest.raises(ValueError):
            build_contact_graph(fig2_plan, 1, 1, 0.0)


class TestEarliestRoute:
    def test_fig2_from_n1(self, fig2_plan):
        r = earliest_route(build_contact_graph(fig2_plan, 1, 3, 0.0))
        assert r.ids == (1, 2)
        assert r.edt == 10.0
        assert r.hops == 2
        assert r.volume == 10
        assert r.next_hop == 2

    def test_fig2_from_n2(self, fig2_plan):
        r = earliest_route(build_contact_graph(fig2_plan, 2, 3, 0.0))
        assert r.ids == (2,)
        assert r.edt == 10.0
        assert r.hops == 1

    def test_arrival_respects_t_now(self, fig2_plan):
        r = earliest_route(build_contact_graph(fig2_plan, 1, 3, 22.0))
        assert r.ids == (3,)
        assert r.edt == 22.0  # contact already running, can send immediately


class TestKBest:
    def test_fig2_from_n1(self, fig2_plan):
        routes = k_best_routes(build_contact_graph(fig2_plan, 1, 3, 0.0), 5)
        assert [(r.ids, r.edt) for r in routes] == [((1, 2), 10.0), ((3,), 20.0)]

    def test_fig2_from_n2(self, fig2_plan):
        routes = k_best_routes(build_contact_graph(fig2_plan, 2, 3, 0.0), 5)
        assert [r.ids for r in routes] == [(2,)]

    def test_k1_equals_earliest(self, fig2_plan):
        g = build_contact_graph(fig2_plan, 1, 3, 0.0)
        assert k_best_routes(g, 1) == [earliest_route(g)]

    def test_k_must_be_positive(self, fig2_plan):
        with pytest.raises(ValueError):
            k_best_routes(build_contact_graph(fig2_plan, 1, 3, 0.0), 0)

    def test_no_contact_repeats_and_sorted(self):
        plan = generate_random_network(11, 6, 4, 10.0, 0.6, 5)
        g = build_contact_graph(plan, 1, 6, 0.0)
        routes = k_best_routes(g, None)
        keys = [r.sort_key for r in routes]
        assert keys == sorted(keys)
        assert len({r.ids for r in routes}) == len(routes)
        for r in routes:
            assert len(set(r.ids)) == len(r.ids)


class TestOracleEquivalence:
    def test_small_random_plans(self):
        rng = random.Random(2024)
        checked = 0
        for trial in range(60):
            n_nodes = rng.randint(2, 6)
            plan = generate_random_network(
                seed=trial,
                n_nodes=n_nodes,
                n_states=rng.randint(1, 4),
                state_duration=10.0,
                density=rng.choice([0.2, 0.4, 0.7, 1.0]),
                capacity=rng.randint(1, 10),
            )
            source, dest = rng.sample(range(1, n_nodes + 1), 2)
            t_now = rng.choice([0.0, 5.0, 15.0])
            expected = brute_force_routes(plan, source, dest, t_now)
            g = build_contact_graph(plan, source, dest, t_now)
            got = [(r.ids, r.edt) for r in k_best_routes(g, None)]
            assert got == expected, (trial, source, dest, t_now)
            best = earliest_route(g)
            assert (best is None) == (not expected)
            if expected:
                assert (best.ids, best.edt) == expected[0]
                checked += 1
        assert checked > 10

    def test_route_invariants_on_random_plans(self):
        for seed in range(12):
            plan = generate_random_network(seed, 6, 4, 10.0, 0.5, 8)
            g = build_contact_graph(plan, 1, 6, 0.0)
            for r in k_best_routes(g, None):
                arrival = 0.0
                for c in r.contacts:
                    arrival = max(arrival, c.t_start)
                    assert c.t_start <= arrival < c.t_end
                assert r.edt == arrival
                assert r.volume == min(c.capacity for c in r.contacts)
                assert r.expiry == min(c.t_end for c in r.contacts)
                for a, b in zip(r.contacts, r.contacts[1:]):
                    assert a.to == b.frm


class TestRouteCache:
    def test_cache_hit_until_expiry(self, fig2_plan):
        cache = RouteCache(fig2_plan, 20)
        first = cache.routes(1, 3, 0.0)
        assert cache.routes(1, 3, 5.0) is first  # min expiry is 10
        refreshed = cache.routes(1, 3, 10.0)
        assert refreshed is not first
        assert [r.ids for r in refreshed] == [(3,)]

    def test_empty_table_never_recomputed(self):
        plan = ContactPlan.of([], extra_nodes=[1, 2])
        cache = RouteCache(plan, 20)
        first = cache.routes(1, 2, 0.0)
        assert first == ()
        assert cache.routes(1, 2, 100.0) is first
