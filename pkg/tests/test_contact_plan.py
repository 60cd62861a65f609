"""Contact plan parsing, generation, and discretization."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgrsim.contact_plan import (
    Contact,
    ContactPlan,
    DuplicateId,
    InvalidInterval,
    MalformedLine,
    PlanError,
    discretize,
    generate_random_network,
    parse_contact_plan,
    serialize_contact_plan,
)

from conftest import FIG2_TEXT


class TestParse:
    def test_empty_document(self):
        plan = parse_contact_plan("")
        assert plan.contacts == ()
        assert plan.horizon == 0.0

    def test_fig2_plan(self):
        plan = parse_contact_plan(FIG2_TEXT)
        assert len(plan.contacts) == 3
        assert plan.horizon == 30.0
        assert plan.nodes == {1, 2, 3}
        c1 = plan.contacts[0]
        assert (c1.id, c1.frm, c1.to, c1.t_start, c1.t_end, c1.capacity) == (1, 1, 2, 0, 10, 10)

    def test_inverted_interval(self):
        with pytest.raises(InvalidInterval):
            parse_contact_plan("contact 10 5 1 2 10")

    def test_wrong_arity(self):
        with pytest.raises(MalformedLine) as exc:
            parse_contact_plan("contact 0 10 1 2\n")
        assert exc.value.line_no == 1

    def test_non_numeric(self):
        with pytest.raises(MalformedLine):
            parse_contact_plan("contact 0 ten 1 2 10")

    def test_unknown_keyword(self):
        with pytest.raises(MalformedLine):
            parse_contact_plan("link 0 10 1 2 10")

    def test_comments_blanks_and_owlt_ignored(self):
        plan = parse_contact_plan("# header\n\ncontact 0 10 1 2 10 0.5\n")
        assert len(plan.contacts) == 1

    def test_declared_isolated_node(self):
        plan = parse_contact_plan("node 9\ncontact 0 10 1 2 10\n")
        assert 9 in plan.nodes

    def test_self_loop_rejected(self):
        with pytest.raises(MalformedLine):
            parse_contact_plan("contact 0 10 2 2 10")


class TestPlanInvariants:
    def test_duplicate_id(self):
        with pytest.raises(DuplicateId):
            ContactPlan.of(
                [Contact(1, 1, 2, 0.0, 1.0, 1), Contact(1, 2, 3, 0.0, 1.0, 1)]
            )

    def test_negative_capacity(self):
        with pytest.raises(PlanError):
            Contact(1, 1, 2, 0.0, 1.0, -1)

    def test_horizon_covers_contacts(self):
        with pytest.raises(PlanError):
            ContactPlan(
                contacts=(Contact(1, 1, 2, 0.0, 5.0, 1),),
                nodes=frozenset({1, 2}),
                horizon=4.0,
            )

    def test_round_trip(self, fig2_plan):
        text = serialize_contact_plan(fig2_plan)
        assert parse_contact_plan(text) == fig2_plan

    @given(
        st.lists(
            st.tuples(
                st.integers(1, 6),
                st.integers(1, 6),
                st.floats(0, 50, allow_nan=False),
                st.floats(0.5, 50, allow_nan=False),
                st.integers(0, 20),
            ),
            max_size=12,
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_round_trip_random(self, raw):
        # ids are positional in the file format, so number them in order
        contacts = []
        for frm, to, start, length, cap in raw:
            if frm == to:
                continue
            contacts.append(Contact(len(contacts) + 1, frm, to, start, start + length, cap))
        plan = ContactPlan.of(contacts)
        assert parse_contact_plan(serialize_contact_plan(plan)) == plan


class TestGenerator:
    def test_pure_function_of_arguments(self):
        a = generate_random_network(42, 11, 10, 10.0, 0.2, 10)
        b = generate_random_network(42, 11, 10, 10.0, 0.2, 10)
        assert a == b

    def test_density_zero(self):
        plan = generate_random_network(1, 5, 3, 10.0, 0.0, 10)
        assert plan.contacts == ()
        assert plan.nodes == set(range(1, 6))
        assert plan.horizon == 30.0

    def test_density_one(self):
        plan = generate_random_network(1, 5, 3, 10.0, 1.0, 10)
        assert len(plan.contacts) == 2 * 10 * 3  # 2 * C(5,2) * states

    def test_symmetric_pairs_span_one_state(self):
        plan = generate_random_network(3, 6, 4, 10.0, 0.5, 7)
        assert len(plan.contacts) % 2 == 0
        for fwd, rev in zip(plan.contacts[::2], plan.contacts[1::2]):
            assert (fwd.frm, fwd.to) == (rev.to, rev.frm)
            assert (fwd.t_start, fwd.t_end) == (rev.t_start, rev.t_end)
            assert fwd.t_end - fwd.t_start == 10.0
            assert fwd.capacity == rev.capacity == 7

    def test_mean_contact_count_matches_binomial(self):
        # directed count per seed is 2*Binomial(55*10, 0.2); over n seeds the
        # sample mean must fall within 3 sigma of 220
        n = 1000
        counts = [
            len(generate_random_network(seed, 11, 10, 10.0, 0.2, 10).contacts)
            for seed in range(n)
        ]
        mean = sum(counts) / n
        sigma_seed = math.sqrt(4 * 550 * 0.2 * 0.8)
        bound = 3 * sigma_seed / math.sqrt(n)
        assert abs(mean - 220.0) <= bound, (mean, bound)


class TestDiscretize:
    def test_fig2_single_generation(self, fig2_plan):
        tl = discretize(fig2_plan, [0.0])
        assert tl.timestamps == (0.0, 10.0, 20.0, 30.0)
        assert tl.n_states == 3
        assert [[(a.contact.id, a.capacity) for a in arcs] for arcs in tl.arcs] == [
            [(1, 10)],
            [(2, 10)],
            [(3, 10)],
        ]

    def test_proration(self):
        plan = ContactPlan.of([Contact(1, 1, 2, 0.0, 30.0, 30)])
        tl = discretize(plan, [0.0, 10.0])
        assert tl.timestamps == (0.0, 10.0, 30.0)
        assert [arcs[0].capacity for arcs in tl.arcs] == [10, 20]

    def test_empty_plan(self):
        tl = discretize(ContactPlan.of([]), [0.0])
        assert tl.timestamps == (0.0,)
        assert tl.n_states == 0

    def test_generation_time_outside_horizon(self, fig2_plan):
        with pytest.raises(ValueError):
            discretize(fig2_plan, [31.0])

    @given(
        st.lists(
            st.tuples(st.floats(0, 40), st.floats(1, 40), st.integers(0, 50)),
            min_size=1,
            max_size=8,
        ),
        st.lists(st.floats(0, 40), max_size=4),
    )
    @settings(max_examples=80, deadline=None)
    def test_per_state_capacity_and_membership(self, raw, gens):
        contacts = [
            Contact(i, 1, 2, start, start + length, cap)
            for i, (start, length, cap) in enumerate(raw, start=1)
        ]
        plan = ContactPlan.of(contacts)
        tl = discretize(plan, [g for g in gens if g <= plan.horizon])
        per_contact: dict[int, int] = {}
        for (a, b), arcs in zip(tl.states, tl.arcs):
            ids = set()
            for arc in arcs:
                ids.add(arc.contact.id)
                per_contact[arc.contact.id] = per_contact.get(arc.contact.id, 0) + arc.capacity
            # membership is exactly interval coverage
            expected = {c.id for c in contacts if c.t_start <= a and b <= c.t_end}
            assert ids == expected
        for c in contacts:
            assert per_contact.get(c.id, 0) <= c.capacity
