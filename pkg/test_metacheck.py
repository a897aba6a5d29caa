# test_metacheck.py
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import initial_config
from csc.errors import PreservationViolation
from csc.metacheck import (
    STUCK, check_step, default_schedules, explore, preservation_replay, state_key, store_equiv, store_key,
)
from csc.runtime import Configuration, LeftFirst, RightFirst, SetVar, Store, Val, VarInit, run
from csc.storetyping import typecheck_configuration
from csc.syntax import NatLit

BOXED_SOURCE = "var c := 0 in let b = box c in let u = unbox {c} b in 0"

VALUES = st.integers(min_value=0, max_value=1).map(NatLit)


@st.composite
def store_parts(draw):
    cells = draw(st.lists(st.sampled_from(["c", "d"]), unique=True, max_size=2))
    vals = draw(st.lists(st.sampled_from(["u", "v"]), unique=True, max_size=2))
    decls = [VarInit(x, draw(VALUES)) for x in cells] + [Val(v, draw(VALUES)) for v in vals]
    writes = [SetVar(x, draw(VALUES)) for x in draw(st.lists(st.sampled_from(cells), max_size=3))] if cells else []
    return decls, writes


@st.composite
def arrange(draw, parts):
    """Some valid ordering of the given declarations and writes."""
    decls, writes = parts
    order = list(draw(st.permutations(decls)))
    for w in draw(st.permutations(writes)):
        after = next(i for i, b in enumerate(order) if isinstance(b, VarInit) and b.name == w.name)
        order.insert(draw(st.integers(min_value=after + 1, max_value=len(order))), w)
    return Store(order)


@st.composite
def store_pairs(draw):
    parts = draw(store_parts())
    other = parts if draw(st.booleans()) else draw(store_parts())
    return draw(arrange(parts)), draw(arrange(other))


@st.composite
def store_triples(draw):
    """Mostly arrangements of one set of bindings, so equivalent chains are common."""
    parts = draw(store_parts())
    return tuple(draw(arrange(parts if draw(st.integers(0, 3)) else draw(store_parts()))) for _ in range(3))


class TestStoreEquivalence:
    @settings(max_examples=1000, deadline=None)
    @given(store_pairs())
    def test_key_decides_equivalence(self, pair):
        s1, s2 = pair
        assert (store_key(s1) == store_key(s2)) == store_equiv(s1, s2)

    @settings(max_examples=1000, deadline=None)
    @given(store_pairs())
    def test_equivalence_is_symmetric(self, pair):
        s1, s2 = pair
        assert store_equiv(s1, s2) == store_equiv(s2, s1)

    @settings(max_examples=1000, deadline=None)
    @given(store_parts().flatmap(arrange))
    def test_equivalence_is_reflexive(self, store):
        assert store_equiv(store, store)
        assert store_equiv(store, Store(list(store)))

    @settings(max_examples=1000, deadline=None)
    @given(store_triples())
    def test_equivalence_is_transitive(self, triple):
        s1, s2, s3 = triple
        if store_equiv(s1, s2) and store_equiv(s2, s3):
            assert store_equiv(s1, s3)

    @settings(max_examples=1000, deadline=None)
    @given(store_parts().flatmap(arrange))
    def test_lookup_var_matches_a_scan(self, store):
        for x in store.var_names():
            latest = [b.value for b in store if b.name == x and isinstance(b, (VarInit, SetVar))][-1]
            assert store.lookup_var(x) == latest

    def test_write_order_matters_for_the_current_value(self):
        s1 = Store([VarInit("c", NatLit(0)), SetVar("c", NatLit(1)), SetVar("c", NatLit(2))])
        s2 = Store([VarInit("c", NatLit(0)), SetVar("c", NatLit(2)), SetVar("c", NatLit(1))])
        assert not store_equiv(s1, s2)
        assert store_key(s1) != store_key(s2)

    def test_state_key_ignores_declaration_order(self):
        s1 = Store([VarInit("c", NatLit(0)), Val("u", NatLit(1))])
        s2 = Store([Val("u", NatLit(1)), VarInit("c", NatLit(0))])
        term = NatLit(3)
        assert state_key(Configuration(s1, term)) == state_key(Configuration(s2, term))


class TestExplore:
    def test_independent_reads_are_confluent(self, sum_config):
        report = explore(sum_config, max_workers=1)
        assert report.verdict == "Confluent"
        assert report.terminal_answers == ["3"]
        assert report.terminal_store_classes == 1
        assert not report.truncated

    def test_racing_writes_diverge(self, raced_config):
        report = explore(raced_config, max_workers=2)
        assert report.verdict == "Divergent"
        assert set(report.terminal_answers) == {"1", "2"}
        assert set(report.divergent_answers) == {"1", "2"}
        assert len(report.witnesses) == 2
        assert all(w[0][0] == "start" for w in report.witnesses)

    def test_worker_count_does_not_change_the_report(self, raced_config):
        one = explore(raced_config, max_workers=1).to_dict()
        four = explore(raced_config, max_workers=4).to_dict()
        for key in ("terminalAnswers", "statesVisited", "verdict", "witnesses"):
            assert one[key] == four[key]

    def test_budget_makes_the_verdict_inconclusive(self, sum_config):
        report = explore(sum_config, max_states=2, max_workers=1)
        assert report.truncated
        assert report.verdict == "Inconclusive"

    def test_only_stuck_outcomes(self):
        report = explore(initial_config("let n = 1 in n n"), max_workers=1)
        assert report.terminal_answers == [STUCK]
        assert report.stuck_states == 1
        assert report.verdict == "Inconclusive"

    def test_sequential_program_visits_one_path(self):
        cfg = initial_config("var c := 0 in let a = 1 in let u = (c := a) in let r = reader c in read r")
        path = run(cfg, LeftFirst()).trace
        report = explore(cfg, max_workers=1)
        assert report.verdict == "Confluent"
        assert report.states_visited == len(path) + 1
        assert report.terminal_answers == ["1"]

    def test_explored_answer_matches_a_run(self, sum_config):
        assert explore(sum_config, max_workers=1).terminal_answers == ["3"]
        assert run(sum_config, LeftFirst()).answer == NatLit(3)


class TestPreservationReplay:
    def test_well_typed_program_replays_cleanly(self, sum_config):
        report = preservation_replay(sum_config, default_schedules())
        assert report.ok
        assert report.schedules == ["left-first", "right-first", "random:1", "random:2", "random:3"]
        assert report.steps_checked == 5 * 7
        assert len(report.runs) == 5

    def test_corrupted_stepper_is_caught(self, sum_config):
        report = preservation_replay(sum_config, default_schedules(), mutation="swap-apply-arg")
        assert not report.ok
        assert all(v.rule == "apply" for v in report.violations)
        assert {v.schedule for v in report.violations} == set(report.schedules)

    def test_violations_name_their_schedule(self, sum_config):
        report = preservation_replay(sum_config, [LeftFirst()], mutation="swap-apply-arg")
        assert report.violations[0].schedule == "left-first"
        assert "under left-first:" in report.violations[0].message

    def test_boxed_program_replays_cleanly(self):
        report = preservation_replay(initial_config(BOXED_SOURCE), default_schedules())
        assert report.ok, [v.message for v in report.violations]

    def test_hole_typing_catches_a_widened_contractum(self):
        cfg = initial_config(BOXED_SOURCE)
        _, expected = typecheck_configuration(cfg.store, cfg.term)
        result = run(cfg, LeftFirst(), mutation="open-keeps-box")
        index = next(i for i, s in enumerate(result.trace) if s.rule == "open")
        entry = result.trace[index]
        before = result.trace[index - 1].config if index else result.initial
        # the residual program still types as a whole
        typecheck_configuration(entry.config.store, entry.config.term)
        with pytest.raises(PreservationViolation, match="redex type"):
            check_step(before, entry, expected, "left-first")

    def test_open_mutation_is_caught_under_every_schedule(self):
        report = preservation_replay(initial_config(BOXED_SOURCE), [LeftFirst(), RightFirst()],
                                     mutation="open-keeps-box")
        assert [v.rule for v in report.violations] == ["open", "open"]

    def test_strict_mode_raises(self, sum_config):
        with pytest.raises(PreservationViolation):
            preservation_replay(sum_config, [LeftFirst()], mutation="swap-apply-arg", strict=True)
