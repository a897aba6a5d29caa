# test_capcalc.py
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.strategies import DrawFn, composite

from csc.capcalc import cv, is_reader, reader_like, subcapture
from csc.errors import UnboundAtom
from csc.oracle import small_contexts, universe
from csc.surface import parse
from csc.syntax import (
    CAP, EMPTY, NAT, NO_DEGREE, RDR, CaptureSet, Rdr, Ref, SeparationDegree, TermBind, TVar, Type,
    TypeBind, TypingContext,
)
from csc.typer import separated_sets

CONTEXTS = list(small_contexts(term_bindings=2))


@composite
def ctx_with_sets(draw: DrawFn, count: int = 3):
    ctx = draw(st.sampled_from(CONTEXTS))
    sets = universe(ctx)
    return ctx, [CaptureSet(draw(st.sampled_from(sets))) for _ in range(count)]


def reader_ctx():
    ctx = TypingContext()
    ctx = ctx.extend(TermBind("c", NO_DEGREE, Type(Ref(NAT), CaptureSet.of("cap"))))
    ctx = ctx.extend(TermBind("r", NO_DEGREE, Type(Rdr(NAT), CaptureSet.of("c"))))
    ctx = ctx.extend(TypeBind("X", Rdr(NAT)))
    return ctx.extend(TermBind("q", NO_DEGREE, Type(TVar("X"), CaptureSet.of("c"))))


class TestCapturedVariables:
    def test_lambda_drops_its_parameter(self):
        assert cv(parse("fn(x: Nat) => x + y")) == CaptureSet.of("y")

    def test_unused_value_binding_is_dropped(self):
        assert cv(parse("let a = reader c in b")) == CaptureSet.of("b")

    def test_used_value_binding_contributes(self):
        assert cv(parse("let a = reader c in a")) == CaptureSet.of("c")

    def test_non_value_binding_always_contributes(self):
        assert cv(parse("let a = f x in b")) == CaptureSet.of("f", "x", "b")

    def test_box_captures_nothing(self):
        assert cv(parse("box x")) == EMPTY

    def test_unbox_adds_its_capture_set(self):
        assert cv(parse("unbox {a, b} x")) == CaptureSet.of("a", "b", "x")


class TestReaders:
    def test_declared_reader(self):
        ctx = reader_ctx()
        assert is_reader(ctx, "r")
        assert not is_reader(ctx, "c")

    def test_reader_through_type_variable_bound(self):
        assert is_reader(reader_ctx(), "q")

    def test_reader_below_rdr(self):
        ctx = reader_ctx()
        assert subcapture(ctx, CaptureSet.of("r"), CaptureSet.of("rdr"))
        assert reader_like(ctx, RDR)
        assert not reader_like(ctx, CAP)

    def test_writer_not_below_rdr(self):
        assert not subcapture(reader_ctx(), CaptureSet.of("c"), CaptureSet.of("rdr"))

    def test_rdr_below_cap_only(self):
        ctx = reader_ctx()
        assert subcapture(ctx, CaptureSet.of("rdr"), CaptureSet.of("cap"))
        assert not subcapture(ctx, CaptureSet.of("cap"), CaptureSet.of("rdr"))

    def test_unbound_atom(self):
        with pytest.raises(UnboundAtom):
            subcapture(TypingContext(), CaptureSet.of("ghost"), CaptureSet.of("cap"))


class TestSubcaptureLaws:
    @given(ctx_with_sets(count=1))
    @settings(max_examples=1000, deadline=None)
    def test_reflexive(self, case):
        ctx, (c,) = case
        assert subcapture(ctx, c, c)

    @given(ctx_with_sets(count=2))
    @settings(max_examples=1000, deadline=None)
    def test_inclusion(self, case):
        ctx, (c1, c2) = case
        union = c1.union(c2)
        assert subcapture(ctx, c1, union)
        assert subcapture(ctx, EMPTY, c1)

    @given(ctx_with_sets(count=3))
    @settings(max_examples=1000, deadline=None)
    def test_transitive(self, case):
        ctx, (c1, c2, c3) = case
        if subcapture(ctx, c1, c2) and subcapture(ctx, c2, c3):
            assert subcapture(ctx, c1, c3)

    @given(ctx_with_sets(count=3))
    @settings(max_examples=1000, deadline=None)
    def test_join(self, case):
        ctx, (c1, c2, c) = case
        both = subcapture(ctx, c1, c) and subcapture(ctx, c2, c)
        assert both == subcapture(ctx, c1.union(c2), c)


class TestSeparationLaws:
    @given(ctx_with_sets(count=2))
    @settings(max_examples=1000, deadline=None)
    def test_symmetric(self, case):
        ctx, (c1, c2) = case
        assert separated_sets(ctx, c1, c2) == separated_sets(ctx, c2, c1)

    @given(ctx_with_sets(count=3))
    @settings(max_examples=1000, deadline=None)
    def test_subcapture_preserves_separation(self, case):
        ctx, (c1, c2, c3) = case
        if separated_sets(ctx, c1, c2) and subcapture(ctx, c3, c1):
            assert separated_sets(ctx, c3, c2)

    @given(ctx_with_sets(count=3))
    @settings(max_examples=1000, deadline=None)
    def test_smaller_sets_stay_separated(self, case):
        ctx, (c1, c2, c3) = case
        c0 = CaptureSet(c1.atoms & c3.atoms)
        if separated_sets(ctx, c1, c2):
            assert separated_sets(ctx, c0, c2)

    @given(ctx_with_sets(count=2))
    @settings(max_examples=1000, deadline=None)
    def test_only_pure_sets_are_separated_from_cap(self, case):
        ctx, (c1, c2) = case
        c1 = c1.union(CaptureSet.from_atoms([CAP]))
        if separated_sets(ctx, c1, c2):
            assert subcapture(ctx, c2, EMPTY)

    @given(ctx_with_sets(count=1))
    @settings(max_examples=1000, deadline=None)
    def test_empty_is_separated_from_everything(self, case):
        ctx, (c,) = case
        assert separated_sets(ctx, EMPTY, c)

    def test_readers_are_separated(self):
        ctx = reader_ctx()
        assert separated_sets(ctx, CaptureSet.of("r"), CaptureSet.of("q"))
        assert not separated_sets(ctx, CaptureSet.of("r"), CaptureSet.of("c"))

    def test_degree_separates_either_way(self):
        ctx = TypingContext().extend(TermBind("a", NO_DEGREE, Type(Ref(NAT), CaptureSet.of("cap"))))
        ctx = ctx.extend(TermBind("b", SeparationDegree.of("a"), Type(Ref(NAT), CaptureSet.of("cap"))))
        assert separated_sets(ctx, CaptureSet.of("a"), CaptureSet.of("b"))
        assert separated_sets(ctx, CaptureSet.of("b"), CaptureSet.of("a"))
        assert not separated_sets(ctx, CaptureSet.of("a"), CaptureSet.of("a"))
