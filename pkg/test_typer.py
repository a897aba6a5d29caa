# test_typer.py
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csc.errors import TypeCheckError
from csc.oracle import small_contexts, universe
from csc.surface import parse
from csc.syntax import (
    EMPTY, NAT, NO_DEGREE, TOP, UNIVERSAL, CaptureSet, Fun, Rdr, Ref, SeparationDegree, TermBind,
    TVar, Type, TypeBind, TypingContext, Var,
)
from csc.typer import avoid, check, separated_terms, subtype, typecheck


def type_of(source: str, ctx: TypingContext = None) -> Type:
    return typecheck(ctx or TypingContext(), parse(source))


def rejects(source: str) -> TypeCheckError:
    with pytest.raises(TypeCheckError) as err:
        type_of(source)
    return err.value


def cells(*specs) -> TypingContext:
    """Mutable cells by name, each separated from the names listed with it."""
    ctx = TypingContext()
    for name, *degree in specs:
        ctx = ctx.extend(TermBind(name, SeparationDegree.of(*degree), Type(Ref(NAT), UNIVERSAL)))
    return ctx


class TestSynthesis:
    def test_variable_captures_itself(self):
        ctx = cells(("c",))
        assert typecheck(ctx, Var("c")) == Type(Ref(NAT), CaptureSet.of("c"))

    def test_identity(self):
        assert type_of("fn(x: Nat) => x") == Type(Fun("x", NO_DEGREE, Type(NAT), Type(NAT, CaptureSet.of("x"))))

    def test_unbound_variable(self):
        assert rejects("f x").code == "UnboundName"

    def test_applying_a_number(self):
        assert rejects("let n = 1 in n n").code == "ExpectedFun"

    def test_reading_a_cell_directly_suggests_a_reader(self):
        err = rejects("var c := 0 in read c")
        assert err.code == "ExpectedRdr"
        assert "reader c" in err.hint

    def test_reader_of_a_number(self):
        assert rejects("let n = 1 in reader n").code == "ExpectedRef"

    def test_adding_cells(self):
        assert rejects("var c := 0 in c + c").code == "NotSubtype"

    def test_writing_a_reader(self):
        assert rejects("var c := 0 in let r = reader c in c := r").code == "NotSubtype"

    def test_cell_contents_must_be_pure(self):
        assert rejects("var c := 0 in let r = reader c in var d := r in 0").code == "NotSubcapture"

    def test_errors_carry_context_and_span(self):
        err = rejects("let n = 1 in n n")
        assert "n" in err.ctx.dom
        assert err.span is not None


class TestBoxes:
    def test_box_then_unbox(self):
        assert type_of("var c := 0 in let b = box c in let u = unbox {c} b in 0") == Type(NAT)

    def test_unbox_needs_a_covering_set(self):
        assert rejects("var c := 0 in var d := 0 in let b = box c in unbox {d} b").code == "NotSubcapture"

    def test_unbox_of_a_number(self):
        assert rejects("let n = 1 in unbox {n} n").code == "ExpectedBox"


class TestPolymorphism:
    def test_instantiation(self):
        ty = type_of("let f = tfn[X <: Nat] => fn(y: X) => y in f [Nat]")
        assert ty == Type(Fun("y", NO_DEGREE, Type(NAT), Type(NAT, CaptureSet.of("y"))))

    def test_instantiation_checks_the_bound(self):
        assert rejects("let f = tfn[X <: Nat] => fn(y: X) => y in f [Top]").code == "NotSubtype"

    def test_instantiating_a_function(self):
        assert rejects("let f = fn(y: Nat) => y in f [Nat]").code == "ExpectedTFun"


class TestAvoidance:
    def test_locals_widen_to_their_captures(self):
        assert type_of("var c := 0 in let r = reader c in r") == Type(Rdr(NAT), UNIVERSAL)

    def test_degree_mentioning_a_local_escapes(self):
        err = rejects("var c := 0 in fn(y sep{c}: Nat) => y")
        assert err.code == "EscapingBinder"
        assert err.hint

    def test_contravariant_occurrence_is_not_widened(self):
        ty = Type(Fun("y", NO_DEGREE, Type(NAT, CaptureSet.of("x")), Type(NAT)))
        assert avoid(ty, "x", UNIVERSAL) is None

    def test_covariant_occurrence_is_widened(self):
        ty = Type(Fun("y", NO_DEGREE, Type(NAT), Type(NAT, CaptureSet.of("x", "y"))))
        widened = avoid(ty, "x", CaptureSet.of("c"))
        assert widened.shape.result.captures == CaptureSet.of("c", "y")


class TestSeparation:
    def test_parallel_writes_to_separated_cells(self):
        assert type_of("var a := 0 in var b sep{a} := 0 in (a := 1) || (b := 1)") == Type(NAT)

    def test_parallel_writes_without_degree(self):
        err = rejects("var a := 0 in var b := 0 in (a := 1) || (b := 1)")
        assert err.code == "NotSeparated"
        assert err.hint

    def test_parallel_reads_share_a_cell(self):
        assert type_of("var a := 0 in let r = reader a in (read r) || (read r)") == Type(NAT)

    SEPARATED_ARGS = (
        "let f = fn(a: Ref[Nat]^) => fn(b sep{a}: Ref[Nat]^) => a in "
        "var x := 0 in var y sep{x} := 0 in let g = f x in g {arg}"
    )

    def test_argument_separated_from_declared_degree(self):
        assert type_of(self.SEPARATED_ARGS.replace("{arg}", "y")) == Type(Ref(NAT), UNIVERSAL)

    def test_aliasing_argument_rejected(self):
        assert rejects(self.SEPARATED_ARGS.replace("{arg}", "x")).code == "NotSeparated"

    def test_separated_terms(self):
        ctx = cells(("a",), ("b", "a"))
        assert separated_terms(ctx, Var("a"), Var("b"))
        assert not separated_terms(ctx, Var("a"), Var("a"))


class TestSubtyping:
    def test_captures_widen_to_declared_sets(self):
        ctx = cells(("x",))
        assert subtype(ctx, Type(NAT, CaptureSet.of("x")), Type(NAT, UNIVERSAL))
        assert not subtype(ctx, Type(NAT, CaptureSet.of("x")), Type(NAT, EMPTY))

    def test_function_binders_are_aligned(self):
        f = Fun("x", NO_DEGREE, Type(NAT), Type(NAT, CaptureSet.of("x")))
        g = Fun("y", NO_DEGREE, Type(NAT), Type(NAT, CaptureSet.of("y")))
        assert subtype(TypingContext(), Type(f), Type(g))

    def test_binder_clashing_with_context_is_renamed(self):
        ctx = cells(("x",))
        f = Fun("x", NO_DEGREE, Type(NAT), Type(NAT, CaptureSet.of("x")))
        g = Fun("y", NO_DEGREE, Type(NAT), Type(NAT))
        assert subtype(ctx, Type(f), Type(g))

    def test_degrees_must_agree(self):
        ctx = cells(("a",))
        f = Fun("x", SeparationDegree.of("a"), Type(NAT), Type(NAT))
        g = Fun("x", NO_DEGREE, Type(NAT), Type(NAT))
        assert not subtype(ctx, Type(f), Type(g))
        assert not subtype(ctx, Type(g), Type(f))

    def test_type_variables_promote_to_their_bound(self):
        ctx = TypingContext().extend(TypeBind("X", NAT))
        assert subtype(ctx, Type(TVar("X")), Type(NAT))
        assert not subtype(ctx, Type(NAT), Type(TVar("X")))

    def test_cells_are_invariant(self):
        ctx = TypingContext().extend(TypeBind("X", NAT))
        assert not subtype(ctx, Type(Ref(TVar("X"))), Type(Ref(NAT)))

    def test_everything_is_below_top(self):
        assert subtype(TypingContext(), Type(Ref(NAT)), Type(TOP))

    def test_check_mode_accepts_supertypes(self):
        t = parse("fn(x: Nat) => x")
        wider = Type(Fun("x", NO_DEGREE, Type(NAT), Type(NAT)), UNIVERSAL)
        check(TypingContext(), t, wider)
        with pytest.raises(TypeCheckError) as err:
            check(TypingContext(), t, Type(NAT))
        assert err.value.code == "NotSubtype"


BOUND_CONTEXTS = [ctx for ctx in small_contexts(term_bindings=2) if ctx.dom]


@st.composite
def terms_and_supertype_candidates(draw):
    """A term over a small context and a well-formed type it may or may not inhabit."""
    ctx = draw(st.sampled_from(BOUND_CONTEXTS))
    x = draw(st.sampled_from(sorted(ctx.dom)))
    t = draw(st.sampled_from([parse(x), parse(f"fn(p: Nat) => {x}"), parse(f"let q = {x} in q")]))
    shape = draw(st.sampled_from([typecheck(ctx, t).shape, TOP, NAT]))
    return ctx, t, Type(shape, CaptureSet(draw(st.sampled_from(universe(ctx)))))


class TestSubsumption:
    @settings(max_examples=1000, deadline=None)
    @given(terms_and_supertype_candidates())
    def test_check_mode_accepts_exactly_the_supertypes(self, case):
        ctx, t, target = case
        if subtype(ctx, typecheck(ctx, t), target):
            check(ctx, t, target)
        else:
            with pytest.raises(TypeCheckError):
                check(ctx, t, target)
