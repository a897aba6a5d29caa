# test_oracle.py
# The algorithmic subcapture and separation checks agree with saturation of the declarative rules
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csc.capcalc import subcapture
from csc.oracle import extensions, related, saturate, small_contexts, universe
from csc.syntax import (
    CAP, NAT, RDR, CaptureSet, Rdr, Ref, SeparationDegree, TermBind, Top, TVar, Type, TypeBind, TypingContext,
)
from csc.typer import separated_sets

CONTEXTS = list(small_contexts(term_bindings=2))
CHUNK = 150
# one-binding contexts, with and without the type binding; the exhaustive sweep extends each to three
PREFIXES = [ctx for ctx in CONTEXTS if len(ctx.dom) == 1]


def disagreements(ctx: TypingContext):
    sets = universe(ctx)
    sub, sep = saturate(ctx, sets)
    found = []
    for c1 in sets:
        for c2 in sets:
            lower, upper = CaptureSet(c1), CaptureSet(c2)
            if subcapture(ctx, lower, upper) != related(sub, lower, upper):
                found.append(("sub", lower, upper))
            if separated_sets(ctx, lower, upper) != related(sep, lower, upper):
                found.append(("sep", lower, upper))
    return found


def test_enumeration_size():
    assert len(CONTEXTS) > 2000
    assert all(len(ctx.dom) <= 2 for ctx in CONTEXTS)


def test_universe_has_every_subset():
    ctx = TypingContext().extend(TermBind("a", SeparationDegree(), Type(Ref(NAT), CaptureSet.of("cap"))))
    assert len(universe(ctx)) == 8


@pytest.mark.parametrize("start", range(0, len(CONTEXTS), CHUNK))
def test_small_contexts_agree(start):
    for ctx in CONTEXTS[start:start + CHUNK]:
        assert disagreements(ctx) == [], ", ".join(str(b) for b in ctx)


def test_reader_chain():
    ctx = TypingContext()
    ctx = ctx.extend(TermBind("a", SeparationDegree(), Type(Ref(NAT), CaptureSet.of("cap"))))
    ctx = ctx.extend(TermBind("b", SeparationDegree(), Type(Rdr(NAT), CaptureSet.of("a"))))
    sub, sep = saturate(ctx)
    b, rdr, cap = CaptureSet.of("b"), CaptureSet(frozenset({RDR})), CaptureSet(frozenset({CAP}))
    assert related(sub, b, rdr) and related(sub, rdr, cap)
    assert related(sep, b, b)
    assert not related(sep, CaptureSet.of("a"), b)


@st.composite
def three_binding_contexts(draw):
    bound = draw(st.sampled_from([None, Top(), NAT, Rdr(NAT)]))
    ctx = TypingContext() if bound is None else TypingContext((TypeBind("X", bound),))
    shapes = [NAT, Ref(NAT), Rdr(NAT)] + ([] if bound is None else [TVar("X")])
    for name in ("a", "b", "c"):
        earlier = sorted(ctx.dom)
        shape = draw(st.sampled_from(shapes))
        names = draw(st.lists(st.sampled_from(earlier), unique=True)) if earlier else []
        root = draw(st.sampled_from([(), ("cap",), ("rdr",)]))
        degree = draw(st.lists(st.sampled_from(earlier), unique=True)) if earlier else []
        ctx = ctx.extend(TermBind(name, SeparationDegree.of(*degree), Type(shape, CaptureSet.of(*names, *root))))
    return ctx


@settings(max_examples=500, deadline=None)
@given(three_binding_contexts())
def test_three_binding_contexts_agree(ctx):
    assert disagreements(ctx) == []


def test_three_binding_sweep_covers_every_prefix():
    assert len(PREFIXES) == 9 + 3 * 12
    assert all(len(ctx.dom) == 3 for ctx in extensions(PREFIXES[0], 3))
    assert sum(1 for _ in extensions(PREFIXES[0], 3)) == 36 * 144


@pytest.mark.exhaustive
@pytest.mark.parametrize("index", range(len(PREFIXES)))
def test_three_binding_contexts_agree_exhaustively(index):
    for ctx in extensions(PREFIXES[index], 3):
        assert disagreements(ctx) == [], ", ".join(str(b) for b in ctx)
