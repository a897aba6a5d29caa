# csc/oracle.py
# Declarative oracle for subcapturing and separation over finite contexts,
# and an enumerator of small well-formed contexts to run it on

import itertools
import logging
from typing import FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

from csc.syntax import (
    CAP, NAT, RDR, CaptureAtom, CaptureSet, Rdr, Ref, SeparationDegree, Shape,
    TermBind, Top, TVar, Type, TypeBind, TypingContext, var_atom,
)

logger = logging.getLogger(__name__)

AtomSet = FrozenSet[CaptureAtom]
Relation = Set[Tuple[AtomSet, AtomSet]]


def universe(ctx: TypingContext) -> List[AtomSet]:
    """Every capture set over the context's term variables and the two roots."""
    atoms = [var_atom(n) for n in sorted(ctx.dom)] + [CAP, RDR]
    return [frozenset(c) for r in range(len(atoms) + 1) for c in itertools.combinations(atoms, r)]


def _reader_declared(ctx: TypingContext, name: str) -> bool:
    shape = ctx.term(name).type.shape
    seen = set()
    while isinstance(shape, TVar) and shape.name not in seen:
        seen.add(shape.name)
        bound = ctx.find(shape.name)
        if not isinstance(bound, TypeBind):
            return False
        shape = bound.bound
    return isinstance(shape, Rdr)


def saturate_subcapture(ctx: TypingContext, sets: Sequence[AtomSet]) -> Relation:
    """Least relation closed under the declarative subcapturing rules.

    Rules: inclusion, set decomposition, variable widening to its declared
    captures, reader variable below rdr, rdr below cap, transitivity.
    """
    rel: Relation = set()
    for c1 in sets:
        for c2 in sets:
            if c1 <= c2:
                rel.add((c1, c2))
    rdr, cap = frozenset({RDR}), frozenset({CAP})
    rel.add((rdr, cap))
    for name in ctx.dom:
        x = frozenset({var_atom(name)})
        if _reader_declared(ctx, name):
            rel.add((x, rdr))

    changed = True
    while changed:
        before = len(rel)
        for name in ctx.dom:
            x = frozenset({var_atom(name)})
            declared = ctx.term(name).type.captures.atoms
            for c2 in sets:
                if (declared, c2) in rel:
                    rel.add((x, c2))
        for c1 in sets:
            if len(c1) == 1:
                continue
            for c2 in sets:
                if all((frozenset({a}), c2) in rel for a in c1):
                    rel.add((c1, c2))
        # transitivity, one Warshall pass per round
        for mid in sets:
            lowers = [c1 for c1 in sets if (c1, mid) in rel]
            uppers = [c3 for c3 in sets if (mid, c3) in rel]
            for c1 in lowers:
                for c3 in uppers:
                    rel.add((c1, c3))
        changed = len(rel) != before
    return rel


def saturate_separation(ctx: TypingContext, sets: Sequence[AtomSet], sub: Relation) -> Relation:
    """Least relation closed under the declarative separation rules.

    Rules: symmetry, set decomposition, degree membership, variable
    widening to its declared captures, two reader-bounded sides.
    """
    rdr = frozenset({RDR})
    rel: Relation = set()
    for c1 in sets:
        for c2 in sets:
            if (c1, rdr) in sub and (c2, rdr) in sub:
                rel.add((c1, c2))
    for name in ctx.dom:
        for other in ctx.term(name).degree.names():
            x, y = frozenset({var_atom(name)}), frozenset({var_atom(other)})
            rel.add((x, y))

    changed = True
    while changed:
        before = len(rel)
        for c1, c2 in list(rel):
            rel.add((c2, c1))
        for name in ctx.dom:
            x = frozenset({var_atom(name)})
            declared = ctx.term(name).type.captures.atoms
            for c2 in sets:
                if (declared, c2) in rel:
                    rel.add((x, c2))
        for c1 in sets:
            for c2 in sets:
                if len(c1) == 1 and len(c2) == 1:
                    continue
                if all((frozenset({a}), frozenset({b})) in rel for a in c1 for b in c2):
                    rel.add((c1, c2))
        changed = len(rel) != before
    return rel


def saturate(ctx: TypingContext, sets: Optional[Sequence[AtomSet]] = None) -> Tuple[Relation, Relation]:
    sets = universe(ctx) if sets is None else sets
    sub = saturate_subcapture(ctx, sets)
    return sub, saturate_separation(ctx, sets, sub)


# ---------------------------------------------------------------------------
# Small contexts

_NAMES = ("a", "b", "c")
_TYPE_NAME = "X"
_BOUNDS: Tuple[Shape, ...] = (Top(), NAT, Rdr(NAT))


def _shapes(has_tvar: bool) -> List[Shape]:
    shapes: List[Shape] = [NAT, Ref(NAT), Rdr(NAT)]
    if has_tvar:
        shapes.append(TVar(_TYPE_NAME))
    return shapes


def _capture_choices(earlier: Sequence[str]) -> Iterator[CaptureSet]:
    # {cap, rdr} is equivalent to {cap} and is left out
    roots = (frozenset(), frozenset({CAP}), frozenset({RDR}))
    for r in range(len(earlier) + 1):
        for names in itertools.combinations(earlier, r):
            for extra in roots:
                yield CaptureSet(frozenset(var_atom(n) for n in names) | extra)


def _degree_choices(earlier: Sequence[str]) -> Iterator[SeparationDegree]:
    for r in range(len(earlier) + 1):
        for names in itertools.combinations(earlier, r):
            yield SeparationDegree.of(*names)


def small_contexts(term_bindings: int = 2, with_type_binding: bool = True) -> Iterator[TypingContext]:
    """Every well-formed context with up to `term_bindings` term bindings over a fixed name universe.

    An optional type binding X <: bound is placed first so later shapes may use it.
    """
    type_prefixes: List[Tuple] = [()]
    if with_type_binding:
        type_prefixes += [(TypeBind(_TYPE_NAME, bound),) for bound in _BOUNDS]
    for prefix in type_prefixes:
        base = TypingContext(prefix)
        for n in range(term_bindings + 1):
            yield from extensions(base, n)


def extensions(ctx: TypingContext, term_bindings: int) -> Iterator[TypingContext]:
    """Every well-formed extension of `ctx` to exactly `term_bindings` term bindings."""
    return _extend_all(ctx, list(_NAMES[len(ctx.dom):term_bindings]), bool(ctx.type_names))


def _extend_all(ctx: TypingContext, remaining: List[str], has_tvar: bool) -> Iterator[TypingContext]:
    if not remaining:
        yield ctx
        return
    name, rest = remaining[0], remaining[1:]
    earlier = sorted(ctx.dom)
    for shape in _shapes(has_tvar):
        for captures in _capture_choices(earlier):
            for degree in _degree_choices(earlier):
                yield from _extend_all(ctx.extend(TermBind(name, degree, Type(shape, captures))), rest, has_tvar)


def related(rel: Relation, c1: CaptureSet, c2: CaptureSet) -> bool:
    return (c1.atoms, c2.atoms) in rel
