# csc/capcalc.py
# Capture-set algebra: captured variables of a term, subcapturing, reader checks

import logging
from typing import FrozenSet, Optional, Set

from csc.errors import ScopeError, UnboundAtom
from csc.syntax import (
    CAP, EMPTY, RDR, Add, App, AtomKind, BoxVal, CaptureAtom, CaptureSet, DVar, Lam, Let, NatLit,
    Rdr, Read, ReaderVal, TApp, TermBind, TLam, TVar, TypeBind, TypingContext, Unbox, Var, Write,
    is_value, var_atom,
)

logger = logging.getLogger(__name__)


def cv(t) -> CaptureSet:
    """Captured variables of a term.

    Only a let whose bound term is a value and whose binder is unused in the body
    drops the bound term's contribution; `box x` captures nothing.
    """
    if isinstance(t, Var):
        return CaptureSet.of(t.name)
    if isinstance(t, Lam):
        return cv(t.body).without(t.param)
    if isinstance(t, TLam):
        return cv(t.body)
    if isinstance(t, Let):
        body = cv(t.body)
        if is_value(t.bound) and var_atom(t.name) not in body.atoms:
            return body
        return cv(t.bound).union(body.without(t.name))
    if isinstance(t, App):
        return CaptureSet.of(t.fn, t.arg)
    if isinstance(t, TApp):
        return CaptureSet.of(t.fn)
    if isinstance(t, BoxVal):
        return EMPTY
    if isinstance(t, Unbox):
        return t.captures.union(CaptureSet.of(t.name))
    if isinstance(t, DVar):
        return CaptureSet.of(t.init).union(cv(t.body).without(t.name))
    if isinstance(t, Write):
        return CaptureSet.of(t.target, t.source)
    if isinstance(t, (ReaderVal, Read)):
        return CaptureSet.of(t.name)
    if isinstance(t, NatLit):
        return EMPTY
    if isinstance(t, Add):
        return CaptureSet.of(t.left, t.right)
    raise TypeError(f"not a term: {t!r}")


def _binding(ctx: TypingContext, a: CaptureAtom) -> TermBind:
    found = ctx.find(a.name)
    if not isinstance(found, TermBind):
        raise UnboundAtom(f"capture atom {a.name} is neither bound nor a root")
    return found


def is_reader(ctx: TypingContext, x: str) -> bool:
    """True iff x's declared shape is Rdr[S], directly or through type-variable bounds.

    Capture sets play no part in the answer.
    """
    found = ctx.find(x)
    if not isinstance(found, TermBind):
        raise UnboundAtom(f"{x} is not a bound term variable")
    shape = found.type.shape
    seen: Set[str] = set()
    while isinstance(shape, TVar):
        if shape.name in seen:
            return False
        seen.add(shape.name)
        bound = ctx.find(shape.name)
        if not isinstance(bound, TypeBind):
            return False
        shape = bound.bound
    return isinstance(shape, Rdr)


def subcapture(ctx: TypingContext, lower: CaptureSet, upper: CaptureSet) -> bool:
    """Decide ctx ⊢ lower <: upper atom by atom."""
    for a in lower:
        if not a.is_root:
            _binding(ctx, a)
    return all(_atom_sub(ctx, a, upper, frozenset()) for a in lower)


def atom_sub(ctx: TypingContext, a: CaptureAtom, upper: CaptureSet) -> bool:
    return _atom_sub(ctx, a, upper, frozenset())


def _atom_sub(ctx: TypingContext, a: CaptureAtom, upper: CaptureSet, visiting: FrozenSet[str]) -> bool:
    if a in upper.atoms:
        return True
    if a.kind is AtomKind.RDR:
        return CAP in upper.atoms
    if a.kind is AtomKind.CAP:
        return False
    if a.name in visiting:
        raise ScopeError(f"capture chain through {a.name} is cyclic", code="IllFormed")
    binding = _binding(ctx, a)
    inner = visiting | {a.name}
    if all(_atom_sub(ctx, b, upper, inner) for b in binding.type.captures):
        return True
    return is_reader(ctx, a.name) and _atom_sub(ctx, RDR, upper, inner)


def reader_like(ctx: TypingContext, a: CaptureAtom) -> bool:
    """{a} <: {rdr}"""
    return _atom_sub(ctx, a, CaptureSet.from_atoms([RDR]), frozenset())


def declared_captures(ctx: TypingContext, name: str) -> Optional[CaptureSet]:
    found = ctx.find(name)
    return found.type.captures if isinstance(found, TermBind) else None
