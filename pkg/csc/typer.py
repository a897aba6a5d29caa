# csc/typer.py
# Subtyping, separation checking and the typing judgment

import logging
from typing import Dict, Optional, Set, Tuple

from csc.capcalc import cv, reader_like, subcapture
from csc.errors import ScopeError, TypeCheckError, UnboundAtom
from csc.syntax import (
    EMPTY, NAT, NO_DEGREE, UNIVERSAL, Add, App, AtomKind, Box, BoxVal, CaptureAtom, CaptureSet,
    DVar, Fun, Lam, Let, LetMode, Nat, NatLit, Rdr, Read, ReaderVal, Ref, Shape, TApp, TermBind,
    TFun, TLam, TVar, Top, Type, TypeBind, TypingContext, Unbox, Var, Write, shape_free_names,
    _fresh_variant, subst_type, type_free_names, var_atom, wf_degree, wf_shape, wf_type,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Subtyping

def promote(ctx: TypingContext, shape: Shape) -> Shape:
    """Replace a type variable by its bound until a non-variable shape appears."""
    seen: Set[str] = set()
    while isinstance(shape, TVar) and shape.name not in seen:
        seen.add(shape.name)
        bound = ctx.find(shape.name)
        if not isinstance(bound, TypeBind):
            break
        shape = bound.bound
    return shape


def _binder_name(ctx: TypingContext, preferred: str, *types: Type) -> str:
    if ctx.find(preferred) is None:
        return preferred
    avoid = {b.name for b in ctx}
    for ty in types:
        terms, tvars = type_free_names(ty)
        avoid |= terms | tvars
    return _fresh_variant(preferred, avoid)


def _open_fun(ctx: TypingContext, f1: Fun, f2: Fun) -> Tuple[str, Type, Type]:
    z = _binder_name(ctx, f1.param, f1.result, f2.result)
    r1 = f1.result if z == f1.param else subst_type(f1.result, {f1.param: z})
    r2 = f2.result if z == f2.param else subst_type(f2.result, {f2.param: z})
    return z, r1, r2


def _open_tfun(ctx: TypingContext, f1: TFun, f2: TFun) -> Tuple[str, Type, Type]:
    z = _binder_name(ctx, f1.tparam, f1.body, f2.body)
    b1 = f1.body if z == f1.tparam else subst_type(f1.body, shapes={f1.tparam: TVar(z)})
    b2 = f2.body if z == f2.tparam else subst_type(f2.body, shapes={f2.tparam: TVar(z)})
    return z, b1, b2


def subtype(ctx: TypingContext, t1: Type, t2: Type) -> bool:
    """Algorithmic subtyping: captures by subcapturing, shapes structurally."""
    try:
        return subcapture(ctx, t1.captures, t2.captures) and subshape(ctx, t1.shape, t2.shape)
    except UnboundAtom:
        return False


def subshape(ctx: TypingContext, s1: Shape, s2: Shape) -> bool:
    if s1 == s2 or isinstance(s2, Top):
        return True
    if isinstance(s1, TVar):
        if isinstance(s2, TVar) and s1.name == s2.name:
            return True
        bound = ctx.find(s1.name)
        return isinstance(bound, TypeBind) and subshape(ctx, bound.bound, s2)
    if isinstance(s1, Fun) and isinstance(s2, Fun):
        if s1.degree != s2.degree:
            return False
        if not subtype(ctx, s2.param_type, s1.param_type):
            return False
        z, r1, r2 = _open_fun(ctx, s1, s2)
        inner = ctx.extend(TermBind(z, s2.degree, s2.param_type), check=False)
        return subtype(inner, r1, r2)
    if isinstance(s1, TFun) and isinstance(s2, TFun):
        if not subshape(ctx, s2.bound, s1.bound):
            return False
        z, b1, b2 = _open_tfun(ctx, s1, s2)
        inner = ctx.extend(TypeBind(z, s2.bound), check=False)
        return subtype(inner, b1, b2)
    if isinstance(s1, Box) and isinstance(s2, Box):
        return subtype(ctx, s1.inner, s2.inner)
    if isinstance(s1, Ref) and isinstance(s2, Ref) or isinstance(s1, Rdr) and isinstance(s2, Rdr):
        return subshape(ctx, s1.inner, s2.inner) and subshape(ctx, s2.inner, s1.inner)
    return isinstance(s1, Nat) and isinstance(s2, Nat)


# ---------------------------------------------------------------------------
# Separation

def _check_bound(ctx: TypingContext, c: CaptureSet) -> None:
    for a in c:
        if not a.is_root and not isinstance(ctx.find(a.name), TermBind):
            raise UnboundAtom(f"capture atom {a.name} is neither bound nor a root")


def separated_sets(ctx: TypingContext, left: CaptureSet, right: CaptureSet) -> bool:
    """Decide ctx ⊢ left ⋈ right by splitting both sides into atom pairs."""
    _check_bound(ctx, left)
    _check_bound(ctx, right)
    memo: Dict[Tuple[CaptureAtom, CaptureAtom], bool] = {}
    return all(_separated_atoms(ctx, a, b, memo) for a in left for b in right)


def _separated_atoms(ctx, a: CaptureAtom, b: CaptureAtom, memo) -> bool:
    key = (a, b)
    if key in memo:
        return memo[key]
    memo[key] = False
    result = (
        (reader_like(ctx, a) and reader_like(ctx, b))
        or _in_degree(ctx, a, b) or _in_degree(ctx, b, a)
        or _via_captures(ctx, a, b, memo, left=True)
        or _via_captures(ctx, b, a, memo, left=False)
    )
    memo[key] = result
    return result


def _in_degree(ctx, a: CaptureAtom, b: CaptureAtom) -> bool:
    if a.kind is not AtomKind.VAR or b.kind is not AtomKind.VAR:
        return False
    return b in ctx.term(a.name).degree


def _via_captures(ctx, x: CaptureAtom, other: CaptureAtom, memo, left: bool) -> bool:
    if x.kind is not AtomKind.VAR:
        return False
    captures = ctx.term(x.name).type.captures
    if left:
        return all(_separated_atoms(ctx, c, other, memo) for c in captures)
    return all(_separated_atoms(ctx, other, c, memo) for c in captures)


def separated_terms(ctx: TypingContext, s, t) -> bool:
    return separated_sets(ctx, cv(s).restrict(ctx.dom), cv(t).restrict(ctx.dom))


# ---------------------------------------------------------------------------
# Avoidance

def avoid(ty: Type, x: str, replacement: CaptureSet) -> Optional[Type]:
    """Widen covariant occurrences of `x` in capture sets to `replacement`.

    Returns None when `x` occurs where widening is not a supertype (contravariant
    positions, separation degrees, mutable-variable contents).
    """
    return _avoid_type(ty, x, replacement, True)


def _avoid_type(ty: Type, x: str, repl: CaptureSet, positive: bool) -> Optional[Type]:
    captures = ty.captures
    if var_atom(x) in captures.atoms:
        if not positive:
            return None
        captures = captures.without(x).union(repl)
    shape = _avoid_shape(ty.shape, x, repl, positive)
    return None if shape is None else Type(shape, captures)


def _avoid_shape(s: Shape, x: str, repl: CaptureSet, positive: bool) -> Optional[Shape]:
    if isinstance(s, (TVar, Top, Nat)):
        return s
    if isinstance(s, Fun):
        if x in s.degree:
            return None
        param, result = s.param, s.result
        if param in repl.var_names():
            fresh = param + "'"
            while fresh in repl.var_names() or fresh in type_free_names(result)[0]:
                fresh += "'"
            result = subst_type(result, {param: fresh})
            param = fresh
        param_type = _avoid_type(s.param_type, x, repl, not positive)
        if param_type is None:
            return None
        if param != x:
            result = _avoid_type(result, x, repl, positive)
            if result is None:
                return None
        return Fun(param, s.degree, param_type, result)
    if isinstance(s, TFun):
        bound = _avoid_shape(s.bound, x, repl, not positive)
        body = _avoid_type(s.body, x, repl, positive)
        return None if bound is None or body is None else TFun(s.tparam, bound, body)
    if isinstance(s, Box):
        inner = _avoid_type(s.inner, x, repl, positive)
        return None if inner is None else Box(inner)
    if isinstance(s, (Ref, Rdr)):
        return None if x in shape_free_names(s.inner)[0] else s
    raise TypeError(f"not a shape: {s!r}")


# ---------------------------------------------------------------------------
# Typing

def _fail(code: str, message: str, t, ctx, hint: str = ""):
    raise TypeCheckError(code, message, getattr(t, "span", None), ctx, hint)


def _term_binding(ctx: TypingContext, name: str, t) -> TermBind:
    found = ctx.find(name)
    if not isinstance(found, TermBind):
        _fail("UnboundName", f"unbound variable {name}", t, ctx)
    return found


def _scoped(fn, t, ctx):
    try:
        fn()
    except ScopeError as e:
        code = "UnboundName" if e.code in ("UnboundName", "NotFound") else "IllFormed"
        _fail(code, e.message, t, ctx)


def typecheck(ctx: TypingContext, t) -> Type:
    """Synthesize the minimal type of `t` under `ctx`, raising TypeCheckError on the first failure."""
    if isinstance(t, Var):
        b = _term_binding(ctx, t.name, t)
        return Type(b.type.shape, CaptureSet.of(t.name))

    if isinstance(t, NatLit):
        return Type(NAT, EMPTY)

    if isinstance(t, Lam):
        _scoped(lambda: wf_degree(ctx, t.degree), t, ctx)
        _scoped(lambda: wf_type(ctx, t.param_type), t, ctx)
        inner = _extend(ctx, TermBind(t.param, t.degree, t.param_type), t)
        result = typecheck(inner, t.body)
        return Type(Fun(t.param, t.degree, t.param_type, result), cv(t))

    if isinstance(t, TLam):
        _scoped(lambda: wf_shape(ctx, t.bound), t, ctx)
        inner = _extend(ctx, TypeBind(t.tparam, t.bound), t)
        body = typecheck(inner, t.body)
        return Type(TFun(t.tparam, t.bound, body), cv(t))

    if isinstance(t, BoxVal):
        b = _term_binding(ctx, t.name, t)
        return Type(Box(Type(b.type.shape, CaptureSet.of(t.name))), EMPTY)

    if isinstance(t, Unbox):
        for a in t.captures:
            if a.is_root or not isinstance(ctx.find(a.name), TermBind):
                _fail("IllFormed", f"unbox capture set {t.captures} must only name bound variables", t, ctx)
        b = _term_binding(ctx, t.name, t)
        shape = promote(ctx, b.type.shape)
        if not isinstance(shape, Box):
            _fail("ExpectedBox", f"{t.name} is unboxed but has shape {_show_shape(shape)}", t, ctx)
        if not subcapture(ctx, shape.inner.captures, t.captures):
            _fail("NotSubcapture", f"boxed captures {shape.inner.captures} are not covered by {t.captures}", t, ctx)
        return Type(shape.inner.shape, t.captures)

    if isinstance(t, App):
        fb = _term_binding(ctx, t.fn, t)
        shape = promote(ctx, fb.type.shape)
        if not isinstance(shape, Fun):
            _fail("ExpectedFun", f"{t.fn} is applied but has shape {_show_shape(shape)}", t, ctx)
        arg = typecheck(ctx, Var(t.arg, span=t.span))
        if not subtype(ctx, arg, shape.param_type):
            _fail("NotSubtype", f"argument {t.arg} : {arg} is not a subtype of {shape.param_type}", t, ctx)
        degree = shape.degree.as_capture_set()
        if not separated_sets(ctx, CaptureSet.of(t.arg), degree):
            _fail("NotSeparated",
                  f"argument {t.arg} is not separated from {degree}: {{{t.arg}}} vs {degree}", t, ctx,
                  hint=f"declare {t.arg} with a separation degree covering {degree}")
        return subst_type(shape.result, {shape.param: t.arg})

    if isinstance(t, TApp):
        _scoped(lambda: wf_shape(ctx, t.shape), t, ctx)
        fb = _term_binding(ctx, t.fn, t)
        shape = promote(ctx, fb.type.shape)
        if not isinstance(shape, TFun):
            _fail("ExpectedTFun", f"{t.fn} is instantiated but has shape {_show_shape(shape)}", t, ctx)
        if not subshape(ctx, t.shape, shape.bound):
            _fail("NotSubtype", f"{_show_shape(t.shape)} is not below the bound {_show_shape(shape.bound)}", t, ctx)
        return subst_type(shape.body, shapes={shape.tparam: t.shape})

    if isinstance(t, Let):
        bound = typecheck(ctx, t.bound)
        inner = _extend(ctx, TermBind(t.name, NO_DEGREE, bound), t)
        body = typecheck(inner, t.body)
        if t.mode is LetMode.PAR and not separated_terms(ctx, t.bound, t.body):
            left = cv(t.bound).restrict(ctx.dom)
            right = cv(t.body).restrict(ctx.dom)
            _fail("NotSeparated", f"parallel branches are not separated: {left} vs {right}", t, ctx,
                  hint="give the mutable variables separation degrees that cover each other")
        return _avoid_or_fail(ctx, body, t.name, bound.captures, t)

    if isinstance(t, DVar):
        _scoped(lambda: wf_degree(ctx, t.degree), t, ctx)
        init = typecheck(ctx, Var(t.init, span=t.span))
        if not subcapture(ctx, init.captures, EMPTY):
            _fail("NotSubcapture", f"initial value {t.init} : {init} of a mutable variable must be pure", t, ctx)
        cell = Type(Ref(init.shape), UNIVERSAL)
        inner = _extend(ctx, TermBind(t.name, t.degree, cell), t)
        body = typecheck(inner, t.body)
        return _avoid_or_fail(ctx, body, t.name, UNIVERSAL, t)

    if isinstance(t, ReaderVal):
        b = _term_binding(ctx, t.name, t)
        shape = promote(ctx, b.type.shape)
        if not isinstance(shape, Ref):
            _fail("ExpectedRef", f"reader of {t.name} needs a mutable variable, found {_show_shape(shape)}", t, ctx)
        return Type(Rdr(shape.inner), CaptureSet.of(t.name))

    if isinstance(t, Read):
        b = _term_binding(ctx, t.name, t)
        shape = promote(ctx, b.type.shape)
        if not isinstance(shape, Rdr):
            _fail("ExpectedRdr", f"read needs a reader, {t.name} has shape {_show_shape(shape)}", t, ctx,
                  hint=f"read through `reader {t.name}`" if isinstance(shape, Ref) else "")
        return Type(shape.inner, EMPTY)

    if isinstance(t, Write):
        b = _term_binding(ctx, t.target, t)
        shape = promote(ctx, b.type.shape)
        if not isinstance(shape, Ref):
            _fail("ExpectedRef", f"{t.target} is written but has shape {_show_shape(shape)}", t, ctx)
        payload = typecheck(ctx, Var(t.source, span=t.span))
        if not subtype(ctx, payload, Type(shape.inner, EMPTY)):
            _fail("NotSubtype", f"{t.source} : {payload} cannot be stored in {t.target}", t, ctx)
        return Type(shape.inner, EMPTY)

    if isinstance(t, Add):
        for name in (t.left, t.right):
            b = _term_binding(ctx, name, t)
            if not isinstance(promote(ctx, b.type.shape), Nat):
                _fail("NotSubtype", f"{name} : {b.type} is not a Nat (Nat is a language extension)", t, ctx)
        return Type(NAT, EMPTY)

    raise TypeError(f"not a term: {t!r}")


def _extend(ctx: TypingContext, binding, t) -> TypingContext:
    try:
        return ctx.extend(binding, check=False)
    except ScopeError as e:
        _fail("IllFormed", e.message, t, ctx)


def _avoid_or_fail(ctx, body: Type, name: str, replacement: CaptureSet, t) -> Type:
    if name not in type_free_names(body)[0]:
        return body
    widened = avoid(body, name, replacement)
    if widened is None or name in type_free_names(widened)[0]:
        _fail("EscapingBinder", f"the type {body} of the body mentions the local {name}", t, ctx,
              hint=f"annotate a wider type that does not mention {name}")
    return widened


def check(ctx: TypingContext, t, expected: Type) -> Type:
    """Checking mode: synthesize, then accept any supertype."""
    actual = typecheck(ctx, t)
    if not subtype(ctx, actual, expected):
        _fail("NotSubtype", f"{actual} is not a subtype of {expected}", t, ctx)
    return actual


def _show_shape(shape: Shape) -> str:
    from csc.surface import pretty_shape
    return pretty_shape(shape)
