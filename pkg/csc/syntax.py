# csc/syntax.py
# Core abstract syntax: capture atoms and sets, shape types, A-normal terms,
# typing contexts, well-formedness and alpha-normalization

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Set, Tuple, Union

from csc.errors import DegreeContainsRoot, ScopeError, Span

logger = logging.getLogger(__name__)

ROOT_NAMES = ("cap", "rdr")


class AtomKind(Enum):
    VAR = "var"
    CAP = "cap"
    RDR = "rdr"


_KIND_ORDER = {AtomKind.VAR: 0, AtomKind.CAP: 1, AtomKind.RDR: 2}


@dataclass(frozen=True)
class CaptureAtom:
    kind: AtomKind
    name: str = ""

    @property
    def is_root(self) -> bool:
        return self.kind is not AtomKind.VAR

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.name)

    def __str__(self):
        return self.name if self.kind is AtomKind.VAR else self.kind.value


CAP = CaptureAtom(AtomKind.CAP)
RDR = CaptureAtom(AtomKind.RDR)


def var_atom(name: str) -> CaptureAtom:
    return CaptureAtom(AtomKind.VAR, name)


def atom(name: str) -> CaptureAtom:
    """Map the spellings `cap` and `rdr` to the roots, anything else to a variable."""
    if name == "cap":
        return CAP
    if name == "rdr":
        return RDR
    return var_atom(name)


def _as_atom(item) -> CaptureAtom:
    return item if isinstance(item, CaptureAtom) else atom(item)


@dataclass(frozen=True)
class CaptureSet:
    atoms: FrozenSet[CaptureAtom] = frozenset()

    @classmethod
    def of(cls, *names: str) -> "CaptureSet":
        return cls(frozenset(atom(n) for n in names))

    @classmethod
    def from_atoms(cls, atoms: Iterable[CaptureAtom]) -> "CaptureSet":
        return cls(frozenset(atoms))

    def __iter__(self) -> Iterator[CaptureAtom]:
        return iter(sorted(self.atoms, key=CaptureAtom.sort_key))

    def __len__(self):
        return len(self.atoms)

    def __contains__(self, item) -> bool:
        return _as_atom(item) in self.atoms

    def is_empty(self) -> bool:
        return not self.atoms

    def union(self, *others: "CaptureSet") -> "CaptureSet":
        atoms = set(self.atoms)
        for other in others:
            atoms |= other.atoms
        return CaptureSet(frozenset(atoms))

    def without(self, *names: str) -> "CaptureSet":
        drop = {var_atom(n) for n in names}
        return CaptureSet(self.atoms - drop)

    def restrict(self, names: Iterable[str]) -> "CaptureSet":
        """Keep only the variable atoms whose names are in `names` (roots are dropped)."""
        keep = set(names)
        return CaptureSet(frozenset(a for a in self.atoms if a.kind is AtomKind.VAR and a.name in keep))

    def var_names(self) -> FrozenSet[str]:
        return frozenset(a.name for a in self.atoms if a.kind is AtomKind.VAR)

    def rename(self, mapping: Mapping[str, str]) -> "CaptureSet":
        if not mapping:
            return self
        return CaptureSet(frozenset(
            var_atom(mapping.get(a.name, a.name)) if a.kind is AtomKind.VAR else a for a in self.atoms
        ))

    def __str__(self):
        return "{" + ", ".join(str(a) for a in self) + "}"


EMPTY = CaptureSet()
UNIVERSAL = CaptureSet(frozenset({CAP}))


@dataclass(frozen=True)
class SeparationDegree:
    atoms: FrozenSet[CaptureAtom] = frozenset()

    def __post_init__(self):
        roots = [a for a in self.atoms if a.is_root]
        if roots:
            raise DegreeContainsRoot(f"separation degree cannot mention {roots[0]}")

    @classmethod
    def of(cls, *names: str) -> "SeparationDegree":
        return cls(frozenset(atom(n) for n in names))

    def __iter__(self) -> Iterator[CaptureAtom]:
        return iter(sorted(self.atoms, key=CaptureAtom.sort_key))

    def __len__(self):
        return len(self.atoms)

    def __contains__(self, item) -> bool:
        return _as_atom(item) in self.atoms

    def names(self) -> FrozenSet[str]:
        return frozenset(a.name for a in self.atoms)

    def as_capture_set(self) -> CaptureSet:
        return CaptureSet(self.atoms)

    def rename(self, mapping: Mapping[str, str]) -> "SeparationDegree":
        if not mapping:
            return self
        return SeparationDegree(frozenset(var_atom(mapping.get(a.name, a.name)) for a in self.atoms))

    def __str__(self):
        return "{" + ", ".join(str(a) for a in self) + "}"


NO_DEGREE = SeparationDegree()


# ---------------------------------------------------------------------------
# Shapes and types

@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Nat:
    pass


@dataclass(frozen=True)
class Fun:
    param: str
    degree: SeparationDegree
    param_type: "Type"
    result: "Type"


@dataclass(frozen=True)
class TFun:
    tparam: str
    bound: "Shape"
    body: "Type"


@dataclass(frozen=True)
class Box:
    inner: "Type"


@dataclass(frozen=True)
class Ref:
    inner: "Shape"


@dataclass(frozen=True)
class Rdr:
    inner: "Shape"


Shape = Union[TVar, Top, Nat, Fun, TFun, Box, Ref, Rdr]

TOP = Top()
NAT = Nat()


@dataclass(frozen=True)
class Type:
    shape: Shape
    captures: CaptureSet = EMPTY

    def __str__(self):
        from csc.surface import pretty_type
        return pretty_type(self)


def pure(shape: Shape) -> Type:
    return Type(shape, EMPTY)


# ---------------------------------------------------------------------------
# Terms (A-normal form: operands are variable names)

def _span():
    return field(default=None, compare=False, repr=False, kw_only=True)


def _site():
    return field(default="", compare=False, repr=False, kw_only=True)


class LetMode(Enum):
    SEQ = "let"
    PAR = "letpar"


@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Lam:
    param: str
    degree: SeparationDegree
    param_type: Type
    body: "Term"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class TLam:
    tparam: str
    bound: Shape
    body: "Term"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BoxVal:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ReaderVal:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class App:
    fn: str
    arg: str
    span: Optional[Span] = _span()
    site: str = _site()


@dataclass(frozen=True)
class TApp:
    fn: str
    shape: Shape
    span: Optional[Span] = _span()
    site: str = _site()


@dataclass(frozen=True)
class Let:
    mode: LetMode
    name: str
    bound: "Term"
    body: "Term"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Unbox:
    captures: CaptureSet
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class DVar:
    name: str
    degree: SeparationDegree
    init: str
    body: "Term"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Read:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Write:
    target: str
    source: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class NatLit:
    value: int
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Add:
    left: str
    right: str
    span: Optional[Span] = _span()


Term = Union[Var, Lam, TLam, BoxVal, ReaderVal, App, TApp, Let, Unbox, DVar, Read, Write, NatLit, Add]

VALUE_FORMS = (Lam, TLam, BoxVal, ReaderVal, NatLit)


def is_value(t: Term) -> bool:
    return isinstance(t, VALUE_FORMS)


def is_answer(t: Term) -> bool:
    return is_value(t) or isinstance(t, Var)


# ---------------------------------------------------------------------------
# Free names

def type_free_names(ty: Type) -> Tuple[Set[str], Set[str]]:
    """Return (free term names, free type-variable names) of a type."""
    terms: Set[str] = set(ty.captures.var_names())
    tvars: Set[str] = set()
    s_terms, s_tvars = shape_free_names(ty.shape)
    return terms | s_terms, tvars | s_tvars


def shape_free_names(shape: Shape) -> Tuple[Set[str], Set[str]]:
    if isinstance(shape, TVar):
        return set(), {shape.name}
    if isinstance(shape, (Top, Nat)):
        return set(), set()
    if isinstance(shape, Fun):
        p_terms, p_tvars = type_free_names(shape.param_type)
        r_terms, r_tvars = type_free_names(shape.result)
        return set(shape.degree.names()) | p_terms | (r_terms - {shape.param}), p_tvars | r_tvars
    if isinstance(shape, TFun):
        b_terms, b_tvars = shape_free_names(shape.bound)
        t_terms, t_tvars = type_free_names(shape.body)
        return b_terms | t_terms, b_tvars | (t_tvars - {shape.tparam})
    if isinstance(shape, Box):
        return type_free_names(shape.inner)
    if isinstance(shape, (Ref, Rdr)):
        return shape_free_names(shape.inner)
    raise TypeError(f"not a shape: {shape!r}")


def free_names(t: Term) -> Tuple[Set[str], Set[str]]:
    """Return (free term names, free type-variable names) of a term, annotations included."""
    if isinstance(t, (Var, BoxVal, ReaderVal, Read)):
        return {t.name}, set()
    if isinstance(t, NatLit):
        return set(), set()
    if isinstance(t, App):
        return {t.fn, t.arg}, set()
    if isinstance(t, Add):
        return {t.left, t.right}, set()
    if isinstance(t, Write):
        return {t.target, t.source}, set()
    if isinstance(t, Unbox):
        return set(t.captures.var_names()) | {t.name}, set()
    if isinstance(t, TApp):
        s_terms, s_tvars = shape_free_names(t.shape)
        return {t.fn} | s_terms, s_tvars
    if isinstance(t, Lam):
        u_terms, u_tvars = type_free_names(t.param_type)
        b_terms, b_tvars = free_names(t.body)
        return set(t.degree.names()) | u_terms | (b_terms - {t.param}), u_tvars | b_tvars
    if isinstance(t, TLam):
        s_terms, s_tvars = shape_free_names(t.bound)
        b_terms, b_tvars = free_names(t.body)
        return s_terms | b_terms, s_tvars | (b_tvars - {t.tparam})
    if isinstance(t, Let):
        s_terms, s_tvars = free_names(t.bound)
        b_terms, b_tvars = free_names(t.body)
        return s_terms | (b_terms - {t.name}), s_tvars | b_tvars
    if isinstance(t, DVar):
        b_terms, b_tvars = free_names(t.body)
        return set(t.degree.names()) | {t.init} | (b_terms - {t.name}), b_tvars
    raise TypeError(f"not a term: {t!r}")


def free_vars(t: Term) -> Set[str]:
    return free_names(t)[0]


def binder_names(t: Term) -> Iterator[str]:
    """Yield every term-level and type-level binder name of a term, pre-order."""
    if isinstance(t, Lam):
        yield t.param
        yield from binder_names(t.body)
    elif isinstance(t, TLam):
        yield t.tparam
        yield from binder_names(t.body)
    elif isinstance(t, Let):
        yield t.name
        yield from binder_names(t.bound)
        yield from binder_names(t.body)
    elif isinstance(t, DVar):
        yield t.name
        yield from binder_names(t.body)


# ---------------------------------------------------------------------------
# Substitution

def _fresh_variant(name: str, avoid: Set[str]) -> str:
    candidate = name + "'"
    while candidate in avoid:
        candidate += "'"
    return candidate


def subst_type(ty: Type, names: Mapping[str, str] = None, shapes: Mapping[str, Shape] = None) -> Type:
    """Rename free term names by `names` and replace free type variables by `shapes`.

    Binders inside the type are renamed when they would capture an incoming name.
    """
    names = names or {}
    shapes = shapes or {}
    captures = ty.captures.rename(names)
    if isinstance(ty.shape, TVar) and ty.shape.name in shapes:
        return Type(shapes[ty.shape.name], captures)
    return Type(subst_shape(ty.shape, names, shapes), captures)


def _incoming_names(names: Mapping[str, str], shapes: Mapping[str, Shape]) -> Tuple[Set[str], Set[str]]:
    terms = set(names.values())
    tvars: Set[str] = set()
    for s in shapes.values():
        s_terms, s_tvars = shape_free_names(s)
        terms |= s_terms
        tvars |= s_tvars
    return terms, tvars


def subst_shape(shape: Shape, names: Mapping[str, str] = None, shapes: Mapping[str, Shape] = None) -> Shape:
    names = names or {}
    shapes = shapes or {}
    if not names and not shapes:
        return shape
    if isinstance(shape, TVar):
        return shapes.get(shape.name, shape)
    if isinstance(shape, (Top, Nat)):
        return shape
    if isinstance(shape, Fun):
        param = shape.param
        result = shape.result
        inner = {k: v for k, v in names.items() if k != param}
        incoming_terms, _ = _incoming_names(inner, shapes)
        if param in incoming_terms:
            r_terms, _ = type_free_names(result)
            fresh = _fresh_variant(param, incoming_terms | r_terms)
            result = subst_type(result, {param: fresh})
            param = fresh
        return Fun(param, shape.degree.rename(names), subst_type(shape.param_type, names, shapes),
                   subst_type(result, inner, shapes))
    if isinstance(shape, TFun):
        tparam = shape.tparam
        body = shape.body
        inner_shapes = {k: v for k, v in shapes.items() if k != tparam}
        _, incoming_tvars = _incoming_names(names, inner_shapes)
        if tparam in incoming_tvars:
            _, b_tvars = type_free_names(body)
            fresh = _fresh_variant(tparam, incoming_tvars | b_tvars)
            body = subst_type(body, shapes={tparam: TVar(fresh)})
            tparam = fresh
        return TFun(tparam, subst_shape(shape.bound, names, shapes), subst_type(body, names, inner_shapes))
    if isinstance(shape, Box):
        return Box(subst_type(shape.inner, names, shapes))
    if isinstance(shape, Ref):
        return Ref(subst_shape(shape.inner, names, shapes))
    if isinstance(shape, Rdr):
        return Rdr(subst_shape(shape.inner, names, shapes))
    raise TypeError(f"not a shape: {shape!r}")


def subst_term(t: Term, names: Mapping[str, str] = None, shapes: Mapping[str, Shape] = None) -> Term:
    """Substitute free term names and free type variables in `t`.

    Binder names of a normalized term are globally unique, so no capture check is made
    at term level; binders only shadow the maps.
    """
    names = names or {}
    shapes = shapes or {}
    if not names and not shapes:
        return t
    n = lambda x: names.get(x, x)
    if isinstance(t, Var):
        return replace(t, name=n(t.name))
    if isinstance(t, (BoxVal, ReaderVal, Read)):
        return replace(t, name=n(t.name))
    if isinstance(t, NatLit):
        return t
    if isinstance(t, App):
        return replace(t, fn=n(t.fn), arg=n(t.arg))
    if isinstance(t, TApp):
        return replace(t, fn=n(t.fn), shape=subst_shape(t.shape, names, shapes))
    if isinstance(t, Add):
        return replace(t, left=n(t.left), right=n(t.right))
    if isinstance(t, Write):
        return replace(t, target=n(t.target), source=n(t.source))
    if isinstance(t, Unbox):
        return replace(t, captures=t.captures.rename(names), name=n(t.name))
    if isinstance(t, Lam):
        inner = {k: v for k, v in names.items() if k != t.param}
        return replace(t, degree=t.degree.rename(names), param_type=subst_type(t.param_type, names, shapes),
                       body=subst_term(t.body, inner, shapes))
    if isinstance(t, TLam):
        inner_shapes = {k: v for k, v in shapes.items() if k != t.tparam}
        return replace(t, bound=subst_shape(t.bound, names, shapes), body=subst_term(t.body, names, inner_shapes))
    if isinstance(t, Let):
        inner = {k: v for k, v in names.items() if k != t.name}
        return replace(t, bound=subst_term(t.bound, names, shapes), body=subst_term(t.body, inner, shapes))
    if isinstance(t, DVar):
        inner = {k: v for k, v in names.items() if k != t.name}
        return replace(t, degree=t.degree.rename(names), init=n(t.init), body=subst_term(t.body, inner, shapes))
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Binder renaming: alpha-normalization at load time, instantiation at apply time

def _base_name(name: str) -> str:
    return name.split("@", 1)[0]


class _Renamer:
    """Walks a term renaming every binder through `fresh`, and labelling application sites."""

    def __init__(self, fresh, label):
        self.fresh = fresh
        self.label = label

    def term(self, t: Term, names: Dict[str, str], tvars: Dict[str, Shape]) -> Term:
        n = lambda x: names.get(x, x)
        if isinstance(t, Var):
            return replace(t, name=n(t.name))
        if isinstance(t, (BoxVal, ReaderVal, Read)):
            return replace(t, name=n(t.name))
        if isinstance(t, NatLit):
            return t
        if isinstance(t, App):
            return replace(t, fn=n(t.fn), arg=n(t.arg), site=self.label(t.site))
        if isinstance(t, TApp):
            return replace(t, fn=n(t.fn), shape=subst_shape(t.shape, names, tvars), site=self.label(t.site))
        if isinstance(t, Add):
            return replace(t, left=n(t.left), right=n(t.right))
        if isinstance(t, Write):
            return replace(t, target=n(t.target), source=n(t.source))
        if isinstance(t, Unbox):
            return replace(t, captures=t.captures.rename(names), name=n(t.name))
        if isinstance(t, Lam):
            degree = t.degree.rename(names)
            param_type = subst_type(t.param_type, names, tvars)
            new = self.fresh(t.param)
            body = self.term(t.body, {**names, t.param: new}, tvars)
            return replace(t, param=new, degree=degree, param_type=param_type, body=body)
        if isinstance(t, TLam):
            bound = subst_shape(t.bound, names, tvars)
            new = self.fresh(t.tparam)
            body = self.term(t.body, names, {**tvars, t.tparam: TVar(new)})
            return replace(t, tparam=new, bound=bound, body=body)
        if isinstance(t, Let):
            bound = self.term(t.bound, names, tvars)
            new = self.fresh(t.name)
            body = self.term(t.body, {**names, t.name: new}, tvars)
            return replace(t, name=new, bound=bound, body=body)
        if isinstance(t, DVar):
            degree = t.degree.rename(names)
            init = n(t.init)
            new = self.fresh(t.name)
            body = self.term(t.body, {**names, t.name: new}, tvars)
            return replace(t, name=new, degree=degree, init=init, body=body)
        raise TypeError(f"not a term: {t!r}")


class AlphaNormalizer:
    """Renames binders so that every binder name is globally unique and distinct from free names.

    The first binder with a given name keeps it; later ones become `base%N` with a single
    counter. Application nodes are labelled `s1, s2, ...` in traversal order. One instance
    can normalize several terms (the values of an initial store, then the program term)
    so that names and labels stay unique across all of them.
    """

    def __init__(self, reserved: Iterable[str] = ()):
        self.used: Set[str] = set(reserved)
        self._counter = 0
        self._sites = 0

    def _fresh(self, name: str) -> str:
        if name not in self.used:
            self.used.add(name)
            return name
        base = name.split("%", 1)[0]
        while True:
            self._counter += 1
            candidate = f"{base}%{self._counter}"
            if candidate not in self.used:
                self.used.add(candidate)
                return candidate

    def _label(self, _old: str) -> str:
        self._sites += 1
        return f"s{self._sites}"

    def term(self, t: Term) -> Term:
        return _Renamer(self._fresh, self._label).term(t, {}, {})


def alpha_normalize(t: Term) -> Term:
    f_terms, f_tvars = free_names(t)
    return AlphaNormalizer(f_terms | f_tvars).term(t)


def instantiate(body: Term, site: str) -> Term:
    """Copy a lambda body for one application at `site`, giving its binders fresh names.

    Every binder becomes `base@site` and every application node inside the copy gets a
    label derived from (site, old label), so the same call receives the same names in
    every interleaving.
    """
    def fresh(name: str) -> str:
        return f"{_base_name(name)}@{site}"

    def label(old: str) -> str:
        return hashlib.sha1(f"{site}/{old}".encode()).hexdigest()[:8]

    return _Renamer(fresh, label).term(body, {}, {})


# ---------------------------------------------------------------------------
# Typing contexts

@dataclass(frozen=True)
class TypeBind:
    name: str
    bound: Shape

    def __str__(self):
        from csc.surface import pretty_shape
        return f"{self.name} <: {pretty_shape(self.bound)}"


@dataclass(frozen=True)
class TermBind:
    name: str
    degree: SeparationDegree
    type: Type

    def __str__(self):
        from csc.surface import pretty_type
        return f"{self.name} :_{self.degree} {pretty_type(self.type)}"


Binding = Union[TypeBind, TermBind]


class TypingContext:
    """Ordered typing context; every binding only mentions earlier names and roots."""

    __slots__ = ("bindings", "_index")

    def __init__(self, bindings: Iterable[Binding] = ()):
        self.bindings: Tuple[Binding, ...] = tuple(bindings)
        self._index = {b.name: i for i, b in enumerate(self.bindings)}

    def extend(self, binding: Binding, check: bool = True) -> "TypingContext":
        if binding.name in ROOT_NAMES:
            raise ScopeError(f"{binding.name} is a root capability and cannot be bound", code="IllFormed")
        if binding.name in self._index:
            raise ScopeError(f"{binding.name} is already bound", code="DuplicateName")
        if check:
            if isinstance(binding, TermBind):
                wf_degree(self, binding.degree)
                wf_type(self, binding.type)
            else:
                wf_shape(self, binding.bound)
        return TypingContext(self.bindings + (binding,))

    def find(self, name: str) -> Optional[Binding]:
        i = self._index.get(name)
        return None if i is None else self.bindings[i]

    def lookup(self, name: str) -> Binding:
        found = self.find(name)
        if found is None:
            raise ScopeError(f"{name} is not bound", code="NotFound")
        return found

    def term(self, name: str) -> TermBind:
        found = self.find(name)
        if not isinstance(found, TermBind):
            raise ScopeError(f"unbound term variable {name}", code="UnboundName")
        return found

    def position(self, name: str) -> int:
        return self._index[name]

    @property
    def dom(self) -> FrozenSet[str]:
        return frozenset(b.name for b in self.bindings if isinstance(b, TermBind))

    @property
    def type_names(self) -> FrozenSet[str]:
        return frozenset(b.name for b in self.bindings if isinstance(b, TypeBind))

    def prefix(self, n: int) -> "TypingContext":
        return TypingContext(self.bindings[:n])

    def __len__(self):
        return len(self.bindings)

    def __iter__(self):
        return iter(self.bindings)

    def __eq__(self, other):
        return isinstance(other, TypingContext) and self.bindings == other.bindings

    def __hash__(self):
        return hash(self.bindings)

    def __str__(self):
        return ", ".join(str(b) for b in self.bindings) or "·"

    def __repr__(self):
        return f"TypingContext({self})"


def ctx_extend(ctx: TypingContext, binding: Binding) -> TypingContext:
    return ctx.extend(binding)


def ctx_lookup(ctx: TypingContext, name: str) -> Binding:
    return ctx.lookup(name)


# ---------------------------------------------------------------------------
# Well-formedness: scoping plus root exclusion

def wf_degree(ctx: TypingContext, degree: SeparationDegree, extra_terms: Iterable[str] = (), span=None) -> None:
    terms = ctx.dom | set(extra_terms)
    for a in degree:
        if a.is_root:
            raise ScopeError("separation degree mentions a root", span=span, code="RootInDegree")
        if a.name not in terms:
            raise ScopeError(f"separation degree mentions unbound name {a.name}", span=span, code="UnboundName")


def wf_type(ctx: TypingContext, ty: Type, span=None) -> None:
    """Raise ScopeError unless every free name of `ty` is bound in `ctx` (or is a root)."""
    _wf_type(set(ctx.dom), set(ctx.type_names), ty, span)


def wf_shape(ctx: TypingContext, shape: Shape, span=None) -> None:
    _wf_shape(set(ctx.dom), set(ctx.type_names), shape, span)


def is_wf_type(ctx: TypingContext, ty: Type) -> bool:
    try:
        wf_type(ctx, ty)
    except ScopeError:
        return False
    return True


def _wf_type(terms: Set[str], tvars: Set[str], ty: Type, span) -> None:
    for name in ty.captures.var_names():
        if name not in terms:
            raise ScopeError(f"capture set mentions unbound name {name}", span=span, code="UnboundName")
    _wf_shape(terms, tvars, ty.shape, span)


def _wf_shape(terms: Set[str], tvars: Set[str], shape: Shape, span) -> None:
    if isinstance(shape, TVar):
        if shape.name not in tvars:
            raise ScopeError(f"unbound type variable {shape.name}", span=span, code="UnboundName")
    elif isinstance(shape, Fun):
        for a in shape.degree:
            if a.name == shape.param:
                raise ScopeError(f"degree of {shape.param} mentions the parameter itself",
                                 span=span, code="UnboundName")
            if a.name not in terms:
                raise ScopeError(f"separation degree mentions unbound name {a.name}", span=span, code="UnboundName")
        _wf_type(terms, tvars, shape.param_type, span)
        _wf_type(terms | {shape.param}, tvars, shape.result, span)
    elif isinstance(shape, TFun):
        _wf_shape(terms, tvars, shape.bound, span)
        _wf_type(terms, tvars | {shape.tparam}, shape.body, span)
    elif isinstance(shape, Box):
        _wf_type(terms, tvars, shape.inner, span)
    elif isinstance(shape, (Ref, Rdr)):
        _wf_shape(terms, tvars, shape.inner, span)
