# csc/storetyping.py
# Typing contexts derived from stores and from evaluation-context focus paths

import logging
from typing import Optional, Tuple

from csc.capcalc import cv, subcapture
from csc.errors import TypeCheckError
from csc.runtime import FocusPath, FocusStep, SetVar, Store, Val, VarInit
from csc.surface import Program
from csc.syntax import (
    EMPTY, NO_DEGREE, UNIVERSAL, Let, LetMode, Ref, SeparationDegree, TermBind, Type, TypingContext,
)
from csc.typer import promote, subtype, typecheck

logger = logging.getLogger(__name__)


def store_context(store: Store, base_ctx: Optional[TypingContext] = None) -> TypingContext:
    """Derive the typing context of a store, binding by binding.

    Args:
        store: the runtime store, oldest binding first
        base_ctx: context the store is typed under (empty by default)

    Returns:
        base_ctx extended with one binding per `val` and `var` entry

    Raises:
        TypeCheckError: when a stored value does not type or a payload is impure
    """
    ctx = base_ctx or TypingContext()
    for b in store:
        if isinstance(b, Val):
            ty = typecheck(ctx, b.value)
            ctx = _bind(ctx, TermBind(b.name, NO_DEGREE, Type(ty.shape, cv(b.value))), b)
        elif isinstance(b, VarInit):
            ty = _pure_payload(ctx, b)
            degree = SeparationDegree.of(*sorted(ctx.dom))
            ctx = _bind(ctx, TermBind(b.name, degree, Type(Ref(ty.shape), UNIVERSAL)), b)
        elif isinstance(b, SetVar):
            cell = ctx.find(b.name)
            shape = promote(ctx, cell.type.shape) if isinstance(cell, TermBind) else None
            if not isinstance(shape, Ref):
                raise TypeCheckError("ExpectedRef", f"set {b.name} has no matching mutable variable", ctx=ctx)
            ty = _pure_payload(ctx, b)
            if not subtype(ctx, ty, Type(shape.inner, EMPTY)):
                raise TypeCheckError("NotSubtype", f"set {b.name}: {ty} does not fit the cell", ctx=ctx)
    return ctx


def _pure_payload(ctx: TypingContext, b) -> Type:
    ty = typecheck(ctx, b.value)
    if not subcapture(ctx, ty.captures, EMPTY):
        raise TypeCheckError("NotSubcapture", f"stored payload of {b.name} is not pure: {ty}", ctx=ctx)
    return ty


def _bind(ctx: TypingContext, binding: TermBind, b) -> TypingContext:
    if ctx.find(binding.name) is not None:
        raise TypeCheckError("IllFormed", f"store binds {b.name} twice", ctx=ctx)
    return ctx.extend(binding, check=False)


def focus_context(ctx: TypingContext, term, path: FocusPath) -> TypingContext:
    """Context at the hole addressed by `path`.

    Entering a let's binding keeps the context; entering the body of a
    parallel let adds the pending binder at the type of its binding.
    """
    for s in path:
        if not isinstance(term, Let):
            break
        if s is FocusStep.BIND:
            term = term.bound
            continue
        if term.mode is LetMode.PAR:
            bound = typecheck(ctx, term.bound)
            ctx = ctx.extend(TermBind(term.name, NO_DEGREE, bound), check=False)
        term = term.body
    return ctx


def typecheck_configuration(store: Store, term) -> Tuple[TypingContext, Type]:
    ctx = store_context(store)
    return ctx, typecheck(ctx, term)


def typecheck_program(program: Program) -> Type:
    """Type a program: the initial store first, then its term."""
    _, ty = typecheck_configuration(Store(program.store), program.term)
    logger.debug(f"{program.path or '<input>'}: {ty}")
    return ty
