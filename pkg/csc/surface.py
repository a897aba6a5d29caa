# csc/surface.py
# Concrete syntax: lexer, recursive-descent parser with A-normalization and `||`
# desugaring, configuration syntax for initial stores, and the pretty printer

import logging
import re
from collections import deque
from dataclasses import dataclass
from typing import Deque, List, Optional, Tuple, Union

from csc.errors import DegreeContainsRoot, LexError, ParseError, Span
from csc.syntax import (
    EMPTY, NAT, NO_DEGREE, TOP, UNIVERSAL, Add, AlphaNormalizer, App, Box, BoxVal, CaptureSet, DVar, Fun,
    Lam, Let, LetMode, NatLit, Rdr, Read, ReaderVal, Ref, SeparationDegree, Shape, TApp, TFun, TLam,
    TVar, Top, Nat, Type, Unbox, Var, Write, free_names, is_value,
)

logger = logging.getLogger(__name__)

KEYWORDS = {
    "let", "letpar", "in", "var", "sep", "fn", "tfn", "unbox", "box", "reader", "read",
    "forall", "Top", "Nat", "Ref", "Rdr", "Box", "cap", "rdr", "val", "set",
}

SYMBOLS = ["=>", ":=", "<:", "||", "↦", "=", "(", ")", "[", "]", "{", "}", ",", ":", "^", "|", "<", ">", "+"]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*(?:%[0-9]+)?(?:@[0-9A-Za-z]+)?")
_NAT = re.compile(r"[0-9]+")
_DESUGARED = re.compile(r"_([0-9]+)$")


@dataclass(frozen=True)
class SourceProgram:
    text: str
    path: str = "<input>"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    message: str
    span: Optional[Span] = None
    hint: str = ""

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "line": self.span.line if self.span else None,
            "column": self.span.column if self.span else None,
            "length": self.span.length if self.span else None,
            "hint": self.hint,
        }

    def render(self, path: str = "", color: bool = False) -> str:
        where = f"{path}:{self.span}: " if self.span else (f"{path}: " if path else "")
        label = f"{self.severity}[{self.code}]"
        if color:
            label = f"\033[1;31m{label}\033[0m" if self.severity == "error" else f"\033[1;33m{label}\033[0m"
        text = f"{where}{label}: {self.message}"
        if self.hint:
            text += f"\n  hint: {self.hint}"
        return text


# ---------------------------------------------------------------------------
# Lexer

@dataclass(frozen=True)
class Token:
    kind: str  # ident, nat, keyword, symbol, eof
    text: str
    span: Span


def lex(source: str, allow_reserved: bool = False) -> Deque[Token]:
    """Split source text into tokens; `//` comments and whitespace are dropped.

    Identifiers starting with `_` or carrying a `%N` / `@site` suffix are generated by
    the front end and the interpreter; user programs may not spell them.
    """
    tokens: Deque[Token] = deque()
    line, col, i = 1, 1, 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            col, i = col + 1, i + 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        m = _IDENT.match(source, i)
        if m:
            text = m.group(0)
            span = Span(line, col, len(text))
            if text in KEYWORDS:
                tokens.append(Token("keyword", text, span))
            else:
                if not allow_reserved and (text.startswith("_") or "%" in text or "@" in text):
                    raise LexError(f"identifier {text} is reserved for generated names", span, code="ReservedName")
                tokens.append(Token("ident", text, span))
            col, i = col + len(text), m.end()
            continue
        m = _NAT.match(source, i)
        if m:
            text = m.group(0)
            tokens.append(Token("nat", text, Span(line, col, len(text))))
            col, i = col + len(text), m.end()
            continue
        for sym in SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token("symbol", sym, Span(line, col, len(sym))))
                col, i = col + len(sym), i + len(sym)
                break
        else:
            raise LexError(f"unexpected character {ch!r}", Span(line, col, 1))
    tokens.append(Token("eof", "", Span(line, col, 0)))
    return tokens


# ---------------------------------------------------------------------------
# Parser

@dataclass(frozen=True)
class Program:
    """A term together with the initial store it starts from (usually empty)."""
    store: tuple = ()
    term: object = None
    path: str = "<input>"


class Parser:
    def __init__(self, tokens: Deque[Token]):
        self.tokens = tokens
        self._fresh = max((int(m.group(1)) for t in tokens if t.kind == "ident"
                           for m in [_DESUGARED.match(t.text)] if m), default=0)

    # token helpers

    def peek(self) -> Token:
        return self.tokens[0]

    def peek2(self) -> Token:
        return self.tokens[1] if len(self.tokens) > 1 else self.tokens[0]

    def at(self, text: str) -> bool:
        tok = self.tokens[0]
        return tok.kind in ("keyword", "symbol") and tok.text == text

    def advance(self) -> Token:
        tok = self.tokens[0]
        if tok.kind != "eof":
            self.tokens.popleft()
        return tok

    def expect(self, text: str) -> Token:
        if not self.at(text):
            tok = self.peek()
            found = tok.text or "end of input"
            raise ParseError(f"expected '{text}', found '{found}'", tok.span)
        return self.advance()

    def ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            found = tok.text or "end of input"
            raise ParseError(f"expected an identifier, found '{found}'", tok.span)
        return self.advance()

    def fresh(self) -> str:
        self._fresh += 1
        return f"_{self._fresh}"

    # programs

    def program(self) -> Tuple[tuple, object]:
        from csc.runtime import SetVar, Val, VarInit
        store = []
        if self.at("<"):
            self.advance()
            while not self.at("|"):
                if store:
                    self.expect(",")
                tok = self.peek()
                if self.at("val"):
                    self.advance()
                    name = self.ident().text
                    if self.at("↦"):
                        self.advance()
                    else:
                        self.expect("=")
                    store.append(Val(name, self._store_value(tok)))
                elif self.at("var") or self.at("set"):
                    kind = self.advance().text
                    name = self.ident().text
                    self.expect(":=")
                    value = self._store_value(tok)
                    store.append(VarInit(name, value) if kind == "var" else SetVar(name, value))
                else:
                    raise ParseError(f"expected a store binding, found '{tok.text}'", tok.span)
            self.expect("|")
            term = self.term()
            self.expect(">")
        else:
            term = self.term()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected '{tok.text}' after the end of the program", tok.span)
        return tuple(store), term

    def _store_value(self, tok: Token):
        value = self.term()
        if not is_value(value):
            raise ParseError("store bindings must hold values", tok.span)
        return value

    # terms

    def term(self):
        tok = self.peek()
        if self.at("let") or self.at("letpar"):
            mode = LetMode.SEQ if self.advance().text == "let" else LetMode.PAR
            name = self.ident().text
            self.expect("=")
            bound = self.term()
            self.expect("in")
            body = self.term()
            return Let(mode, name, bound, body, span=tok.span)
        if self.at("var"):
            self.advance()
            name = self.ident().text
            degree = self.degree()
            self.expect(":=")
            lifts: List[Tuple[str, object]] = []
            init = self.operand(self.simple(), lifts)
            self.expect("in")
            body = self.term()
            return self._wrap(lifts, DVar(name, degree, init, body, span=tok.span))
        if self.at("fn"):
            self.advance()
            self.expect("(")
            name = self.ident().text
            degree = self.degree()
            self.expect(":")
            param_type = self.type()
            self.expect(")")
            self.expect("=>")
            return Lam(name, degree, param_type, self.term(), span=tok.span)
        if self.at("tfn"):
            self.advance()
            self.expect("[")
            name = self.ident().text
            self.expect("<:")
            bound = self.shape()
            self.expect("]")
            self.expect("=>")
            return TLam(name, bound, self.term(), span=tok.span)
        return self.par()

    def par(self):
        branches = [self.app()]
        spans = []
        while self.at("||"):
            spans.append(self.advance().span)
            branches.append(self.app())
        result = branches[-1]
        binders = [self.fresh() for _ in branches[:-1]]
        for name, bound, span in reversed(list(zip(binders, branches[:-1], spans))):
            result = Let(LetMode.PAR, name, bound, result, span=span)
        return result

    def app(self):
        tok = self.peek()
        lifts: List[Tuple[str, object]] = []
        if self.at("unbox"):
            self.advance()
            captures = self.atoms()
            node = Unbox(captures, self.operand(self.simple(), lifts), span=tok.span)
        elif self.at("box") or self.at("reader") or self.at("read"):
            kind = self.advance().text
            name = self.operand(self.simple(), lifts)
            node = {"box": BoxVal, "reader": ReaderVal, "read": Read}[kind](name, span=tok.span)
        else:
            first = self.simple()
            if self.at("["):
                fn = self.operand(first, lifts)
                self.advance()
                shape = self.shape()
                self.expect("]")
                node = TApp(fn, shape, span=tok.span)
            elif self.at(":="):
                target = self.operand(first, lifts)
                self.advance()
                node = Write(target, self.operand(self.simple(), lifts), span=tok.span)
            elif self.at("+"):
                left = self.operand(first, lifts)
                self.advance()
                node = Add(left, self.operand(self.simple(), lifts), span=tok.span)
            elif self._starts_simple():
                fn = self.operand(first, lifts)
                node = App(fn, self.operand(self.simple(), lifts), span=tok.span)
            else:
                return first
        return self._wrap(lifts, node)

    def _starts_simple(self) -> bool:
        tok = self.peek()
        return tok.kind in ("ident", "nat") or self.at("(")

    def simple(self):
        tok = self.peek()
        if tok.kind == "ident":
            self.advance()
            return Var(tok.text, span=tok.span)
        if tok.kind == "nat":
            self.advance()
            return NatLit(int(tok.text), span=tok.span)
        if self.at("("):
            self.advance()
            inner = self.term()
            self.expect(")")
            return inner
        found = tok.text or "end of input"
        raise ParseError(f"expected a term, found '{found}'", tok.span)

    def operand(self, t, lifts: List[Tuple[str, object]]) -> str:
        if isinstance(t, Var):
            return t.name
        name = self.fresh()
        lifts.append((name, t))
        return name

    @staticmethod
    def _wrap(lifts, node):
        for name, bound in reversed(lifts):
            node = Let(LetMode.SEQ, name, bound, node, span=getattr(bound, "span", None))
        return node

    # capture sets, degrees, types

    def atoms(self) -> CaptureSet:
        self.expect("{")
        names = []
        while not self.at("}"):
            if names:
                self.expect(",")
            tok = self.peek()
            if self.at("cap") or self.at("rdr"):
                names.append(self.advance().text)
            else:
                names.append(self.ident().text)
        self.expect("}")
        return CaptureSet.of(*names)

    def degree(self) -> SeparationDegree:
        if not self.at("sep"):
            return NO_DEGREE
        self.advance()
        self.expect("{")
        names = []
        while not self.at("}"):
            if names:
                self.expect(",")
            tok = self.peek()
            if self.at("cap") or self.at("rdr"):
                raise DegreeContainsRoot(f"separation degree cannot mention {tok.text}", tok.span)
            names.append(self.ident().text)
        self.expect("}")
        return SeparationDegree.of(*names)

    def type(self) -> Type:
        shape = self.shape()
        if not self.at("^"):
            return Type(shape, EMPTY)
        self.advance()
        if self.at("{"):
            return Type(shape, self.atoms())
        return Type(shape, UNIVERSAL)

    def shape(self) -> Shape:
        tok = self.peek()
        if self.at("Top"):
            self.advance()
            return TOP
        if self.at("Nat"):
            self.advance()
            return NAT
        if tok.kind == "ident":
            self.advance()
            return TVar(tok.text)
        if self.at("Ref") or self.at("Rdr"):
            kind = self.advance().text
            self.expect("[")
            inner = self.shape()
            self.expect("]")
            return Ref(inner) if kind == "Ref" else Rdr(inner)
        if self.at("Box"):
            self.advance()
            self.expect("[")
            inner = self.type()
            self.expect("]")
            return Box(inner)
        if self.at("forall"):
            self.advance()
            if self.at("("):
                self.advance()
                name = self.ident().text
                degree = self.degree()
                self.expect(":")
                param_type = self.type()
                self.expect(")")
                return Fun(name, degree, param_type, self.type())
            self.expect("[")
            name = self.ident().text
            self.expect("<:")
            bound = self.shape()
            self.expect("]")
            return TFun(name, bound, self.type())
        if self.at("("):
            self.advance()
            inner = self.shape()
            self.expect(")")
            return inner
        found = tok.text or "end of input"
        raise ParseError(f"expected a type, found '{found}'", tok.span)


def _text(src: Union[str, SourceProgram]) -> Tuple[str, str]:
    if isinstance(src, SourceProgram):
        return src.text, src.path
    return src, "<input>"


def parse_program(src: Union[str, SourceProgram], allow_reserved: bool = False) -> Program:
    """Parse a program, optionally prefixed by an initial store `< bindings | term >`.

    Store values and the term are alpha-normalized together so binder names and
    application labels are unique across both.
    """
    text, path = _text(src)
    store, term = Parser(lex(text, allow_reserved)).program()
    reserved = {b.name for b in store}
    for value in [b.value for b in store] + [term]:
        f_terms, f_tvars = free_names(value)
        reserved |= f_terms | f_tvars
    normalizer = AlphaNormalizer(reserved)
    store = tuple(type(b)(b.name, normalizer.term(b.value)) for b in store)
    term = normalizer.term(term)
    logger.debug(f"parsed {path}: {len(store)} store bindings")
    return Program(store, term, path)


def parse(src: Union[str, SourceProgram], allow_reserved: bool = False):
    """Parse a plain term (no initial store) into an alpha-normalized A-normal Term."""
    program = parse_program(src, allow_reserved)
    if program.store:
        raise ParseError("expected a term, found a configuration", Span(1, 1, 1))
    return program.term


# ---------------------------------------------------------------------------
# Pretty printer

def pretty_captures(c: CaptureSet) -> str:
    return str(c)


def pretty_shape(shape: Shape, wrap: bool = False) -> str:
    if isinstance(shape, TVar):
        return shape.name
    if isinstance(shape, Top):
        return "Top"
    if isinstance(shape, Nat):
        return "Nat"
    if isinstance(shape, Ref):
        return f"Ref[{pretty_shape(shape.inner)}]"
    if isinstance(shape, Rdr):
        return f"Rdr[{pretty_shape(shape.inner)}]"
    if isinstance(shape, Box):
        return f"Box[{pretty_type(shape.inner)}]"
    if isinstance(shape, Fun):
        sep = f" sep {shape.degree}" if len(shape.degree) else ""
        text = f"forall({shape.param}{sep}: {pretty_type(shape.param_type)}) {pretty_type(shape.result)}"
        return f"({text})" if wrap else text
    if isinstance(shape, TFun):
        text = f"forall[{shape.tparam} <: {pretty_shape(shape.bound)}] {pretty_type(shape.body)}"
        return f"({text})" if wrap else text
    raise TypeError(f"not a shape: {shape!r}")


def pretty_type(ty: Type) -> str:
    if ty.captures.is_empty():
        return pretty_shape(ty.shape)
    return f"{pretty_shape(ty.shape, wrap=True)}^{ty.captures}"


def pretty(t, show_sites: bool = False) -> str:
    """Print a term in the surface grammar; parse(pretty(t)) gives t back."""
    p = lambda u: pretty(u, show_sites)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, NatLit):
        return str(t.value)
    if isinstance(t, Lam):
        sep = f" sep {t.degree}" if len(t.degree) else ""
        return f"fn({t.param}{sep}: {pretty_type(t.param_type)}) => {p(t.body)}"
    if isinstance(t, TLam):
        return f"tfn[{t.tparam} <: {pretty_shape(t.bound)}] => {p(t.body)}"
    if isinstance(t, BoxVal):
        return f"box {t.name}"
    if isinstance(t, ReaderVal):
        return f"reader {t.name}"
    if isinstance(t, Read):
        return f"read {t.name}"
    if isinstance(t, App):
        site = f"#{t.site}" if show_sites else ""
        return f"{t.fn} {t.arg}{site}"
    if isinstance(t, TApp):
        site = f"#{t.site}" if show_sites else ""
        return f"{t.fn} [{pretty_shape(t.shape)}]{site}"
    if isinstance(t, Unbox):
        return f"unbox {t.captures} {t.name}"
    if isinstance(t, Write):
        return f"{t.target} := {t.source}"
    if isinstance(t, Add):
        return f"{t.left} + {t.right}"
    if isinstance(t, Let):
        return f"{t.mode.value} {t.name} = {p(t.bound)} in {p(t.body)}"
    if isinstance(t, DVar):
        sep = f" sep {t.degree}" if len(t.degree) else ""
        return f"var {t.name}{sep} := {t.init} in {p(t.body)}"
    raise TypeError(f"not a term: {t!r}")


def pretty_binding(b) -> str:
    from csc.runtime import SetVar, Val
    if isinstance(b, Val):
        return f"val {b.name} ↦ {pretty(b.value)}"
    if isinstance(b, SetVar):
        return f"set {b.name} := {pretty(b.value)}"
    return f"var {b.name} := {pretty(b.value)}"


def pretty_store(store) -> str:
    return ", ".join(pretty_binding(b) for b in store)


def pretty_config(store, term) -> str:
    bindings = pretty_store(store)
    return f"< {bindings} | {pretty(term)} >" if bindings else f"< | {pretty(term)} >"
