# csc/runtime.py
# Small-step parallel interpreter: stores, evaluation-context focus paths,
# the reduction rules and pluggable schedules

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from csc.errors import InvalidChoice, MissingVal, MissingVar, RuleViolation, StepLimit, Stuck
from csc.syntax import (
    Add, App, BoxVal, DVar, Lam, Let, LetMode, NatLit, Read, ReaderVal, TApp, TLam, Unbox, Var,
    Write, free_vars, instantiate, is_answer, is_value, subst_term,
)

logger = logging.getLogger(__name__)

MUTATIONS = ("swap-apply-arg", "open-keeps-box")


# ---------------------------------------------------------------------------
# Stores

@dataclass(frozen=True)
class Val:
    name: str
    value: object


@dataclass(frozen=True)
class VarInit:
    name: str
    value: object


@dataclass(frozen=True)
class SetVar:
    name: str
    value: object


StoreBinding = Union[Val, VarInit, SetVar]


class Store:
    """Ordered, append-only store. Val/VarInit names are unique; a set needs an earlier var."""

    __slots__ = ("bindings", "_vals", "_vars")

    def __init__(self, bindings: Sequence[StoreBinding] = ()):
        self.bindings: Tuple[StoreBinding, ...] = ()
        self._vals: Dict[str, object] = {}
        self._vars: Dict[str, object] = {}
        for b in bindings:
            self._add(b)
        self.bindings = tuple(bindings)

    def _add(self, b: StoreBinding) -> None:
        if isinstance(b, SetVar):
            if b.name not in self._vars:
                raise RuleViolation(f"set {b.name} has no preceding var {b.name}")
            return
        if b.name in self._vals or b.name in self._vars:
            raise RuleViolation(f"store already binds {b.name}")
        if not is_value(b.value):
            raise RuleViolation(f"store binding {b.name} does not hold a value")
        if isinstance(b, Val):
            self._vals[b.name] = b.value
        else:
            self._vars[b.name] = b.value

    def append(self, *new: StoreBinding) -> "Store":
        """Extend with `new`, validating only the added bindings."""
        extended = Store.__new__(Store)
        extended._vals = dict(self._vals)
        extended._vars = dict(self._vars)
        for b in new:
            extended._add(b)
        extended.bindings = self.bindings + tuple(new)
        return extended

    def lookup_val(self, name: str):
        try:
            return self._vals[name]
        except KeyError:
            raise MissingVal(f"no val binding for {name}") from None

    def lookup_var(self, name: str):
        """Latest `set name` after `var name`, else the initial value."""
        if name not in self._vars:
            raise MissingVar(f"no var binding for {name}")
        for b in reversed(self.bindings):
            if b.name != name:
                continue
            if isinstance(b, (SetVar, VarInit)):
                return b.value
        raise MissingVar(f"no var binding for {name}")

    def find_val(self, name: str):
        return self._vals.get(name)

    def has_var(self, name: str) -> bool:
        return name in self._vars

    def names(self) -> frozenset:
        return frozenset(self._vals) | frozenset(self._vars)

    def var_names(self) -> List[str]:
        return [b.name for b in self.bindings if isinstance(b, VarInit)]

    def __iter__(self):
        return iter(self.bindings)

    def __len__(self):
        return len(self.bindings)

    def __eq__(self, other):
        return isinstance(other, Store) and self.bindings == other.bindings

    def __hash__(self):
        return hash(self.bindings)

    def __repr__(self):
        return f"Store({list(self.bindings)!r})"


def lookup_val(store: Store, name: str):
    return store.lookup_val(name)


def lookup_var(store: Store, name: str):
    return store.lookup_var(name)


@dataclass(frozen=True)
class Configuration:
    store: Store
    term: object

    @classmethod
    def initial(cls, term, store: Sequence[StoreBinding] = ()) -> "Configuration":
        return cls(store if isinstance(store, Store) else Store(store), term)


# ---------------------------------------------------------------------------
# Focus paths and redexes

class FocusStep(Enum):
    BIND = "bind"
    BODY = "body"


FocusPath = Tuple[FocusStep, ...]


def format_path(path: FocusPath) -> str:
    return "[" + ",".join(s.value for s in path) + "]"


@dataclass(frozen=True)
class Redex:
    path: FocusPath
    rule: str
    # (Par binder, side) for every Par let crossed on the way to the hole
    signature: Tuple[Tuple[str, str], ...] = ()


@dataclass(frozen=True)
class AccessEvent:
    kind: str  # "read" or "write"
    variable: str
    path: FocusPath
    step: int
    signature: Tuple[Tuple[str, str], ...] = ()


def _rule_at(store: Store, t) -> Optional[str]:
    if isinstance(t, App):
        return "apply" if isinstance(store.find_val(t.fn), Lam) else None
    if isinstance(t, TApp):
        return "tapply" if isinstance(store.find_val(t.fn), TLam) else None
    if isinstance(t, Unbox):
        return "open" if isinstance(store.find_val(t.name), BoxVal) else None
    if isinstance(t, Read):
        reader = store.find_val(t.name)
        return "get" if isinstance(reader, ReaderVal) and store.has_var(reader.name) else None
    if isinstance(t, Let):
        if isinstance(t.bound, Var):
            return "rename"
        if is_value(t.bound) and free_vars(t.bound) <= store.names():
            return "lift-let"
        return None
    if isinstance(t, DVar):
        return "lift-var" if store.find_val(t.init) is not None else None
    if isinstance(t, Write):
        return "lift-set" if store.find_val(t.source) is not None and store.has_var(t.target) else None
    if isinstance(t, Add):
        left, right = store.find_val(t.left), store.find_val(t.right)
        return "add" if isinstance(left, NatLit) and isinstance(right, NatLit) else None
    return None


def _holes(t, path: FocusPath, signature) -> Iterator[Tuple[FocusPath, object, tuple]]:
    yield path, t, signature
    if isinstance(t, Let):
        if t.mode is LetMode.PAR:
            yield from _holes(t.bound, path + (FocusStep.BIND,), signature + ((t.name, "bind"),))
            yield from _holes(t.body, path + (FocusStep.BODY,), signature + ((t.name, "body"),))
        else:
            yield from _holes(t.bound, path + (FocusStep.BIND,), signature)


def enabled_redexes(cfg: Configuration) -> List[Redex]:
    """Every hole (depth first, binding before body) at which a rule fires."""
    found = []
    for path, sub, signature in _holes(cfg.term, (), ()):
        rule = _rule_at(cfg.store, sub)
        if rule is not None:
            found.append(Redex(path, rule, signature))
    return found


def subterm_at(t, path: FocusPath):
    for s in path:
        if not isinstance(t, Let):
            raise RuleViolation(f"focus path {format_path(path)} leaves the evaluation context")
        t = t.bound if s is FocusStep.BIND else t.body
    return t


def diagnose_stuck(cfg: Configuration) -> str:
    """Explain why a non-answer configuration has no enabled redex."""
    store = cfg.store
    for path, sub, _ in _holes(cfg.term, (), ()):
        where = format_path(path)
        if isinstance(sub, App):
            fn = store.find_val(sub.fn)
            if fn is None:
                continue
            return f"at {where}: {sub.fn} is applied but holds a non-function"
        if isinstance(sub, TApp) and store.find_val(sub.fn) is not None:
            return f"at {where}: {sub.fn} is instantiated but holds no type function"
        if isinstance(sub, Unbox) and store.find_val(sub.name) is not None:
            return f"at {where}: {sub.name} is unboxed but holds no box"
        if isinstance(sub, Read) and store.find_val(sub.name) is not None:
            return f"at {where}: {sub.name} is read but holds no reader of a mutable variable"
        if isinstance(sub, Write) and store.find_val(sub.source) is not None and not store.has_var(sub.target):
            return f"at {where}: {sub.target} is written but is not a mutable variable"
        if isinstance(sub, Add) and store.find_val(sub.left) is not None and store.find_val(sub.right) is not None:
            return f"at {where}: {sub.left} + {sub.right} adds non-numbers"
    return "no redex is enabled and every hole waits on a pending binder"


# ---------------------------------------------------------------------------
# Steps

@dataclass(frozen=True)
class StepResult:
    config: Configuration
    redex: Redex
    events: Tuple[AccessEvent, ...] = ()


def _rewrite(t, path: FocusPath, fn):
    if not path:
        return fn(t)
    if not isinstance(t, Let):
        raise RuleViolation("focus path leaves the evaluation context")
    if path[0] is FocusStep.BIND:
        new, extra = _rewrite(t.bound, path[1:], fn)
        return replace(t, bound=new), extra
    new, extra = _rewrite(t.body, path[1:], fn)
    return replace(t, body=new), extra


def _contract(store: Store, t, rule: str, mutation: Optional[str]):
    """Return (new subterm, new store bindings, accessed (kind, variable) pairs)."""
    if rule == "apply":
        lam = store.lookup_val(t.fn)
        if not isinstance(lam, Lam):
            raise RuleViolation(f"apply: {t.fn} is not a function")
        if not t.site:
            raise RuleViolation("apply: unlabelled application; alpha-normalize the program first")
        arg = t.fn if mutation == "swap-apply-arg" else t.arg
        return subst_term(instantiate(lam.body, t.site), {lam.param: arg}), (), ()
    if rule == "tapply":
        tlam = store.lookup_val(t.fn)
        if not isinstance(tlam, TLam):
            raise RuleViolation(f"tapply: {t.fn} is not a type function")
        if not t.site:
            raise RuleViolation("tapply: unlabelled application; alpha-normalize the program first")
        return subst_term(instantiate(tlam.body, t.site), shapes={tlam.tparam: t.shape}), (), ()
    if rule == "open":
        boxed = store.lookup_val(t.name)
        if not isinstance(boxed, BoxVal):
            raise RuleViolation(f"open: {t.name} is not a box")
        return Var(t.name if mutation == "open-keeps-box" else boxed.name), (), ()
    if rule == "get":
        reader = store.lookup_val(t.name)
        if not isinstance(reader, ReaderVal):
            raise RuleViolation(f"get: {t.name} is not a reader")
        return store.lookup_var(reader.name), (), (("read", reader.name),)
    if rule == "lift-let":
        if not free_vars(t.bound) <= store.names():
            raise RuleViolation(f"lift-let: {t.name} refers to names outside the store")
        return t.body, (Val(t.name, t.bound),), ()
    if rule == "rename":
        return subst_term(t.body, {t.name: t.bound.name}), (), ()
    if rule == "lift-var":
        return t.body, (VarInit(t.name, store.lookup_val(t.init)),), ()
    if rule == "lift-set":
        if not store.has_var(t.target):
            raise MissingVar(f"no var binding for {t.target}")
        value = store.lookup_val(t.source)
        return value, (SetVar(t.target, value),), (("write", t.target),)
    if rule == "add":
        left, right = store.lookup_val(t.left), store.lookup_val(t.right)
        if not (isinstance(left, NatLit) and isinstance(right, NatLit)):
            raise RuleViolation("add: operands are not numbers")
        return NatLit(left.value + right.value), (), ()
    raise RuleViolation(f"unknown rule {rule}")


def step(cfg: Configuration, choice: int, step_index: int = 0, mutation: Optional[str] = None,
         redexes: Optional[List[Redex]] = None) -> StepResult:
    """Fire the `choice`-th enabled redex of `cfg` and return the successor configuration."""
    redexes = enabled_redexes(cfg) if redexes is None else redexes
    if not 0 <= choice < len(redexes):
        raise InvalidChoice(f"choice {choice} out of range: {len(redexes)} redex(es) enabled")
    redex = redexes[choice]
    store = cfg.store

    def fire(sub):
        new, bindings, accesses = _contract(store, sub, redex.rule, mutation)
        return new, (bindings, accesses)

    term, (bindings, accesses) = _rewrite(cfg.term, redex.path, fire)
    events = tuple(AccessEvent(kind, var, redex.path, step_index, redex.signature) for kind, var in accesses)
    return StepResult(Configuration(store.append(*bindings) if bindings else store, term), redex, events)


# ---------------------------------------------------------------------------
# Schedules

class Schedule(ABC):
    name = "schedule"

    @abstractmethod
    def choose(self, redexes: List[Redex], step_index: int) -> int:
        ...

    def fresh(self) -> "Schedule":
        """A copy positioned at the start, so one schedule object can drive many runs."""
        return self

    def __str__(self):
        return self.name


class LeftFirst(Schedule):
    name = "left-first"

    def choose(self, redexes, step_index):
        return 0


class RightFirst(Schedule):
    name = "right-first"

    def choose(self, redexes, step_index):
        return len(redexes) - 1


class RandomSchedule(Schedule):
    """64-bit linear congruential choice: state = state * A + C mod 2**64, pick (state >> 33) mod n."""

    MULTIPLIER = 6364136223846793005
    INCREMENT = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int = 0):
        self.seed = seed & self.MASK
        self.state = self.seed
        self.name = f"random:{seed}"

    def choose(self, redexes, step_index):
        self.state = (self.state * self.MULTIPLIER + self.INCREMENT) & self.MASK
        return (self.state >> 33) % len(redexes)

    def fresh(self):
        return RandomSchedule(self.seed)


class Scripted(Schedule):
    """Replays recorded choices; continues left-first once the script runs out."""

    def __init__(self, choices: Sequence[int], label: str = "scripted"):
        self.choices = tuple(choices)
        self.name = label

    def choose(self, redexes, step_index):
        if step_index < len(self.choices):
            return self.choices[step_index]
        return 0


def parse_script(text: str) -> List[int]:
    choices = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        choices.extend(int(tok) for tok in line.split())
    return choices


def schedule_from_spec(spec: str, seed: int = 0) -> Schedule:
    """Build a schedule from `left-first`, `right-first`, `random` or `scripted:FILE`."""
    if spec == "left-first":
        return LeftFirst()
    if spec == "right-first":
        return RightFirst()
    if spec == "random":
        return RandomSchedule(seed)
    if spec.startswith("scripted:"):
        path = spec.split(":", 1)[1]
        with open(path, encoding="utf-8") as fh:
            return Scripted(parse_script(fh.read()), label=f"scripted:{path}")
    raise ValueError(f"unknown schedule {spec!r}")


# ---------------------------------------------------------------------------
# Driver

@dataclass(frozen=True)
class TraceStep:
    index: int
    rule: str
    path: FocusPath
    config: Configuration
    events: Tuple[AccessEvent, ...] = ()


@dataclass
class RunResult:
    initial: Configuration
    final: Configuration
    trace: List[TraceStep] = field(default_factory=list)
    status: str = "answer"  # answer, stuck, step-limit
    schedule: str = ""

    @property
    def answer(self):
        return self.final.term

    @property
    def store(self) -> Store:
        return self.final.store

    @property
    def events(self) -> List[AccessEvent]:
        return [e for s in self.trace for e in s.events]


def run(cfg: Configuration, schedule: Schedule, max_steps: int = 2000, mutation: Optional[str] = None,
        on_step: Optional[Callable[[TraceStep], None]] = None, raise_on_failure: bool = True) -> RunResult:
    """Reduce `cfg` under `schedule` until an answer, a stuck configuration or `max_steps`.

    Args:
        cfg: the starting configuration
        schedule: picks one enabled redex per step
        max_steps: step budget
        mutation: optional stepper corruption used by mutation testing
        on_step: callback invoked after every step
        raise_on_failure: raise Stuck / StepLimit instead of returning a failed result

    Returns:
        RunResult with the final configuration and the full trace
    """
    schedule = schedule.fresh()
    result = RunResult(initial=cfg, final=cfg, schedule=str(schedule))
    current = cfg
    for index in range(max_steps + 1):
        redexes = enabled_redexes(current)
        if not redexes:
            result.final = current
            if is_answer(current.term):
                result.status = "answer"
                return result
            result.status = "stuck"
            if raise_on_failure:
                err = Stuck(f"stuck after {index} steps: {diagnose_stuck(current)}", current)
                err.result = result
                raise err
            return result
        if index == max_steps:
            break
        choice = schedule.choose(redexes, index)
        outcome = step(current, choice, index + 1, mutation, redexes)
        current = outcome.config
        entry = TraceStep(index + 1, outcome.redex.rule, outcome.redex.path, current, outcome.events)
        result.trace.append(entry)
        logger.debug(f"step {index + 1}: {entry.rule} at {format_path(entry.path)}")
        if on_step is not None:
            on_step(entry)
    result.final = current
    result.status = "step-limit"
    if raise_on_failure:
        err = StepLimit(f"no answer within {max_steps} steps", current)
        err.result = result
        raise err
    return result
