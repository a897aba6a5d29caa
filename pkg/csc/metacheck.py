# csc/metacheck.py
# Empirical metatheory: store equivalence, interleaving exploration for
# uniqueness of answers, and preservation replay against store typing

import concurrent.futures
import logging
import os
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from csc.errors import CscError, PreservationViolation, TypeCheckError
from csc.runtime import (
    Configuration, LeftFirst, RandomSchedule, RightFirst, Schedule, SetVar, Store, TraceStep, Val,
    VarInit, enabled_redexes, format_path, run, step, subterm_at,
)
from csc.storetyping import focus_context, store_context, typecheck_configuration
from csc.surface import pretty, pretty_config
from csc.syntax import is_answer
from csc.typer import subtype, typecheck

logger = logging.getLogger(__name__)

STUCK = "stuck"


# ---------------------------------------------------------------------------
# Store equivalence

def store_equiv(s1: Store, s2: Store) -> bool:
    """True iff s2 permutes the bindings of s1 and every mutable variable reads the same."""
    if Counter(s1.bindings) != Counter(s2.bindings):
        return False
    return all(s1.lookup_var(x) == s2.lookup_var(x) for x in s1.var_names())


def _show(value) -> str:
    return pretty(value, show_sites=True)


def store_key(store: Store) -> tuple:
    """Canonical encoding of a store's equivalence class.

    Immutable bindings and initial values go in as a sorted association; each
    mutable variable adds its current value, its write count and the sorted
    multiset of written values.
    """
    vals = sorted((b.name, _show(b.value)) for b in store if isinstance(b, Val))
    inits = sorted((b.name, _show(b.value)) for b in store if isinstance(b, VarInit))
    writes: Dict[str, List[str]] = {}
    for b in store:
        if isinstance(b, SetVar):
            writes.setdefault(b.name, []).append(_show(b.value))
    cells = sorted(
        (x, _show(store.lookup_var(x)), len(writes.get(x, [])), tuple(sorted(writes.get(x, []))))
        for x in store.var_names()
    )
    return tuple(vals), tuple(inits), tuple(cells)


def state_key(cfg: Configuration) -> tuple:
    return _show(cfg.term), store_key(cfg.store)


# ---------------------------------------------------------------------------
# Exploration

@dataclass
class ExploreReport:
    terminal_answers: List[str] = field(default_factory=list)
    terminal_store_classes: int = 0
    states_visited: int = 0
    stuck_states: int = 0
    truncated: bool = False
    verdict: str = "Inconclusive"
    divergent_answers: Tuple[str, ...] = ()
    # minimal-length witness first; each step is (rule, focus, configuration text)
    witnesses: List[List[Tuple[str, str, str]]] = field(default_factory=list)
    processing_time_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            'terminalAnswers': list(self.terminal_answers),
            'terminalStoreClasses': self.terminal_store_classes,
            'statesVisited': self.states_visited,
            'stuckStates': self.stuck_states,
            'truncated': self.truncated,
            'verdict': self.verdict,
            'divergentAnswers': list(self.divergent_answers),
            'witnesses': [[{'rule': r, 'focus': f, 'config': c} for r, f, c in w] for w in self.witnesses],
            'processingTimeSeconds': round(self.processing_time_seconds, 3),
        }


@dataclass
class _Node:
    config: Configuration
    depth: int
    parent: Optional[tuple] = None
    rule: str = ""
    focus: str = ""


class Explorer:
    """Breadth-first search over every interleaving of a configuration.

    Successors of one BFS layer are computed on a thread pool; they are merged
    into the visited set on the calling thread in frontier order, so reports
    do not depend on worker timing.
    """

    def __init__(self, max_states: int = 100000, max_steps: int = 2000, max_workers: Optional[int] = None):
        self.max_states = max_states
        self.max_steps = max_steps
        self.max_workers = max_workers or int(os.environ.get("CSC_WORKERS", "4"))
        self.executor = None
        self._lock = threading.Lock()

    def _get_executor(self):
        if self.executor is None:
            with self._lock:
                if self.executor is None:
                    logger.debug(f"Creating ThreadPoolExecutor with {self.max_workers} workers")
                    self.executor = concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers)
        return self.executor

    def shutdown(self):
        if self.executor is not None:
            self.executor.shutdown(wait=True)
            self.executor = None

    @staticmethod
    def _expand(cfg: Configuration) -> List[Tuple[str, str, Configuration]]:
        redexes = enabled_redexes(cfg)
        out = []
        for i, r in enumerate(redexes):
            result = step(cfg, i, redexes=redexes)
            out.append((r.rule, format_path(r.path), result.config))
        return out

    def _expand_layer(self, frontier: List[Configuration]) -> List[List[Tuple[str, str, Configuration]]]:
        if len(frontier) == 1 or self.max_workers <= 1:
            return [self._expand(c) for c in frontier]
        executor = self._get_executor()
        future_to_index = {executor.submit(self._expand, c): i for i, c in enumerate(frontier)}
        ordered: List[Optional[list]] = [None] * len(frontier)
        for future in concurrent.futures.as_completed(future_to_index):
            ordered[future_to_index[future]] = future.result()
        return ordered

    def explore(self, cfg: Configuration) -> ExploreReport:
        start = time.perf_counter()
        report = ExploreReport()
        root = state_key(cfg)
        nodes: Dict[tuple, _Node] = {root: _Node(cfg, 0)}
        frontier = [root]
        terminals: List[tuple] = []
        try:
            while frontier:
                layer = self._expand_layer([nodes[k].config for k in frontier])
                next_frontier = []
                for key, successors in zip(frontier, layer):
                    node = nodes[key]
                    if not successors:
                        terminals.append(key)
                        continue
                    if node.depth >= self.max_steps:
                        report.truncated = True
                        continue
                    for rule, focus, succ in successors:
                        skey = state_key(succ)
                        if skey in nodes:
                            continue
                        if len(nodes) >= self.max_states:
                            report.truncated = True
                            break
                        nodes[skey] = _Node(succ, node.depth + 1, key, rule, focus)
                        next_frontier.append(skey)
                logger.debug(f"explored layer: {len(frontier)} states, {len(next_frontier)} new")
                frontier = next_frontier
        finally:
            self.shutdown()

        report.states_visited = len(nodes)
        self._classify(report, nodes, terminals)
        report.processing_time_seconds = time.perf_counter() - start
        if report.truncated:
            logger.warning(f"exploration truncated after {report.states_visited} states")
        return report

    def _classify(self, report: ExploreReport, nodes: Dict[tuple, _Node], terminals: List[tuple]) -> None:
        outcomes: Dict[tuple, tuple] = {}
        answers: List[str] = []
        classes = set()
        for key in terminals:
            cfg = nodes[key].config
            if is_answer(cfg.term):
                answer = pretty(cfg.term)
            else:
                answer = STUCK
                report.stuck_states += 1
            if answer not in answers:
                answers.append(answer)
            classes.add(key[1])
            outcomes.setdefault((answer, key[1]), key)
        report.terminal_answers = answers
        report.terminal_store_classes = len(classes)

        if report.truncated or not terminals or answers == [STUCK]:
            report.verdict = "Inconclusive"
        elif len(outcomes) == 1:
            report.verdict = "Confluent"
        else:
            report.verdict = "Divergent"
            first, second = sorted(outcomes.values(), key=lambda k: nodes[k].depth)[:2]
            report.divergent_answers = (self._answer_of(nodes[first].config), self._answer_of(nodes[second].config))
            report.witnesses = [self._witness(nodes, first), self._witness(nodes, second)]

    @staticmethod
    def _answer_of(cfg: Configuration) -> str:
        return pretty(cfg.term) if is_answer(cfg.term) else STUCK

    @staticmethod
    def _witness(nodes: Dict[tuple, _Node], key: tuple) -> List[Tuple[str, str, str]]:
        path = []
        while key is not None:
            node = nodes[key]
            path.append((node.rule or "start", node.focus or "-", pretty_config(node.config.store, node.config.term)))
            key = node.parent
        return list(reversed(path))


def explore(cfg: Configuration, max_states: int = 100000, max_steps: int = 2000,
            max_workers: Optional[int] = None) -> ExploreReport:
    """Enumerate all interleavings of `cfg` and decide Confluent / Divergent / Inconclusive."""
    return Explorer(max_states, max_steps, max_workers).explore(cfg)


# ---------------------------------------------------------------------------
# Preservation replay

def default_schedules(seeds: Sequence[int] = (1, 2, 3)) -> List[Schedule]:
    return [LeftFirst(), RightFirst()] + [RandomSchedule(s) for s in seeds]


@dataclass
class ReplayReport:
    schedules: List[str] = field(default_factory=list)
    steps_checked: int = 0
    violations: List[PreservationViolation] = field(default_factory=list)
    runs: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            'schedules': self.schedules,
            'stepsChecked': self.steps_checked,
            'violations': [
                {'schedule': v.schedule, 'step': v.step, 'rule': v.rule, 'diagnostic': v.diagnostic}
                for v in self.violations
            ],
        }


def check_focus(before: Configuration, entry: TraceStep) -> None:
    """Type the redex and its contractum under the contexts of their hole; the contractum may not widen."""
    path = entry.path
    ctx = focus_context(store_context(before.store), before.term, path)
    redex_type = typecheck(ctx, subterm_at(before.term, path))
    after = entry.config
    ctx = focus_context(store_context(after.store), after.term, path)
    contractum_type = typecheck(ctx, subterm_at(after.term, path))
    if not subtype(ctx, contractum_type, redex_type):
        raise TypeCheckError("NotSubtype", f"contractum at {format_path(path)} : {contractum_type} "
                                           f"is not a subtype of the redex type {redex_type}")


def check_step(before: Configuration, entry: TraceStep, expected, schedule: str = "") -> None:
    """Re-type the configuration after one step; raise PreservationViolation on failure."""
    cfg = entry.config
    try:
        ctx = store_context(cfg.store)
        actual = typecheck(ctx, cfg.term)
        check_focus(before, entry)
    except TypeCheckError as e:
        raise PreservationViolation(entry.index, entry.rule, f"{e.code}: {e.message}", schedule)
    if not subtype(ctx, actual, expected):
        raise PreservationViolation(entry.index, entry.rule,
                                    f"residual type {actual} is not a subtype of {expected}", schedule)


def preservation_replay(cfg: Configuration, schedules: Optional[Sequence[Schedule]] = None,
                        max_steps: int = 2000, mutation: Optional[str] = None,
                        strict: bool = False) -> ReplayReport:
    """Run `cfg` under several schedules and re-typecheck after every step.

    Args:
        cfg: a well-typed initial configuration
        schedules: schedules to replay under (left-first, right-first, random 1/2/3 by default)
        max_steps: step budget per run
        mutation: optional stepper corruption, used to show the replay is not vacuous
        strict: raise the first PreservationViolation instead of collecting it

    Returns:
        ReplayReport with at most one violation per schedule
    """
    _, expected = typecheck_configuration(cfg.store, cfg.term)
    report = ReplayReport()
    for schedule in schedules or default_schedules():
        report.schedules.append(str(schedule))

        previous = [cfg]

        def on_step(entry: TraceStep, _name=str(schedule), _previous=previous):
            report.steps_checked += 1
            check_step(_previous[0], entry, expected, _name)
            _previous[0] = entry.config

        try:
            result = run(cfg, schedule, max_steps, mutation, on_step=on_step, raise_on_failure=False)
            report.runs.append(result)
            if result.status == "stuck":
                report.violations.append(PreservationViolation(
                    len(result.trace), "stuck", "well-typed configuration reached a stuck state", str(schedule)))
        except PreservationViolation as v:
            logger.info(f"preservation violated under {schedule} at step {v.step} ({v.rule}): {v.diagnostic}")
            report.violations.append(v)
        except CscError as e:
            report.violations.append(PreservationViolation(0, "error", str(e), str(schedule)))
        if strict and report.violations:
            raise report.violations[0]
    return report
