# csc/races.py
# Dynamic race monitor over the access events of a run

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

from csc.runtime import AccessEvent, RunResult, format_path

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Race:
    variable: str
    binder: str
    first: AccessEvent
    second: AccessEvent

    def describe(self) -> str:
        return (f"{self.variable}: {self.first.kind} at step {self.first.step} {format_path(self.first.path)} "
                f"vs {self.second.kind} at step {self.second.step} {format_path(self.second.path)} "
                f"(parallel let {self.binder})")


@dataclass
class RaceReport:
    events: int = 0
    races: List[Race] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.races

    def to_dict(self) -> dict:
        return {
            'events': self.events,
            'races': [
                {'variable': r.variable, 'binder': r.binder,
                 'first': {'kind': r.first.kind, 'step': r.first.step, 'focus': format_path(r.first.path)},
                 'second': {'kind': r.second.kind, 'step': r.second.step, 'focus': format_path(r.second.path)}}
                for r in self.races
            ],
        }


def diverging_binder(a: AccessEvent, b: AccessEvent) -> Optional[str]:
    """The parallel let whose binding and body hold the two events, if any.

    A signature entry only exists while the let is still pending, so a shared
    binder on opposite sides means both accesses happened before it resolved.
    """
    sides = dict(a.signature)
    for binder, side in b.signature:
        other = sides.get(binder)
        if other is not None and other != side:
            return binder
    return None


def race_monitor(trace: Iterable) -> RaceReport:
    """Flag pairs of accesses to one variable, at least one a write, on opposite sides of a pending parallel let.

    Args:
        trace: a RunResult, a list of TraceStep, or a list of AccessEvent

    Returns:
        RaceReport listing every racing pair once
    """
    events = _events(trace)
    report = RaceReport(events=len(events))
    for i, a in enumerate(events):
        for b in events[i + 1:]:
            if a.variable != b.variable or "write" not in (a.kind, b.kind):
                continue
            binder = diverging_binder(a, b)
            if binder is not None:
                report.races.append(Race(a.variable, binder, a, b))
    if report.races:
        logger.info(f"race monitor: {len(report.races)} race(s) over {len(events)} access events")
    return report


def _events(trace) -> List[AccessEvent]:
    if isinstance(trace, RunResult):
        return trace.events
    out: List[AccessEvent] = []
    for item in trace:
        if isinstance(item, AccessEvent):
            out.append(item)
        else:
            out.extend(item.events)
    return out
