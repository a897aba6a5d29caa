# utils/report.py
# Tabular and text renderings of corpus verdicts, exploration reports and traces

import logging
from typing import Dict, List

import pandas as pd

from csc.runtime import RunResult, format_path
from csc.surface import pretty, pretty_config, pretty_store

logger = logging.getLogger(__name__)

VERDICT_COLUMNS = ['file', 'check', 'answer', 'explore', 'states', 'expected', 'match']


def verdict_table(results: List[Dict]) -> pd.DataFrame:
    """
    Build the corpus verdict matrix

    Args:
        results: per-file result dicts from CorpusRunner, in corpus order

    Returns:
        DataFrame with one row per file and the columns of VERDICT_COLUMNS
    """
    rows = []
    for r in results:
        rows.append({
            'file': r.get('file', ''),
            'check': r.get('check', ''),
            'answer': r.get('answer') or '',
            'explore': r.get('explore') or '',
            'states': r.get('states') or 0,
            'expected': r.get('expected_check', ''),
            'match': bool(r.get('match', False)),
        })
    df = pd.DataFrame(rows, columns=VERDICT_COLUMNS)
    logger.debug(f"verdict table with {len(df)} rows, {int(df['match'].sum()) if len(df) else 0} matching")
    return df


def explore_report_dict(report) -> dict:
    return report.to_dict()


def render_explore_text(report) -> str:
    lines = [
        f"verdict: {report.verdict}",
        f"answers: {', '.join(report.terminal_answers) or '-'}",
        f"store classes: {report.terminal_store_classes}",
        f"states visited: {report.states_visited}",
        f"stuck states: {report.stuck_states}",
        f"truncated: {'yes' if report.truncated else 'no'}",
    ]
    for n, witness in enumerate(report.witnesses, 1):
        lines.append(f"witness {n} ({len(witness) - 1} steps):")
        for rule, focus, config in witness:
            lines.append(f"  {rule:<9} {focus:<12} {config}")
    return "\n".join(lines)


def elide(line: str, width: int) -> str:
    if width <= 0 or len(line) <= width:
        return line
    return line[:width - 1] + "…"


def trace_lines(result: RunResult, width: int = 100, full: bool = False) -> List[str]:
    """One line per configuration, starting with the initial one; `full` prints stores too."""
    def show(cfg):
        return pretty_config(cfg.store, cfg.term) if full else pretty(cfg.term)

    lines = [elide(f"{0:>3}  {'start':<9} {'-':<12} {show(result.initial)}", width)]
    for s in result.trace:
        lines.append(elide(f"{s.index:>3}  {s.rule:<9} {format_path(s.path):<12} {show(s.config)}", width))
    return lines


def render_trace(result: RunResult, width: int = 100, full: bool = False) -> str:
    lines = trace_lines(result, width, full)
    if result.status == "answer":
        lines.append(f"answer: {pretty(result.answer)}")
    else:
        lines.append(f"status: {result.status}")
    lines.append(f"store: {pretty_store(result.store)}")
    return "\n".join(lines) + "\n"


def trace_dict(result: RunResult) -> dict:
    return {
        'schedule': result.schedule,
        'status': result.status,
        'answer': pretty(result.answer) if result.status == "answer" else None,
        'steps': [
            {'index': s.index, 'rule': s.rule, 'focus': format_path(s.path), 'term': pretty(s.config.term),
             'events': [{'kind': e.kind, 'variable': e.variable} for e in s.events]}
            for s in result.trace
        ],
        'store': pretty_store(result.store),
    }
