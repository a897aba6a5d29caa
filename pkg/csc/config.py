# csc/config.py
# Invocation settings: defaults, environment overrides and the per-command config record

import os
import sys
from dataclasses import dataclass
from typing import Optional

DEFAULTS = {
    'max_steps': 2000,
    'max_states': 100000,
    'width': 100,
    'workers': 4,
    'replay_seeds': (1, 2, 3),
    'schedule': 'left-first',
    'seed': 0,
    'format': 'text',
}

COMMANDS = ('check', 'run', 'trace', 'explore', 'replay', 'corpus')
UNSAFE_COMMANDS = ('run', 'trace', 'explore', 'replay')


@dataclass
class InvocationConfig:
    """One command-line invocation after flags, environment and defaults are merged."""
    command: str
    path: str
    schedule: str = DEFAULTS['schedule']
    seed: int = DEFAULTS['seed']
    max_steps: int = DEFAULTS['max_steps']
    max_states: int = DEFAULTS['max_states']
    unsafe: bool = False
    format: str = DEFAULTS['format']
    trace_full: bool = False
    width: int = DEFAULTS['width']
    workers: int = DEFAULTS['workers']
    mutation: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.format not in ('text', 'json'):
            raise ValueError(f"unknown output format {self.format!r}")
        if self.unsafe and self.command not in UNSAFE_COMMANDS:
            raise ValueError(f"--unsafe has no effect on {self.command}")


def env_workers() -> int:
    try:
        return max(1, int(os.environ.get('CSC_WORKERS', DEFAULTS['workers'])))
    except ValueError:
        return DEFAULTS['workers']


def color_enabled(stream=None) -> bool:
    """CSC_COLOR=1 forces ANSI colour, CSC_COLOR=0 disables it, otherwise use it on terminals."""
    setting = os.environ.get('CSC_COLOR')
    if setting in ('0', '1'):
        return setting == '1'
    stream = stream or sys.stderr
    return hasattr(stream, 'isatty') and stream.isatty()


def corpus_dir() -> str:
    return os.environ.get('CSC_CORPUS_DIR', os.path.join(os.path.dirname(os.path.dirname(__file__)), 'corpus'))
