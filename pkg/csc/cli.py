# csc/cli.py
# Command-line front end: check, run, trace, explore, replay and corpus

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from csc.config import COMMANDS, DEFAULTS, InvocationConfig, color_enabled, corpus_dir, env_workers
from csc.errors import CscError, LexError, ParseError, RuntimeFault, StepLimit, Stuck, TypeCheckError
from csc.metacheck import default_schedules, explore, preservation_replay
from csc.races import race_monitor
from csc.runtime import MUTATIONS, Configuration, run, schedule_from_spec
from csc.storetyping import typecheck_program
from csc.surface import Diagnostic, SourceProgram, parse_program, pretty
from utils.logger import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TYPE_ERROR = 1
EXIT_PARSE_ERROR = 2
EXIT_STUCK = 3
EXIT_DIVERGENT = 4
EXIT_IO = 5
EXIT_BUDGET = 6

VERDICT_EXIT = {'Confluent': EXIT_OK, 'Divergent': EXIT_DIVERGENT, 'Inconclusive': EXIT_BUDGET}


class _Failure(Exception):
    def __init__(self, exit_code: int, payload: dict):
        super().__init__(payload.get('message', ''))
        self.exit_code = exit_code
        self.payload = payload


def _diagnostic(err: CscError) -> Diagnostic:
    return Diagnostic("error", err.code, err.message, err.span, getattr(err, 'hint', ''))


class Session:
    """State shared by the commands of one invocation."""

    def __init__(self, config: InvocationConfig, out=None):
        self.config = config
        self.out = out or sys.stdout
        self.program = None
        self.type = None

    # -- output -----------------------------------------------------------------

    def emit(self, text: str, payload: dict) -> None:
        if self.config.format == 'json':
            payload = {'command': self.config.command, 'file': self.config.path, **payload}
            self.out.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
        else:
            self.out.write(text if text.endswith("\n") else text + "\n")

    def fail(self, exit_code: int, err: CscError, status: str) -> _Failure:
        diag = _diagnostic(err)
        return _Failure(exit_code, {'status': status, 'message': err.message, 'diagnostics': [diag.to_dict()],
                                    'text': diag.render(self.config.path, color_enabled(self.out))})

    # -- pipeline -------------------------------------------------------------

    def load(self):
        try:
            with open(self.config.path, encoding='utf-8') as fh:
                text = fh.read()
        except OSError as e:
            raise _Failure(EXIT_IO, {'status': 'io-error', 'message': str(e), 'text': f"{self.config.path}: {e}"})
        try:
            self.program = parse_program(SourceProgram(text, self.config.path))
        except (LexError, ParseError) as e:
            raise self.fail(EXIT_PARSE_ERROR, e, 'parse-error')
        return self.program

    def typecheck(self, required: bool = True):
        program = self.program or self.load()
        try:
            self.type = typecheck_program(program)
        except TypeCheckError as e:
            if required or not self.config.unsafe:
                raise self.fail(EXIT_TYPE_ERROR, e, 'type-error')
            logger.warning(f"running ill-typed program under --unsafe: {e.code}")
        return self.type

    def configuration(self) -> Configuration:
        self.typecheck(required=False)
        return Configuration.initial(self.program.term, self.program.store)

    def schedule(self):
        spec = self.config.schedule
        if spec.startswith('scripted:'):
            script = spec.split(':', 1)[1]
            if not os.path.exists(script):
                beside = os.path.join(os.path.dirname(self.config.path), script)
                if os.path.exists(beside):
                    spec = f"scripted:{beside}"
        try:
            return schedule_from_spec(spec, self.config.seed)
        except OSError as e:
            raise _Failure(EXIT_IO, {'status': 'io-error', 'message': str(e), 'text': str(e)})
        except ValueError as e:
            raise _Failure(EXIT_PARSE_ERROR, {'status': 'usage-error', 'message': str(e), 'text': str(e)})


# ---------------------------------------------------------------------------
# Commands

def cmd_check(session: Session) -> int:
    ty = session.typecheck()
    session.emit(str(ty), {'status': 'ok', 'type': str(ty)})
    return EXIT_OK


def _run(session: Session):
    cfg = session.configuration()
    schedule = session.schedule()
    return run(cfg, schedule, session.config.max_steps, raise_on_failure=False)


def _status_exit(result) -> int:
    return {'answer': EXIT_OK, 'stuck': EXIT_STUCK, 'step-limit': EXIT_BUDGET}[result.status]


def cmd_run(session: Session) -> int:
    try:
        result = _run(session)
    except RuntimeFault as e:
        raise session.fail(EXIT_STUCK, e, 'runtime-error')
    if result.status == 'answer':
        answer = pretty(result.answer)
        session.emit(answer, {'status': 'ok', 'answer': answer, 'schedule': result.schedule,
                              'steps': len(result.trace)})
    elif result.status == 'stuck':
        err = Stuck(f"stuck after {len(result.trace)} steps: {pretty(result.final.term)}")
        raise session.fail(EXIT_STUCK, err, 'stuck')
    else:
        err = StepLimit(f"no answer within {session.config.max_steps} steps")
        raise session.fail(EXIT_BUDGET, err, 'step-limit')
    return EXIT_OK


def cmd_trace(session: Session) -> int:
    from utils.report import render_trace, trace_dict
    try:
        result = _run(session)
    except RuntimeFault as e:
        raise session.fail(EXIT_STUCK, e, 'runtime-error')
    payload = trace_dict(result)
    payload['status'] = 'ok' if result.status == 'answer' else result.status
    session.emit(render_trace(result, session.config.width, session.config.trace_full), payload)
    return _status_exit(result)


def cmd_explore(session: Session) -> int:
    from utils.report import explore_report_dict, render_explore_text
    cfg = session.configuration()
    report = explore(cfg, session.config.max_states, session.config.max_steps, session.config.workers)
    session.emit(render_explore_text(report), {'status': report.verdict, **explore_report_dict(report)})
    return VERDICT_EXIT[report.verdict]


def cmd_replay(session: Session) -> int:
    session.typecheck()
    cfg = Configuration.initial(session.program.term, session.program.store)
    replay = preservation_replay(cfg, default_schedules(DEFAULTS['replay_seeds']),
                                 session.config.max_steps, session.config.mutation)
    race_reports = [race_monitor(r) for r in replay.runs]
    races = [race for rep in race_reports for race in rep.races]
    lines = [f"schedules: {', '.join(replay.schedules)}", f"steps checked: {replay.steps_checked}"]
    lines += [f"violation: {v.message}" for v in replay.violations]
    lines += [f"race: {r.describe()}" for r in races]
    clean = replay.ok and not races
    lines.append("preservation: ok, races: none" if clean else "replay found problems")
    payload = {'status': 'ok' if clean else 'violation', **replay.to_dict(),
               'races': [rep.to_dict() for rep in race_reports]}
    session.emit("\n".join(lines), payload)
    return EXIT_OK if clean else EXIT_TYPE_ERROR


def cmd_corpus(session: Session) -> int:
    from utils.corpus_runner import CorpusRunner, corpus_files
    from utils.report import verdict_table
    directory = session.config.path
    try:
        paths = corpus_files(directory)
    except OSError as e:
        raise _Failure(EXIT_IO, {'status': 'io-error', 'message': str(e), 'text': f"{directory}: {e}"})
    runner = CorpusRunner(session.config.workers, session.config.max_steps, session.config.max_states)
    summary = runner.process_corpus(paths)
    table = verdict_table(summary['results'])
    text = table.to_string(index=False) + f"\n{summary['matched']}/{summary['total']} files match their expectations"
    payload = {'status': 'ok' if summary['mismatched'] == 0 else 'mismatch',
               'matched': summary['matched'], 'total': summary['total'],
               'rows': table.to_dict(orient='records')}
    session.emit(text, payload)
    return EXIT_OK if summary['mismatched'] == 0 else EXIT_TYPE_ERROR


COMMAND_HANDLERS = {
    'check': cmd_check,
    'run': cmd_run,
    'trace': cmd_trace,
    'explore': cmd_explore,
    'replay': cmd_replay,
    'corpus': cmd_corpus,
}


# ---------------------------------------------------------------------------
# Entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='csc', description='Capture separation calculus: checker and interpreter')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('path', nargs='?', help='program file (corpus directory for `corpus`)')
    parser.add_argument('--schedule', default=DEFAULTS['schedule'],
                        help='left-first, right-first, random or scripted:FILE')
    parser.add_argument('--seed', type=int, default=DEFAULTS['seed'])
    parser.add_argument('--max-steps', type=int, default=DEFAULTS['max_steps'])
    parser.add_argument('--max-states', type=int, default=DEFAULTS['max_states'])
    parser.add_argument('--unsafe', action='store_true', help='run programs that fail to typecheck')
    parser.add_argument('--format', choices=('text', 'json'), default=DEFAULTS['format'])
    parser.add_argument('--trace-full', action='store_true', help='print stores in traces')
    parser.add_argument('--width', type=int, default=DEFAULTS['width'], help='trace line width, 0 for no elision')
    parser.add_argument('--workers', type=int, default=None, help='explore worker threads (CSC_WORKERS)')
    parser.add_argument('--mutation', choices=MUTATIONS, default=None, help='corrupt the stepper (replay)')
    return parser


def parse_config(argv: Optional[List[str]] = None) -> InvocationConfig:
    parser = build_parser()
    args = parser.parse_intermixed_args(argv)
    path = args.path
    if path is None:
        if args.command != 'corpus':
            parser.error(f"{args.command} needs a program file")
        path = corpus_dir()
    try:
        return InvocationConfig(
            command=args.command, path=path, schedule=args.schedule, seed=args.seed,
            max_steps=args.max_steps, max_states=args.max_states, unsafe=args.unsafe,
            format=args.format, trace_full=args.trace_full, width=args.width,
            workers=args.workers or env_workers(), mutation=args.mutation,
        )
    except ValueError as e:
        parser.error(str(e))


def main(argv: Optional[List[str]] = None, out=None) -> int:
    setup_logging('csc')
    setup_logging('utils')
    config = parse_config(argv)
    session = Session(config, out)
    logger.info(f"{config.command} {config.path}")
    try:
        return COMMAND_HANDLERS[config.command](session)
    except _Failure as f:
        if config.format == 'json':
            session.emit('', {k: v for k, v in f.payload.items() if k != 'text'})
        else:
            session.out.write(f.payload.get('text', f.payload.get('message', '')) + "\n")
        return f.exit_code


if __name__ == '__main__':
    sys.exit(main())
