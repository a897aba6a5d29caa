# utils/corpus_runner.py
# Concurrent corpus processor: check, run and explore every fixture and compare with its expectations

import concurrent.futures
import logging
import os
import re
import threading
import time
from typing import Callable, Dict, List, Optional

from csc.errors import CscError, LexError, ParseError, Stuck, StepLimit, TypeCheckError
from csc.metacheck import explore
from csc.runtime import Configuration, LeftFirst, run
from csc.storetyping import typecheck_program
from csc.surface import SourceProgram, parse_program, pretty

logger = logging.getLogger(__name__)

_HEADER = re.compile(r"^\s*//\s*(origin|expect-check|expect-answer|expect-explore|unsafe)\s*:\s*(.*?)\s*$")


def read_expectations(text: str) -> Dict[str, str]:
    """
    Collect the `// key: value` headers of a corpus file

    Args:
        text: program source

    Returns:
        dict with any of origin, check, answer, explore, unsafe
    """
    found = {}
    for line in text.splitlines():
        m = _HEADER.match(line)
        if m:
            key = m.group(1).replace('expect-', '')
            found[key] = m.group(2)
    return found


def categorize_outcome(result: dict) -> dict:
    """
    Categorize a corpus result for display

    Args:
        result: result dict produced by evaluate_file

    Returns:
        dict: category, display_name, icon and priority (lower sorts first)
    """
    if result.get('error'):
        return {
            'category': 'error',
            'display_name': 'Error',
            'icon': '💥',
            'priority': 1
        }
    if not result.get('match'):
        return {
            'category': 'mismatch',
            'display_name': 'Expectation Mismatch',
            'icon': '❌',
            'priority': 2
        }
    if result.get('explore') == 'Divergent':
        return {
            'category': 'divergent',
            'display_name': 'Divergent (expected)',
            'icon': '🔀',
            'priority': 3
        }
    if result.get('check') != 'ok':
        return {
            'category': 'rejected',
            'display_name': 'Rejected (expected)',
            'icon': '🛑',
            'priority': 4
        }
    return {
        'category': 'accepted',
        'display_name': 'Accepted',
        'icon': '✅',
        'priority': 5
    }


def evaluate_file(path: str, max_steps: int = 2000, max_states: int = 100000) -> dict:
    """Check, run left-first and explore one corpus file; never raises."""
    start = time.time()
    result = {
        'file': os.path.basename(path),
        'path': path,
        'success': False,
        'check': '',
        'type': '',
        'answer': None,
        'explore': None,
        'answers': [],
        'states': 0,
        'error': '',
    }
    try:
        with open(path, encoding='utf-8') as fh:
            text = fh.read()
    except OSError as e:
        result['error'] = f"cannot read {path}: {e}"
        result['processing_time_seconds'] = time.time() - start
        return result

    expected = read_expectations(text)
    unsafe = expected.get('unsafe', '').lower() in ('yes', 'true', '1')
    result.update({
        'expected_check': expected.get('check', 'ok'),
        'expected_answer': expected.get('answer'),
        'expected_explore': expected.get('explore'),
        'origin': expected.get('origin', ''),
        'unsafe': unsafe,
    })

    try:
        program = parse_program(SourceProgram(text, path))
    except (LexError, ParseError) as e:
        result['check'] = e.code
        _finish(result, start)
        return result

    try:
        result['type'] = str(typecheck_program(program))
        result['check'] = 'ok'
    except TypeCheckError as e:
        result['check'] = e.code

    if result['check'] == 'ok' or unsafe:
        cfg = Configuration.initial(program.term, program.store)
        try:
            outcome = run(cfg, LeftFirst(), max_steps)
            result['answer'] = pretty(outcome.answer)
        except (Stuck, StepLimit) as e:
            result['answer'] = e.code
        except CscError as e:
            result['error'] = f"{e.code}: {e.message}"
        report = explore(cfg, max_states=max_states, max_steps=max_steps, max_workers=1)
        result['explore'] = report.verdict
        result['answers'] = report.terminal_answers
        result['states'] = report.states_visited

    _finish(result, start)
    return result


def _finish(result: dict, start: float) -> None:
    match = result['check'] == result['expected_check']
    if result.get('expected_answer') is not None:
        match = match and result['answer'] == result['expected_answer']
    expected_explore = result.get('expected_explore')
    if expected_explore is None and result['check'] == 'ok':
        expected_explore = 'Confluent'
    if expected_explore is not None:
        match = match and result['explore'] == expected_explore
    result['match'] = match
    result['success'] = not result['error']
    result['processing_time_seconds'] = time.time() - start


class CorpusRunner:
    """Evaluate corpus files on a thread pool, keeping results in input order"""

    def __init__(self, max_workers: int = 4, max_steps: int = 2000, max_states: int = 100000):
        self.max_workers = max_workers
        self.max_steps = max_steps
        self.max_states = max_states
        self.executor = None  # created on demand
        self._lock = threading.Lock()
        self.total_processed = 0
        self.total_matched = 0
        logger.info(f"Initialized CorpusRunner with {max_workers} workers")

    def __del__(self):
        self._shutdown_executor()

    def _shutdown_executor(self):
        """Safely shutdown the executor"""
        if getattr(self, 'executor', None) is not None:
            try:
                self.executor.shutdown(wait=True)
                self.executor = None
            except Exception as e:
                logger.error(f"Error shutting down executor: {str(e)}")

    def _get_executor(self):
        """Get or create the thread pool"""
        if self.executor is None:
            with self._lock:
                if self.executor is None:  # Double-check pattern
                    logger.info(f"Creating new ThreadPoolExecutor with {self.max_workers} workers")
                    self.executor = concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers)
        return self.executor

    def process_corpus(self, paths: List[str], progress_callback: Optional[Callable] = None) -> Dict:
        """
        Evaluate every corpus file concurrently

        Args:
            paths: corpus files to evaluate
            progress_callback: called as (processed, total, result) after each file

        Returns:
            Dictionary with results in input order and summary statistics
        """
        logger.info(f"Starting corpus run over {len(paths)} files")
        start_time = time.time()
        ordered: List[Optional[dict]] = [None] * len(paths)
        errors: List[dict] = []
        processed = 0

        executor = self._get_executor()
        future_to_index = {
            executor.submit(evaluate_file, path, self.max_steps, self.max_states): i
            for i, path in enumerate(paths)
        }
        for future in concurrent.futures.as_completed(future_to_index):
            index = future_to_index[future]
            processed += 1
            try:
                result = future.result()
            except Exception as e:
                logger.error(f"Unexpected error evaluating {paths[index]}: {str(e)}", exc_info=True)
                result = {'file': os.path.basename(paths[index]), 'path': paths[index], 'success': False,
                          'check': '', 'match': False, 'error': f"Unexpected error: {str(e)}"}
            result.update(categorize_outcome(result))
            ordered[index] = result
            if result.get('error'):
                errors.append(result)
            if progress_callback:
                progress_callback(processed, len(paths), result)

        results = [r for r in ordered if r is not None]
        matched = sum(1 for r in results if r.get('match'))
        self.total_processed += len(results)
        self.total_matched += matched
        total_time = time.time() - start_time
        logger.info(f"Corpus run completed: {matched}/{len(paths)} matched in {total_time:.2f}s")
        return {
            'total': len(paths),
            'processed': processed,
            'matched': matched,
            'mismatched': len(results) - matched,
            'processing_time_seconds': total_time,
            'results': results,
            'errors': errors,
        }


def corpus_files(directory: str) -> List[str]:
    return sorted(os.path.join(directory, f) for f in os.listdir(directory) if f.endswith('.csc'))
