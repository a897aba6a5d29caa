# test_corpus.py
import math
import os

import pytest

from conftest import CORPUS
from csc.metacheck import default_schedules, preservation_replay
from csc.races import race_monitor
from csc.runtime import Configuration, RandomSchedule, run
from csc.surface import SourceProgram, parse_program, pretty
from utils.corpus_runner import CorpusRunner, categorize_outcome, corpus_files, evaluate_file, read_expectations

FILES = corpus_files(CORPUS)


def _headers(path):
    with open(path, encoding="utf-8") as fh:
        return read_expectations(fh.read())


WELL_TYPED = [p for p in FILES if _headers(p).get("check") == "ok"]
PROGRESS_RUNS = 500
SEEDS_PER_FILE = math.ceil(PROGRESS_RUNS / len(WELL_TYPED))


def _config(path) -> Configuration:
    with open(path, encoding="utf-8") as fh:
        program = parse_program(SourceProgram(fh.read(), path))
    return Configuration.initial(program.term, program.store)


def test_corpus_is_populated():
    assert len(FILES) >= 15
    assert len(WELL_TYPED) >= 8
    assert SEEDS_PER_FILE * len(WELL_TYPED) >= PROGRESS_RUNS


def test_read_expectations():
    text = "// origin: example\n//expect-check: NotSeparated\n// unsafe: yes\nlet x = 1 in x // trailing\n"
    assert read_expectations(text) == {"origin": "example", "check": "NotSeparated", "unsafe": "yes"}


@pytest.mark.parametrize("path", FILES, ids=os.path.basename)
def test_file_matches_expectations(path):
    result = evaluate_file(path)
    assert not result["error"]
    assert result["match"], result


@pytest.mark.parametrize("path", WELL_TYPED, ids=os.path.basename)
def test_replay_is_clean(path):
    report = preservation_replay(_config(path), default_schedules())
    assert report.ok, [v.message for v in report.violations]
    assert all(race_monitor(r).clean for r in report.runs)


@pytest.mark.parametrize("path", WELL_TYPED, ids=os.path.basename)
def test_random_schedules_reach_the_expected_answer(path):
    cfg = _config(path)
    expected = _headers(path).get("answer")
    for seed in range(SEEDS_PER_FILE):
        result = run(cfg, RandomSchedule(seed))
        assert result.status == "answer"
        if expected is not None:
            assert pretty(result.answer) == expected, f"seed {seed}"


def test_categories():
    assert categorize_outcome({"error": "boom"})["category"] == "error"
    assert categorize_outcome({"match": False})["category"] == "mismatch"
    assert categorize_outcome({"match": True, "explore": "Divergent", "check": "NotSeparated"})["category"] == "divergent"
    assert categorize_outcome({"match": True, "check": "NotSubtype"})["category"] == "rejected"
    assert categorize_outcome({"match": True, "check": "ok", "explore": "Confluent"})["category"] == "accepted"


def test_unreadable_file(tmp_path):
    result = evaluate_file(str(tmp_path / "gone.csc"))
    assert result["error"].startswith("cannot read")


def test_expectation_mismatch(program_file):
    result = evaluate_file(program_file("// expect-check: ok\n// expect-answer: 4\nlet a = 1 in a + a\n"))
    assert result["check"] == "ok"
    assert result["answer"] == "2"
    assert not result["match"]


def test_runner_keeps_input_order():
    seen = []
    runner = CorpusRunner(max_workers=3)
    summary = runner.process_corpus(FILES, progress_callback=lambda done, total, r: seen.append((done, total)))
    assert [r["file"] for r in summary["results"]] == [os.path.basename(p) for p in FILES]
    assert summary["matched"] == summary["total"] == len(FILES)
    assert [done for done, _ in seen] == list(range(1, len(FILES) + 1))
    assert runner.total_processed == len(FILES)
