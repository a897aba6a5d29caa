# test_app.py
import os

from streamlit.testing.v1 import AppTest

from conftest import SUM_SOURCE, RACED_SOURCE, ROOT
from app import check_source, explore_source, run_source

CONFIG = {
    'schedule': 'left-first',
    'seed': 0,
    'script': '',
    'max_steps': 2000,
    'max_states': 10000,
    'unsafe': False,
}


def test_check_source():
    checked = check_source(SUM_SOURCE)
    assert (checked['success'], checked['type']) == (True, 'Nat')
    failed = check_source("let = 1")
    assert (failed['success'], failed['stage']) == (False, 'parse')


def test_run_source_refuses_ill_typed_programs():
    result = run_source(RACED_SOURCE, CONFIG)
    assert result['stage'] == 'check'
    assert result['code'] == 'NotSeparated'


def test_run_source_unsafe_and_scripted():
    result = run_source(RACED_SOURCE, {**CONFIG, 'unsafe': True})
    assert (result['status'], result['answer']) == ('answer', '1')
    scripted = run_source(SUM_SOURCE, {**CONFIG, 'schedule': 'scripted', 'script': '0 1 1 0'})
    assert scripted['answer'] == '3'
    assert scripted['steps'] == 7


def test_explore_source():
    result = explore_source(RACED_SOURCE, {**CONFIG, 'unsafe': True})
    assert result['report'].verdict == 'Divergent'
    assert not result['success']


def test_playground_renders():
    at = AppTest.from_file(os.path.join(ROOT, "app.py"), default_timeout=60).run()
    assert not at.exception
    assert "Playground" in at.title[0].value
    at.button[0].click().run()
    assert not at.exception
