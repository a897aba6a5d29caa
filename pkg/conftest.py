# conftest.py
# Shared fixtures: corpus locations and small helpers for parsing and typing programs

import os

import pytest

from csc.runtime import Configuration
from csc.surface import SourceProgram, parse_program

ROOT = os.path.dirname(os.path.abspath(__file__))
CORPUS = os.path.join(ROOT, "corpus")

SUM_SOURCE = """
< var cx := 1, var cy := 2, val x ↦ reader cx, val y ↦ reader cy |
  letpar z1 = (let z2 = read x in fn(z: Nat) => z2 + z) in
  let z3 = read y in
  z1 z3 >
"""

RACED_SOURCE = """
var x := 0 in
let u = (x := 2) || (x := 1) in
let rx = reader x in
read rx
"""


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS, name)


def load_program(name: str):
    with open(corpus_path(name), encoding="utf-8") as fh:
        return parse_program(SourceProgram(fh.read(), corpus_path(name)))


def initial_config(source: str) -> Configuration:
    program = parse_program(source)
    return Configuration.initial(program.term, program.store)


@pytest.fixture
def corpus_dir():
    return CORPUS


@pytest.fixture
def sum_config():
    return initial_config(SUM_SOURCE)


@pytest.fixture
def raced_config():
    return initial_config(RACED_SOURCE)


@pytest.fixture
def program_file(tmp_path):
    """Write a program to a temporary .csc file and return its path."""
    def write(text: str, name: str = "program.csc") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return write
