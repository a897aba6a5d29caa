# csc/__init__.py
# Capture separation calculus: a type checker and a parallel interpreter for a
# lambda calculus that tracks captured capabilities and separation

from csc.capcalc import cv, is_reader, subcapture
from csc.errors import CscError, ParseError, PreservationViolation, StepLimit, Stuck, TypeCheckError
from csc.metacheck import ExploreReport, explore, preservation_replay, store_equiv
from csc.races import race_monitor
from csc.runtime import Configuration, LeftFirst, RandomSchedule, RightFirst, Scripted, Store, run, step
from csc.storetyping import store_context, typecheck_program
from csc.surface import parse, parse_program, pretty
from csc.typer import separated_sets, separated_terms, subtype, typecheck

__version__ = "0.1.0"
