"""Sketch learning: facts, exact solver, ASP emission and the incremental loop."""
from .asp import PROGRAM, emit_asp, emit_facts
from .config import LearnConfig, load_config
from .facts import InstanceFacts, LearnFacts, build_facts, subgoal_options
from .incremental import Iteration, LearnResult, incremental_learn
from .solver import SolveResult, assert_sound, solve

__all__ = [
    "PROGRAM", "emit_asp", "emit_facts", "LearnConfig", "load_config", "InstanceFacts",
    "LearnFacts", "build_facts", "subgoal_options", "Iteration", "LearnResult",
    "incremental_learn", "SolveResult", "assert_sound", "solve",
]
