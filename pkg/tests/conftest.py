from functools import lru_cache

import pytest

from sketchforge.domains import domain_path, generate_task, load_schema, sketch_path
from sketchforge.sketch import load_sketch
from sketchforge.statespace import expand


@lru_cache(maxsize=None)
def task_of(domain, *args):
    return generate_task(domain, *args)[2]


@lru_cache(maxsize=None)
def space_of(domain, *args):
    return expand(task_of(domain, *args))


@lru_cache(maxsize=None)
def bundled_sketch(name):
    return load_sketch(sketch_path(name))


def pddl_text(domain, *args):
    return generate_task(domain, *args)[1]


@pytest.fixture
def gripper1():
    return space_of("gripper", 1)


@pytest.fixture
def gripper2():
    return space_of("gripper", 2)


def state_where(space, *atoms):
    """Index of the unique state whose true fluent atoms are exactly ``atoms`` (plus statics)."""
    task = space.task
    wanted = {task.atom_index[a] for a in atoms}
    hits = []
    for s, mask in enumerate(space.states):
        fluent = {i for i in range(task.num_atoms) if (mask & task.fluent_mask) >> i & 1}
        if fluent == wanted:
            hits.append(s)
    assert len(hits) == 1, hits
    return hits[0]


__all__ = ["task_of", "space_of", "bundled_sketch", "pddl_text", "state_where", "domain_path",
           "load_schema", "report_criterion"]


ACCEPTANCE_LINES = []


def report_criterion(number, passed, detail):
    """Record one acceptance line; printed now and again in the terminal summary."""
    line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
