"""Incremental training: grow the training set with the smallest failing instance."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from ..dl.pool import generate_pool
from ..errors import CapacityExceeded, NonTermination
from ..sketch import Sketch, serialize_sketch
from ..statespace import expand
from ..verify import STRICT, check_width
from .config import LearnConfig
from .facts import build_facts
from .solver import solve

log = logging.getLogger(__name__)


@dataclass
class Iteration:
    index: int
    failing: str
    training: list[str]
    objective: int
    pool_size: int
    features: int
    rules: int
    stats: dict = field(default_factory=dict)

    def to_json(self):
        return {"iteration": self.index, "failing": self.failing, "training": self.training,
                "objective": self.objective, "pool_size": self.pool_size,
                "features": self.features, "rules": self.rules,
                "stats": {k: v for k, v in self.stats.items() if k != "seconds"}}


@dataclass
class LearnResult:
    sketch: Sketch
    iterations: list[Iteration]
    instances: list[dict]
    config: LearnConfig

    @property
    def solver_calls(self):
        return len(self.iterations)

    def audit(self):
        return {"config": self.config.to_dict(), "instances": self.instances,
                "iterations": [it.to_json() for it in self.iterations],
                "sketch": serialize_sketch(self.sketch)}

    def dumps(self):
        return json.dumps(self.audit(), indent=2, sort_keys=True)


def fails(sketch, space, k):
    """True when the sketch leaves a subproblem of width above ``k`` or a cycle.

    A sketch without rules fails wherever a state is alive: in the learning
    encoding only rule-satisfying pairs are subgoals, so the initial empty
    sketch gives those states nothing to reach.
    """
    if not sketch.rules:
        return bool(space.alive.any())
    return not check_width(sketch, space, k, STRICT).passed


def incremental_learn(tasks, config: LearnConfig, names=None) -> LearnResult:
    """Learn a sketch for ``tasks`` by repeatedly training on the smallest failure.

    Instances are ordered by number of states, ties broken by name (``names``
    defaults to the task names). Instances whose state space exceeds
    ``config.max_states`` are skipped. A failing instance larger than every
    instance trained on so far becomes the only training instance; otherwise it
    is added to the training set.
    """
    names = list(names) if names is not None else [t.name for t in tasks]
    records, entries = [], []
    for name, task in zip(names, tasks):
        try:
            space = expand(task, config.max_states)
        except CapacityExceeded:
            log.info("skipping %s: more than %d states", name, config.max_states)
            records.append({"name": name, "states": None, "skipped": True})
            continue
        entries.append((len(space), name, space))
        records.append({"name": name, "states": len(space), "skipped": False})
    entries.sort(key=lambda e: (e[0], e[1]))
    entries = entries[: config.max_instances]

    sketch = Sketch({}, [])
    training: list[int] = []
    largest = -1
    iterations = []
    for index in range(config.max_iterations + 1):
        failing = next((i for i, (_, _, space) in enumerate(entries)
                        if i not in training and fails(sketch, space, config.width)), None)
        if failing is None:
            if any(fails(sketch, entries[i][2], config.width) for i in training):
                log.warning("sketch passes on training data only in the s-width sense")
            return LearnResult(sketch, iterations, records, config)
        if index == config.max_iterations:
            break
        if failing > largest:
            training = [failing]
            largest = failing
        else:
            training = sorted(training + [failing])
        spaces = [entries[i][2] for i in training]
        pool = generate_pool(spaces, config.max_complexity, config.include_distance,
                             config.max_pool_candidates)
        facts = build_facts(spaces, pool, config.width)
        result = solve(facts, pool, config)
        sketch = result.sketch
        iterations.append(Iteration(index, entries[failing][1], [entries[i][1] for i in training],
                                    result.objective, len(pool), len(sketch.features),
                                    len(sketch.rules), result.stats))
        log.info("iteration %d: trained on %s, objective %d", index,
                 iterations[-1].training, result.objective)
    raise NonTermination(f"no sketch covering every instance after {config.max_iterations} iterations")
