"""Preprocessed learning data: labels, distances, tuple graphs and valuations."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NotFullyExpanded
from ..search.tuple_graph import tuple_graph


@dataclass
class InstanceFacts:
    name: str
    num_states: int
    solvable: np.ndarray
    goal: np.ndarray
    exceed: np.ndarray  # alive states: solvable and not goal
    pair_src: np.ndarray  # every (s, s') with s' != s reachable from s
    pair_dst: np.ndarray
    pair_dist: np.ndarray
    tuples: dict = field(default_factory=dict)  # alive state -> [(distance, contain states)]
    valuations: np.ndarray | None = None  # (features, states)

    def num_tuples(self):
        return sum(len(v) for v in self.tuples.values())


@dataclass
class LearnFacts:
    k: int
    instances: list[InstanceFacts]
    spaces: list = field(repr=False)
    pool: object = field(repr=False)

    @property
    def num_states(self):
        return sum(i.num_states for i in self.instances)


def subgoal_options(space, root, k):
    """Distinct (distance, contain set) pairs of the tuples of ``root``.

    For k = 0 the subproblems must be solvable in one step, so every
    successor is an option of its own.
    """
    if k == 0:
        dist = space.distances_from(root)
        succ = sorted({t for _, t in space.adjacency[root] if dist[t] == 1})
        return [(1, (t,)) for t in succ]
    graph = tuple_graph(space, root, k)
    options = {(n.distance, tuple(sorted(n.contain))) for n in graph.nodes()}
    return sorted(options)


def build_facts(spaces, pool, k) -> LearnFacts:
    """Facts for the learner; deterministic for fixed inputs."""
    instances = []
    for i, space in enumerate(spaces):
        if space.solvable is None:
            raise NotFullyExpanded(f"space {space.task.name} is not labelled")
        n = len(space.states)
        src, dst, dist = [], [], []
        for s in range(n):
            d = space.distances_from(s)
            reach = np.flatnonzero(d > 0)
            src.append(np.full(len(reach), s, dtype=np.int64))
            dst.append(reach)
            dist.append(d[reach])
        alive = space.solvable & ~space.goal
        facts = InstanceFacts(
            name=space.task.name, num_states=n, solvable=space.solvable.copy(), goal=space.goal.copy(),
            exceed=alive, pair_src=np.concatenate(src), pair_dst=np.concatenate(dst),
            pair_dist=np.concatenate(dist),
            valuations=pool.instance_values(i) if pool is not None else None,
        )
        for s in np.flatnonzero(alive).tolist():
            facts.tuples[s] = subgoal_options(space, s, k)
        instances.append(facts)
    return LearnFacts(k, instances, list(spaces), pool)
