"""Explicit breadth-first state spaces for small instances."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import CapacityExceeded
from .pddl.grounding import GroundTask, bits

DEFAULT_MAX_STATES = 10_000
UNREACHABLE = -1


@dataclass
class StateSpace:
    task: GroundTask
    states: list[int]  # index -> atom bitset
    index: dict  # atom bitset -> index
    adjacency: list[list[tuple[int, int]]]  # index -> [(action, successor)]
    goal: np.ndarray
    depth: np.ndarray
    max_states: int
    solvable: np.ndarray | None = None
    initial: int = 0
    _dist_cache: dict = field(default_factory=dict, repr=False)
    _goal_dist: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.states)

    @property
    def num_states(self):
        return len(self.states)

    @property
    def alive(self):
        return self.solvable & ~self.goal

    @property
    def dead_end(self):
        return ~self.solvable

    def successors(self, s):
        return self.adjacency[s]

    def edges(self):
        """All (source, target) pairs, self-loops included, as two int arrays."""
        src = [s for s, succ in enumerate(self.adjacency) for _ in succ]
        dst = [t for succ in self.adjacency for _, t in succ]
        return np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)

    def distances_from(self, source):
        """Exact BFS distances from ``source``; unreachable states get ``UNREACHABLE``."""
        if not 0 <= source < len(self.states):
            raise IndexError(f"state {source} out of range [0, {len(self.states)})")
        cached = self._dist_cache.get(source)
        if cached is not None:
            return cached
        dist = np.full(len(self.states), UNREACHABLE, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        while queue:
            s = queue.popleft()
            d = dist[s] + 1
            for _, t in self.adjacency[s]:
                if dist[t] == UNREACHABLE:
                    dist[t] = d
                    queue.append(t)
        dist.flags.writeable = False
        self._dist_cache[source] = dist
        return dist

    def all_pairs_distances(self):
        """Full distance matrix via scipy; an independent route to ``distances_from``."""
        src, dst = self.edges()
        keep = src != dst
        n = len(self.states)
        graph = csr_matrix((np.ones(int(keep.sum())), (src[keep], dst[keep])), shape=(n, n))
        d = shortest_path(graph, method="D", unweighted=True, directed=True)
        out = np.where(np.isinf(d), UNREACHABLE, d).astype(np.int64)
        return out

    def goal_distances(self):
        """Distance from every state to its nearest goal state."""
        if self._goal_dist is None:
            n = len(self.states)
            rev = [[] for _ in range(n)]
            for s, succ in enumerate(self.adjacency):
                for _, t in succ:
                    rev[t].append(s)
            dist = np.full(n, UNREACHABLE, dtype=np.int64)
            queue = deque(np.flatnonzero(self.goal).tolist())
            dist[list(queue)] = 0
            while queue:
                t = queue.popleft()
                for s in rev[t]:
                    if dist[s] == UNREACHABLE:
                        dist[s] = dist[t] + 1
                        queue.append(s)
            self._goal_dist = dist
        return self._goal_dist

    def atoms_of(self, s):
        return self.task.true_atoms(self.states[s])

    def to_json(self):
        return {
            "task": self.task.name,
            "states": [bits(x) for x in self.states],
            "edges": [[s, a, t] for s, succ in enumerate(self.adjacency) for a, t in succ],
            "initial": self.initial,
            "goal": np.flatnonzero(self.goal).tolist(),
            "solvable": np.flatnonzero(self.solvable).tolist() if self.solvable is not None else None,
            "depth": self.depth.tolist(),
        }

    def dumps(self):
        return json.dumps(self.to_json())


def expand(task: GroundTask, max_states: int = DEFAULT_MAX_STATES, label: bool = True) -> StateSpace:
    """Breadth-first expansion from the initial state.

    State indices follow discovery order and successors follow action-table
    order, so two expansions of the same task are index-identical.
    """
    if max_states < 1:
        raise ValueError("max_states must be at least 1")
    states = [task.initial]
    index = {task.initial: 0}
    adjacency = []
    depth = [0]
    head = 0
    while head < len(states):
        s = states[head]
        succ = []
        for a, t in task.successors(s):
            j = index.get(t)
            if j is None:
                if len(states) >= max_states:
                    raise CapacityExceeded(max_states)
                j = index[t] = len(states)
                states.append(t)
                depth.append(depth[head] + 1)
            succ.append((a, j))
        adjacency.append(succ)
        head += 1
    goal = np.fromiter((task.is_goal(x) for x in states), dtype=bool, count=len(states))
    space = StateSpace(task, states, index, adjacency, goal, np.asarray(depth, dtype=np.int64), max_states)
    if label:
        label_solvability(space)
    return space


def label_solvability(space: StateSpace) -> StateSpace:
    """Mark states from which some goal state is reachable."""
    space.solvable = space.goal_distances() != UNREACHABLE
    return space
