"""IW(k) and iterated IW over an abstract successor function."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable

from ..errors import Exhausted
from .novelty import NoveltyTable


@dataclass
class SearchResult:
    plan: list | None  # action indices; None on failure
    expanded: int = 0
    generated: int = 0
    width: int | None = None  # k at which the search succeeded
    end: Hashable | None = None  # state reached by the plan
    path: list = field(default_factory=list)  # states along the plan, start included
    episode_widths: list = field(default_factory=list)

    @property
    def solved(self):
        return self.plan is not None

    def to_json(self):
        return {
            "solved": self.solved,
            "plan_length": len(self.plan) if self.plan is not None else None,
            "expanded": self.expanded,
            "generated": self.generated,
            "width": self.width,
            "episode_widths": list(self.episode_widths),
            "max_width": max(self.episode_widths) if self.episode_widths else self.width,
            "mean_width": (sum(self.episode_widths) / len(self.episode_widths)
                           if self.episode_widths else None),
        }


Successors = Callable[[Hashable], Iterable[tuple[int, Hashable]]]


def _trace(parents, end):
    plan, path = [], [end]
    node = end
    while parents[node] is not None:
        action, node = parents[node]
        plan.append(action)
        path.append(node)
    plan.reverse()
    path.reverse()
    return plan, path


def iw(k: int, start, successors: Successors, test: Callable[[Hashable], bool],
       atoms: Callable[[Hashable], int] = lambda s: s, relevant: int = -1) -> SearchResult:
    """Breadth-first search that prunes states making no new tuple of ``k`` atoms true.

    States are arbitrary hashables; ``atoms`` maps a state to its atom bitset.
    The test is applied to the start state and to newly generated novel
    states. With ``k == 0`` only the start and its direct successors are tested.
    Raises :class:`Exhausted` when the search space is exhausted.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if test(start):
        return SearchResult([], 0, 0, k, start, [start])
    if k == 0:
        generated = 0
        for action, succ in successors(start):
            generated += 1
            if test(succ):
                return SearchResult([action], 1, generated, 0, succ, [start, succ])
        raise Exhausted(0, 1, generated)

    table = NoveltyTable(k, relevant)
    table.register(atoms(start))
    parents = {start: None}
    queue = deque([start])
    expanded = generated = 0
    while queue:
        s = queue.popleft()
        expanded += 1
        for action, succ in successors(s):
            generated += 1
            if succ in parents:
                continue
            if not table.register(atoms(succ)):
                continue
            parents[succ] = (action, s)
            if test(succ):
                plan, path = _trace(parents, succ)
                return SearchResult(plan, expanded, generated, k, succ, path)
            queue.append(succ)
    raise Exhausted(k, expanded, generated)


def iterated_iw(start, successors: Successors, test, k_max: int,
                atoms=lambda s: s, relevant: int = -1) -> SearchResult:
    """IW(0), IW(1), ... IW(k_max); the first success wins.

    On failure at every k the result has ``plan=None`` and ``width=None``.
    """
    expanded = generated = 0
    for k in range(k_max + 1):
        try:
            r = iw(k, start, successors, test, atoms, relevant)
        except Exhausted as exc:
            expanded += exc.expanded
            generated += exc.generated
            continue
        r.expanded += expanded
        r.generated += generated
        return r
    return SearchResult(None, expanded, generated, None)


# --- adapters ---------------------------------------------------------------------

def task_oracles(task):
    """(successors, atoms, relevant) for searching directly on a ground task."""
    return task.successors, (lambda s: s), task.fluent_mask


def space_oracles(space):
    """(successors, atoms, relevant) for searching over state indices of a space."""
    states = space.states
    adjacency = space.adjacency
    return (lambda s: adjacency[s]), (lambda s: states[s]), space.task.fluent_mask
