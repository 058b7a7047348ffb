"""Layered tuple graphs of a root state in an expanded space.

A tuple ``t`` (sorted atom indices, at most ``k`` of them) is optimally
reached at depth ``d(t)``, the BFS distance from the root to the nearest
state where every atom of ``t`` holds. Its contain set is every state at that
depth where ``t`` holds, i.e. the end states of all optimal plans for ``t``.
A tuple enters layer ``d + 1`` when some layer-``d`` tuple has all of its
contain states one step away from a contain state of the new tuple.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from ..errors import NotFullyExpanded
from ..pddl.grounding import bits
from ..statespace import UNREACHABLE


@dataclass(frozen=True)
class TupleNode:
    atoms: tuple[int, ...]
    distance: int
    contain: frozenset


@dataclass
class TupleGraph:
    root: int
    k: int
    layers: list[list[TupleNode]]

    def nodes(self):
        return [n for layer in self.layers for n in layer]

    def __len__(self):
        return sum(len(layer) for layer in self.layers)

    def find(self, atoms):
        atoms = tuple(sorted(atoms))
        for layer in self.layers:
            for n in layer:
                if n.atoms == atoms:
                    return n
        return None


def state_tuples(mask, k):
    """All tuples of 1..k atoms true in the atom bitset ``mask``."""
    atoms = bits(mask)
    out = []
    for size in range(1, k + 1):
        out.extend(combinations(atoms, size))
    return out


def tuple_graph(space, root: int, k: int) -> TupleGraph:
    if space.solvable is None:
        raise NotFullyExpanded("state space must be expanded and labelled")
    if k < 1:
        return TupleGraph(root, k, [])
    relevant = space.task.fluent_mask
    dist = space.distances_from(root)
    order = [s for s in sorted(range(len(space.states)), key=lambda s: dist[s]) if dist[s] != UNREACHABLE]

    # d(t) and the states at that depth where t holds
    first_depth = {}
    holders = {}
    tuples_of = {}
    for s in order:
        ts = state_tuples(space.states[s] & relevant, k)
        tuples_of[s] = ts
        d = dist[s]
        for t in ts:
            fd = first_depth.get(t)
            if fd is None:
                first_depth[t] = d
                holders[t] = [s]
            elif fd == d:
                holders[t].append(s)

    # tuples made true by successors one layer deeper
    def forward(s):
        d = dist[s] + 1
        out = set()
        for _, s2 in space.adjacency[s]:
            if dist[s2] == d:
                out.update(t for t in tuples_of[s2] if first_depth[t] == d)
        return out

    forward_cache = {}
    layer = [TupleNode(t, 0, frozenset(holders[t])) for t in tuples_of[root]]
    layers = []
    while layer:
        layer.sort(key=lambda n: n.atoms)
        layers.append(layer)
        by_contain = {}
        for node in layer:
            by_contain.setdefault(node.contain, node)
        nxt = set()
        for contain in by_contain:
            common = None
            for s in contain:
                f = forward_cache.get(s)
                if f is None:
                    f = forward_cache[s] = forward(s)
                common = set(f) if common is None else common & f
                if not common:
                    break
            if common:
                nxt |= common
        d = len(layers)
        layer = [TupleNode(t, d, frozenset(holders[t])) for t in nxt]
    return TupleGraph(root, k, layers)
