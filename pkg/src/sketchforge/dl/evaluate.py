"""Set-based denotations of expressions in a single state."""
from __future__ import annotations

import math
from collections import defaultdict, deque

from ..errors import UnknownPredicate
from ..pddl.grounding import GroundTask, bits
from .syntax import (BEmpty, BNullary, CAll, CAnd, CBot, CEqual, CNot, COneOf, Concept, CPrimitive,
                     CSome, CTop, NCount, NDistance, RInverse, RPrimitive, RRestrict, RTransitiveClosure)

INFINITY = math.inf


class StateView:
    """Atoms of one state (and of the goal) grouped by predicate."""

    def __init__(self, task: GroundTask, state: int):
        self.task = task
        self.universe = frozenset(task.objects)
        self.facts = defaultdict(set)
        for i in bits(state):
            a = task.atoms[i]
            self.facts[a.predicate].add(a.args)
        self.goal_facts = defaultdict(set)
        for atom, positive in task.goal_atoms():
            if positive:
                self.goal_facts[atom.predicate].add(atom.args)

    def tuples(self, predicate, goal):
        if predicate in self.task.predicates:
            return (self.goal_facts if goal else self.facts)[predicate]
        if not goal and _is_type(self.task, predicate):
            return {(o,) for o, ts in self.task.object_types.items() if predicate in ts}
        raise UnknownPredicate(f"unknown predicate {predicate!r}")


def _is_type(task, name):
    return any(name in ts for ts in task.object_types.values())


def evaluate_concept(expr, view: StateView) -> frozenset:
    if isinstance(expr, CPrimitive):
        return frozenset(t[expr.position] for t in view.tuples(expr.predicate, expr.goal)
                         if expr.position < len(t))
    if isinstance(expr, CTop):
        return view.universe
    if isinstance(expr, CBot):
        return frozenset()
    if isinstance(expr, COneOf):
        return frozenset({expr.obj}) & view.universe
    if isinstance(expr, CNot):
        return view.universe - evaluate_concept(expr.concept, view)
    if isinstance(expr, CAnd):
        return evaluate_concept(expr.left, view) & evaluate_concept(expr.right, view)
    if isinstance(expr, CSome):
        r = evaluate_role(expr.role, view)
        c = evaluate_concept(expr.concept, view)
        return frozenset(a for a, b in r if b in c)
    if isinstance(expr, CAll):
        r = evaluate_role(expr.role, view)
        c = evaluate_concept(expr.concept, view)
        return view.universe - {a for a, b in r if b not in c}
    if isinstance(expr, CEqual):
        r = _successors(evaluate_role(expr.left, view))
        s = _successors(evaluate_role(expr.right, view))
        return frozenset(a for a in view.universe if r.get(a, set()) == s.get(a, set()))
    raise TypeError(f"not a concept: {expr!r}")


def _successors(pairs):
    out = defaultdict(set)
    for a, b in pairs:
        out[a].add(b)
    return out


def evaluate_role(expr, view: StateView) -> frozenset:
    if isinstance(expr, RPrimitive):
        return frozenset((t[expr.first], t[expr.second]) for t in view.tuples(expr.predicate, expr.goal)
                         if max(expr.first, expr.second) < len(t))
    if isinstance(expr, RInverse):
        return frozenset((b, a) for a, b in evaluate_role(expr.role, view))
    if isinstance(expr, RTransitiveClosure):
        base = _successors(evaluate_role(expr.role, view))
        closure = set()
        for a in list(base):
            seen = set()
            queue = deque(base[a])
            while queue:
                b = queue.popleft()
                if b in seen:
                    continue
                seen.add(b)
                queue.extend(base.get(b, ()))
            closure.update((a, b) for b in seen)
        return frozenset(closure)
    if isinstance(expr, RRestrict):
        c = evaluate_concept(expr.concept, view)
        return frozenset((a, b) for a, b in evaluate_role(expr.role, view) if b in c)
    raise TypeError(f"not a role: {expr!r}")


def _denotation(expr, view):
    return evaluate_concept(expr, view) if isinstance(expr, Concept) else evaluate_role(expr, view)


def evaluate_feature(feature, view: StateView):
    """Boolean, natural number, or ``math.inf`` for unreachable distances."""
    if isinstance(feature, BNullary):
        return () in view.tuples(feature.predicate, feature.goal)
    if isinstance(feature, BEmpty):
        return len(_denotation(feature.arg, view)) == 0
    if isinstance(feature, NCount):
        return len(_denotation(feature.arg, view))
    if isinstance(feature, NDistance):
        sources = evaluate_concept(feature.source, view)
        targets = evaluate_concept(feature.target, view)
        edges = _successors(evaluate_role(feature.role, view))
        frontier = set(sources)
        seen = set(sources)
        n = 0
        while frontier:
            if frontier & targets:
                return n
            nxt = set()
            for a in frontier:
                nxt.update(edges.get(a, ()))
            frontier = nxt - seen
            seen |= nxt
            n += 1
        return INFINITY
    raise TypeError(f"not a feature: {feature!r}")
