"""Vectorized denotations over many states of possibly several instances.

A concept denotation is one flat boolean vector holding, per instance, a
(states, objects) block; a role denotation holds (states, objects, objects)
blocks. Flat storage makes intersection, negation and hashing one numpy call.
"""
from __future__ import annotations

import numpy as np

from ..errors import UnknownPredicate
from .syntax import (BEmpty, BNullary, CAll, CAnd, CBot, CEqual, CNot, COneOf, Concept, CPrimitive,
                     CSome, CTop, NCount, NDistance, RInverse, RPrimitive, RRestrict, RTransitiveClosure)

# Stand-in for an infinite distance inside integer arrays; larger than any real count.
INF_VALUE = 1_000_000_000


class Block:
    """Truth tables of one instance over a batch of its states."""

    def __init__(self, task, states):
        self.task = task
        self.num_states = len(states)
        self.objects = list(task.objects)
        self.n = len(self.objects)
        self.obj_index = {o: i for i, o in enumerate(self.objects)}
        self.truth = task.state_matrix(states) if states else np.zeros((0, task.num_atoms), bool)
        goal = np.zeros(task.num_atoms, dtype=bool)
        for atom, positive in task.goal_atoms():
            if positive:
                goal[task.atom_index[atom]] = True
        self.goal = goal
        by_pred = {}
        for i, a in enumerate(task.atoms):
            by_pred.setdefault(a.predicate, []).append(i)
        self.by_predicate = {p: np.asarray(ids, dtype=np.int64) for p, ids in by_pred.items()}
        self.args = {p: np.asarray([[self.obj_index[x] for x in task.atoms[i].args] for i in ids],
                                   dtype=np.int64).reshape(len(ids), -1)
                     for p, ids in by_pred.items()}

    def _rows(self, predicate, goal):
        ids = self.by_predicate.get(predicate)
        if ids is None:
            return None
        if goal:
            return np.broadcast_to(self.goal[ids], (self.num_states, len(ids)))
        return self.truth[:, ids]

    def primitive_concept(self, predicate, position, goal):
        out = np.zeros((self.num_states, self.n), dtype=bool)
        if predicate not in self.task.predicates:
            types = self.task.object_types
            if goal or not any(predicate in ts for ts in types.values()):
                raise UnknownPredicate(f"unknown predicate {predicate!r}")
            members = [self.obj_index[o] for o, ts in types.items() if predicate in ts]
            out[:, members] = True
            return out
        rows = self._rows(predicate, goal)
        if rows is None or position >= self.args[predicate].shape[1]:
            return out
        onehot = np.zeros((rows.shape[1], self.n), dtype=np.int32)
        onehot[np.arange(rows.shape[1]), self.args[predicate][:, position]] = 1
        return (rows.astype(np.int32) @ onehot) > 0

    def primitive_role(self, predicate, first, second, goal):
        n = self.n
        out = np.zeros((self.num_states, n * n), dtype=bool)
        if predicate not in self.task.predicates:
            raise UnknownPredicate(f"unknown predicate {predicate!r}")
        rows = self._rows(predicate, goal)
        if rows is None or max(first, second) >= self.args[predicate].shape[1]:
            return out.reshape(self.num_states, n, n)
        args = self.args[predicate]
        onehot = np.zeros((rows.shape[1], n * n), dtype=np.int32)
        onehot[np.arange(rows.shape[1]), args[:, first] * n + args[:, second]] = 1
        return ((rows.astype(np.int32) @ onehot) > 0).reshape(self.num_states, n, n)

    def nullary(self, predicate, goal):
        if predicate not in self.task.predicates:
            raise UnknownPredicate(f"unknown predicate {predicate!r}")
        rows = self._rows(predicate, goal)
        if rows is None:
            return np.zeros(self.num_states, dtype=bool)
        return rows.any(axis=1)


def _closure(r):
    """Transitive closure of a batch of (n, n) boolean matrices."""
    x = r.copy()
    while True:
        step = (x.astype(np.int32) @ x.astype(np.int32)) > 0
        nxt = x | step
        if np.array_equal(nxt, x):
            return x
        x = nxt


def _distance(c, r, d):
    """Batched shortest R-chain length from C to D (INF_VALUE when none)."""
    s, n = c.shape
    dist = np.full(s, INF_VALUE, dtype=np.int64)
    dist[(c & d).any(axis=1)] = 0
    frontier = c.copy()
    reached = c.copy()
    ri = r.astype(np.int32)
    for step in range(1, n + 1):
        frontier = (np.einsum("sa,sab->sb", frontier.astype(np.int32), ri) > 0) & ~reached
        if not frontier.any():
            break
        reached |= frontier
        hit = (frontier & d).any(axis=1) & (dist == INF_VALUE)
        dist[hit] = step
    return dist


class BatchEvaluator:
    """Memoized denotations of expressions over a fixed list of blocks."""

    def __init__(self, blocks):
        self.blocks = list(blocks)
        self.num_states = sum(b.num_states for b in self.blocks)
        self._memo = {}

    @classmethod
    def for_states(cls, task, states):
        return cls([Block(task, list(states))])

    @classmethod
    def for_spaces(cls, spaces):
        return cls([Block(sp.task, sp.states) for sp in spaces])

    # --- flat <-> per-block views ---------------------------------------------

    def split_concept(self, flat):
        out, pos = [], 0
        for b in self.blocks:
            size = b.num_states * b.n
            out.append(flat[pos:pos + size].reshape(b.num_states, b.n))
            pos += size
        return out

    def split_role(self, flat):
        out, pos = [], 0
        for b in self.blocks:
            size = b.num_states * b.n * b.n
            out.append(flat[pos:pos + size].reshape(b.num_states, b.n, b.n))
            pos += size
        return out

    @staticmethod
    def join(parts):
        return np.concatenate([p.ravel() for p in parts]) if parts else np.zeros(0, dtype=bool)

    # --- denotations ----------------------------------------------------------

    def denote(self, expr, memo=True):
        hit = self._memo.get(expr)
        if hit is not None:
            return hit
        value = self._compute(expr)
        value.flags.writeable = False
        if memo:
            self._memo[expr] = value
        return value

    def forget(self, expr):
        self._memo.pop(expr, None)

    def _compute(self, e):
        blocks = self.blocks
        if isinstance(e, CPrimitive):
            return self.join([b.primitive_concept(e.predicate, e.position, e.goal) for b in blocks])
        if isinstance(e, CTop):
            return np.ones(sum(b.num_states * b.n for b in blocks), dtype=bool)
        if isinstance(e, CBot):
            return np.zeros(sum(b.num_states * b.n for b in blocks), dtype=bool)
        if isinstance(e, COneOf):
            parts = []
            for b in blocks:
                x = np.zeros((b.num_states, b.n), dtype=bool)
                if e.obj in b.obj_index:
                    x[:, b.obj_index[e.obj]] = True
                parts.append(x)
            return self.join(parts)
        if isinstance(e, CNot):
            return ~self.denote(e.concept)
        if isinstance(e, CAnd):
            return self.denote(e.left) & self.denote(e.right)
        if isinstance(e, (CSome, CAll)):
            rs = self.split_role(self.denote(e.role))
            cs = self.split_concept(self.denote(e.concept))
            if isinstance(e, CSome):
                return self.join([(r & c[:, None, :]).any(axis=2) for r, c in zip(rs, cs)])
            return self.join([~(r & ~c[:, None, :]).any(axis=2) for r, c in zip(rs, cs)])
        if isinstance(e, CEqual):
            rs = self.split_role(self.denote(e.left))
            ss = self.split_role(self.denote(e.right))
            return self.join([(r == s).all(axis=2) for r, s in zip(rs, ss)])
        if isinstance(e, RPrimitive):
            return self.join([b.primitive_role(e.predicate, e.first, e.second, e.goal) for b in blocks])
        if isinstance(e, RInverse):
            return self.join([r.transpose(0, 2, 1) for r in self.split_role(self.denote(e.role))])
        if isinstance(e, RTransitiveClosure):
            return self.join([_closure(r) for r in self.split_role(self.denote(e.role))])
        if isinstance(e, RRestrict):
            rs = self.split_role(self.denote(e.role))
            cs = self.split_concept(self.denote(e.concept))
            return self.join([r & c[:, None, :] for r, c in zip(rs, cs)])
        raise TypeError(f"cannot denote {e!r}")

    def cardinalities(self, expr):
        flat = self.denote(expr)
        if isinstance(expr, Concept):
            parts = self.split_concept(flat)
            return np.concatenate([p.sum(axis=1) for p in parts]) if parts else np.zeros(0, np.int64)
        parts = self.split_role(flat)
        return np.concatenate([p.sum(axis=(1, 2)) for p in parts]) if parts else np.zeros(0, np.int64)

    def values(self, feature):
        """Integer valuation vector (Booleans as 0/1, infinity as INF_VALUE)."""
        if isinstance(feature, BNullary):
            v = np.concatenate([b.nullary(feature.predicate, feature.goal) for b in self.blocks])
        elif isinstance(feature, BEmpty):
            v = self.cardinalities(feature.arg) == 0
        elif isinstance(feature, NCount):
            v = self.cardinalities(feature.arg)
        elif isinstance(feature, NDistance):
            cs = self.split_concept(self.denote(feature.source))
            rs = self.split_role(self.denote(feature.role))
            ds = self.split_concept(self.denote(feature.target))
            v = np.concatenate([_distance(c, r, d) for c, r, d in zip(cs, rs, ds)])
        else:
            raise TypeError(f"not a feature: {feature!r}")
        return np.asarray(v, dtype=np.int64)


def evaluate_features(features, task, states):
    """(len(features), len(states)) valuation matrix for one instance."""
    ev = BatchEvaluator.for_states(task, states)
    if not features:
        return np.zeros((0, len(states)), dtype=np.int64)
    return np.vstack([ev.values(f) for f in features])
