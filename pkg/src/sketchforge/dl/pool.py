"""Bounded feature-pool generation with valuation-based pruning."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import PoolExplosion
from ..pddl.model import ROOT_TYPE
from .batch import INF_VALUE, BatchEvaluator
from .syntax import (BEmpty, BNullary, CAll, CAnd, CBot, CEqual, CNot, COneOf, CPrimitive, CSome,
                     CTop, Feature, NCount, NDistance, RInverse, RPrimitive, RRestrict,
                     RTransitiveClosure)

log = logging.getLogger(__name__)

DEFAULT_MAX_CANDIDATES = 200_000


@dataclass
class FeaturePool:
    features: list[Feature]
    valuations: np.ndarray  # (num_features, num_states), ints; Booleans as 0/1
    offsets: list[int]  # start column of each instance's states
    evaluator: BatchEvaluator | None = field(default=None, repr=False)

    def __post_init__(self):
        self._index = {f: i for i, f in enumerate(self.features)}

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def index(self, feature):
        return self._index[feature]

    def __contains__(self, feature):
        return feature in self._index

    @property
    def complexities(self):
        return np.asarray([f.complexity for f in self.features], dtype=np.int64)

    @property
    def boolean_mask(self):
        return np.asarray([f.boolean for f in self.features], dtype=bool)

    def instance_values(self, instance):
        end = self.offsets[instance + 1] if instance + 1 < len(self.offsets) else self.valuations.shape[1]
        return self.valuations[:, self.offsets[instance]:end]

    def add(self, feature):
        """Append ``feature`` even if an equivalent one exists; returns its id."""
        if feature in self._index:
            return self._index[feature]
        if self.evaluator is None:
            raise ValueError("pool was built without an evaluator")
        row = self.evaluator.values(feature)[None, :]
        self.valuations = np.vstack([self.valuations, row])
        self.features.append(feature)
        self._index[feature] = len(self.features) - 1
        return len(self.features) - 1

    def text(self):
        return "\n".join(f"{f.complexity}\t{f.text()}" for f in self.features)


def _key(array):
    return np.packbits(array).tobytes() + len(array).to_bytes(8, "little")


class _Layered:
    """Expressions of one sort stored per complexity, deduplicated by denotation."""

    def __init__(self, evaluator, budget):
        self.ev = evaluator
        self.by_complexity = {}
        self.seen = set()
        self.budget = budget
        self.candidates = 0

    def offer(self, exprs):
        kept = []
        for e in sorted(set(exprs), key=lambda x: x.sort_key()):
            self.candidates += 1
            if self.candidates > self.budget:
                raise PoolExplosion(f"more than {self.budget} candidate expressions")
            den = self.ev.denote(e)
            k = _key(den)
            if k in self.seen:
                self.ev.forget(e)
                continue
            self.seen.add(k)
            kept.append(e)
            self.by_complexity.setdefault(e.complexity, []).append(e)
        return kept

    def at(self, c):
        return self.by_complexity.get(c, [])

    def upto(self, c):
        return [e for k in sorted(self.by_complexity) if k <= c for e in self.by_complexity[k]]


def _vocabulary(tasks):
    """Predicates with arities, goal predicates, type names and constants of the tasks."""
    arities = {}
    goal_preds = set()
    types = set()
    constants = []
    for t in tasks:
        arities.update(t.predicates)
        for atom, positive in t.goal_atoms():
            if positive:
                goal_preds.add(atom.predicate)
        for ts in t.object_types.values():
            types.update(ts)
        for c in t.constants:
            if c not in constants:
                constants.append(c)
    types.discard(ROOT_TYPE)
    types -= set(arities)
    return arities, goal_preds, sorted(types), constants


def primitive_concepts(arities, goal_preds, types, constants):
    out = [CTop(), CBot()]
    for p in sorted(arities):
        for i in range(arities[p]):
            out.append(CPrimitive(p, i))
            if p in goal_preds:
                out.append(CPrimitive(p, i, True))
    out.extend(CPrimitive(t, 0) for t in types)
    out.extend(COneOf(c) for c in constants)
    return out


def primitive_roles(arities, goal_preds):
    out = []
    for p in sorted(arities):
        for i in range(arities[p]):
            for j in range(i + 1, arities[p]):
                out.append(RPrimitive(p, i, j))
                if p in goal_preds:
                    out.append(RPrimitive(p, i, j, True))
    return out


def generate_pool(spaces, max_complexity=8, include_distance=False,
                  max_candidates=DEFAULT_MAX_CANDIDATES) -> FeaturePool:
    """All grammar features up to ``max_complexity``, pruned by valuation vectors.

    ``spaces`` are the sample state spaces (any objects with ``task`` and
    ``states``); their union is the sample used for pruning. Among features with
    identical valuations the one smallest in (complexity, text) order is kept.
    """
    spaces = list(spaces)
    if not spaces or not any(len(sp.states) for sp in spaces):
        raise ValueError("feature generation needs at least one sample state")
    ev = BatchEvaluator.for_spaces(spaces)
    arities, goal_preds, types, constants = _vocabulary([sp.task for sp in spaces])
    limit = max_complexity - 1  # one rule is spent on the feature constructor

    roles = _Layered(ev, max_candidates)
    concepts = _Layered(ev, max_candidates)
    prim_roles = primitive_roles(arities, goal_preds)
    prim_concepts = primitive_concepts(arities, goal_preds, types, constants)
    if limit >= 1:
        roles.offer(prim_roles)
        concepts.offer(prim_concepts)
    if limit >= 2:
        roles.offer([RInverse(r) for r in prim_roles] + [RTransitiveClosure(r) for r in prim_roles])
    if limit >= 3:
        roles.offer([RRestrict(r, c) for r in prim_roles for c in prim_concepts
                     if isinstance(c, CPrimitive)])

    for c in range(2, limit + 1):
        cand = [CNot(x) for x in concepts.at(c - 1)]
        for i in range(1, c - 1):
            j = c - 1 - i
            if i > j:
                break
            left, right = concepts.at(i), concepts.at(j)
            for a_pos, a in enumerate(left):
                for b in (right[a_pos + 1:] if i == j else right):
                    cand.append(CAnd(a, b) if a.sort_key() <= b.sort_key() else CAnd(b, a))
        for i in range(1, c - 1):
            for r in roles.at(i):
                for x in concepts.at(c - 1 - i):
                    cand.append(CSome(r, x))
                    cand.append(CAll(r, x))
            j = c - 1 - i
            if j >= i:
                left, right = roles.at(i), roles.at(j)
                for a_pos, a in enumerate(left):
                    for b in (right[a_pos + 1:] if i == j else right):
                        cand.append(CEqual(a, b) if a.sort_key() <= b.sort_key() else CEqual(b, a))
        concepts.offer(cand)
        log.debug("complexity %d: %d concepts", c, len(concepts.at(c)))

    features = [BNullary(p) for p in sorted(arities) if arities[p] == 0]
    features += [BNullary(p, True) for p in sorted(arities) if arities[p] == 0 and p in goal_preds]
    for x in concepts.upto(limit) + roles.upto(limit):
        features.append(BEmpty(x))
        features.append(NCount(x))
    if include_distance:
        for r in roles.upto(2):
            for a in concepts.upto(limit - r.complexity - 1):
                for b in concepts.upto(limit - r.complexity - a.complexity):
                    features.append(NDistance(a, r, b))
    if len(features) > max_candidates:
        raise PoolExplosion(f"{len(features)} candidate features exceed the cap of {max_candidates}")

    features.sort(key=lambda f: f.sort_key())
    kept, rows, seen = [], [], set()
    for f in features:
        v = ev.values(f)
        k = (f.boolean, v.tobytes())
        if k in seen:
            continue
        seen.add(k)
        kept.append(f)
        rows.append(v)
    offsets = np.cumsum([0] + [len(sp.states) for sp in spaces[:-1]]).tolist()
    vals = np.vstack(rows) if rows else np.zeros((0, ev.num_states), dtype=np.int64)
    log.info("feature pool: %d features from %d candidates", len(kept), len(features))
    return FeaturePool(kept, vals, offsets, ev)


__all__ = ["FeaturePool", "generate_pool", "INF_VALUE"]
