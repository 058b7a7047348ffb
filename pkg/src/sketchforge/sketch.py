"""Sketch rules over features: representation, semantics and a text format.

File format (line oriented, ``#`` starts a comment)::

    feature H = b_empty(c_primitive(empty,0))
    feature n = n_count(c_primitive(at,0))
    rule { neg(H), gt(n) } -> { dec(n), unk(H) }

Conditions are ``pos``/``neg`` on Boolean features and ``eq``/``gt`` (meaning
``= 0`` / ``> 0``) on numerical ones. Effects are ``pos``/``neg``/``unk`` on
Boolean features and ``dec``/``inc``/``unk`` on numerical ones; a feature a
rule does not mention must keep its value.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .dl.batch import INF_VALUE, evaluate_features
from .dl.evaluate import StateView, evaluate_feature
from .dl.syntax import Feature, parse_feature
from .errors import FeatureTypeMismatch, MissingFeature, SketchSyntaxError, UnknownFeature
from .statespace import UNREACHABLE

log = logging.getLogger(__name__)

BOOLEAN_CONDITIONS = ("pos", "neg")
NUMERICAL_CONDITIONS = ("eq", "gt")
BOOLEAN_EFFECTS = ("pos", "neg", "unk")
NUMERICAL_EFFECTS = ("dec", "inc", "unk")


@dataclass(frozen=True)
class Condition:
    feature: str
    test: str  # pos | neg | eq | gt

    def holds(self, value):
        if self.test == "pos":
            return bool(value)
        if self.test == "neg":
            return not value
        if self.test == "eq":
            return value == 0
        return value > 0

    def text(self):
        return f"{self.test}({self.feature})"


@dataclass(frozen=True)
class Effect:
    feature: str
    change: str  # pos | neg | unk | dec | inc

    def holds(self, before, after):
        if self.change == "pos":
            return bool(after)
        if self.change == "neg":
            return not after
        if self.change == "dec":
            return after < before
        if self.change == "inc":
            return after > before
        return True

    def text(self):
        return f"{self.change}({self.feature})"


@dataclass(frozen=True)
class Rule:
    conditions: tuple[Condition, ...] = ()
    effects: tuple[Effect, ...] = ()

    def condition_on(self, name):
        for c in self.conditions:
            if c.feature == name:
                return c
        return None

    def effect_on(self, name):
        for e in self.effects:
            if e.feature == name:
                return e
        return None

    def features(self):
        return {c.feature for c in self.conditions} | {e.feature for e in self.effects}


@dataclass
class Sketch:
    features: dict = field(default_factory=dict)  # name -> Feature, in declaration order
    rules: list[Rule] = field(default_factory=list)

    def __post_init__(self):
        for rule in self.rules:
            _check_rule(rule, self.features)

    @property
    def names(self):
        return list(self.features)

    @property
    def feature_list(self):
        return list(self.features.values())

    def __len__(self):
        return len(self.rules)

    def objective(self, feature_weight=1, rule_weight=1):
        return (feature_weight * sum(f.complexity for f in self.features.values())
                + rule_weight * len(self.rules))

    def max_complexity(self):
        return max((f.complexity for f in self.features.values()), default=0)

    def text(self):
        return serialize_sketch(self)

    def valuation(self, task, states):
        """(features, states) integer matrix; infinity is ``INF_VALUE``."""
        return evaluate_features(self.feature_list, task, states)

    def rule_matrix(self, valuation, source_column, rule):
        """Boolean vector: does (f(source), f(s')) satisfy ``rule`` for every column s'."""
        return _rule_vector(self, rule, valuation, source_column)

    def satisfied_any(self, valuation, source_column):
        out = np.zeros(valuation.shape[1], dtype=bool)
        for rule in self.rules:
            out |= _rule_vector(self, rule, valuation, source_column)
        return out


def _check_rule(rule, features):
    seen_c, seen_e = set(), set()
    for c in rule.conditions:
        f = features.get(c.feature)
        if f is None:
            raise UnknownFeature(f"unknown feature {c.feature!r}")
        if c.feature in seen_c:
            raise SketchSyntaxError(f"two conditions on feature {c.feature!r}")
        seen_c.add(c.feature)
        allowed = BOOLEAN_CONDITIONS if f.boolean else NUMERICAL_CONDITIONS
        if c.test not in allowed:
            kind = "Boolean" if f.boolean else "numerical"
            raise FeatureTypeMismatch(f"condition {c.text()} on {kind} feature {c.feature!r}")
    for e in rule.effects:
        f = features.get(e.feature)
        if f is None:
            raise UnknownFeature(f"unknown feature {e.feature!r}")
        if e.feature in seen_e:
            raise SketchSyntaxError(f"two effects on feature {e.feature!r}")
        seen_e.add(e.feature)
        allowed = BOOLEAN_EFFECTS if f.boolean else NUMERICAL_EFFECTS
        if e.change not in allowed:
            kind = "Boolean" if f.boolean else "numerical"
            raise FeatureTypeMismatch(f"effect {e.text()} on {kind} feature {e.feature!r}")


def _value(valuation, name):
    try:
        return valuation[name]
    except (KeyError, IndexError):
        raise MissingFeature(f"valuation lacks feature {name!r}") from None


def satisfies(rule: Rule, before, after, features=None) -> bool:
    """Whether the valuation pair satisfies ``rule``.

    ``before``/``after`` map feature names to values. ``features`` lists the
    sketch's feature names; those the rule leaves unmentioned must not change.
    """
    names = list(features) if features is not None else sorted(set(before) | set(after))
    for c in rule.conditions:
        if not c.holds(_value(before, c.feature)):
            return False
    for name in names:
        v, w = _value(before, name), _value(after, name)
        e = rule.effect_on(name)
        if e is None:
            if v != w:
                return False
        elif not e.holds(v, w):
            return False
    return True


def _rule_vector(sketch, rule, valuation, source):
    n = valuation.shape[1]
    ok = np.ones(n, dtype=bool)
    for c in rule.conditions:
        i = sketch.names.index(c.feature)
        if not c.holds(valuation[i, source]):
            return np.zeros(n, dtype=bool)
    for i, name in enumerate(sketch.names):
        v = valuation[i, source]
        w = valuation[i]
        e = rule.effect_on(name)
        if e is None:
            ok &= w == v
        elif e.change == "pos":
            ok &= w != 0
        elif e.change == "neg":
            ok &= w == 0
        elif e.change == "dec":
            ok &= w < v
        elif e.change == "inc":
            ok &= w > v
    return ok


# --- subgoals over an expanded space ---------------------------------------------

class SpaceValuation:
    """Sketch feature values over every state of an expanded space."""

    def __init__(self, sketch: Sketch, space):
        self.sketch = sketch
        self.space = space
        self.matrix = sketch.valuation(space.task, space.states)

    def satisfied(self, s):
        """Boolean vector over states: some rule holds for (f(s), f(s'))."""
        return self.sketch.satisfied_any(self.matrix, s)

    def values(self, s):
        return {name: int(self.matrix[i, s]) for i, name in enumerate(self.sketch.names)}


def subgoal_states(sketch: Sketch, s: int, space, valuation: SpaceValuation | None = None) -> np.ndarray:
    """Indices of G_R(s): goal states plus states s' != s reachable from s
    whose feature change from s satisfies some rule."""
    valuation = valuation or SpaceValuation(sketch, space)
    reach = space.distances_from(s) > 0
    mask = space.goal | (reach & valuation.satisfied(s))
    return np.flatnonzero(mask)


def closest_subgoals(sketch: Sketch, s: int, space, valuation: SpaceValuation | None = None):
    """(distance, states) of the members of G_R(s) nearest to s.

    Returns ``(UNREACHABLE, empty)`` when no member is reachable.
    """
    dist = space.distances_from(s)
    members = subgoal_states(sketch, s, space, valuation)
    members = members[dist[members] != UNREACHABLE]
    if len(members) == 0:
        return UNREACHABLE, np.zeros(0, dtype=np.int64)
    d = int(dist[members].min())
    return d, members[dist[members] == d]


class StateValuator:
    """Lazily evaluates sketch features on individual states of any task."""

    def __init__(self, sketch: Sketch, task):
        self.sketch = sketch
        self.task = task
        self._cache = {}

    def __call__(self, state):
        hit = self._cache.get(state)
        if hit is None:
            view = StateView(self.task, state)
            vals = []
            for f in self.sketch.feature_list:
                v = evaluate_feature(f, view)
                vals.append(INF_VALUE if v == math.inf else int(v))
            hit = self._cache[state] = np.asarray(vals, dtype=np.int64)
        return hit

    def satisfies_any(self, before_state, after_state):
        before = self(before_state)
        after = self(after_state)
        pair = np.stack([before, after], axis=1)
        return bool(self.sketch.satisfied_any(pair, 0)[1])


# --- text format ------------------------------------------------------------------

_FEATURE_LINE = re.compile(r"^feature\s+([A-Za-z_][A-Za-z0-9_\-]*)\s*=\s*(.+)$")
_RULE_LINE = re.compile(r"^rule\s*\{(.*)\}\s*->\s*\{(.*)\}$")
_ITEM = re.compile(r"^([a-z]+)\s*\(\s*([A-Za-z_][A-Za-z0-9_\-]*)\s*\)$")


def _items(body, lineno):
    body = body.strip()
    if not body:
        return []
    out = []
    for part in body.split(","):
        m = _ITEM.match(part.strip())
        if not m:
            raise SketchSyntaxError(f"malformed item {part.strip()!r}", lineno)
        out.append((m.group(1), m.group(2)))
    return out


def parse_sketch(text, predicates=None) -> Sketch:
    """Parse the sketch text format.

    Declared features all belong to the sketch even when no rule mentions them:
    such a feature must keep its value under every rule.
    """
    features = {}
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _FEATURE_LINE.match(line)
        if m:
            name = m.group(1)
            if name in features:
                raise SketchSyntaxError(f"feature {name!r} defined twice", lineno)
            try:
                features[name] = parse_feature(m.group(2), predicates)
            except SketchSyntaxError as exc:
                raise SketchSyntaxError(str(exc), lineno) from None
            continue
        m = _RULE_LINE.match(line)
        if m:
            conds, effs = _items(m.group(1), lineno), _items(m.group(2), lineno)
            for test, _ in conds:
                if test not in BOOLEAN_CONDITIONS + NUMERICAL_CONDITIONS:
                    raise SketchSyntaxError(f"unknown condition {test!r}", lineno)
            for change, _ in effs:
                if change not in BOOLEAN_EFFECTS + NUMERICAL_EFFECTS:
                    raise SketchSyntaxError(f"unknown effect {change!r}", lineno)
            rule = Rule(tuple(Condition(f, t) for t, f in conds), tuple(Effect(f, c) for c, f in effs))
            try:
                _check_rule(rule, features)
            except (UnknownFeature, FeatureTypeMismatch) as exc:
                raise type(exc)(f"{exc} (line {lineno})") from None
            if not rule.effects:
                log.warning("rule on line %d has no effects; it makes states their own subgoals", lineno)
            rules.append(rule)
            continue
        raise SketchSyntaxError(f"cannot parse {line!r}", lineno)
    return Sketch(features, [_canonical(r, list(features)) for r in rules])


def _canonical(rule, names):
    order = {n: i for i, n in enumerate(names)}
    return Rule(tuple(sorted(rule.conditions, key=lambda c: order[c.feature])),
                tuple(sorted(rule.effects, key=lambda e: order[e.feature])))


def serialize_sketch(sketch: Sketch) -> str:
    lines = [f"feature {name} = {f.text()}" for name, f in sketch.features.items()]
    names = list(sketch.features)
    for rule in sketch.rules:
        rule = _canonical(rule, names)
        conds = ", ".join(c.text() for c in rule.conditions)
        effs = ", ".join(e.text() for e in rule.effects)
        lines.append(f"rule {{ {conds} }} -> {{ {effs} }}".replace("{  }", "{ }"))
    return "\n".join(lines) + "\n" if lines else ""


def load_sketch(path, predicates=None) -> Sketch:
    with open(path, encoding="utf-8") as fh:
        return parse_sketch(fh.read(), predicates)


def from_pool(pool, feature_ids, rules, names=None) -> Sketch:
    """Build a sketch whose features are ``pool`` entries, named ``f<id>`` by default."""
    names = names or [f"f{i}" for i in feature_ids]
    return Sketch({n: pool.features[i] for n, i in zip(names, feature_ids)}, list(rules))
