"""Concept, role and feature expressions with a canonical text form.

Text form examples::

    c_primitive(at,1)            c_primitive(at_g,1)   (goal version)
    c_some(r_primitive(at,0,1),c_one_of(roomb))
    n_count(c_and(c_primitive(ball,0),c_not(c_primitive(at,0))))
    n_distance(c_primitive(at-truck,0),r_primitive(adjacent,0,1),c_primitive(at,1))
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import SketchSyntaxError

GOAL_SUFFIX = "_g"


def _pred(name, goal):
    return name + GOAL_SUFFIX if goal else name


class Expr:
    __slots__ = ()
    complexity: int

    def __str__(self):
        return self.text()

    def sort_key(self):
        return (self.complexity, self.text())


class Concept(Expr):
    __slots__ = ()


class Role(Expr):
    __slots__ = ()


# --- concepts -------------------------------------------------------------------

@dataclass(frozen=True)
class CPrimitive(Concept):
    predicate: str
    position: int
    goal: bool = False
    complexity = 1

    def text(self):
        return f"c_primitive({_pred(self.predicate, self.goal)},{self.position})"


@dataclass(frozen=True)
class CTop(Concept):
    complexity = 1

    def text(self):
        return "c_top"


@dataclass(frozen=True)
class CBot(Concept):
    complexity = 1

    def text(self):
        return "c_bot"


@dataclass(frozen=True)
class COneOf(Concept):
    obj: str
    complexity = 1

    def text(self):
        return f"c_one_of({self.obj})"


@dataclass(frozen=True)
class CNot(Concept):
    concept: Concept

    @property
    def complexity(self):
        return 1 + self.concept.complexity

    def text(self):
        return f"c_not({self.concept.text()})"


@dataclass(frozen=True)
class CAnd(Concept):
    left: Concept
    right: Concept

    @property
    def complexity(self):
        return 1 + self.left.complexity + self.right.complexity

    def text(self):
        return f"c_and({self.left.text()},{self.right.text()})"


@dataclass(frozen=True)
class CSome(Concept):
    role: Role
    concept: Concept

    @property
    def complexity(self):
        return 1 + self.role.complexity + self.concept.complexity

    def text(self):
        return f"c_some({self.role.text()},{self.concept.text()})"


@dataclass(frozen=True)
class CAll(Concept):
    role: Role
    concept: Concept

    @property
    def complexity(self):
        return 1 + self.role.complexity + self.concept.complexity

    def text(self):
        return f"c_all({self.role.text()},{self.concept.text()})"


@dataclass(frozen=True)
class CEqual(Concept):
    """Objects whose successors under both roles coincide."""

    left: Role
    right: Role

    @property
    def complexity(self):
        return 1 + self.left.complexity + self.right.complexity

    def text(self):
        return f"c_equal({self.left.text()},{self.right.text()})"


# --- roles ----------------------------------------------------------------------

@dataclass(frozen=True)
class RPrimitive(Role):
    predicate: str
    first: int
    second: int
    goal: bool = False
    complexity = 1

    def text(self):
        return f"r_primitive({_pred(self.predicate, self.goal)},{self.first},{self.second})"


@dataclass(frozen=True)
class RInverse(Role):
    role: RPrimitive

    @property
    def complexity(self):
        return 1 + self.role.complexity

    def text(self):
        return f"r_inverse({self.role.text()})"


@dataclass(frozen=True)
class RTransitiveClosure(Role):
    role: RPrimitive

    @property
    def complexity(self):
        return 1 + self.role.complexity

    def text(self):
        return f"r_transitive_closure({self.role.text()})"


@dataclass(frozen=True)
class RRestrict(Role):
    """Pairs of ``role`` whose second element belongs to ``concept``."""

    role: RPrimitive
    concept: CPrimitive

    @property
    def complexity(self):
        return 1 + self.role.complexity + self.concept.complexity

    def text(self):
        return f"r_restrict({self.role.text()},{self.concept.text()})"


# --- features -------------------------------------------------------------------

class Feature(Expr):
    __slots__ = ()
    boolean: bool

    @property
    def numerical(self):
        return not self.boolean


@dataclass(frozen=True)
class BNullary(Feature):
    predicate: str
    goal: bool = False
    complexity = 1
    boolean = True

    def text(self):
        return f"b_nullary({_pred(self.predicate, self.goal)})"


@dataclass(frozen=True)
class BEmpty(Feature):
    arg: Expr
    boolean = True

    @property
    def complexity(self):
        return 1 + self.arg.complexity

    def text(self):
        return f"b_empty({self.arg.text()})"


@dataclass(frozen=True)
class NCount(Feature):
    arg: Expr
    boolean = False

    @property
    def complexity(self):
        return 1 + self.arg.complexity

    def text(self):
        return f"n_count({self.arg.text()})"


@dataclass(frozen=True)
class NDistance(Feature):
    source: Concept
    role: Role
    target: Concept
    boolean = False

    def __post_init__(self):
        if self.role.complexity > 2:
            raise ValueError("distance role must have complexity at most 2")

    @property
    def complexity(self):
        return 1 + self.source.complexity + self.role.complexity + self.target.complexity

    def text(self):
        return f"n_distance({self.source.text()},{self.role.text()},{self.target.text()})"


def children(expr):
    """Direct sub-expressions."""
    if isinstance(expr, (CNot,)):
        return (expr.concept,)
    if isinstance(expr, CAnd):
        return (expr.left, expr.right)
    if isinstance(expr, (CSome, CAll)):
        return (expr.role, expr.concept)
    if isinstance(expr, CEqual):
        return (expr.left, expr.right)
    if isinstance(expr, (RInverse, RTransitiveClosure)):
        return (expr.role,)
    if isinstance(expr, RRestrict):
        return (expr.role, expr.concept)
    if isinstance(expr, (BEmpty, NCount)):
        return (expr.arg,)
    if isinstance(expr, NDistance):
        return (expr.source, expr.role, expr.target)
    return ()


def predicates_used(expr):
    """(predicate, goal) pairs referenced anywhere in ``expr``."""
    out = set()
    stack = [expr]
    while stack:
        e = stack.pop()
        if isinstance(e, (CPrimitive, RPrimitive, BNullary)):
            out.add((e.predicate, e.goal))
        stack.extend(children(e))
    return out


# --- parsing --------------------------------------------------------------------

_TOKEN = re.compile(r"\s*([A-Za-z0-9_\-\.@]+|[(),])")


def _tokens(text):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SketchSyntaxError(f"unexpected character {text[pos]!r} in expression {text!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def _split_goal(name, predicates):
    if predicates is not None and name in predicates:
        return name, False
    if name.endswith(GOAL_SUFFIX) and len(name) > len(GOAL_SUFFIX):
        return name[: -len(GOAL_SUFFIX)], True
    return name, False


def parse_expr(text, predicates=None):
    """Parse the canonical text form. ``predicates`` disambiguates names ending in ``_g``."""
    toks = _tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take(expected=None):
        nonlocal pos
        if pos >= len(toks):
            raise SketchSyntaxError(f"unexpected end of expression {text!r}")
        tok = toks[pos]
        if expected is not None and tok != expected:
            raise SketchSyntaxError(f"expected {expected!r} but found {tok!r} in {text!r}")
        pos += 1
        return tok

    def integer():
        tok = take()
        if not tok.isdigit():
            raise SketchSyntaxError(f"expected integer, found {tok!r} in {text!r}")
        return int(tok)

    def concept():
        e = node()
        if not isinstance(e, Concept):
            raise SketchSyntaxError(f"expected concept, found {e} in {text!r}")
        return e

    def role():
        e = node()
        if not isinstance(e, Role):
            raise SketchSyntaxError(f"expected role, found {e} in {text!r}")
        return e

    def node():
        head = take()
        if head == "c_top":
            return CTop()
        if head == "c_bot":
            return CBot()
        take("(")
        if head == "c_primitive":
            pred, goal = _split_goal(take(), predicates)
            take(",")
            e = CPrimitive(pred, integer(), goal)
        elif head == "c_one_of":
            e = COneOf(take().lower())
        elif head == "c_not":
            e = CNot(concept())
        elif head in ("c_and", "c_some", "c_all", "c_equal"):
            a = concept() if head == "c_and" else role()
            take(",")
            b = role() if head == "c_equal" else concept()
            e = {"c_and": CAnd, "c_some": CSome, "c_all": CAll, "c_equal": CEqual}[head](a, b)
        elif head == "r_primitive":
            pred, goal = _split_goal(take(), predicates)
            take(",")
            i = integer()
            take(",")
            e = RPrimitive(pred, i, integer(), goal)
        elif head in ("r_inverse", "r_transitive_closure"):
            r = role()
            if not isinstance(r, RPrimitive):
                raise SketchSyntaxError(f"{head} applies to primitive roles only")
            e = RInverse(r) if head == "r_inverse" else RTransitiveClosure(r)
        elif head == "r_restrict":
            r = role()
            take(",")
            c = concept()
            if not isinstance(r, RPrimitive) or not isinstance(c, CPrimitive):
                raise SketchSyntaxError("r_restrict applies to a primitive role and concept")
            e = RRestrict(r, c)
        elif head == "b_nullary":
            pred, goal = _split_goal(take(), predicates)
            e = BNullary(pred, goal)
        elif head in ("b_empty", "n_count"):
            arg = node()
            if isinstance(arg, Feature):
                raise SketchSyntaxError(f"{head} expects a concept or role")
            e = BEmpty(arg) if head == "b_empty" else NCount(arg)
        elif head == "n_distance":
            c = concept()
            take(",")
            r = role()
            take(",")
            d = concept()
            try:
                e = NDistance(c, r, d)
            except ValueError as exc:
                raise SketchSyntaxError(str(exc)) from None
        else:
            raise SketchSyntaxError(f"unknown constructor {head!r} in {text!r}")
        take(")")
        return e

    result = node()
    if peek() is not None:
        raise SketchSyntaxError(f"trailing tokens after expression {text!r}")
    return result


def parse_feature(text, predicates=None) -> Feature:
    e = parse_expr(text, predicates)
    if not isinstance(e, Feature):
        raise SketchSyntaxError(f"{text!r} is not a feature")
    return e
