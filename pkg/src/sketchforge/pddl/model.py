"""Lifted PDDL structures produced by the parser."""
from __future__ import annotations

from dataclasses import dataclass, field

ROOT_TYPE = "object"
EQUALITY = "="


@dataclass(frozen=True)
class Atom:
    """Predicate applied to terms. Terms starting with ``?`` are variables."""

    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self):
        if not self.args:
            return f"({self.predicate})"
        return f"({self.predicate} {' '.join(self.args)})"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def __str__(self):
        return str(self.atom) if self.positive else f"(not {self.atom})"


@dataclass(frozen=True)
class Predicate:
    name: str
    parameters: tuple[tuple[str, str], ...]  # (variable, type)

    @property
    def arity(self):
        return len(self.parameters)

    @property
    def types(self):
        return tuple(t for _, t in self.parameters)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple[tuple[str, str], ...]
    precondition: tuple[Literal, ...]
    add_effects: tuple[Atom, ...]
    delete_effects: tuple[Atom, ...]


@dataclass(frozen=True)
class DomainSchema:
    name: str
    requirements: tuple[str, ...]
    type_hierarchy: dict  # child -> parent; ROOT_TYPE maps to None
    predicates: tuple[Predicate, ...]
    constants: tuple[tuple[str, str], ...]
    action_schemas: tuple[ActionSchema, ...]
    display_names: dict = field(default_factory=dict, compare=False)

    def predicate(self, name):
        for p in self.predicates:
            if p.name == name:
                return p
        return None

    def is_subtype(self, child, parent):
        t = child
        while t is not None:
            if t == parent:
                return True
            t = self.type_hierarchy.get(t)
        return False

    def static_predicates(self):
        """Predicates that never occur in an action effect."""
        touched = {a.predicate for s in self.action_schemas for a in s.add_effects + s.delete_effects}
        return frozenset(p.name for p in self.predicates if p.name not in touched)


@dataclass(frozen=True)
class InstanceDescription:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...]
    init: frozenset  # of ground Atom
    goal: tuple[Literal, ...]
    display_names: dict = field(default_factory=dict, compare=False)

    @property
    def object_names(self):
        return tuple(o for o, _ in self.objects)
