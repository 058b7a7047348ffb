"""Grounding of a lifted schema and instance into a propositional task.

States are Python ints used as bitsets over the atom table, so successor
generation is a handful of integer operations per ground action.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .model import EQUALITY, ROOT_TYPE, Atom, DomainSchema, InstanceDescription


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre_pos: int
    pre_neg: int
    add: int
    delete: int

    def applicable(self, state):
        return (state & self.pre_pos) == self.pre_pos and not (state & self.pre_neg)

    def apply(self, state):
        return (state & ~self.delete) | self.add

    def __str__(self):
        if not self.args:
            return f"({self.name})"
        return f"({self.name} {' '.join(self.args)})"


def mask_of(indices):
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def bits(mask):
    """Indices of the set bits of ``mask`` in increasing order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass
class GroundTask:
    name: str
    domain_name: str
    objects: tuple[str, ...]
    object_types: dict  # object -> frozenset of its type and all ancestors
    atoms: list[Atom]
    actions: list[GroundAction]
    initial: int
    goal_pos: int
    goal_neg: int
    static_predicates: frozenset
    predicates: dict  # name -> arity
    display_names: dict = field(default_factory=dict)
    constants: tuple[str, ...] = ()
    atom_index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.atom_index:
            self.atom_index = {a: i for i, a in enumerate(self.atoms)}
        self.static_mask = mask_of(i for i, a in enumerate(self.atoms)
                                   if a.predicate in self.static_predicates)
        self.fluent_mask = ((1 << len(self.atoms)) - 1) & ~self.static_mask
        # Actions whose static preconditions can hold; the rest never fire.
        init_static = self.initial & self.static_mask
        self.relevant_actions = [
            i for i, a in enumerate(self.actions)
            if (a.pre_pos & self.static_mask) & ~init_static == 0
            and not (a.pre_neg & init_static)
        ]

    @property
    def num_atoms(self):
        return len(self.atoms)

    def is_goal(self, state):
        return (state & self.goal_pos) == self.goal_pos and not (state & self.goal_neg)

    def unsatisfied_goals(self, state):
        return (bin(self.goal_pos & ~state).count("1")
                + bin(self.goal_neg & state).count("1"))

    def successors(self, state):
        """Yield ``(action index, successor)`` in action-table order."""
        for i in self.relevant_actions:
            a = self.actions[i]
            if (state & a.pre_pos) == a.pre_pos and not (state & a.pre_neg):
                yield i, (state & ~a.delete) | a.add

    def true_atoms(self, state):
        return [self.atoms[i] for i in bits(state)]

    def state_matrix(self, states):
        """Boolean (len(states), num_atoms) truth table."""
        n = len(self.atoms)
        nbytes = max(1, (n + 7) // 8)
        buf = b"".join(x.to_bytes(nbytes, "little") for x in states)
        raw = np.frombuffer(buf, dtype=np.uint8).reshape(len(states), nbytes)
        return np.unpackbits(raw, axis=1, bitorder="little")[:, :n].astype(bool)

    def state_from_atoms(self, atoms):
        return mask_of(self.atom_index[a] for a in atoms)

    def goal_atoms(self):
        """Goal literals as (Atom, positive) pairs."""
        return ([(self.atoms[i], True) for i in bits(self.goal_pos)]
                + [(self.atoms[i], False) for i in bits(self.goal_neg)])

    def to_json(self):
        return {
            "name": self.name,
            "domain": self.domain_name,
            "objects": list(self.objects),
            "atoms": [str(a) for a in self.atoms],
            "static_predicates": sorted(self.static_predicates),
            "actions": [
                {"name": str(a), "pre": bits(a.pre_pos), "pre_neg": bits(a.pre_neg),
                 "add": bits(a.add), "del": bits(a.delete)}
                for a in self.actions
            ],
            "init": bits(self.initial),
            "goal": bits(self.goal_pos),
            "goal_neg": bits(self.goal_neg),
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=1)


def _ancestors(schema, t):
    out = []
    while t is not None:
        out.append(t)
        t = schema.type_hierarchy.get(t)
    return out


def typed_objects(schema: DomainSchema, inst: InstanceDescription):
    """Objects in declaration order: domain constants first, then instance objects."""
    pairs = list(schema.constants) + [p for p in inst.objects if p[0] not in dict(schema.constants)]
    return pairs


def objects_of_type(schema, pairs, t):
    return [o for o, ot in pairs if schema.is_subtype(ot, t)]


def ground(schema: DomainSchema, inst: InstanceDescription) -> GroundTask:
    pairs = typed_objects(schema, inst)
    objects = tuple(o for o, _ in pairs)
    object_types = {o: frozenset(_ancestors(schema, t)) | {ROOT_TYPE} for o, t in pairs}

    atoms = []
    for p in schema.predicates:
        domains = [objects_of_type(schema, pairs, t) for t in p.types]
        for args in itertools.product(*domains):
            atoms.append(Atom(p.name, tuple(args)))
    index = {a: i for i, a in enumerate(atoms)}

    def atom_id(atom):
        i = index.get(atom)
        if i is None:
            # Possible when a schema parameter is typed more loosely than the predicate.
            i = index[atom] = len(atoms)
            atoms.append(atom)
        return i

    actions = []
    for schema_action in schema.action_schemas:
        names = [v for v, _ in schema_action.parameters]
        domains = [objects_of_type(schema, pairs, t) for _, t in schema_action.parameters]
        for binding in itertools.product(*domains):
            sub = dict(zip(names, binding))

            def inst_atom(a):
                return Atom(a.predicate, tuple(sub.get(x, x) for x in a.args))

            pre_pos = pre_neg = 0
            consistent = True
            for lit in schema_action.precondition:
                a = inst_atom(lit.atom)
                if a.predicate == EQUALITY:
                    if (a.args[0] == a.args[1]) != lit.positive:
                        consistent = False
                        break
                    continue
                if lit.positive:
                    pre_pos |= 1 << atom_id(a)
                else:
                    pre_neg |= 1 << atom_id(a)
            if not consistent:
                continue
            add = mask_of(atom_id(inst_atom(a)) for a in schema_action.add_effects)
            delete = mask_of(atom_id(inst_atom(a)) for a in schema_action.delete_effects)
            # Add-after-delete: an atom both added and deleted stays true.
            delete &= ~add
            actions.append(GroundAction(schema_action.name, tuple(binding), pre_pos, pre_neg, add, delete))

    initial = mask_of(atom_id(a) for a in inst.init)
    goal_pos = mask_of(atom_id(lit.atom) for lit in inst.goal if lit.positive)
    goal_neg = mask_of(atom_id(lit.atom) for lit in inst.goal if not lit.positive)
    display = dict(schema.display_names)
    display.update(inst.display_names)
    return GroundTask(
        name=inst.name, domain_name=schema.name, objects=objects, object_types=object_types,
        atoms=atoms, actions=actions, initial=initial, goal_pos=goal_pos, goal_neg=goal_neg,
        static_predicates=schema.static_predicates(),
        predicates={p.name: p.arity for p in schema.predicates},
        display_names=display, constants=tuple(c for c, _ in schema.constants), atom_index=index,
    )
