"""Reader and writer for the STRIPS + typing fragment of PDDL.

Accepted requirements are ``:strips``, ``:typing``, ``:negative-preconditions``
and ``:equality``. Anything richer (conditional effects, quantifiers,
disjunctions, numeric fluents, derived predicates) is rejected with the
offending construct and its position.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import (DuplicateName, PDDLSyntaxError, TypeMismatch, UnknownPredicate,
                      UnsupportedRequirement)
from .model import (EQUALITY, ROOT_TYPE, ActionSchema, Atom, DomainSchema, InstanceDescription,
                    Literal, Predicate)

SUPPORTED_REQUIREMENTS = (":strips", ":typing", ":negative-preconditions", ":equality")
_UNSUPPORTED_FORMULAS = {"or", "imply", "exists", "forall", "when", "increase", "decrease",
                         "assign", "scale-up", "scale-down", "either"}
_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s()]+))")


@dataclass
class Sym:
    text: str
    line: int
    col: int

    @property
    def lower(self):
        return self.text.lower()


@dataclass
class SList:
    items: list
    line: int
    col: int

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]


def _positions(text):
    """Map character offsets to (line, column), both 1-based."""
    starts = [0]
    for m in re.finditer("\n", text):
        starts.append(m.end())
    return starts


def read_sexpr(text):
    """Parse one top-level s-expression, keeping source positions."""
    starts = _positions(text)

    def loc(offset):
        lo, hi = 0, len(starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, offset - starts[lo] + 1

    stack = []
    result = None
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        pos = m.end()
        comment, lpar, rpar, word = m.groups()
        if comment is not None:
            continue
        if lpar is not None:
            line, col = loc(m.start(2))
            if result is not None and not stack:
                raise PDDLSyntaxError("unexpected content after top-level expression", line, col, "end of input")
            stack.append(SList([], line, col))
        elif rpar is not None:
            line, col = loc(m.start(3))
            if not stack:
                raise PDDLSyntaxError("unbalanced ')'", line, col, "'(' before ')'")
            done = stack.pop()
            if stack:
                stack[-1].items.append(done)
            else:
                result = done
        elif word is not None:
            line, col = loc(m.start(4))
            if not stack:
                raise PDDLSyntaxError(f"symbol {word!r} outside of any expression", line, col, "'('")
            stack[-1].items.append(Sym(word, line, col))
    if stack:
        open_ = stack[-1]
        line, col = loc(n) if n else (1, 1)
        raise PDDLSyntaxError(f"unclosed '(' opened at line {open_.line}, column {open_.col}",
                              line, col, "')'")
    if result is None:
        raise PDDLSyntaxError("empty input", 1, 1, "'(define'")
    return result


def _expect_list(node, what):
    if not isinstance(node, SList):
        raise PDDLSyntaxError(f"expected {what}", node.line, node.col, "'('")
    return node


def _expect_sym(node, what):
    if not isinstance(node, Sym):
        raise PDDLSyntaxError(f"expected {what}", node.line, node.col, what)
    return node


def _keyword(node):
    if isinstance(node, SList) and node.items and isinstance(node.items[0], Sym):
        return node.items[0].lower
    return None


def _typed_list(items, where, allow_variables):
    """Parse ``a b - t c`` into [(name, type, Sym)]."""
    out = []
    pending = []
    i = 0
    while i < len(items):
        tok = items[i]
        if isinstance(tok, SList):
            head = _keyword(tok)
            if head == "either":
                raise UnsupportedRequirement("either", tok.line, tok.col)
            raise PDDLSyntaxError(f"unexpected list in {where}", tok.line, tok.col, "name")
        if tok.text == "-":
            if i + 1 >= len(items):
                raise PDDLSyntaxError(f"missing type after '-' in {where}", tok.line, tok.col, "type name")
            t = items[i + 1]
            if isinstance(t, SList):
                if _keyword(t) == "either":
                    raise UnsupportedRequirement("either", t.line, t.col)
                raise PDDLSyntaxError("bad type", t.line, t.col, "type name")
            for p in pending:
                out.append((p.lower, t.lower, p))
            pending = []
            i += 2
            continue
        if allow_variables is not None:
            is_var = tok.text.startswith("?")
            if is_var != allow_variables:
                exp = "variable" if allow_variables else "name"
                raise PDDLSyntaxError(f"unexpected {tok.text!r} in {where}", tok.line, tok.col, exp)
        pending.append(tok)
        i += 1
    for p in pending:
        out.append((p.lower, ROOT_TYPE, p))
    return out


def _check_unique(names, what):
    seen = {}
    for name, sym in names:
        if name in seen:
            where = f" (line {sym.line})" if sym is not None else ""
            raise DuplicateName(f"duplicate {what} {name!r}{where}")
        seen[name] = sym


def _conjuncts(node, where):
    """Flatten a conjunction into its literal nodes."""
    if isinstance(node, Sym):
        raise PDDLSyntaxError(f"expected formula in {where}", node.line, node.col, "'('")
    if not node.items:
        return []
    head = _keyword(node)
    if head == "and":
        out = []
        for child in node.items[1:]:
            out.extend(_conjuncts(child, where))
        return out
    if head in _UNSUPPORTED_FORMULAS:
        raise UnsupportedRequirement(head, node.line, node.col)
    return [node]


def _literal(node, where):
    head = _keyword(node)
    if head is None:
        raise PDDLSyntaxError(f"expected literal in {where}", node.line, node.col, "predicate name")
    if head == "not":
        if len(node) != 2 or not isinstance(node[1], SList):
            raise PDDLSyntaxError("malformed negation", node.line, node.col, "(not (atom))")
        inner = node[1]
        if _keyword(inner) in _UNSUPPORTED_FORMULAS | {"and", "not"}:
            raise UnsupportedRequirement(f"not {_keyword(inner)}", inner.line, inner.col)
        return Literal(_atom(inner, where), False), inner
    if head in _UNSUPPORTED_FORMULAS:
        raise UnsupportedRequirement(head, node.line, node.col)
    return Literal(_atom(node, where), True), node


def _atom(node, where):
    if not node.items or not isinstance(node[0], Sym):
        raise PDDLSyntaxError(f"expected atom in {where}", node.line, node.col, "predicate name")
    args = []
    for a in node.items[1:]:
        if isinstance(a, SList):
            raise UnsupportedRequirement("function term", a.line, a.col)
        args.append(a.lower)
    return Atom(node[0].lower, tuple(args))


def _record(display, sym):
    display.setdefault(sym.lower, sym.text)


def parse_domain(text):
    """Parse domain text into a :class:`DomainSchema`."""
    root = read_sexpr(text)
    if _keyword(root) != "define":
        raise PDDLSyntaxError("expected (define ...)", root.line, root.col, "define")
    display = {}
    name = None
    requirements = (":strips",)
    types = {ROOT_TYPE: None}
    predicates = []
    constants = []
    actions = []
    for section in root.items[1:]:
        section = _expect_list(section, "domain section")
        head = _keyword(section)
        if head == "domain":
            name = _expect_sym(section[1], "domain name").lower
        elif head == ":requirements":
            reqs = []
            for r in section.items[1:]:
                r = _expect_sym(r, "requirement")
                if r.lower not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedRequirement(r.lower, r.line, r.col)
                reqs.append(r.lower)
            requirements = tuple(reqs)
        elif head == ":types":
            entries = _typed_list(section.items[1:], ":types", allow_variables=False)
            _check_unique([(t, s) for t, _, s in entries], "type")
            for t, parent, sym in entries:
                _record(display, sym)
                if t == ROOT_TYPE:
                    continue
                types[t] = parent
            for parent in list(types.values()):
                if parent is not None and parent not in types:
                    types[parent] = ROOT_TYPE
        elif head == ":constants":
            entries = _typed_list(section.items[1:], ":constants", allow_variables=False)
            _check_unique([(c, s) for c, _, s in entries], "constant")
            for c, t, sym in entries:
                _record(display, sym)
                constants.append((c, t))
        elif head == ":predicates":
            for p in section.items[1:]:
                p = _expect_list(p, "predicate declaration")
                pname = _expect_sym(p[0], "predicate name")
                params = _typed_list(p.items[1:], f"predicate {pname.text}", allow_variables=True)
                _record(display, pname)
                predicates.append((Predicate(pname.lower, tuple((v, t) for v, t, _ in params)), pname))
        elif head == ":action":
            actions.append(_parse_action(section, display))
        elif head is not None and head.startswith(":"):
            raise UnsupportedRequirement(head, section.line, section.col)
        else:
            raise PDDLSyntaxError("unknown domain section", section.line, section.col, "':section'")
    if name is None:
        raise PDDLSyntaxError("missing (domain NAME)", root.line, root.col, "(domain NAME)")

    _check_unique([(p.name, s) for p, s in predicates], "predicate")
    _check_unique([(a.name, s) for a, s in actions], "action")
    schema = DomainSchema(name=name, requirements=requirements, type_hierarchy=types,
                          predicates=tuple(p for p, _ in predicates), constants=tuple(constants),
                          action_schemas=tuple(a for a, _ in actions), display_names=display)
    _validate_domain(schema)
    return schema


def _parse_action(section, display):
    aname = _expect_sym(section[1], "action name")
    _record(display, aname)
    params, pre, eff = [], [], None
    i = 2
    while i < len(section):
        key = _expect_sym(section[i], "action keyword")
        if i + 1 >= len(section):
            raise PDDLSyntaxError(f"missing value for {key.text}", key.line, key.col, "expression")
        value = section[i + 1]
        if key.lower == ":parameters":
            value = _expect_list(value, "parameter list")
            params = [(v, t) for v, t, _ in _typed_list(value.items, f"action {aname.text}", True)]
        elif key.lower == ":precondition":
            pre = [_literal(n, f"precondition of {aname.text}") for n in _conjuncts(value, aname.text)]
        elif key.lower == ":effect":
            eff = [_literal(n, f"effect of {aname.text}") for n in _conjuncts(value, aname.text)]
        else:
            raise UnsupportedRequirement(key.lower, key.line, key.col)
        i += 2
    _check_unique([(v, None) for v, _ in params], f"parameter of {aname.text}")
    adds, dels = [], []
    for lit, node in eff or []:
        if lit.atom.predicate == EQUALITY:
            raise PDDLSyntaxError("equality in effect", node.line, node.col, "atom")
        (adds if lit.positive else dels).append(lit.atom)
    return ActionSchema(aname.lower, tuple(params), tuple(lit for lit, _ in pre),
                        tuple(dict.fromkeys(adds)), tuple(dict.fromkeys(dels))), aname


def _validate_domain(schema):
    types = schema.type_hierarchy
    for p in schema.predicates:
        for _, t in p.parameters:
            if t not in types:
                raise TypeMismatch(f"unknown type {t!r} in predicate {p.name}")
    constants = dict(schema.constants)
    for c, t in schema.constants:
        if t not in types:
            raise TypeMismatch(f"unknown type {t!r} of constant {c}")
    preds = {p.name: p for p in schema.predicates}
    for a in schema.action_schemas:
        variables = dict(a.parameters)
        for _, t in a.parameters:
            if t not in types:
                raise TypeMismatch(f"unknown type {t!r} in action {a.name}")
        atoms = [lit.atom for lit in a.precondition] + list(a.add_effects) + list(a.delete_effects)
        for atom in atoms:
            if atom.predicate == EQUALITY:
                if len(atom.args) != 2:
                    raise TypeMismatch(f"equality with {len(atom.args)} arguments in {a.name}")
            elif atom.predicate not in preds:
                raise UnknownPredicate(f"unknown predicate {atom.predicate!r} in action {a.name}")
            elif preds[atom.predicate].arity != len(atom.args):
                raise TypeMismatch(f"wrong arity for {atom.predicate} in action {a.name}")
            for term in atom.args:
                if term.startswith("?"):
                    if term not in variables:
                        raise PDDLSyntaxError(f"undeclared variable {term} in action {a.name}")
                elif term not in constants:
                    raise UnknownPredicate(f"unknown constant {term!r} in action {a.name}")


def parse_instance(text, schema):
    """Parse problem text and validate it against ``schema``."""
    root = read_sexpr(text)
    if _keyword(root) != "define":
        raise PDDLSyntaxError("expected (define ...)", root.line, root.col, "define")
    display = {}
    name = None
    domain_name = None
    objects = []
    init = []
    goal = []
    for section in root.items[1:]:
        section = _expect_list(section, "problem section")
        head = _keyword(section)
        if head == "problem":
            name = _expect_sym(section[1], "problem name").lower
        elif head == ":domain":
            domain_name = _expect_sym(section[1], "domain name").lower
        elif head == ":requirements":
            for r in section.items[1:]:
                r = _expect_sym(r, "requirement")
                if r.lower not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedRequirement(r.lower, r.line, r.col)
        elif head == ":objects":
            entries = _typed_list(section.items[1:], ":objects", allow_variables=False)
            for o, t, sym in entries:
                _record(display, sym)
                objects.append((o, t, sym))
        elif head == ":init":
            for node in section.items[1:]:
                node = _expect_list(node, "initial atom")
                kw = _keyword(node)
                if kw in ("=", "not") or kw in _UNSUPPORTED_FORMULAS:
                    raise UnsupportedRequirement(kw, node.line, node.col)
                init.append((_atom(node, ":init"), node))
        elif head == ":goal":
            if len(section) != 2:
                raise PDDLSyntaxError("expected a single goal formula", section.line, section.col, "formula")
            goal = [_literal(n, ":goal") for n in _conjuncts(section[1], ":goal")]
        elif head is not None and head.startswith(":"):
            raise UnsupportedRequirement(head, section.line, section.col)
        else:
            raise PDDLSyntaxError("unknown problem section", section.line, section.col, "':section'")
    if name is None:
        raise PDDLSyntaxError("missing (problem NAME)", root.line, root.col, "(problem NAME)")
    if domain_name is not None and domain_name != schema.name:
        raise TypeMismatch(f"problem targets domain {domain_name!r}, not {schema.name!r}")

    _check_unique([(o, s) for o, _, s in objects] + [(c, None) for c, _ in schema.constants], "object")
    typed = dict(schema.constants)
    for o, t, sym in objects:
        if t not in schema.type_hierarchy:
            raise TypeMismatch(f"unknown type {t!r} of object {o} (line {sym.line})")
        typed[o] = t
    preds = {p.name: p for p in schema.predicates}

    def check(atom, node):
        if atom.predicate == EQUALITY:
            raise UnsupportedRequirement("=", node.line, node.col)
        p = preds.get(atom.predicate)
        if p is None:
            raise UnknownPredicate(f"unknown predicate {atom.predicate!r} (line {node.line})")
        if p.arity != len(atom.args):
            raise TypeMismatch(f"{atom} has arity {len(atom.args)}, predicate {p.name} expects {p.arity}"
                               f" (line {node.line})")
        for arg, (_, t) in zip(atom.args, p.parameters):
            if arg not in typed:
                raise TypeMismatch(f"unknown object {arg!r} in {atom} (line {node.line})")
            if not schema.is_subtype(typed[arg], t):
                raise TypeMismatch(f"object {arg} of type {typed[arg]} used as {t} in {atom}"
                                   f" (line {node.line})")

    for atom, node in init:
        check(atom, node)
    for lit, node in goal:
        check(lit.atom, node)
    return InstanceDescription(name=name, domain_name=domain_name or schema.name,
                               objects=tuple((o, t) for o, t, _ in objects),
                               init=frozenset(a for a, _ in init),
                               goal=tuple(dict.fromkeys(lit for lit, _ in goal)),
                               display_names=display)


# --- writer ---------------------------------------------------------------------

def _typed(pairs):
    groups = []
    for name, t in pairs:
        if groups and groups[-1][1] == t:
            groups[-1][0].append(name)
        else:
            groups.append(([name], t))
    parts = []
    for i, (names, t) in enumerate(groups):
        # untyped names before a typed group would otherwise inherit its type
        last = i == len(groups) - 1
        parts.append(" ".join(names) + (f" - {t}" if t != ROOT_TYPE or not last else ""))
    return " ".join(parts)


def _conj(literals):
    literals = [str(x) for x in literals]
    if len(literals) == 1:
        return literals[0]
    return "(and" + "".join(" " + x for x in literals) + ")"


def domain_to_pddl(schema):
    lines = [f"(define (domain {schema.name})"]
    lines.append(f"  (:requirements {' '.join(schema.requirements)})")
    subtypes = [(t, p) for t, p in schema.type_hierarchy.items() if t != ROOT_TYPE]
    if subtypes:
        lines.append(f"  (:types {_typed(subtypes)})")
    if schema.constants:
        lines.append(f"  (:constants {_typed(schema.constants)})")
    preds = " ".join(f"({p.name}{(' ' + _typed(p.parameters)) if p.parameters else ''})"
                     for p in schema.predicates)
    lines.append(f"  (:predicates {preds})")
    for a in schema.action_schemas:
        lines.append(f"  (:action {a.name}")
        lines.append(f"    :parameters ({_typed(a.parameters)})")
        lines.append(f"    :precondition {_conj(a.precondition) if a.precondition else '()'}")
        effects = list(a.add_effects) + [Literal(x, False) for x in a.delete_effects]
        lines.append(f"    :effect {_conj(effects) if effects else '()'})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def instance_to_pddl(inst):
    lines = [f"(define (problem {inst.name})", f"  (:domain {inst.domain_name})"]
    lines.append(f"  (:objects {_typed(inst.objects)})")
    lines.append("  (:init " + " ".join(str(a) for a in sorted(inst.init, key=str)) + ")")
    lines.append(f"  (:goal {_conj(inst.goal) if inst.goal else '(and)'})")
    lines.append(")")
    return "\n".join(lines) + "\n"
