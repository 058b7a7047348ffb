"""Sketch verification over expanded state spaces: acyclicity and (s-)width."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from itertools import combinations
from math import comb

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CapacityExceeded, Exhausted
from .pddl.grounding import bits
from .search.iw import iw, space_oracles
from .search.tuple_graph import tuple_graph
from .sketch import Sketch, SpaceValuation, closest_subgoals, subgoal_states
from .statespace import UNREACHABLE

STRICT = "strict"
S_WIDTH = "s-width"
MODES = (STRICT, S_WIDTH)


@dataclass
class StateEntry:
    state: int
    distance: int  # to the nearest subgoal, UNREACHABLE when there is none
    width: int | None  # achieved width, None when above the reporting limit
    dead_end_subgoal: bool
    ok: bool


@dataclass
class VerificationReport:
    instance: str
    mode: str
    k: int
    acyclic: bool
    witness: list = field(default_factory=list)
    entries: list = field(default_factory=list)

    @property
    def max_width(self):
        widths = [e.width for e in self.entries]
        if any(w is None for w in widths):
            return None
        return max(widths, default=0)

    @property
    def width_ok(self):
        return all(e.ok for e in self.entries)

    @property
    def passed(self):
        return self.acyclic and self.width_ok

    def failures(self):
        return [e for e in self.entries if not e.ok]

    def to_json(self):
        return {
            "instance": self.instance, "mode": self.mode, "k": self.k,
            "acyclic": self.acyclic, "witness": self.witness,
            "max_width": self.max_width, "passed": self.passed,
            "alive_states": len(self.entries),
            "entries": [asdict(e) for e in self.entries],
        }

    def text(self):
        mw = "unbounded" if self.max_width is None else self.max_width
        lines = [f"{self.instance}: {'PASS' if self.passed else 'FAIL'} "
                 f"(mode={self.mode}, k={self.k}, acyclic={self.acyclic}, "
                 f"max width={mw}, alive states={len(self.entries)})"]
        if self.witness:
            lines.append(f"  cycle through states {self.witness}")
        for e in self.failures()[:10]:
            why = ("no reachable subgoal" if e.distance == UNREACHABLE else
                   "dead-end subgoal" if e.dead_end_subgoal else f"width {e.width} > {self.k}"
                   if e.width is not None else f"width above {self.k}")
            lines.append(f"  state {e.state}: {why} (subgoal distance {e.distance})")
        return "\n".join(lines)


def dumps_reports(reports):
    return json.dumps([r.to_json() for r in reports], indent=1)


# --- acyclicity -------------------------------------------------------------------

def good_edges(sketch: Sketch, space, valuation: SpaceValuation | None = None):
    """(sources, targets) of pairs of solvable states s -> s' with s' != s
    reachable from s and (f(s), f(s')) satisfying some rule."""
    valuation = valuation or SpaceValuation(sketch, space)
    solvable = space.solvable
    src, dst = [], []
    for s in np.flatnonzero(solvable):
        reach = space.distances_from(int(s)) > 0
        targets = np.flatnonzero(reach & solvable & valuation.satisfied(int(s)))
        src.append(np.full(len(targets), s, dtype=np.int64))
        dst.append(targets)
    if not src:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    return np.concatenate(src), np.concatenate(dst)


def find_cycle(n, src, dst):
    """One directed cycle as a list of nodes, or [] when the graph is acyclic."""
    loops = src == dst
    if loops.any():
        return [int(src[np.argmax(loops)])]
    if len(src) == 0:
        return []
    graph = csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n))
    count, labels = connected_components(graph, directed=True, connection="strong")
    sizes = np.bincount(labels, minlength=count)
    big = np.flatnonzero(sizes > 1)
    if len(big) == 0:
        return []
    comp = big[0]
    members = set(np.flatnonzero(labels == comp).tolist())
    succ = {}
    for a, b in zip(src.tolist(), dst.tolist()):
        if a in members and b in members:
            succ.setdefault(a, []).append(b)
    # walk inside the component until a node repeats
    start = min(members)
    seen = {}
    path = []
    node = start
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = succ[node][0]
    return path[seen[node]:]


def closest_edges(sketch: Sketch, space, valuation: SpaceValuation | None = None):
    """Like :func:`good_edges` but only towards the closest subgoal states of each state."""
    valuation = valuation or SpaceValuation(sketch, space)
    solvable = space.solvable
    src, dst = [], []
    for s in np.flatnonzero(space.alive).tolist():
        _, closest = closest_subgoals(sketch, s, space, valuation)
        closest = closest[solvable[closest]]
        src.append(np.full(len(closest), s, dtype=np.int64))
        dst.append(closest)
    if not src:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    return np.concatenate(src), np.concatenate(dst)


def check_acyclicity(sketch: Sketch, space, valuation: SpaceValuation | None = None,
                     closest: bool = False):
    """(acyclic, witness cycle) over the good-edge graph restricted to solvable states.

    With ``closest`` only edges to the nearest subgoals are kept, a weaker
    diagnostic that ignores cycles SIW_R can never follow.
    """
    edges = closest_edges if closest else good_edges
    src, dst = edges(sketch, space, valuation)
    cycle = find_cycle(len(space.states), src, dst)
    return not cycle, cycle


# --- width ------------------------------------------------------------------------

def _iw_width(space, s, targets, distance, k_limit):
    """Smallest k' <= k_limit for which IW(k') reaches ``targets`` in ``distance`` steps."""
    successors, atoms, relevant = space_oracles(space)
    target_set = targets
    for k in range(k_limit + 1):
        try:
            r = iw(k, s, successors, target_set.__contains__, atoms, relevant)
        except Exhausted:
            continue
        if len(r.plan) == distance:
            return k
    return None


def _s_width(space, s, members, distance, k_limit):
    """(width, horizon) of reaching ``members`` satisficingly; horizon bounds the
    distance at which dead-end subgoals matter."""
    if distance <= 1:
        return 0, distance
    for k in range(1, k_limit + 1):
        graph = tuple_graph(space, s, k)
        ds = [n.distance for n in graph.nodes() if n.contain <= members]
        if ds:
            return k, min(ds)
    return None, distance


def check_width(sketch: Sketch, space, k: int, mode: str = STRICT,
                valuation: SpaceValuation | None = None, report_limit: int | None = None,
                acyclicity: bool = True) -> VerificationReport:
    """Check every alive state of ``space`` as an initial state.

    Widths are measured up to ``report_limit`` (default ``max(k, 2)``) so that
    failing states still show how wide their subproblems are.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    valuation = valuation or SpaceValuation(sketch, space)
    limit = max(k, 2) if report_limit is None else max(k, report_limit)
    acyclic, witness = check_acyclicity(sketch, space, valuation) if acyclicity else (True, [])
    report = VerificationReport(space.task.name, mode, k, acyclic, witness)
    solvable = space.solvable
    for s in np.flatnonzero(space.alive).tolist():
        d, closest = closest_subgoals(sketch, s, space, valuation)
        if d == UNREACHABLE:
            report.entries.append(StateEntry(s, UNREACHABLE, None, False, False))
            continue
        members = subgoal_states(sketch, s, space, valuation)
        if mode == STRICT:
            dead = bool((~solvable[closest]).any())
            width = 0 if d <= 1 else _iw_width(space, s, set(members.tolist()), d, limit)
        else:
            width, horizon = _s_width(space, s, frozenset(members.tolist()), d, limit)
            dist = space.distances_from(s)
            near = members[(dist[members] != UNREACHABLE) & (dist[members] <= horizon)]
            dead = bool((~solvable[near]).any())
        ok = width is not None and width <= k and not dead
        report.entries.append(StateEntry(s, int(d), width, dead, ok))
    return report


def verify(sketch: Sketch, spaces, k: int, mode: str = STRICT, **kwargs):
    return [check_width(sketch, sp, k, mode, **kwargs) for sp in spaces]


# --- brute-force width oracle -----------------------------------------------------

DEFAULT_TUPLE_CAP = 50_000


def brute_force_width(space, start: int, targets, tuple_cap: int = DEFAULT_TUPLE_CAP) -> int:
    """Width of reaching ``targets`` from ``start`` computed from first principles.

    Enumerates every tuple of fluent atoms of size at most k, computes the end
    states of its optimal plans by scanning the space, and searches admissible
    chains exhaustively. Zero when the targets are at most one step away; the
    number of atoms when they are unreachable.
    """
    targets = frozenset(int(t) for t in targets)
    dist = space.distances_from(start)
    reach = [s for s in range(len(space.states)) if dist[s] != UNREACHABLE]
    tdist = [dist[t] for t in targets if dist[t] != UNREACHABLE]
    if not tdist:
        return space.task.num_atoms
    best = min(tdist)
    if best <= 1:
        return 0
    masks = {s: space.states[s] for s in reach}
    # atoms never true in a reachable state cannot appear in a tuple with an optimal plan
    ever = 0
    for m in masks.values():
        ever |= m
    fluent = bits(ever & space.task.fluent_mask)
    succ = {s: [t for _, t in space.adjacency[s]] for s in reach}

    for k in range(1, len(fluent) + 1):
        n_tuples = sum(comb(len(fluent), i) for i in range(1, k + 1))
        if n_tuples > tuple_cap:
            raise CapacityExceeded(tuple_cap)
        optimal = {}
        for size in range(1, k + 1):
            for t in combinations(fluent, size):
                m = 0
                for a in t:
                    m |= 1 << a
                holders = [s for s in reach if masks[s] & m == m]
                if not holders:
                    continue
                d = min(dist[s] for s in holders)
                optimal[m] = (d, frozenset(s for s in holders if dist[s] == d))
        by_depth = {}
        for m, (d, ends) in optimal.items():
            by_depth.setdefault(d, []).append((m, ends))

        def admissible(ends, nxt_ends):
            return all(any(x in nxt_ends for x in succ[s]) for s in ends)

        frontier = [(m, ends) for m, ends in by_depth.get(0, [])]
        depth = 0
        while frontier:
            for _, ends in frontier:
                if depth == best and ends <= targets:
                    return k
            if depth >= best:
                break
            candidates = by_depth.get(depth + 1, [])
            reached = []
            for m2, ends2 in candidates:
                if any(admissible(ends, ends2) for _, ends in frontier):
                    reached.append((m2, ends2))
            frontier = reached
            depth += 1
    return len(fluent)
