from functools import reduce
from itertools import combinations
from math import comb
from operator import or_

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bundled_sketch, load_schema, pddl_text, space_of, state_where, task_of
from sketchforge.errors import EpisodeFailure, Exhausted
from sketchforge.pddl import Atom, ground, parse_instance
from sketchforge.pddl.grounding import bits
from sketchforge.search import (NoveltyTable, iterated_iw, iw, siw, siwr, space_oracles, task_oracles,
                                tuple_graph, validate_plan)
from sketchforge.sketch import Sketch
from sketchforge.statespace import UNREACHABLE
from sketchforge.verify import brute_force_width


def fluent_count(space):
    return bin(space.task.fluent_mask).count("1")


def atom_targets(space, atom_ids):
    m = 0
    for a in atom_ids:
        m |= 1 << a
    return {s for s, x in enumerate(space.states) if x & m == m}


# --- IW ----------------------------------------------------------------------------

def test_start_passing_the_test_needs_no_search(gripper1):
    succ, atoms, relevant = space_oracles(gripper1)
    r = iw(1, 0, succ, lambda s: True, atoms, relevant)
    assert r.plan == [] and r.expanded == 0


def test_iw1_expansions_and_plan_on_width_one_problem(gripper1):
    succ, atoms, relevant = space_oracles(gripper1)
    carry = gripper1.task.atom_index[Atom("carry", ("ball1", "left"))]
    targets = atom_targets(gripper1, [carry])
    r = iw(1, gripper1.initial, succ, targets.__contains__, atoms, relevant)
    dist = gripper1.distances_from(gripper1.initial)
    assert len(r.plan) == min(dist[t] for t in targets)
    assert r.expanded <= fluent_count(gripper1)


def test_iterated_iw_succeeds_at_zero_when_goal_holds(gripper1):
    succ, atoms, relevant = space_oracles(gripper1)
    r = iterated_iw(0, succ, lambda s: True, 2, atoms, relevant)
    assert r.width == 0 and r.plan == []


def test_iterated_iw_fails_below_the_needed_width(gripper1):
    succ, atoms, relevant = space_oracles(gripper1)
    goals = set(np.flatnonzero(gripper1.goal).tolist())
    assert not iterated_iw(gripper1.initial, succ, goals.__contains__, 0, atoms, relevant).solved


def test_blocks_on_needs_at_most_width_two():
    task = task_of("blocks-on", 3, 0)
    succ, atoms, relevant = task_oracles(task)
    r = iterated_iw(task.initial, succ, task.is_goal, 2, atoms, relevant)
    assert r.solved and r.width <= 2
    assert task.is_goal(validate_plan(task, r.plan))


def test_blocks_on_from_a_tower_has_width_two():
    # tower b3 on b2 on b1; putting the bottom block onto the top one needs pairs of atoms
    schema = load_schema("blocks-on")
    text = """(define (problem tower) (:domain blocks) (:objects b1 b2 b3)
      (:init (handempty) (ontable b1) (on b2 b1) (on b3 b2) (clear b3))
      (:goal (and (on b1 b3))))"""
    from sketchforge.statespace import expand
    space = expand(ground(schema, parse_instance(text, schema)))
    goals = np.flatnonzero(space.goal).tolist()
    assert brute_force_width(space, space.initial, goals) == 2


def test_negative_k_rejected():
    with pytest.raises(ValueError):
        iw(-1, 0, lambda s: [], lambda s: False)
    with pytest.raises(ValueError):
        NoveltyTable(-1)


def test_exhaustion_raises():
    with pytest.raises(Exhausted):
        iw(1, 0, lambda s: [], lambda s: False)


# --- novelty table ------------------------------------------------------------------

@settings(max_examples=100)
@given(st.integers(1, 3), st.lists(st.integers(0, 2**8 - 1), max_size=12))
def test_novelty_table_matches_tuple_sets(k, states):
    table = NoveltyTable(k)
    seen = set()
    for s in states:
        new = set()
        for size in range(1, k + 1):
            new.update(combinations(bits(s), size))
        assert table.register(s) == bool(new - seen)
        seen |= new
    assert table.size() == len(seen)


# --- tuple graphs --------------------------------------------------------------------

def admissible_tuples(space, root, k):
    """{tuple: depth} reached by admissible chains, straight from the definition."""
    dist = space.distances_from(root)
    reach = [s for s in range(len(space)) if dist[s] != UNREACHABLE]
    fluent = bits(space.task.fluent_mask & reduce(or_, (space.states[s] for s in reach)))
    info = {}
    for size in range(1, k + 1):
        for t in combinations(fluent, size):
            holders = [s for s in reach if all(space.states[s] >> a & 1 for a in t)]
            if holders:
                d = min(dist[s] for s in holders)
                info[t] = (d, {s for s in holders if dist[s] == d})
    layer = {t for t, (d, _) in info.items() if d == 0}
    out = {t: 0 for t in layer}
    depth = 0
    while layer:
        nxt = set()
        for t2, (d2, ends2) in info.items():
            if d2 != depth + 1:
                continue
            for t in layer:
                if all(any(x in ends2 for _, x in space.adjacency[s]) for s in info[t][1]):
                    nxt.add(t2)
                    break
        depth += 1
        layer = nxt
        out.update({t: depth for t in nxt})
    return out, info


@pytest.mark.parametrize("key,k", [(("gripper", 1), 1), (("gripper", 1), 2), (("gripper", 2), 1),
                                   (("blocks-on", 3, 1), 2), (("delivery", 2, 2, 1, 3), 1)])
def test_tuple_graph_matches_admissible_chain_enumeration(key, k):
    space = space_of(*key)
    for root in range(0, len(space), max(1, len(space) // 6)):
        graph = tuple_graph(space, root, k)
        expected, info = admissible_tuples(space, root, k)
        got = {n.atoms: n.distance for n in graph.nodes()}
        assert got == expected
        for n in graph.nodes():
            assert n.contain == frozenset(info[n.atoms][1])
        assert {n.atoms for n in graph.layers[0]} == {
            t for t in expected if all(space.states[root] >> a & 1 for a in t)}


def test_picking_is_a_layer_one_tuple(gripper1):
    root = state_where(gripper1, Atom("at-robby", ("rooma",)), Atom("at", ("ball1", "rooma")),
                       Atom("free", ("left",)), Atom("free", ("right",)))
    carry = gripper1.task.atom_index[Atom("carry", ("ball1", "left"))]
    node = tuple_graph(gripper1, root, 1).find((carry,))
    pick = [t for a, t in gripper1.adjacency[root] if gripper1.task.actions[a].name == "pick"
            and gripper1.task.actions[a].args[2] == "left"]
    assert node.distance == 1 and node.contain == frozenset(pick)


def test_width_one_graph_stops_before_width_two_tuples(gripper1):
    root = gripper1.initial
    delivered = gripper1.task.atom_index[Atom("at", ("ball1", "roomb"))]
    goals = np.flatnonzero(gripper1.goal).tolist()
    assert brute_force_width(gripper1, root, goals) == 2
    assert tuple_graph(gripper1, root, 1).find((delivered,)) is None
    assert tuple_graph(gripper1, root, 2).find((delivered,)) is not None


# --- width cross-checks on sampled subproblems ----------------------------------------

SMALL = [("gripper", 2), ("delivery", 2, 2, 1, 3), ("blocks-on", 3, 1), ("spanner", 2, 2, 1, 4),
         ("miconic", 3, 1, 2), ("visitall", 2, 2, 5), ("blocks-clear", 3, 2)]


def sample_subproblems(count, seed):
    """(space, start, targets) with reachable targets, from spaces with at most 500 states."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        space = space_of(*SMALL[rng.integers(len(SMALL))])
        start = int(rng.integers(len(space)))
        fluent = bits(space.task.fluent_mask)
        atoms = rng.choice(fluent, size=int(rng.integers(1, 3)), replace=False).tolist()
        targets = atom_targets(space, atoms)
        dist = space.distances_from(start)
        if any(dist[t] != UNREACHABLE for t in targets):
            out.append((space, start, targets))
    return out


def smallest_optimal_iw(space, start, targets, k_max=4):
    succ, atoms, relevant = space_oracles(space)
    dist = space.distances_from(start)
    best = min(dist[t] for t in targets if dist[t] != UNREACHABLE)
    for k in range(k_max + 1):
        try:
            r = iw(k, start, succ, targets.__contains__, atoms, relevant)
        except Exhausted:
            continue
        if len(r.plan) == best:
            return k
    return None


@pytest.mark.parametrize("seed", range(4))
def test_iw_is_optimal_within_the_brute_force_width(seed):
    for space, start, targets in sample_subproblems(15, seed):
        w = brute_force_width(space, start, targets)
        assert smallest_optimal_iw(space, start, targets) <= w


def test_iw_can_be_optimal_below_the_width():
    # on(b3,b2) has optimal plans ending with b2 on b1, so no width-1 chain
    # reaches the targets; IW(1) still finds one by its expansion order
    space = space_of("blocks-on", 3, 1)
    targets = {12, 17, 21}
    assert brute_force_width(space, 19, targets) == 2
    assert smallest_optimal_iw(space, 19, targets) == 1


@pytest.mark.parametrize("seed", range(3))
def test_iw_expansions_bounded_by_tuple_counts(seed):
    for space, start, targets in sample_subproblems(15, 100 + seed):
        succ, atoms, relevant = space_oracles(space)
        n = fluent_count(space)
        for k in (1, 2):
            try:
                r = iw(k, start, succ, targets.__contains__, atoms, relevant)
                expanded = r.expanded
            except Exhausted as exc:
                expanded = exc.expanded
            assert expanded <= sum(comb(n, i) for i in range(1, k + 1))
            assert expanded <= n ** k


# --- SIW and SIW_R --------------------------------------------------------------------

def test_siw_on_gripper_two_balls():
    task = task_of("gripper", 2)
    r = siw(task)
    assert task.is_goal(validate_plan(task, r.plan))
    assert max(r.episode_widths) <= 2
    # every episode ends at the first state where fewer goals are unsatisfied
    best, drops = task.unsatisfied_goals(r.path[0]), 0
    for s in r.path[1:]:
        if task.unsatisfied_goals(s) < best:
            best, drops = task.unsatisfied_goals(s), drops + 1
    assert drops == len(r.episode_widths) and best == 0


def test_siw_on_unsolvable_task():
    task = task_of("spanner", 2, 1, 2, 0)  # two nuts, one spanner
    with pytest.raises(EpisodeFailure):
        siw(task)


def test_siwr_with_empty_sketch_is_one_episode():
    task = task_of("gripper", 1)
    r = siwr(task, Sketch())
    assert len(r.episode_widths) == 1 and task.is_goal(r.end)


def test_siwr_gripper_width_one_on_larger_instance():
    task = task_of("gripper", 5)
    r = siwr(task, bundled_sketch("gripper-k1"))
    assert task.is_goal(validate_plan(task, r.plan))
    assert max(r.episode_widths) <= 1


def test_siwr_visitall_moves_to_the_nearest_unvisited_cell():
    space = space_of("visitall", 3, 3, 2)
    task = space.task
    r = siwr(task, bundled_sketch("visitall-k1"))
    assert task.is_goal(validate_plan(task, r.plan))

    def visited(mask):
        return sum(a.predicate == "visited" for a in task.true_atoms(mask))

    idx = [space.index[m] for m in r.path]
    i = 0
    while i < len(idx) - 1:
        s = idx[i]
        dist = space.distances_from(s)
        more = [t for t in range(len(space)) if visited(space.states[t]) > visited(space.states[s])]
        nearest = min(dist[t] for t in more if dist[t] != UNREACHABLE)
        j = next(j for j in range(i + 1, len(idx)) if visited(space.states[idx[j]]) > visited(space.states[s]))
        assert j - i == nearest
        assert visited(space.states[idx[j]]) == visited(space.states[s]) + 1
        i = j


@settings(max_examples=10, deadline=None)
@given(st.integers(2, 6))
def test_siwr_episodes_end_in_subgoals(balls):
    task = task_of("gripper", balls)
    sketch = bundled_sketch("gripper-k1")
    r = siwr(task, sketch)
    assert task.is_goal(validate_plan(task, r.plan))
    assert len(r.episode_widths) <= 10 * balls
