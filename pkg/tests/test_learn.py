import json

import numpy as np
import pytest

from conftest import bundled_sketch, load_schema, pddl_text, space_of, task_of
from test_statespace import gripper_bfs, gripper_bfs_from
from sketchforge.dl.pool import generate_pool
from sketchforge.errors import ConfigError, NonTermination, NotFullyExpanded, Unsatisfiable
from sketchforge.learn import LearnConfig, build_facts, emit_asp, incremental_learn, load_config
from sketchforge.learn.asp import emit_facts
from sketchforge.learn.facts import LearnFacts
from sketchforge.learn.solver import assert_sound, solve
from sketchforge.pddl import ground, parse_instance
from sketchforge.statespace import UNREACHABLE, expand
from sketchforge.verify import S_WIDTH, check_acyclicity, check_width

try:
    import clingo
except ImportError:  # pragma: no cover
    clingo = None


def facts_for(key, k, max_complexity=5):
    spaces = [space_of(*key)]
    pool = generate_pool(spaces, max_complexity)
    return build_facts(spaces, pool, k), pool


def recomputed_objective(sketch, config):
    return (config.feature_weight * sum(f.complexity for f in sketch.features.values())
            + config.rule_weight * len(sketch.rules))


def everywhere_goal_task(balls):
    """Gripper with an empty goal: every state, the initial one included, is a goal."""
    schema = load_schema("gripper")
    text = pddl_text("gripper", balls).split("(:goal")[0] + "(:goal (and)))"
    return ground(schema, parse_instance(text, schema))


# --- facts -------------------------------------------------------------------------

def test_pair_facts_match_hand_model(gripper1):
    facts, _ = facts_for(("gripper", 1), 1)
    inst = facts.instances[0]
    expected = sum(len(gripper_bfs_from(s)) - 1 for s in gripper_bfs(1))
    assert len(inst.pair_src) == expected == 56
    for a, b, d in zip(inst.pair_src.tolist(), inst.pair_dst.tolist(), inst.pair_dist.tolist()):
        assert a != b and gripper1.distances_from(a)[b] == d != UNREACHABLE


def test_dead_ends_are_never_tuple_roots():
    space = space_of("spanner", 1, 1, 1, 0)
    facts, _ = facts_for(("spanner", 1, 1, 1, 0), 1)
    inst = facts.instances[0]
    dead = set(np.flatnonzero(space.dead_end).tolist())
    assert dead and not dead & set(inst.tuples)
    lines = emit_facts(facts)
    assert all(f"unsolvable(0,{s})." in lines for s in dead)


def test_no_alive_states_means_no_tuples():
    space = expand(everywhere_goal_task(1))
    pool = generate_pool([space], 3)
    facts = build_facts([space], pool, 1)
    assert facts.instances[0].tuples == {}


def test_contain_states_lie_at_the_tuple_distance():
    for k in (0, 1, 2):
        facts, _ = facts_for(("gripper", 2), k, 3)
        space = space_of("gripper", 2)
        for s, options in facts.instances[0].tuples.items():
            dist = space.distances_from(s)
            assert options
            for d, contain in options:
                assert all(dist[x] == d for x in contain)


def test_width_zero_options_are_single_successors(gripper1):
    facts, _ = facts_for(("gripper", 1), 0, 3)
    for s, options in facts.instances[0].tuples.items():
        assert {c for _, (c,) in options} == {t for _, t in gripper1.adjacency[s] if t != s}


def test_facts_are_deterministic():
    a, pool_a = facts_for(("delivery", 2, 2, 1, 3), 1, 3)
    spaces = [expand(task_of("delivery", 2, 2, 1, 3))]
    b = build_facts(spaces, generate_pool(spaces, 3), 1)
    assert emit_facts(a) == emit_facts(b)


def test_unlabelled_space_is_rejected(gripper1):
    class Bare:
        task = gripper1.task
        states = gripper1.states
        solvable = None
    with pytest.raises(NotFullyExpanded):
        build_facts([Bare()], None, 1)


# --- solver ------------------------------------------------------------------------

def test_gripper_width_two_needs_one_feature_and_one_rule():
    facts, pool = facts_for(("gripper", 1), 2)
    result = solve(facts, pool, LearnConfig(width=2))
    sketch = result.sketch
    assert (len(sketch.features), len(sketch.rules)) == (1, 1)
    assert max(f.complexity for f in sketch.features.values()) == 4
    assert result.objective == 5
    assert check_width(sketch, space_of("gripper", 1), 2).passed


def test_no_rules_allowed_is_unsatisfiable():
    facts, pool = facts_for(("gripper", 1), 1, 3)
    with pytest.raises(Unsatisfiable):
        solve(facts, pool, LearnConfig(width=1, max_rules=0))


@pytest.mark.parametrize("weights", [(1, 1), (2, 1), (1, 3)])
def test_objective_is_recomputable(weights):
    config = LearnConfig(width=1, feature_weight=weights[0], rule_weight=weights[1])
    facts, pool = facts_for(("gripper", 1), 1)
    result = solve(facts, pool, config)
    assert result.objective == recomputed_objective(result.sketch, config)


def test_planted_features_bound_the_optimum():
    spaces = [space_of("gripper", 2)]
    pool = generate_pool(spaces, 3)
    planted = bundled_sketch("gripper-k1")
    for feature in planted.features.values():
        pool.add(feature)
    config = LearnConfig(width=1)
    result = solve(build_facts(spaces, pool, 1), pool, config)
    assert result.objective <= recomputed_objective(planted, config)


@pytest.mark.parametrize("key,k", [(("gripper", 1), 1), (("gripper", 2), 2), (("visitall", 2, 2, 0), 1),
                                   (("miconic", 2, 1, 0), 1), (("blocks-clear", 3, 0), 1)])
def test_learned_sketches_are_sound(key, k):
    facts, pool = facts_for(key, k)
    result = solve(facts, pool, LearnConfig(width=k))
    space = space_of(*key)
    assert check_width(result.sketch, space, k, S_WIDTH).passed
    assert check_acyclicity(result.sketch, space)[0]
    assert_sound(result.sketch, [space], k)


def test_solver_is_deterministic():
    facts, pool = facts_for(("gripper", 2), 1)
    a = solve(facts, pool, LearnConfig(width=1))
    b = solve(facts, pool, LearnConfig(width=1))
    assert a.feature_ids == b.feature_ids and a.sketch.rules == b.sketch.rules


# --- ASP emission ------------------------------------------------------------------

def test_feature_declaration_lines():
    facts, pool = facts_for(("gripper", 1), 1, 3)
    f = next(i for i, feat in enumerate(pool.features) if feat.boolean and feat.complexity == 2)
    lines = emit_facts(facts, pool, [f])
    assert lines[0] == f"feature(f{f}). boolean(f{f}). complexity(f{f},2)."


def test_program_contains_every_fact_family():
    facts, pool = facts_for(("spanner", 1, 1, 1, 0), 1, 3)
    text = emit_asp(facts, pool, LearnConfig(width=1, max_rules=4))
    assert text.startswith("#const max_sketch_rules=4.")
    for name in ("feature(", "boolean(", "numerical(", "complexity(", "solvable(", "unsolvable(",
                 "exceed(", "s_distance(", "t_distance(", "tuple(", "contain(", "feature_valuation("):
        assert name in text


def clingo_optimum(text, limit=300):
    ctl = clingo.Control(["--opt-mode=opt", "--warn=none"])
    ctl.add("base", [], text)
    ctl.ground([("base", [])])
    best = []

    def on_model(model):
        best[:] = [sum(model.cost), sorted(str(a) for a in model.symbols(atoms=True) if a.name == "select")]

    with ctl.solve(on_model=on_model, async_=True) as handle:
        finished = handle.wait(limit)
        handle.cancel()
        result = handle.get()
    assert finished and result.exhausted, "clingo did not prove optimality in time"
    return best if result.satisfiable else None


@pytest.mark.skipif(clingo is None, reason="clingo is not installed")
def test_empty_program_solves_to_the_empty_sketch():
    facts = LearnFacts(1, [], [], None)
    text = emit_asp(facts, generate_pool([space_of("gripper", 1)], 2), LearnConfig(), feature_ids=[])
    assert clingo_optimum(text) == [0, []]


@pytest.mark.skipif(clingo is None, reason="clingo is not installed")
@pytest.mark.parametrize("k,expected", [(1, 8), (2, 5)])
def test_clingo_agrees_with_the_internal_optimum(k, expected):
    facts, pool = facts_for(("gripper", 1), k)
    config = LearnConfig(width=k)
    internal = solve(facts, pool, config).objective
    external = clingo_optimum(emit_asp(facts, pool, config))
    assert internal == external[0] == expected


# --- incremental learning ----------------------------------------------------------

def test_goal_initial_states_need_no_solver_call():
    result = incremental_learn([everywhere_goal_task(1), everywhere_goal_task(2)], LearnConfig(width=1))
    assert result.sketch.rules == [] and result.solver_calls == 0


def test_gripper_width_one_learns_two_features_and_two_rules():
    tasks = [task_of("gripper", b) for b in (1, 2, 3)]
    result = incremental_learn(tasks, LearnConfig(width=1, max_complexity=5))
    sketch = result.sketch
    assert (len(sketch.features), len(sketch.rules)) == (2, 2)
    for b in (1, 2, 3):
        assert check_width(sketch, space_of("gripper", b), 1).passed


def test_larger_failing_instance_replaces_the_training_set():
    tasks = [task_of("gripper", b) for b in (3, 1, 2)]
    result = incremental_learn(tasks, LearnConfig(width=2, max_complexity=5))
    trail = [(it.failing, it.training) for it in result.iterations]
    assert trail == [("gripper-1", ["gripper-1"]), ("gripper-3", ["gripper-3"])]
    audit = json.loads(result.dumps())
    assert [it["training"] for it in audit["iterations"]] == [["gripper-1"], ["gripper-3"]]
    assert audit["iterations"][-1]["objective"] == 5


def test_oversized_instances_are_skipped():
    tasks = [task_of("gripper", 1), task_of("gripper", 3)]
    result = incremental_learn(tasks, LearnConfig(width=2, max_complexity=5, max_states=50))
    assert [r["skipped"] for r in result.instances] == [False, True]


def test_iteration_cap():
    with pytest.raises(NonTermination):
        incremental_learn([task_of("gripper", 1)], LearnConfig(width=1, max_iterations=0))


# --- configuration -----------------------------------------------------------------

def test_config_file(tmp_path):
    path = tmp_path / "learn.toml"
    path.write_text("[learn]\nwidth = 2\nmax_rules = 3\n")
    config = load_config(path)
    assert (config.width, config.max_rules, config.max_complexity) == (2, 3, 8)
    path.write_text("[learn]\nwidht = 2\n")
    with pytest.raises(ConfigError):
        load_config(path)


@pytest.mark.parametrize("bad", [{"width": 3}, {"max_rules": -1}, {"feature_weight": 0},
                                 {"backend": "gurobi"}])
def test_invalid_config_values(bad):
    with pytest.raises(ConfigError):
        LearnConfig(**bad)
