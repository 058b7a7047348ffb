"""Serialized width-based search: SIW over goal counts and SIW_R over sketch subgoals."""
from __future__ import annotations

import logging

from ..errors import CycleGuard, EpisodeFailure, Exhausted
from ..sketch import Sketch, StateValuator
from .iw import SearchResult, iterated_iw, iw, task_oracles

log = logging.getLogger(__name__)


def _chain(task, episodes_limit, make_test, k_max, fixed_k=None):
    successors, atoms, relevant = task_oracles(task)
    state = task.initial
    plan, path, widths = [], [state], []
    expanded = generated = 0
    episode = 0
    while not task.is_goal(state):
        if episode >= episodes_limit:
            raise CycleGuard(state, episode, f"no goal after {episode} episodes")
        test = make_test(state)
        if fixed_k is None:
            r = iterated_iw(state, successors, test, k_max, atoms, relevant)
        else:
            try:
                r = iw(fixed_k, state, successors, test, atoms, relevant)
            except Exhausted as exc:
                r = SearchResult(None, exc.expanded, exc.generated)
        expanded += r.expanded
        generated += r.generated
        if not r.solved:
            raise EpisodeFailure(state, episode, "no subgoal reachable within the width bound")
        plan.extend(r.plan)
        path.extend(r.path[1:])
        widths.append(r.width)
        log.debug("episode %d: width %s, %d steps", episode, r.width, len(r.plan))
        state = r.end
        episode += 1
    return SearchResult(plan, expanded, generated, max(widths, default=0), state, path, widths)


def siw(task, k_max: int = 2, max_episodes: int | None = None) -> SearchResult:
    """Each episode runs iterated IW until the number of unsatisfied goals drops."""
    limit = max_episodes if max_episodes is not None else max(1, task.unsatisfied_goals(task.initial))

    def make_test(start):
        before = task.unsatisfied_goals(start)
        return lambda s: task.unsatisfied_goals(s) < before

    return _chain(task, limit, make_test, k_max)


def default_episode_limit(task):
    goals = bin(task.goal_pos).count("1") + bin(task.goal_neg).count("1")
    return 10 * max(1, goals)


def siwr(task, sketch: Sketch, k_max: int = 2, strict_k: int | None = None,
         max_episodes: int | None = None) -> SearchResult:
    """Each episode searches from s for a goal state or a state s' != s where
    (f(s), f(s')) satisfies some rule of ``sketch``.

    By default episodes use iterated IW up to ``k_max`` and report the width
    each one needed. With ``strict_k`` every episode runs IW(strict_k) only.
    """
    valuate = StateValuator(sketch, task)
    limit = max_episodes if max_episodes is not None else default_episode_limit(task)

    def make_test(start):
        return lambda s: task.is_goal(s) or (s != start and valuate.satisfies_any(start, s))

    return _chain(task, limit, make_test, k_max, strict_k)


def validate_plan(task, plan, start=None):
    """Replay ``plan`` from ``start`` (default: initial state); return the final
    state when every action is applicable, else None."""
    state = task.initial if start is None else start
    for a in plan:
        action = task.actions[a]
        if not action.applicable(state):
            return None
        state = action.apply(state)
    return state
