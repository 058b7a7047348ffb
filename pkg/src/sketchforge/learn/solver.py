"""Exact cost-minimal sketch search.

Feature subsets are enumerated by increasing total complexity. For a fixed
subset every state pair (s, s') collapses to a *profile*: per feature, the
condition class of f(s) and the kind of change to f(s'). A rule pattern covers
a set of profiles, and the pairs it makes good are exactly those whose profile
it covers. The search then looks for at most ``r`` rule patterns whose covered
profiles

* give every alive state a subgoal option (a tuple) all of whose contain
  pairs are covered, with no covered pair reaching a dead end within the
  option's distance, and
* induce an acyclic graph over solvable states.

Rule patterns are enumerated as the distinct profile masks they produce, and
the per-subset search is a depth-first cover with failure memoization.
"""
from __future__ import annotations

import logging
import time
from collections import OrderedDict
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..errors import SolverTimeout, Unsatisfiable
from ..sketch import Condition, Effect, Rule, Sketch
from ..verify import S_WIDTH, check_width
from .config import LearnConfig
from .facts import LearnFacts

log = logging.getLogger(__name__)

BASE = 6  # codes per feature and pair
BOOLEAN_CHOICES = [(c, e) for c in ("unk", "pos", "neg") for e in ("bot", "pos", "neg", "unk")]
NUMERICAL_CHOICES = [(c, e) for c in ("unk", "eq", "gt") for e in ("bot", "dec", "inc", "unk")]


def _compatible(boolean, choice, code):
    cond, eff = choice
    if boolean:
        v, w = divmod(code, 2)
        if v > 1:
            return False
        ok_c = cond == "unk" or (cond == "pos") == (v == 1)
        ok_e = {"unk": True, "bot": v == w, "pos": w == 1, "neg": w == 0}[eff]
    else:
        gt, ch = divmod(code, 3)
        ok_c = cond == "unk" or (cond == "gt") == (gt == 1)
        ok_e = {"unk": True, "bot": ch == 1, "dec": ch == 0, "inc": ch == 2}[eff]
    return ok_c and ok_e


def _choice_cost(choice):
    cond, eff = choice
    return (cond != "unk") + (eff != "bot")


def _mask(indices):
    m = 0
    for i in indices:
        m |= 1 << int(i)
    return m


@dataclass
class SolveResult:
    sketch: Sketch
    objective: int
    feature_ids: list
    stats: dict = field(default_factory=dict)


class _Problem:
    """Subset-independent data: pairs, labels, options, per-feature pair codes."""

    def __init__(self, facts: LearnFacts, valuations):
        src, dst, dist, solv_dst = [], [], [], []
        self.alive = []  # (pair range start, pair range end, global state)
        offset = 0
        state_offset = 0
        option_pairs = []
        solvable_all = []
        for inst in facts.instances:
            keep = inst.solvable[inst.pair_src]
            s_, d_, k_ = inst.pair_src[keep], inst.pair_dst[keep], inst.pair_dist[keep]
            starts = {}
            for idx in range(len(s_) - 1, -1, -1):
                starts[int(s_[idx])] = idx
            ends = {}
            for idx in range(len(s_)):
                ends[int(s_[idx])] = idx + 1
            for s, options in sorted(inst.tuples.items()):
                lo, hi = starts[s], ends[s]
                dsts = d_[lo:hi]
                dists = k_[lo:hi]
                dead = ~inst.solvable[dsts]
                opts = []
                for d, contain in options:
                    pos = np.searchsorted(dsts, np.asarray(contain))
                    if (pos >= len(dsts)).any() or (dsts[np.minimum(pos, len(dsts) - 1)] != contain).any():
                        continue  # contains s itself, which is never its own subgoal
                    need = offset + lo + pos
                    bad = offset + lo + np.flatnonzero(dead & (dists <= d))
                    opts.append((need, bad))
                option_pairs.append(opts)
                self.alive.append(state_offset + s)
            src.append(s_ + state_offset)
            dst.append(d_ + state_offset)
            dist.append(k_)
            solv_dst.append(inst.solvable[d_])
            solvable_all.append(inst.solvable)
            offset += len(s_)
            state_offset += inst.num_states
        self.num_states = state_offset
        self.src = np.concatenate(src) if src else np.zeros(0, np.int64)
        self.dst = np.concatenate(dst) if dst else np.zeros(0, np.int64)
        self.dist = np.concatenate(dist) if dist else np.zeros(0, np.int64)
        self.order_pair = np.concatenate(solv_dst) if solv_dst else np.zeros(0, bool)
        self.options = option_pairs
        self.valuations = valuations  # (features, global states)
        self._codes = {}

    def codes(self, f):
        c = self._codes.get(f)
        if c is None:
            v = self.valuations[f]
            a, b = v[self.src], v[self.dst]
            if self.boolean[f]:
                c = (2 * (a != 0) + (b != 0)).astype(np.int64)
            else:
                c = (3 * (a > 0) + 1 + np.sign(b - a)).astype(np.int64)
            self._codes[f] = c
        return c


class _SubsetSearch:
    """Feasibility of a fixed feature subset with a bounded number of rules."""

    def __init__(self, problem: _Problem, subset, prune_cycles=True):
        self.p = problem
        self.subset = subset
        pid = np.zeros(len(problem.src), dtype=np.int64)
        for f in subset:
            _, pid = np.unique(pid * BASE + problem.codes(f), return_inverse=True)
            pid = pid.reshape(-1)
        _, first = np.unique(pid, return_index=True)
        self.pid = pid
        self.num_profiles = len(first)
        self.profile_codes = [[int(problem.codes(f)[i]) for f in subset] for i in first.tolist()]
        self.forbidden = 0  # profiles that close a cycle on their own
        self._edges_by_profile = None
        self._masks = None
        self.feasible_base = self._build_options(prune_cycles)

    # options and pruning ----------------------------------------------------------

    def _build_options(self, prune_cycles):
        pid = self.pid
        self.state_options = []
        cyclic_cache = {}
        for opts in self.p.options:
            viable = []
            for need_pairs, bad_pairs in opts:
                need = _mask(np.unique(pid[need_pairs]))
                bad = _mask(np.unique(pid[bad_pairs])) if len(bad_pairs) else 0
                if need & (bad | self.forbidden):
                    continue
                viable.append((need, bad))
            if not viable:
                return False
            # profiles that are cyclic on their own can never be covered
            pruned = []
            for need, bad in (viable if prune_cycles else ()):
                ok = True
                for p in _bits(need):
                    cyc = cyclic_cache.get(p)
                    if cyc is None:
                        cyc = cyclic_cache[p] = self._cyclic(1 << p)
                        if cyc:
                            self.forbidden |= 1 << p
                    if cyc:
                        ok = False
                        break
                if ok:
                    pruned.append((need, bad))
            if not prune_cycles:
                pruned = viable
            if not pruned:
                return False
            # drop dominated options (superset need and superset bad)
            pruned = sorted(set(pruned), key=lambda o: (bin(o[0]).count("1"), bin(o[1]).count("1"), o))
            kept = []
            for need, bad in pruned:
                if not any((n2 & need) == n2 and (b2 & bad) == b2 for n2, b2 in kept):
                    kept.append((need, bad))
            self.state_options.append(kept)
        # identical option lists need to be checked once
        uniq = {}
        for opts in self.state_options:
            uniq.setdefault(tuple(opts), opts)
        self.state_options = list(uniq.values())
        self.state_options.sort(key=len)
        return True

    def _edges(self):
        if self._edges_by_profile is None:
            sel = self.p.order_pair
            self._edges_by_profile = (self.p.src[sel], self.p.dst[sel], self.pid[sel])
        return self._edges_by_profile

    def _cyclic(self, covered):
        if covered & self.forbidden:
            return True
        src, dst, pid = self._edges()
        on = np.zeros(self.num_profiles, dtype=bool)
        on[_bits(covered)] = True
        keep = on[pid]
        return _has_cycle(src[keep], dst[keep], self.p.num_states)

    # rule patterns ----------------------------------------------------------------

    def rule_masks(self):
        """Distinct coverage masks of all rule patterns, each with its simplest pattern."""
        full = (1 << self.num_profiles) - 1
        current = {full: (0, ())}
        for j, f in enumerate(self.subset):
            boolean = self.p.boolean[f]
            choices = BOOLEAN_CHOICES if boolean else NUMERICAL_CHOICES
            by_choice = []
            for ch in choices:
                m = 0
                for idx, codes in enumerate(self.profile_codes):
                    if _compatible(boolean, ch, codes[j]):
                        m |= 1 << idx
                by_choice.append((ch, m))
            nxt = {}
            for mask, (cost, pattern) in current.items():
                for ch, m in by_choice:
                    new = mask & m
                    if not new:
                        continue
                    cand = (cost + _choice_cost(ch), pattern + (ch,))
                    old = nxt.get(new)
                    if old is None or cand < old:
                        nxt[new] = cand
            current = nxt
        needed = 0
        for opts in self.state_options:
            for need, _ in opts:
                needed |= need
        masks = [(m, pat) for m, (_, pat) in current.items()
                 if not (m & self.forbidden) and (m & needed)]
        masks.sort(key=lambda x: (-bin(x[0] & needed).count("1"), x[1]))
        return masks

    # search -----------------------------------------------------------------------

    def solve(self, rules, deadline=None):
        """Rule patterns covering every state with at most ``rules`` rules, or None.

        Failures are memoized, so calling with increasing ``rules`` reuses work.
        """
        if not self.feasible_base:
            return None
        if not self.state_options:
            return []
        if self._masks is None:
            self._masks = self.rule_masks()
            self._failed = {}
            self._cycle_cache = {}
        self._deadline = deadline
        chosen = self._dfs(0, rules, [])
        return None if chosen is None else [self._masks[i][1] for i in chosen]

    def _branch(self, covered):
        """Candidate masks for the unsatisfied state with the fewest of them."""
        best = None
        for opts in self.state_options:
            usable = [(need & ~covered, bad) for need, bad in opts if not (bad & covered)]
            if any(missing == 0 for missing, _ in usable):
                continue
            cands = [i for i, (m, _) in enumerate(self._masks)
                     if any(m & missing and not (m & bad) for missing, bad in usable)]
            if best is None or len(cands) < len(best):
                best = cands
                if not cands:
                    break
        return best

    def _satisfied(self, covered):
        return all(any((need & ~covered) == 0 and not (bad & covered) for need, bad in opts)
                   for opts in self.state_options)

    def _alive(self, covered):
        return all(any(not (bad & covered) for _, bad in opts) for opts in self.state_options)

    def _acyclic(self, covered):
        hit = self._cycle_cache.get(covered)
        if hit is None:
            hit = self._cycle_cache[covered] = not self._cyclic(covered)
        return hit

    def _dfs(self, covered, left, chosen):
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise _Timeout()
        if self._satisfied(covered):
            return list(chosen)
        if left == 0 or self._failed.get(covered, -1) >= left:
            return None
        cands = self._branch(covered)
        for i in cands:
            new = covered | self._masks[i][0]
            if self._failed.get(new, -1) >= left - 1:
                continue
            if not self._alive(new) or not self._acyclic(new):
                self._failed[new] = max(self._failed.get(new, -1), 10 ** 6)
                continue
            chosen.append(i)
            out = self._dfs(new, left - 1, chosen)
            chosen.pop()
            if out is not None:
                return out
        self._failed[covered] = max(self._failed.get(covered, -1), left)
        return None


class _Timeout(Exception):
    pass


def _has_cycle(src, dst, n):
    """Cycle test for a directed graph by repeatedly peeling nodes without predecessors."""
    if len(src) == 0:
        return False
    indeg = np.bincount(dst, minlength=n)
    live = np.ones(len(src), dtype=bool)
    while True:
        sources = indeg == 0
        drop = live & sources[src]
        if not drop.any():
            return bool(live.any())
        live &= ~drop
        indeg -= np.bincount(dst[drop], minlength=n)


def _bits(m):
    out = []
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


def _subsets_with_complexity(features, complexities, target, max_size):
    """Index subsets (sorted) of ``features`` whose complexities sum to ``target``."""
    out = []

    def rec(start, remaining, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        if len(acc) == max_size:
            return
        for i in range(start, len(features)):
            c = complexities[i]
            if c > remaining:
                break
            acc.append(features[i])
            rec(i + 1, remaining - c, acc)
            acc.pop()

    rec(0, target, [])
    out.sort(key=lambda s: (len(s), s))
    return out


def _to_rules(pool, subset, patterns, names):
    rules = []
    for pattern in patterns:
        conds, effs = [], []
        for f, name, (cond, eff) in zip(subset, names, pattern):
            if cond != "unk":
                conds.append(Condition(name, cond))
            if eff != "bot":
                effs.append(Effect(name, eff))
        rules.append(Rule(tuple(conds), tuple(effs)))
    return rules


def feature_names(pool, subset):
    return [("b" if pool.features[f].boolean else "n") + str(f) for f in subset]


def solve(facts: LearnFacts, pool, config: LearnConfig) -> SolveResult:
    """Cost-minimal sketch for the training data in ``facts``.

    Objective: ``feature_weight * sum(complexities) + rule_weight * rules``.
    The result is checked for s-width and acyclicity on the training spaces.
    Raises :class:`Unsatisfiable` or :class:`SolverTimeout`.
    """
    result = _search(facts, pool, config)
    assert_sound(result.sketch, facts.spaces, facts.k)
    return result


def assert_sound(sketch, spaces, k):
    """Post-condition: the sketch has s-width at most ``k`` and is acyclic on ``spaces``."""
    for space in spaces:
        report = check_width(sketch, space, k, S_WIDTH)
        if not report.passed:
            raise AssertionError(f"learned sketch unsound on {space.task.name}:\n{report.text()}")


def _search(facts, pool, config):
    started = time.monotonic()
    deadline = started + config.time_limit if config.time_limit else None
    valuations = np.hstack([inst.valuations for inst in facts.instances]) if facts.instances else \
        np.zeros((len(pool), 0), dtype=np.int64)
    problem = _Problem(facts, valuations)
    problem.boolean = pool.boolean_mask
    stats = {"subsets": 0, "feasibility_checks": 0}

    if not problem.alive:
        sketch = Sketch({}, [])
        return SolveResult(sketch, 0, [], {**stats, "seconds": time.monotonic() - started})
    if config.max_rules == 0:
        raise Unsatisfiable("C2", "alive states need subgoals but no rules are allowed")

    # constant features never help: every condition on them is vacuous or impossible
    informative = [f for f in range(len(pool)) if valuations[f].min() != valuations[f].max()]
    informative.sort(key=lambda f: (pool.features[f].complexity, f))
    comps = [pool.features[f].complexity for f in informative]
    if not informative or not _SubsetSearch(problem, tuple(informative), prune_cycles=False).feasible_base:
        raise Unsatisfiable("C2-C5", "no feature subset separates subgoals from dead ends")

    fw, rw = config.feature_weight, config.rule_weight
    max_c = sum(sorted(comps, reverse=True)[:config.max_features])
    upper = fw * max_c + rw * config.max_rules
    candidates = {}  # complexity -> subsets that passed the option filter
    cache = OrderedDict()
    objective = rw
    try:
        for objective in range(rw, upper + 1):
            for c in range(0, max_c + 1):
                rest = objective - fw * c
                if rest < rw:
                    break
                if rest % rw or rest // rw > config.max_rules:
                    continue
                rules = rest // rw
                if c not in candidates:
                    candidates[c] = []
                    for subset in _subsets_with_complexity(informative, comps, c, config.max_features):
                        stats["subsets"] += 1
                        search = _SubsetSearch(problem, subset)
                        if search.feasible_base:
                            candidates[c].append(subset)
                            _remember(cache, subset, search)
                for subset in candidates[c]:
                    search = cache.get(subset)
                    if search is None:
                        search = _SubsetSearch(problem, subset)
                    _remember(cache, subset, search)
                    stats["feasibility_checks"] += 1
                    patterns = search.solve(rules, deadline)
                    if patterns is None:
                        continue
                    names = feature_names(pool, subset)
                    sketch = Sketch({n: pool.features[f] for n, f in zip(names, subset)},
                                    _to_rules(pool, subset, patterns, names))
                    log.info("optimum %d: %d features, %d rules", objective, len(subset), len(patterns))
                    stats["seconds"] = time.monotonic() - started
                    return SolveResult(sketch, objective, list(subset), stats)
    except _Timeout:
        raise SolverTimeout(objective, None, None) from None
    raise Unsatisfiable("C2-C8", f"no sketch with at most {config.max_rules} rules and "
                                 f"{config.max_features} features exists over the pool")


def _remember(cache, key, value, size=4096):
    cache[key] = value
    cache.move_to_end(key)
    while len(cache) > size:
        cache.popitem(last=False)
