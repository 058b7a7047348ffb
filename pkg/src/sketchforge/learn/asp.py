"""Emission of the learning problem as an answer set program.

The rules encode the same theory the internal solver decides: rule patterns
choose one condition and one effect per feature, good pairs are exactly the
rule-satisfying ones, every alive state picks a subgoal tuple whose contain
states are good, no good pair leads to a dead end at most as far as the chosen
tuple, and good pairs over solvable states are acyclic.
"""
from __future__ import annotations

from .config import LearnConfig
from .facts import LearnFacts

PROGRAM = r"""
{ select(F) } :- feature(F).           { rule(1..max_sketch_rules) }.
{ c_eq(R, F); c_gt(R, F); c_unk(R, F) } = 1 :- rule(R), numerical(F).
{ c_pos(R, F); c_neg(R, F); c_unk(R, F) } = 1 :- rule(R), boolean(F).
{ e_dec(R, F); e_inc(R, F); e_unk(R, F); e_bot(R, F) } = 1 :- rule(R), numerical(F).
{ e_pos(R, F); e_neg(R, F); e_unk(R, F); e_bot(R, F) } = 1 :- rule(R), boolean(F).
{ good(R, I, S, S') } :- rule(R), s_distance(I, S, S', _).
c_satisfied(R, F, I, S) :- { c_eq(R, F) : V = 0; c_gt(R, F) : V > 0; c_pos(R, F) : V = 1; c_neg(R, F) : V = 0; c_unk(R, F) } = 1, rule(R), feature_valuation(F, I, S, V), s_distance(I, S, S', _).
e_satisfied(R, F, I, S, S') :- { e_dec(R, F) : V > V'; e_inc(R, F) : V < V'; e_pos(R, F) : V' = 1; e_neg(R, F) : V' = 0; e_bot(R, F) : V = V'; e_unk(R, F) } = 1, rule(R), feature_valuation(F, I, S, V), feature_valuation(F, I, S', V'), s_distance(I, S, S', _).
:- { not c_satisfied(R, F, I, S); not e_satisfied(R, F, I, S, S') } != 0, select(F), good(R, I, S, S').
:- { not c_satisfied(R, F, I, S) : select(F); not e_satisfied(R, F, I, S, S') : select(F) } = 0, rule(R), s_distance(I, S, S', _), not good(R, I, S, S').
{ subgoal(I, S, T) : tuple(I, S, T) } = 1 :- solvable(I, S), exceed(I, S).
:- { good(R, I, S, S') : rule(R) } = 0, subgoal(I, S, T), contain(I, S, T, S').
:- D <= D', s_distance(I, S, S', D), t_distance(I, S, T, D'), subgoal(I, S, T), good(_, I, S, S'), solvable(I, S), unsolvable(I, S').
order(I, S, S') :- solvable(I, S), solvable(I, S'), good(_, I, S, S'), order(I, S').
order(I, S) :- solvable(I, S), order(I, S, S') : good(_, I, S, S'), solvable(I, S), solvable(I, S').
:- solvable(I, S), not order(I, S).
#minimize { C,complexity(F, C) : complexity(F, C), select(F) }.
#minimize { 1,rule(R) : rule(R) }.
""".strip()


def _weighted_program(config):
    if config.feature_weight == 1 and config.rule_weight == 1:
        return PROGRAM
    return (PROGRAM
            .replace("#minimize { C,complexity(F, C) : complexity(F, C), select(F) }.",
                     f"#minimize {{ C*{config.feature_weight},complexity(F, C) : complexity(F, C), select(F) }}.")
            .replace("#minimize { 1,rule(R) : rule(R) }.",
                     f"#minimize {{ {config.rule_weight},rule(R) : rule(R) }}."))


def feature_id(i):
    return f"f{i}"


def emit_facts(facts: LearnFacts, pool=None, feature_ids=None) -> list[str]:
    """Ground facts, one statement per line, in a fixed order."""
    pool = facts.pool if pool is None else pool
    lines = []
    ids = range(len(pool)) if feature_ids is None else feature_ids
    for f in ids:
        feat = pool.features[f]
        kind = "boolean" if feat.boolean else "numerical"
        lines.append(f"feature({feature_id(f)}). {kind}({feature_id(f)}). "
                     f"complexity({feature_id(f)},{feat.complexity}).")
    for i, inst in enumerate(facts.instances):
        for s in range(inst.num_states):
            lines.append(f"solvable({i},{s})." if inst.solvable[s] else f"unsolvable({i},{s}).")
            if inst.exceed[s]:
                lines.append(f"exceed({i},{s}).")
        for a, b, d in zip(inst.pair_src.tolist(), inst.pair_dst.tolist(), inst.pair_dist.tolist()):
            lines.append(f"s_distance({i},{a},{b},{d}).")
        for s, options in inst.tuples.items():
            for t, (d, contain) in enumerate(options):
                lines.append(f"tuple({i},{s},{t}). t_distance({i},{s},{t},{d}).")
                lines.extend(f"contain({i},{s},{t},{x})." for x in contain)
        if inst.valuations is not None:
            vals = inst.valuations
            for f in ids:
                row = vals[f].tolist()
                lines.append(" ".join(f"feature_valuation({feature_id(f)},{i},{s},{v})."
                                      for s, v in enumerate(row)))
    return lines


def emit_asp(facts: LearnFacts, pool, config: LearnConfig, feature_ids=None) -> str:
    """Complete program text: constant, facts, then the rules."""
    parts = [f"#const max_sketch_rules={config.max_rules}.", *emit_facts(facts, pool, feature_ids),
             _weighted_program(config)]
    return "\n".join(parts) + "\n"
