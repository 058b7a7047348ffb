"""Command line interface: ``sketchforge expand|learn|verify|plan|emit-asp``.

Exit codes: 0 success, 2 usage or parse error, 3 state capacity exceeded,
4 no sketch exists, 5 search episode failed, 6 verification failed,
7 solver budget exceeded, 8 incremental learning did not converge.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import (CapacityExceeded, ConfigError, EpisodeFailure, Exhausted, FeatureTypeMismatch,
                     MissingFeature, NonTermination, PDDLError, PoolExplosion, SketchforgeError,
                     SketchSyntaxError, SolverTimeout, UnknownFeature, Unsatisfiable)
from .learn import LearnConfig, build_facts, emit_asp, incremental_learn, load_config
from .dl import generate_pool
from .pddl import ground, parse_domain, parse_instance
from .search import siw, siwr, validate_plan
from .sketch import load_sketch, serialize_sketch
from .statespace import DEFAULT_MAX_STATES, expand
from .verify import MODES, STRICT, dumps_reports, check_width

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_UNSAT = 4
EXIT_EPISODE = 5
EXIT_VERIFY = 6
EXIT_TIMEOUT = 7
EXIT_NONTERMINATION = 8

log = logging.getLogger("sketchforge")


class UsageError(SketchforgeError):
    pass


# --- input handling -------------------------------------------------------------

def _existing(paths):
    missing = [str(p) for p in paths if not Path(p).is_file()]
    if missing:
        raise UsageError(f"no such file: {', '.join(missing)}")


def _load_inputs(domain, instances):
    """Parse the domain and every instance up front; returns (schema, [(path, task)])."""
    _existing([domain, *instances])
    schema = parse_domain(Path(domain).read_text(encoding="utf-8"))
    tasks = []
    for path in instances:
        inst = parse_instance(Path(path).read_text(encoding="utf-8"), schema)
        tasks.append((str(path), ground(schema, inst)))
    return schema, tasks


def _load_sketch(path, tasks):
    """Parse a sketch and check that its features evaluate on every task."""
    _existing([path])
    sketch = load_sketch(path)
    for _, task in tasks:
        sketch.valuation(task, [task.initial])
    return sketch


def _learn_config(args):
    config = load_config(args.config) if args.config else LearnConfig()
    overrides = {
        "width": args.width, "max_rules": getattr(args, "max_rules", None),
        "max_complexity": getattr(args, "max_complexity", None),
        "max_states": getattr(args, "max_states", None),
        "time_limit": getattr(args, "time_limit", None),
        "backend": getattr(args, "backend", None),
    }
    if getattr(args, "include_distance", False):
        overrides["include_distance"] = True
    return config.replace(**overrides)


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _emit(args, data, text):
    sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n" if args.json else text)


# --- subcommands ----------------------------------------------------------------

def cmd_expand(args):
    _, tasks = _load_inputs(args.domain, [args.instance])
    _, task = tasks[0]
    space = expand(task, args.max_states)
    data = {"instance": task.name, "states": len(space), "alive": int(space.alive.sum()),
            "dead_ends": int(space.dead_end.sum()), "goals": int(space.goal.sum()),
            "initial_solvable": bool(space.solvable[space.initial])}
    if args.dump:
        _write(args.dump, space.dumps() + "\n")
    if args.dump_task:
        _write(args.dump_task, task.dumps() + "\n")
    text = (f"{task.name}: {data['states']} states, {data['alive']} alive, "
            f"{data['dead_ends']} dead ends, {data['goals']} goals\n")
    _emit(args, data, text)
    return EXIT_OK


def cmd_learn(args):
    config = _learn_config(args)
    _, tasks = _load_inputs(args.domain, args.instances)
    if config.backend == "asp-emit":
        return _emit_program(args, config, tasks)
    names = [Path(p).name for p, _ in tasks]
    result = incremental_learn([t for _, t in tasks], config, names)
    sketch_text = serialize_sketch(result.sketch)
    _write(args.out, sketch_text)
    if args.audit:
        _write(args.audit, result.dumps() + "\n")
    if args.out is not None:
        summary = (f"learned {len(result.sketch.features)} features, {len(result.sketch.rules)} rules "
                   f"after {result.solver_calls} solver calls\n")
        _emit(args, result.audit(), summary)
    return EXIT_OK


def cmd_verify(args):
    if args.mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}")
    _, tasks = _load_inputs(args.domain, args.instances)
    sketch = _load_sketch(args.sketch, tasks)

    def one(item):
        _, task = item
        return check_width(sketch, expand(task, args.max_states), args.width, args.mode)

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        reports = list(pool.map(one, tasks))
    if args.json:
        sys.stdout.write(dumps_reports(reports) + "\n")
    else:
        sys.stdout.write("".join(r.text() + "\n" for r in reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def cmd_plan(args):
    _, tasks = _load_inputs(args.domain, [args.instance])
    _, task = tasks[0]
    if args.sketch:
        sketch = _load_sketch(args.sketch, tasks)
        result = siwr(task, sketch, args.k_max, strict_k=args.width)
    else:
        result = siw(task, args.k_max)
    end = validate_plan(task, result.plan)
    valid = end is not None and task.is_goal(end)
    plan_text = "".join(f"{task.actions[a]}\n" for a in result.plan)
    if args.out:
        _write(args.out, plan_text)
    data = {"instance": task.name, "valid": valid, **result.to_json()}
    text = (plan_text if not args.out else "") + (
        f"; plan length {len(result.plan)}, episodes {len(result.episode_widths)}, "
        f"max width {data['max_width']}, valid {valid}\n")
    _emit(args, data, text)
    return EXIT_OK if valid else EXIT_EPISODE


def _emit_program(args, config, tasks):
    spaces = []
    for _, task in tasks:
        spaces.append(expand(task, config.max_states))
    pool = generate_pool(spaces, config.max_complexity, config.include_distance, config.max_pool_candidates)
    facts = build_facts(spaces, pool, config.width)
    _write(args.out, emit_asp(facts, pool, config))
    return EXIT_OK


def cmd_emit_asp(args):
    config = _learn_config(args)
    _, tasks = _load_inputs(args.domain, args.instances)
    return _emit_program(args, config, tasks)


# --- parser ---------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="sketchforge", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="maximum worker threads (default: available cores)")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="expand and label a state space")
    p.add_argument("domain")
    p.add_argument("instance")
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    p.add_argument("--dump", help="write the state space as JSON to this file")
    p.add_argument("--dump-task", help="write the ground task as JSON to this file")
    p.set_defaults(func=cmd_expand)

    def learning_options(p):
        p.add_argument("domain")
        p.add_argument("instances", nargs="+")
        p.add_argument("--config", help="TOML file with a [learn] table")
        p.add_argument("-k", "--width", type=int, help="width bound (0, 1 or 2)")
        p.add_argument("--max-rules", type=int)
        p.add_argument("--max-complexity", type=int)
        p.add_argument("--max-states", type=int)
        p.add_argument("--include-distance", action="store_true")
        p.add_argument("--time-limit", type=float, help="seconds per solver call")
        p.add_argument("-o", "--out", help="output file (default: stdout)")

    p = sub.add_parser("learn", help="learn a sketch incrementally")
    learning_options(p)
    p.add_argument("--backend", choices=["internal", "asp-emit"])
    p.add_argument("--audit", help="write the JSON audit trail to this file")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("verify", help="check acyclicity and width of a sketch")
    p.add_argument("domain")
    p.add_argument("instances", nargs="+")
    p.add_argument("-s", "--sketch", required=True)
    p.add_argument("-k", "--width", type=int, required=True)
    p.add_argument("--mode", default=STRICT, choices=list(MODES))
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plan", help="plan with SIW_R (or SIW without a sketch)")
    p.add_argument("domain")
    p.add_argument("instance")
    p.add_argument("-s", "--sketch")
    p.add_argument("--k-max", type=int, default=2, help="largest width tried per episode")
    p.add_argument("-k", "--width", type=int, help="run every episode with IW(k) only")
    p.add_argument("-o", "--out", help="write the plan to this file")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("emit-asp", help="write the learning problem as an ASP program")
    learning_options(p)
    p.set_defaults(func=cmd_emit_asp)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except (UsageError, ConfigError, PDDLError, SketchSyntaxError, UnknownFeature,
            FeatureTypeMismatch, MissingFeature) as exc:
        print(f"sketchforge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CapacityExceeded, PoolExplosion) as exc:
        print(f"sketchforge: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except Unsatisfiable as exc:
        print(f"sketchforge: no sketch exists: {exc}", file=sys.stderr)
        return EXIT_UNSAT
    except (EpisodeFailure, Exhausted) as exc:
        print(f"sketchforge: {exc}", file=sys.stderr)
        return EXIT_EPISODE
    except SolverTimeout as exc:
        print(f"sketchforge: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT
    except NonTermination as exc:
        print(f"sketchforge: {exc}", file=sys.stderr)
        return EXIT_NONTERMINATION


if __name__ == "__main__":
    sys.exit(main())
