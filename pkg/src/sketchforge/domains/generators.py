"""Seeded generators of small PDDL instances for the bundled domains.

Every generator returns ``(name, text)``; identical arguments give identical text.
"""
from __future__ import annotations

import random


def _problem(name, domain, objects, init, goal):
    lines = [f"(define (problem {name})", f"  (:domain {domain})"]
    lines.append("  (:objects " + " ".join(objects) + ")")
    lines.append("  (:init " + "\n         ".join(init) + ")")
    lines.append("  (:goal (and " + " ".join(goal) + ")))")
    return "\n".join(lines) + "\n"


def _typed(names, kind):
    return f"{' '.join(names)} - {kind}" if names else ""


def _grid(width, height):
    cells = [f"c{x}-{y}" for y in range(height) for x in range(width)]
    edges = []
    for y in range(height):
        for x in range(width):
            for dx, dy in ((1, 0), (0, 1)):
                if x + dx < width and y + dy < height:
                    a, b = f"c{x}-{y}", f"c{x + dx}-{y + dy}"
                    edges += [(a, b), (b, a)]
    return cells, edges


def gripper(balls: int):
    """IPC Gripper: all balls start in room a and must reach room b."""
    names = [f"ball{i}" for i in range(1, balls + 1)]
    init = ["(room rooma)", "(room roomb)", "(gripper left)", "(gripper right)",
            "(at-robby rooma)", "(free left)", "(free right)"]
    init += [f"(ball {b})" for b in names] + [f"(at {b} rooma)" for b in names]
    goal = [f"(at {b} roomb)" for b in names]
    return f"gripper-{balls}", _problem(f"gripper-{balls}", "gripper-strips",
                                        ["rooma", "roomb", *names, "left", "right"], init, goal)


def delivery(width: int, height: int, packages: int, seed: int):
    """Grid Delivery: carry every package, one at a time, to a common target cell."""
    rng = random.Random(seed)
    cells, edges = _grid(width, height)
    pkgs = [f"p{i}" for i in range(1, packages + 1)]
    target = rng.choice(cells)
    init = ["(empty)", f"(at-agent {rng.choice(cells)})"]
    init += [f"(adjacent {a} {b})" for a, b in edges]
    init += [f"(at {p} {rng.choice([c for c in cells if c != target])})" for p in pkgs]
    goal = [f"(at {p} {target})" for p in pkgs]
    name = f"delivery-{width}x{height}-{packages}-{seed}"
    return name, _problem(name, "delivery", [_typed(cells, "cell"), _typed(pkgs, "package")], init, goal)


def _towers(rng, blocks):
    order = blocks[:]
    rng.shuffle(order)
    towers, current = [], []
    for b in order:
        current.append(b)
        if rng.random() < 0.4:
            towers.append(current)
            current = []
    if current:
        towers.append(current)
    return towers


def _tower_atoms(towers):
    atoms = []
    for tower in towers:
        atoms.append(f"(ontable {tower[0]})")
        atoms += [f"(on {top} {below})" for below, top in zip(tower, tower[1:])]
        atoms.append(f"(clear {tower[-1]})")
    return atoms


def blocks_on(blocks: int, seed: int):
    """Blocksworld with the single goal of one block on top of another."""
    rng = random.Random(seed)
    names = [f"b{i}" for i in range(1, blocks + 1)]
    towers = _towers(rng, names)
    on = {top: below for t in towers for below, top in zip(t, t[1:])}
    while True:
        x, y = rng.sample(names, 2)
        if on.get(x) != y:
            break
    name = f"blocks-on-{blocks}-{seed}"
    return name, _problem(name, "blocks", names, ["(handempty)", *_tower_atoms(towers)], [f"(on {x} {y})"])


def blocks_clear(blocks: int, seed: int):
    """Blocksworld with the goal of clearing one block and leaving the hand empty."""
    rng = random.Random(seed)
    names = [f"b{i}" for i in range(1, blocks + 1)]
    towers = _towers(rng, names)
    covered = [below for t in towers for below in t[:-1]]
    target = rng.choice(covered) if covered else rng.choice(names)
    name = f"blocks-clear-{blocks}-{seed}"
    return name, _problem(name, "blocks", names, ["(handempty)", *_tower_atoms(towers)], [f"(clear {target})", "(handempty)"])


def childsnack(children: int, trays: int, tables: int, seed: int, allergic: int | None = None):
    """Childsnack with exactly enough bread and content for every child."""
    rng = random.Random(seed)
    kids = [f"child{i}" for i in range(1, children + 1)]
    breads = [f"bread{i}" for i in range(1, children + 1)]
    contents = [f"content{i}" for i in range(1, children + 1)]
    sandwiches = [f"sandw{i}" for i in range(1, children + 1)]
    tray_names = [f"tray{i}" for i in range(1, trays + 1)]
    table_names = [f"table{i}" for i in range(1, tables + 1)]
    n_allergic = allergic if allergic is not None else rng.randint(0, children)
    allergic_kids = set(rng.sample(kids, n_allergic))
    init = [f"(at {t} kitchen)" for t in tray_names]
    init += [f"(at_kitchen_bread {b})" for b in breads]
    init += [f"(at_kitchen_content {c})" for c in contents]
    init += [f"(no_gluten_bread {b})" for b in rng.sample(breads, n_allergic)]
    init += [f"(no_gluten_content {c})" for c in rng.sample(contents, n_allergic)]
    for k in kids:
        init.append(f"(allergic_gluten {k})" if k in allergic_kids else f"(not_allergic_gluten {k})")
        init.append(f"(waiting {k} {rng.choice(table_names)})")
    init += [f"(notexist {s})" for s in sandwiches]
    goal = [f"(served {k})" for k in kids]
    objects = [_typed(kids, "child"), _typed(breads, "bread-portion"), _typed(contents, "content-portion"),
               _typed(tray_names, "tray"), _typed(table_names, "place"), _typed(sandwiches, "sandwich")]
    name = f"childsnack-{children}-{trays}-{tables}-{seed}"
    return name, _problem(name, "child-snack", objects, init, goal)


def miconic(floors: int, passengers: int, seed: int):
    """Miconic elevator with random origins and distinct destinations per passenger."""
    rng = random.Random(seed)
    fl = [f"f{i}" for i in range(floors)]
    ps = [f"p{i}" for i in range(1, passengers + 1)]
    init = [f"(above {fl[i]} {fl[j]})" for i in range(floors) for j in range(i + 1, floors)]
    init.append(f"(lift-at {rng.choice(fl)})")
    for p in ps:
        origin, destin = rng.sample(fl, 2)
        init += [f"(origin {p} {origin})", f"(destin {p} {destin})"]
    goal = [f"(served {p})" for p in ps]
    name = f"miconic-{floors}-{passengers}-{seed}"
    return name, _problem(name, "miconic", [_typed(ps, "passenger"), _typed(fl, "floor")], init, goal)


def visitall(width: int, height: int, seed: int):
    """Visit every cell of a grid; the start cell counts as visited."""
    rng = random.Random(seed)
    cells, edges = _grid(width, height)
    start = rng.choice(cells)
    init = [f"(at-robot {start})", f"(visited {start})"]
    init += [f"(connected {a} {b})" for a, b in edges]
    goal = [f"(visited {c})" for c in cells]
    name = f"visitall-{width}x{height}-{seed}"
    return name, _problem(name, "grid-visit-all", [_typed(cells, "place")], init, goal)


def spanner(locations: int, spanners: int, nuts: int, seed: int):
    """One-way corridor from the shed to the gate with spanners spread along it."""
    rng = random.Random(seed)
    locs = [f"location{i}" for i in range(1, locations + 1)]
    path = ["shed", *locs, "gate"]
    sp = [f"spanner{i}" for i in range(1, spanners + 1)]
    ns = [f"nut{i}" for i in range(1, nuts + 1)]
    init = ["(at bob shed)"]
    init += [f"(link {a} {b})" for a, b in zip(path, path[1:])]
    for s in sp:
        init += [f"(at {s} {rng.choice(locs)})", f"(useable {s})"]
    for n in ns:
        init += [f"(at {n} gate)", f"(loose {n})"]
    goal = [f"(tightened {n})" for n in ns]
    objects = ["bob - man", _typed(sp, "spanner"), _typed(ns, "nut"),
               _typed(["shed", *locs, "gate"], "location")]
    name = f"spanner-{locations}-{spanners}-{nuts}-{seed}"
    return name, _problem(name, "spanner", objects, init, goal)


GENERATORS = {
    "gripper": gripper, "delivery": delivery, "blocks-on": blocks_on, "blocks-clear": blocks_clear,
    "childsnack": childsnack, "miconic": miconic, "visitall": visitall, "spanner": spanner,
}
