"""
Width from first principles
===========================

The brute-force oracle enumerates atom tuples and admissible chains. Width k
guarantees that IW(k) finds an optimal plan, but IW can also succeed below the
width when its expansion order happens to be favourable.
"""

import numpy as np

from sketchforge.domains import generate_task
from sketchforge.errors import Exhausted
from sketchforge.search import iw, space_oracles
from sketchforge.statespace import expand
from sketchforge.verify import brute_force_width


def smallest_optimal_iw(space, start, targets):
    succ, atoms, relevant = space_oracles(space)
    best = space.distances_from(start)[list(targets)].min()
    for k in range(4):
        try:
            r = iw(k, start, succ, targets.__contains__, atoms, relevant)
        except Exhausted:
            continue
        if len(r.plan) == best:
            return k


space = expand(generate_task("blocks-on", 3, 1)[2])
goals = set(np.flatnonzero(space.goal).tolist())
print("goal from the initial state:", brute_force_width(space, space.initial, goals),
      smallest_optimal_iw(space, space.initial, goals))

# a subproblem of width 2 that IW(1) still solves optimally
targets = {12, 17, 21}
print("width", brute_force_width(space, 19, targets), "IW optimal at", smallest_optimal_iw(space, 19, targets))
