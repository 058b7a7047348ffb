"""
Learning sketches for Gripper
=============================

The learner starts from the empty sketch and trains on the smallest instance
the current sketch fails on, until every instance passes.
"""

from sketchforge.domains import generate_task
from sketchforge.learn import LearnConfig, incremental_learn
from sketchforge.sketch import serialize_sketch

tasks = [generate_task("gripper", balls)[2] for balls in (1, 2, 3)]

for width in (1, 2):
    result = incremental_learn(tasks, LearnConfig(width=width, max_complexity=5))
    print(f"width {width}: {result.solver_calls} solver calls")
    for it in result.iterations:
        print(f"  failed on {it.failing}, trained on {it.training}, objective {it.objective}")
    print(serialize_sketch(result.sketch))
