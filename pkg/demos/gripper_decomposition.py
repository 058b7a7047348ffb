"""
Decomposing Gripper into width-1 subproblems
============================================

Delivering every ball at once needs IW(2) or more. A two-rule sketch splits
the task into subproblems that IW(1) solves one after another.
"""

from sketchforge import load_sketch
from sketchforge.domains import generate_task, sketch_path
from sketchforge.search import iterated_iw, siwr, task_oracles, validate_plan
from sketchforge.sketch import serialize_sketch
from sketchforge.statespace import expand

# a Gripper instance with three balls in room A
_, _, task = generate_task("gripper", 3)
space = expand(task)
print(f"{task.name}: {len(space)} states, goal {space.goal_distances()[space.initial]} steps away")

# plain iterated width on the full goal
successors, atoms, relevant = task_oracles(task)
result = iterated_iw(task.initial, successors, task.is_goal, 2, atoms, relevant)
print("iterated IW up to width 2 solves the whole goal:", result.solved)

# the bundled width-1 sketch: pick up balls still in room A, drop carried ones
sketch = load_sketch(sketch_path("gripper-k1"))
print(serialize_sketch(sketch))
plan = siwr(task, sketch, k_max=2)
print(f"SIW_R: {len(plan.plan)} actions in {len(plan.episode_widths)} episodes, "
      f"episode widths {plan.episode_widths}")
assert task.is_goal(validate_plan(task, plan.plan))
for a in plan.plan[:6]:
    print("  ", task.actions[a])
