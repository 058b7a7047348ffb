"""
Checking the bundled sketches
=============================

Each sketch is checked for acyclicity and for the width of the subproblems it
induces, on small generated instances of its domain.
"""

from sketchforge import load_sketch
from sketchforge.domains import generate_task, sketch_path
from sketchforge.statespace import expand
from sketchforge.verify import check_width

instances = {
    "delivery": [(2, 2, 1, 0), (3, 2, 2, 1)],
    "gripper": [(1,), (3,)],
    "blocks-on": [(3, 0), (4, 1)],
    "childsnack": [(2, 1, 1, 0)],
    "miconic": [(3, 2, 0)],
    "visitall": [(2, 3, 0)],
    "spanner": [(3, 2, 2, 0)],
}

for name in ["delivery-k0", "delivery-k1", "delivery-k2", "gripper-k1", "gripper-k2",
             "blocks-on-k1", "childsnack-k1", "miconic-k1", "visitall-k1", "spanner-k1"]:
    domain, k = name.rsplit("-k", 1)
    sketch = load_sketch(sketch_path(name))
    for args in instances[domain]:
        space = expand(generate_task(domain, *args)[2])
        print(check_width(sketch, space, int(k)).text())

# the same Gripper sketch checked one width too low fails on the one-ball instance
space = expand(generate_task("gripper", 1)[2])
print(check_width(load_sketch(sketch_path("gripper-k2")), space, 1).text())
