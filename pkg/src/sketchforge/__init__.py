"""Learning and verifying policy sketches for classical planning domains."""
from .errors import SketchforgeError
from .pddl import ground, load_task, parse_domain, parse_instance
from .sketch import Sketch, load_sketch, parse_sketch, serialize_sketch
from .statespace import StateSpace, expand
from .verify import check_acyclicity, check_width

__version__ = "0.1.0"

__all__ = [
    "Sketch", "SketchforgeError", "StateSpace", "check_acyclicity", "check_width", "expand", "ground",
    "load_sketch", "load_task", "parse_domain", "parse_instance", "parse_sketch", "serialize_sketch",
]
