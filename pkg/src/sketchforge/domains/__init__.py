"""Bundled PDDL domains, handcrafted sketches and instance generators."""
from __future__ import annotations

from importlib import resources

from ..pddl import ground, parse_domain, parse_instance
from .generators import GENERATORS

DOMAIN_FILES = {
    "gripper": "gripper.pddl", "delivery": "delivery.pddl", "blocks-on": "blocks.pddl",
    "blocks-clear": "blocks.pddl", "childsnack": "childsnack.pddl", "miconic": "miconic.pddl",
    "visitall": "visitall.pddl", "spanner": "spanner.pddl",
}


def domain_path(name):
    """Filesystem path of the bundled domain file for ``name``."""
    return resources.files(__package__) / "pddl" / DOMAIN_FILES[name]


def sketch_path(name):
    """Filesystem path of a bundled sketch file, e.g. ``"gripper-k1"``."""
    return resources.files(__package__) / "sketches" / f"{name}.sketch"


def sketch_names():
    return sorted(p.name[:-len(".sketch")] for p in (resources.files(__package__) / "sketches").iterdir()
                  if p.name.endswith(".sketch"))


def load_schema(name):
    return parse_domain(domain_path(name).read_text(encoding="utf-8"))


def generate_task(name, *args, **kwargs):
    """Generate, parse and ground one instance; returns ``(instance name, pddl text, task)``."""
    schema = load_schema(name)
    inst_name, text = GENERATORS[name](*args, **kwargs)
    return inst_name, text, ground(schema, parse_instance(text, schema))


__all__ = ["DOMAIN_FILES", "GENERATORS", "domain_path", "sketch_path", "sketch_names",
           "load_schema", "generate_task"]
