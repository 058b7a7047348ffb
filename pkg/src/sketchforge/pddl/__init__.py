from .grounding import GroundAction, GroundTask, bits, ground, mask_of
from .model import ActionSchema, Atom, DomainSchema, InstanceDescription, Literal, Predicate
from .parser import domain_to_pddl, instance_to_pddl, parse_domain, parse_instance


def load_task(domain_path, instance_path):
    """Parse and ground a domain/problem file pair."""
    with open(domain_path, encoding="utf-8") as fh:
        schema = parse_domain(fh.read())
    with open(instance_path, encoding="utf-8") as fh:
        inst = parse_instance(fh.read(), schema)
    return schema, inst, ground(schema, inst)


__all__ = [
    "ActionSchema", "Atom", "DomainSchema", "GroundAction", "GroundTask", "InstanceDescription",
    "Literal", "Predicate", "bits", "domain_to_pddl", "ground", "instance_to_pddl", "load_task",
    "mask_of", "parse_domain", "parse_instance",
]
