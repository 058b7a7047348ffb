from .iw import SearchResult, iterated_iw, iw, space_oracles, task_oracles
from .novelty import NoveltyTable
from .siw import siw, siwr, validate_plan
from .tuple_graph import TupleGraph, TupleNode, state_tuples, tuple_graph

__all__ = [
    "NoveltyTable", "SearchResult", "TupleGraph", "TupleNode", "iterated_iw", "iw", "siw", "siwr",
    "space_oracles", "state_tuples", "task_oracles", "tuple_graph", "validate_plan",
]
