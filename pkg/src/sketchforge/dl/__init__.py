from .batch import INF_VALUE, BatchEvaluator, evaluate_features
from .evaluate import INFINITY, StateView, evaluate_concept, evaluate_feature, evaluate_role
from .pool import FeaturePool, generate_pool
from .syntax import (BEmpty, BNullary, CAll, CAnd, CBot, CEqual, CNot, COneOf, Concept, CPrimitive,
                     CSome, CTop, Feature, NCount, NDistance, RInverse, Role, RPrimitive, RRestrict,
                     RTransitiveClosure, parse_expr, parse_feature)

__all__ = [
    "INF_VALUE", "INFINITY", "BatchEvaluator", "BEmpty", "BNullary", "CAll", "CAnd", "CBot",
    "CEqual", "CNot", "COneOf", "Concept", "CPrimitive", "CSome", "CTop", "Feature", "FeaturePool",
    "NCount", "NDistance", "RInverse", "Role", "RPrimitive", "RRestrict", "RTransitiveClosure",
    "StateView", "evaluate_concept", "evaluate_feature", "evaluate_features", "evaluate_role",
    "generate_pool", "parse_expr", "parse_feature",
]
