"""Exception hierarchy shared across the toolkit."""


class SketchforgeError(Exception):
    pass


# --- PDDL front end ---------------------------------------------------------

class PDDLError(SketchforgeError):
    pass


class PDDLSyntaxError(PDDLError):
    def __init__(self, message, line=None, column=None, expected=None):
        self.line = line
        self.column = column
        self.expected = expected
        where = f" at line {line}, column {column}" if line is not None else ""
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{message}{where}{hint}")


class UnsupportedRequirement(PDDLError):
    def __init__(self, construct, line=None, column=None):
        self.construct = construct
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"unsupported PDDL construct {construct!r}{where}")


class DuplicateName(PDDLError):
    pass


class UnknownPredicate(PDDLError):
    pass


class TypeMismatch(PDDLError):
    pass


# --- state spaces -------------------------------------------------------------

class CapacityExceeded(SketchforgeError):
    def __init__(self, max_states):
        self.max_states = max_states
        super().__init__(f"state space exceeds {max_states} states")


class NotFullyExpanded(SketchforgeError):
    pass


# --- sketches -----------------------------------------------------------------

class SketchSyntaxError(SketchforgeError):
    def __init__(self, message, line=None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class UnknownFeature(SketchforgeError):
    pass


class FeatureTypeMismatch(SketchforgeError):
    pass


class MissingFeature(SketchforgeError):
    pass


class PoolExplosion(SketchforgeError):
    pass


# --- search -------------------------------------------------------------------

class Exhausted(SketchforgeError):
    """IW(k) ran out of novel states without reaching the target."""

    def __init__(self, k, expanded, generated):
        self.k = k
        self.expanded = expanded
        self.generated = generated
        super().__init__(f"IW({k}) exhausted after {expanded} expansions")


class EpisodeFailure(SketchforgeError):
    def __init__(self, state, episode, message="episode failed"):
        self.state = state
        self.episode = episode
        super().__init__(f"{message} (episode {episode})")


class CycleGuard(EpisodeFailure):
    pass


# --- learning -----------------------------------------------------------------

class Unsatisfiable(SketchforgeError):
    def __init__(self, family, message=""):
        self.family = family
        super().__init__(f"no sketch satisfies the constraints [{family}] {message}".rstrip())


class SolverTimeout(SketchforgeError):
    def __init__(self, lower_bound, incumbent=None, gap=None):
        self.lower_bound = lower_bound
        self.incumbent = incumbent
        self.gap = gap
        super().__init__(f"solver budget exceeded (lower bound {lower_bound})")


class NonTermination(SketchforgeError):
    pass


class ConfigError(SketchforgeError):
    pass
