"""Exception hierarchy shared by the planner modules.

Every error carries a short machine-readable ``code`` so the CLI and tests can
match on the failure kind without parsing messages.
"""


class PlannerError(ValueError):
    code = "planner-error"

    def __init__(self, message: str = "", **details):
        super().__init__(message or self.code)
        self.details = details


class InvalidPolygonError(PlannerError):
    code = "invalid-polygon"


class VerticalSlopeError(PlannerError):
    code = "vertical-slope"


class OverlappingObstaclesError(PlannerError):
    code = "overlapping-obstacles"


class SolverFailureError(PlannerError):
    code = "solver-failure"


class PointInsideObstacleError(PlannerError):
    code = "point-inside-obstacle"


class NoPathError(PlannerError):
    code = "no-path"


class OutOfRangeError(PlannerError):
    code = "out-of-range"


class InfeasibleSpeedsError(PlannerError):
    code = "infeasible-terminal-speeds"


class TanhDomainError(PlannerError):
    code = "tanh-domain"


class UnreachableError(PlannerError):
    code = "unreachable"


class InfeasibleEndpointsError(PlannerError):
    code = "infeasible-endpoints"


class ControlBoundViolation(PlannerError):
    code = "control-bound-violation"


class CapExceededError(PlannerError):
    code = "cap-exceeded"
