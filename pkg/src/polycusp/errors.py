"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the command line
front end can report it without string matching.
"""


class PolycuspError(Exception):
    code = "PolycuspError"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"code": self.code, "message": str(self)}
        if self.details:
            out["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return out


def _jsonable(value):
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)


class InputError(PolycuspError):
    """Malformed or geometrically invalid input surface."""

    code = "InputError"


class NotFlippable(PolycuspError):
    code = "NotFlippable"


class IterationLimit(PolycuspError):
    code = "IterationLimit"


class HeightGapTooLarge(PolycuspError):
    code = "HeightGapTooLarge"


class PrismDoesNotExist(PolycuspError):
    code = "PrismDoesNotExist"


class DegenerateBase(PolycuspError):
    code = "DegenerateBase"


class Infeasible(PolycuspError):
    """No convex cusp with particles for the given heights.

    ``reason`` is one of ``"PrismMissing"``, ``"BadEdge"`` or
    ``"StuckBadEdge"``.
    """

    code = "Infeasible"

    def __init__(self, reason, message="", **details):
        super().__init__(message or reason, reason=reason, **details)
        self.reason = reason


class SolverError(PolycuspError):
    """Base for solver failures; ``report`` holds the best state reached."""

    def __init__(self, message="", report=None, **details):
        super().__init__(message, **details)
        self.report = report


class MaxIterExceeded(SolverError):
    code = "MaxIterExceeded"


class BoundaryStall(SolverError):
    code = "BoundaryStall"


class TargetSumNonzero(PolycuspError):
    code = "TargetSumNonzero"


class RequiresZeroCurvature(PolycuspError):
    code = "RequiresZeroCurvature"
