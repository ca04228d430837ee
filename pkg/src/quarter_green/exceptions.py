"""Exception types raised by quarter_green."""


class QuarterGreenError(Exception):
    """Base class for all library errors."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class InfeasibleParametersError(QuarterGreenError, ValueError):
    code = "infeasible-parameters"


class DegenerateCurveError(QuarterGreenError, ValueError):
    code = "degenerate-curve"


class BranchInconsistencyError(QuarterGreenError):
    code = "branch-inconsistency"


class PoleProximityError(QuarterGreenError, ArithmeticError):
    code = "pole-proximity"


class NonConvergenceError(QuarterGreenError, RuntimeError):
    code = "non-convergence"


class NonRealError(QuarterGreenError, ArithmeticError):
    code = "non-real"


class GateFailureError(QuarterGreenError):
    code = "gate-failure"


class DivisionInstabilityError(QuarterGreenError, ArithmeticError):
    code = "division-instability"
