"""Exception types raised by eislab.

Every error carries a short machine-readable ``kind`` used by the CLI when
it reports failures as JSON.
"""


class EislabError(Exception):
    kind = "error"

    def to_dict(self):
        return {"error": self.kind, "message": str(self)}


class DomainError(EislabError, ValueError):
    kind = "domain_error"


class SingularEvaluationError(EislabError, ArithmeticError):
    kind = "singular_evaluation"


class DegenerateGeodesicError(DomainError):
    kind = "degenerate_geodesic"


class OutOfChartError(DomainError):
    kind = "out_of_chart"


class InvalidIsometryError(DomainError):
    kind = "invalid_isometry"


class NonHyperbolicError(EislabError, ValueError):
    kind = "non_hyperbolic"


class SchottkyViolationError(EislabError, ValueError):
    kind = "schottky_violation"

    def __init__(self, message, pair=None, overlap=None):
        super().__init__(message)
        self.pair = pair
        self.overlap = overlap

    def to_dict(self):
        d = super().to_dict()
        d["pair"] = list(self.pair) if self.pair is not None else None
        d["overlap"] = self.overlap
        return d


class BudgetExceededError(EislabError, RuntimeError):
    kind = "budget_exceeded"


class TruncationBudgetError(BudgetExceededError):
    kind = "truncation_budget"

    def __init__(self, message, achieved_tail=None, length=None):
        super().__init__(message)
        self.achieved_tail = achieved_tail
        self.length = length


class InsufficientDataError(EislabError, ValueError):
    kind = "insufficient_data"


class XiInLimitSetError(EislabError, ValueError):
    kind = "xi_in_limit_set"

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class NoClearIntervalError(EislabError, RuntimeError):
    kind = "no_clear_interval"


class QuadratureError(EislabError, ArithmeticError):
    kind = "quadrature"


class UndersampledError(EislabError, ValueError):
    kind = "undersampled"


class JensenCenterError(EislabError, ArithmeticError):
    kind = "jensen_center"


class ConfigError(EislabError, ValueError):
    kind = "schema"
