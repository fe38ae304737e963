"""Exception hierarchy.

Every error carries a short ``code`` string so sweep drivers can turn a
failure into a per-point record instead of aborting.
"""


class QcrbError(Exception):
    code = "error"


class CutoffTooSmallError(QcrbError, ValueError):
    code = "cutoff_too_small"


class InfeasibleToleranceError(QcrbError, ValueError):
    code = "infeasible_tolerance"


class ParameterDomainError(QcrbError, ValueError):
    code = "parameter_domain"


class NotRepresentableError(QcrbError, ValueError):
    code = "not_representable"


class InfeasibleError(QcrbError):
    code = "infeasible"


class SingularMatrixError(QcrbError, ArithmeticError):
    code = "singular_matrix"


class InvalidStateError(QcrbError):
    code = "invalid_state"


class DomainError(QcrbError, ValueError):
    code = "domain"
