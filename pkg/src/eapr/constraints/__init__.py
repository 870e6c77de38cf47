from .poly import Constraint, FeasibilityResult, IneqSystem, Poly, substitute_check, to_smtlib
from .simplex import linear_feasible

__all__ = [
    "Constraint", "FeasibilityResult", "IneqSystem", "Poly", "substitute_check", "to_smtlib",
    "linear_feasible",
]
from .nonlinear import feasible, poly_feasible  # noqa: E402

__all__ += ["feasible", "poly_feasible"]
