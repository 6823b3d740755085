"""Symbolic calculus of Hamiltonian operators on jet spaces with odd variables."""

from .errors import (
    AntisymmetryViolation,
    AsymmetricMetric,
    DegreeViolation,
    ExprSyntaxError,
    HamopsError,
    NotPolynomial,
    OrderExceeded,
    ParityViolation,
    ShapeMismatch,
    SingularJacobian,
    SingularMatrix,
    SpaceMismatch,
    UnknownAtom,
    UnknownName,
)
from .jetspace import SpaceSpec, enumerate_coords, prolong, total_derivative
from .kernel import EvenJet, Expr, IndepVar, OddJet, Parameter
from .superfun import Superfun
from .varcalc import euler_df, is_total_divergence, variational_derivative
from .schouten import (
    CDiffOp,
    is_skew_adjoint,
    iszero_schouten_bracket,
    lie_derivative,
    schouten_bracket,
)

__all__ = [
    "AntisymmetryViolation",
    "AsymmetricMetric",
    "CDiffOp",
    "DegreeViolation",
    "EvenJet",
    "Expr",
    "ExprSyntaxError",
    "HamopsError",
    "IndepVar",
    "NotPolynomial",
    "OddJet",
    "OrderExceeded",
    "Parameter",
    "ParityViolation",
    "ShapeMismatch",
    "SingularJacobian",
    "SingularMatrix",
    "SpaceMismatch",
    "SpaceSpec",
    "Superfun",
    "UnknownAtom",
    "UnknownName",
    "enumerate_coords",
    "euler_df",
    "is_skew_adjoint",
    "is_total_divergence",
    "iszero_schouten_bracket",
    "lie_derivative",
    "prolong",
    "schouten_bracket",
    "total_derivative",
    "variational_derivative",
]

__version__ = "0.1.0"
