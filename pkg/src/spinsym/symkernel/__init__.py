"""Exact symbolic algebra of Pauli-matrix differential operators.

Layers: GQ (Gaussian rationals) -> ScalarExpr (canonical quotient-ring
scalars) -> MatrixExpr (sigma-basis 2x2 coefficients) -> DiffOp
(normal-ordered operators with a parity flag).  Everything is immutable and
pure; zero means an identically vanishing operator on R^3 minus the origin.
"""

from .gq import GQ, HALF, I, ONE, ZERO
from .matrix import EPS, MatrixExpr, eps
from .scalar import ScalarExpr
from .diffop import DiffOp, anticommutator, commutator, symmetrized

__all__ = [
    "GQ",
    "ZERO",
    "ONE",
    "I",
    "HALF",
    "ScalarExpr",
    "MatrixExpr",
    "EPS",
    "eps",
    "DiffOp",
    "commutator",
    "anticommutator",
    "symmetrized",
]
