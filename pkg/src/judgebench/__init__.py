"""Secure-majority ("judges") protocols and a CTL+K model checker for their anonymity properties."""

from ._kernels import BACKEND
from .core import DecisionProfile, DecisionVector, Verdict, majority
from .errors import (
    CapacityError,
    EvaluationError,
    FormulaSyntaxError,
    JudgebenchError,
    ParameterError,
    ValidationError,
)
from .kripke import KripkeModel, build_model
from .mck import check, explain, parse_formula

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CapacityError",
    "DecisionProfile",
    "DecisionVector",
    "EvaluationError",
    "FormulaSyntaxError",
    "JudgebenchError",
    "KripkeModel",
    "ParameterError",
    "ValidationError",
    "Verdict",
    "build_model",
    "check",
    "explain",
    "majority",
    "parse_formula",
]
