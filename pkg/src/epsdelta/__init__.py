"""Numerical continuity functions: the largest delta for a given epsilon."""

from .errors import (
    BracketError,
    DomainError,
    EpsDeltaError,
    ExprError,
    ExprSyntaxError,
    HypothesisViolation,
    IterationLimitError,
    NoSignChangeError,
)
from .expr import Expression, evaluate, parse
from .manifold import GridSpec, ManifoldSample, sample_manifold, write_csv, write_json
from .numerics import Domain, Interval, RealFunction, delta_map, gamma, gamma_at_zero
from .solver import Bracket, ErrorBudget, SolveReport, check_hypotheses, make_budget, solve

__version__ = "0.1.0"
