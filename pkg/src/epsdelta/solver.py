"""Maximal delta for a given (f, x, eps).

The maximal delta solves eps = delta * Gamma(delta). The solver brackets the
root with eps / L <= delta <= eps / Gamma(0), then bisects, evaluating
delta * Gamma(delta) by ternary search at every probe.
"""

from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    BracketError,
    DomainError,
    HypothesisViolation,
    InvalidBracketError,
    IterationLimitError,
    NoSignChangeError,
)
from .numerics import (
    Interval,
    RealFunction,
    TERNARY_MAX_ITERS,
    estimate_lipschitz_M,
    gamma_at_zero,
    gamma_search,
    leibniz_ratio_filled,
)

log = logging.getLogger(__name__)

OMEGA_DELTA_RATIO = 100
L_SAFETY = 1.05
GAMMA0_MIN = 1e-8
LAGRANGE_TOL = 1e-9
EXPANSIONS = 8
BINARY_MAX_ITERS = 200
DEFAULT_SAMPLES = 256


@dataclass(frozen=True)
class ErrorBudget:
    omega_sol: float
    omega_delta: float
    omega_sup: float
    M: float
    L: float
    gamma0: float

    def __post_init__(self):
        for name in ("omega_sol", "omega_delta", "omega_sup", "M", "L", "gamma0"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")
        if self.omega_delta > self.omega_sol / OMEGA_DELTA_RATIO * (1 + 1e-12):
            raise ValueError("omega_delta must be at most omega_sol / 100")

    def coupled(self, eps: float) -> bool:
        """Whether omega_sup is small enough for Delta errors below omega_delta at this eps."""
        return self.omega_sup < self.omega_delta * self.gamma0 / eps


@dataclass(frozen=True)
class Bracket:
    a: float
    b: float

    def __post_init__(self):
        if not 0 <= self.a < self.b:
            raise InvalidBracketError(f"invalid bracket [{self.a}, {self.b}]")

    @property
    def width(self) -> float:
        return self.b - self.a


@dataclass
class SolveReport:
    delta: float
    residual: float
    bracket: Bracket
    binary_iterations: int
    ternary_iterations_total: int
    budget: ErrorBudget
    evaluations: int = 0
    warnings: list = field(default_factory=list)


@dataclass
class HypothesisReport:
    f1_at_x: float
    f2_at_x: float
    lagrange_ok: bool
    transversal_ok: bool
    unimodal_ok: bool
    diagnostics: list = field(default_factory=list)


def default_window(f: RealFunction, x: float, radius: float = 1.0) -> Interval:
    """[x - r, x + r] with r = min(radius, 0.9 * distance to the nearest pole or boundary)."""
    if x not in f.domain:
        raise DomainError(f"{f.label}: {x!r} is outside the domain")
    r = min(radius, 0.9 * f.domain.distance_to_edge(x))
    return Interval(x - r, x + r)


def _window_L(f: RealFunction, window: Interval, samples: int) -> float:
    ys = np.linspace(window.lo, window.hi, samples)
    d = np.array([abs(f.derivative(float(y), 1)) for y in ys])
    if not np.all(np.isfinite(d)):
        return math.inf
    return L_SAFETY * float(d.max())


def make_budget(f: RealFunction, x: float, eps: float, omega_sol: float, window: Interval,
                samples: int = DEFAULT_SAMPLES) -> ErrorBudget:
    """Derive the tolerances and constants that drive both searches."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    if not omega_sol > 0:
        raise ValueError(f"omega_sol must be positive, got {omega_sol!r}")
    if x not in window:
        raise ValueError(f"x={x!r} is outside the window [{window.lo}, {window.hi}]")
    gamma0 = gamma_at_zero(f, x)
    if gamma0 < GAMMA0_MIN:
        raise HypothesisViolation(
            f"|f'({x!r})| = {gamma0:.3g} is zero; the upper bound eps/|f'(x)| is undefined "
            "(perturb x)")
    L = max(_window_L(f, window, samples), gamma0)
    M = estimate_lipschitz_M(f, x, window, samples)
    omega_delta = omega_sol / OMEGA_DELTA_RATIO
    omega_sup = 0.5 * omega_delta * gamma0 / eps
    return ErrorBudget(omega_sol, omega_delta, omega_sup, M, L, gamma0)


def bracket_from_bounds(eps: float, budget: ErrorBudget,
                        delta_fn: Optional[Callable[[float], float]] = None) -> Bracket:
    """Bracket [eps/L, eps/Gamma(0)] for the root, widened until it encloses it.

    Without ``delta_fn`` only a degenerate bracket (L == Gamma(0)) is widened.
    With it, the bracket is doubled outward (a/2, 2b) until Delta(a) <= eps <=
    Delta(b), at most 8 times.
    """
    # L = inf leaves only 0 <= delta; start just above zero.
    a = eps / budget.L if math.isfinite(budget.L) else sys.float_info.min
    b = eps / budget.gamma0
    for _ in range(EXPANSIONS + 1):
        if a < b and (delta_fn is None or (delta_fn(a) <= eps <= delta_fn(b))):
            return Bracket(a, b)
        a, b = a / 2, b * 2
    raise BracketError(
        f"no bracket encloses the root for eps={eps!r} after {EXPANSIONS} expansions; "
        "eps may be outside the locally valid range")


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def _bisect(delta_fn, eps, a, b, omega_sol, max_iters, cache, trace):
    # Signs instead of the raw product (g_a - eps)(g_m - eps): the product can
    # underflow to 0 or become inf * 0 = nan near the root.
    ga, gb = delta_fn(a), delta_fn(b)
    if _sign(ga - eps) * _sign(gb - eps) > 0:
        raise NoSignChangeError(
            f"Delta - eps has the same sign at both ends of [{a!r}, {b!r}]")
    iterations = 0
    while abs(a - b) >= omega_sol:
        if iterations >= max_iters:
            raise IterationLimitError("binary search did not converge", 0.5 * (a + b), b - a,
                                      iterations)
        m = (a + b) / 2
        if not cache:
            ga = delta_fn(a)
            gb = delta_fn(b)
        gm = delta_fn(m)
        if _sign(ga - eps) * _sign(gm - eps) <= 0:
            b, gb = m, gm
        else:
            a, ga = m, gm
        iterations += 1
        if trace is not None:
            trace.append((a, b))
    if not cache:
        ga, gb = delta_fn(a), delta_fn(b)
    if abs(ga - eps) < abs(gb - eps):
        return a, iterations, ga
    return b, iterations, gb


def binary_search_root(delta_fn: Callable[[float], float], eps: float, bracket: Bracket,
                       omega_sol: float, max_iters: int = BINARY_MAX_ITERS, cache: bool = True,
                       trace: Optional[list] = None) -> tuple:
    """Bisection for delta_fn(delta) = eps on ``bracket``; returns (delta, iterations).

    With ``cache=False`` every pass re-evaluates Delta at a, b and the
    midpoint, exactly as written in the classic pseudocode; ``cache=True``
    reuses endpoint values and gives bit-identical results for a
    deterministic ``delta_fn``. ``trace`` collects the (a, b) pairs.
    """
    delta, iterations, _ = _bisect(delta_fn, eps, bracket.a, bracket.b, omega_sol, max_iters,
                                   cache, trace)
    return delta, iterations


def _staged(stage: str, exc: Exception) -> Exception:
    exc.stage = stage
    if exc.args and isinstance(exc.args[0], str) and not exc.args[0].startswith(stage):
        exc.args = (f"{stage}: {exc.args[0]}",) + exc.args[1:]
    return exc


def lagrange_warnings(f: RealFunction, x: float) -> list:
    f1, f2 = f.derivative(x, 1), f.derivative(x, 2)
    out = []
    if abs(f2) <= LAGRANGE_TOL:
        out.append(f"f''({x!r}) = {f2:.3g}: outside the sufficient conditions f'(x)f''(x) != 0; "
                   "result is not guaranteed")
    return out


def solve(f: RealFunction, x: float, eps: float, omega_sol: float = 1e-6,
          window: Optional[Interval] = None, samples: int = DEFAULT_SAMPLES,
          cache: bool = True) -> SolveReport:
    """Largest delta with |y - x| < delta  =>  |f(y) - f(x)| < eps, to within omega_sol."""
    stage = "budget"
    try:
        if window is None:
            window = default_window(f, x)
        budget = make_budget(f, x, eps, omega_sol, window, samples)
        fx = f(x)
        warnings = lagrange_warnings(f, x)
        for w in warnings:
            log.warning("%s", w)

        ternary_iters = 0
        evaluations = 0
        omega_sup = budget.omega_sup

        def delta_fn(d: float) -> float:
            nonlocal ternary_iters, evaluations
            res = gamma_search(f, x, d, omega_sup, budget.M, TERNARY_MAX_ITERS, fx,
                               budget.gamma0)
            ternary_iters += res.iterations
            evaluations += res.evaluations
            return d * res.value

        stage = "bracket"
        bracket = bracket_from_bounds(eps, budget, delta_fn)
        if bracket.b > eps / budget.gamma0:
            # The bracket left the small-eps regime; keep delta * omega_sup < omega_delta.
            omega_sup = min(omega_sup, 0.5 * budget.omega_delta / bracket.b)
            budget = ErrorBudget(budget.omega_sol, budget.omega_delta, omega_sup, budget.M,
                                 budget.L, budget.gamma0)

        stage = "search"
        delta, iterations, value = _bisect(delta_fn, eps, bracket.a, bracket.b, omega_sol,
                                           BINARY_MAX_ITERS, cache, None)
    except (DomainError, BracketError, HypothesisViolation, NoSignChangeError,
            IterationLimitError, InvalidBracketError) as exc:
        raise _staged(stage, exc)
    return SolveReport(delta, abs(value - eps), bracket, iterations, ternary_iters, budget,
                       evaluations, warnings)


def check_hypotheses(f: RealFunction, x: float, window: Interval,
                     samples: int = DEFAULT_SAMPLES) -> HypothesisReport:
    """Sampled checks of the sufficient conditions; heuristics, never proofs."""
    if samples < 64:
        raise ValueError("samples must be at least 64")
    diagnostics = []
    try:
        f1 = f.derivative(x, 1)
        f2 = f.derivative(x, 2)
    except DomainError as exc:
        return HypothesisReport(math.nan, math.nan, False, False, False, [str(exc)])
    lagrange_ok = abs(f1) > LAGRANGE_TOL and abs(f2) > LAGRANGE_TOL
    if not lagrange_ok:
        diagnostics.append(f"f'(x)f''(x) = 0 within {LAGRANGE_TOL:g} (f'={f1:.6g}, f''={f2:.6g})")

    ys = np.linspace(window.lo, window.hi, samples)
    try:
        fx = f(x)
        fy = np.array([f(float(y)) for y in ys])
        d1 = np.array([f.derivative(float(y), 1) for y in ys])
    except DomainError as exc:
        diagnostics.append(f"window sampling failed: {exc}")
        return HypothesisReport(f1, f2, lagrange_ok, False, False, diagnostics)

    # Secant-equals-tangent: roots of h(y) = f'(y)(y - x) - (f(y) - f(x)).
    h = d1 * (ys - x) - (fy - fx)
    scale = max(np.max(np.abs(fy - fx)), np.max(np.abs(d1 * (ys - x))), 1e-300)
    zero = np.abs(h) <= 1e-9 * scale
    s = np.where(zero, 0, np.sign(h))
    changes = int(np.sum(s[1:] * s[:-1] < 0))
    root_cells = changes + int(np.sum(zero))
    transversal_ok = root_cells <= samples // 8
    if not transversal_ok:
        diagnostics.append(
            f"secant-tangent equation has roots in {root_cells} of {samples} grid cells; "
            "not of transversal type on this window")

    Lf = leibniz_ratio_filled(f, x, fx, abs(f1))
    ratios = np.array([Lf(float(y)) for y in ys])
    unimodal_ok = _single_peak(ratios)
    if not unimodal_ok:
        diagnostics.append("Leibniz ratio has more than one local maximum on the grid")
    return HypothesisReport(f1, f2, lagrange_ok, transversal_ok, unimodal_ok, diagnostics)


def _single_peak(values: np.ndarray) -> bool:
    """Nonincreasing outward from the global maximum on both sides, up to rounding."""
    tol = 1e-9 * max(float(np.max(np.abs(values))), 1e-300)
    k = int(np.argmax(values))
    right = np.diff(values[k:])
    left = np.diff(values[k::-1])
    return bool(np.all(right <= tol) and np.all(left <= tol))
