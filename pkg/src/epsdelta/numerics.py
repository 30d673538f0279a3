"""Leibniz ratio, the sup-ratio Gamma and the map delta -> delta * Gamma(delta).

``Gamma(delta)`` is the largest Leibniz ratio of ``f`` around ``x`` over the
punctured ball of radius ``delta``; it is found by a ternary search whose
stopping width is ``omega_sup / M``, with ``M`` a Lipschitz constant of the
ratio on the search window.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    CoincidentPointsError,
    DomainError,
    InvalidBracketError,
    IterationLimitError,
)
from .expr import central_difference

EPS = sys.float_info.epsilon
M_FLOOR = 1e-12
TERNARY_MAX_ITERS = 200


@dataclass(frozen=True)
class Domain:
    """Open interval (lower, upper) minus finitely many excluded points."""

    lower: float = -math.inf
    upper: float = math.inf
    excluded: tuple = ()

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"empty domain ({self.lower}, {self.upper})")
        excluded = tuple(sorted(float(p) for p in self.excluded))
        for p in excluded:
            if not self.lower < p < self.upper:
                raise ValueError(f"excluded point {p} is not inside ({self.lower}, {self.upper})")
        object.__setattr__(self, "excluded", excluded)

    def __contains__(self, y: float) -> bool:
        return self.lower < y < self.upper and y not in self.excluded

    def distance_to_edge(self, x: float) -> float:
        """Distance from ``x`` to the nearest boundary or excluded point."""
        d = min(x - self.lower, self.upper - x)
        for p in self.excluded:
            d = min(d, abs(x - p))
        return d

    def excluded_within(self, lo: float, hi: float) -> list:
        return [p for p in self.excluded if lo <= p <= hi]


REAL_LINE = Domain()


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with lo < hi; used for search windows."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidBracketError(f"invalid interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, y: float) -> bool:
        return self.lo <= y <= self.hi


@dataclass(frozen=True)
class RealFunction:
    """A real function of one real variable with optional analytic derivatives.

    ``veval`` is an optional array version of ``eval``; it is only used by the
    brute-force oracle and the hypothesis scans, where it saves Python loops.
    """

    eval: Callable[[float], float]
    domain: Domain = REAL_LINE
    d1: Optional[Callable[[float], float]] = None
    d2: Optional[Callable[[float], float]] = None
    label: str = "f"
    veval: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __call__(self, y: float) -> float:
        if y not in self.domain:
            raise DomainError(f"{self.label}: {y!r} is outside the domain")
        v = self.eval(y)
        if not math.isfinite(v):
            raise DomainError(f"{self.label}({y!r}) is not finite")
        return v

    def derivative(self, y: float, order: int = 1) -> float:
        analytic = self.d1 if order == 1 else self.d2 if order == 2 else None
        if analytic is not None:
            return float(analytic(y))
        return central_difference(self, y, order)

    def evaluate_many(self, ys: np.ndarray) -> np.ndarray:
        ys = np.asarray(ys, dtype=float)
        if self.veval is not None:
            with np.errstate(all="ignore"):
                return np.asarray(self.veval(ys), dtype=float)
        return np.array([self.eval(float(y)) for y in ys], dtype=float)


@dataclass(frozen=True)
class SupremumResult:
    value: float
    argmax_estimate: float
    iterations: int
    interval_width_final: float
    widths: tuple = field(default=(), repr=False)
    evaluations: int = 0


def _coincidence_threshold(x: float) -> float:
    return 4 * EPS * max(1.0, abs(x))


def leibniz_ratio(f: RealFunction, x: float, y: float) -> float:
    """|f(x) - f(y)| / |x - y|."""
    if abs(x - y) < _coincidence_threshold(x):
        raise CoincidentPointsError(f"points {x!r} and {y!r} coincide")
    return abs(f(x) - f(y)) / abs(x - y)


def gamma_at_zero(f: RealFunction, x: float) -> float:
    """Limit of the Leibniz ratio as y -> x, which is |f'(x)|."""
    if x not in f.domain:
        raise DomainError(f"{f.label}: {x!r} is outside the domain")
    return abs(f.derivative(x, 1))


def leibniz_ratio_filled(f: RealFunction, x: float, fx: Optional[float] = None,
                         gamma0: Optional[float] = None) -> Callable[[float], float]:
    """The Leibniz ratio around ``x`` as a function of ``y``, continuous at y = x.

    At (or within rounding distance of) ``x`` the removable singularity is
    filled with |f'(x)|.
    """
    fx = f(x) if fx is None else fx
    g0 = gamma_at_zero(f, x) if gamma0 is None else gamma0
    tol = _coincidence_threshold(x)

    def ratio(y: float) -> float:
        d = y - x
        if abs(d) < tol:
            return g0
        return abs(f(y) - fx) / abs(d)

    return ratio


def estimate_lipschitz_M(f: RealFunction, x: float, K: Interval, samples: int = 256) -> float:
    """Safety-doubled Lipschitz constant of the Leibniz ratio around ``x`` on ``K``.

    The ratio is |g| with g(y) = (f(y) - f(x)) / (y - x), g(x) = f'(x), so its
    Lipschitz constant is bounded by max |g'|. g' is estimated by forward
    differences of g on a uniform grid of ``samples`` points.
    """
    if samples < 16:
        raise ValueError("samples must be at least 16")
    if not (K.lo <= x <= K.hi):
        raise ValueError(f"x={x!r} is not inside [{K.lo}, {K.hi}]")
    if not (K.lo in f.domain and K.hi in f.domain) or f.domain.excluded_within(K.lo, K.hi):
        raise DomainError(f"window [{K.lo}, {K.hi}] leaves the domain of {f.label}")
    ys = np.linspace(K.lo, K.hi, samples)
    fx = f(x)
    f1 = f.derivative(x, 1)
    # Close to x the difference quotient cancels catastrophically; use f'(x).
    near = 1e-6 * max(1.0, abs(x))
    g = np.empty(samples)
    for i, y in enumerate(ys):
        d = y - x
        g[i] = f1 if abs(d) < near else (f(float(y)) - fx) / d
    slopes = np.abs(np.diff(g) / np.diff(ys))
    raw = float(np.max(slopes))
    if not math.isfinite(raw):
        raise DomainError(f"Leibniz ratio of {f.label} is not Lipschitz on [{K.lo}, {K.hi}]")
    return max(2.0 * raw, M_FLOOR)


def ternary_search_sup(Lf: Callable[[float], float], a: float, b: float, omega_sup: float,
                       M: float, max_iters: int = TERNARY_MAX_ITERS) -> SupremumResult:
    """Approximate sup of a unimodal, M-Lipschitz ``Lf`` on [a, b].

    Compares Lf at p = a + w/3 and q = b - w/3 and drops the outer third on
    the side of the smaller value (both outer thirds on a tie), until
    b - a < omega_sup / M.
    The result is max(Lf(a), Lf(b)) on the final interval, which may sit below
    the true sup by at most omega_sup.
    """
    if not a < b:
        raise InvalidBracketError(f"invalid bracket [{a}, {b}]")
    if omega_sup <= 0 or M <= 0:
        raise ValueError("omega_sup and M must be positive")
    target = omega_sup / M
    widths = [b - a]
    iterations = 0
    evaluations = 0
    while abs(a - b) >= target:
        if iterations >= max_iters:
            best = max(Lf(a), Lf(b))
            raise IterationLimitError("ternary search did not converge", best, b - a, iterations)
        third = (b - a) / 3
        p = a + third
        q = b - third
        if not (a < p < q < b):
            # The interval is down to a few ulps and cannot be split further.
            break
        gp = Lf(p)
        gq = Lf(q)
        evaluations += 2
        # Unimodality only rules out the outer third beyond the smaller probe;
        # the middle third may still hold the maximum.
        if gp < gq:
            a = p
        elif gp > gq:
            b = q
        else:
            a, b = p, q
        iterations += 1
        widths.append(b - a)
    fa, fb = Lf(a), Lf(b)
    evaluations += 2
    if fa >= fb:
        value, arg = fa, a
    else:
        value, arg = fb, b
    return SupremumResult(value, arg, iterations, b - a, tuple(widths), evaluations)


def gamma_search(f: RealFunction, x: float, delta: float, omega_sup: float, M: float,
                 max_iters: int = TERNARY_MAX_ITERS, fx: Optional[float] = None,
                 gamma0: Optional[float] = None) -> SupremumResult:
    """Ternary search for Gamma(delta), returning the full search record.

    A ball that reaches an excluded point (a pole) or an open end of the
    domain has an unbounded ratio, reported as +inf, which keeps delta inside
    the component of the domain that contains x.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    dom = f.domain
    lo, hi = x - delta, x + delta
    if not lo < x < hi:
        # delta is below the float resolution at x: only the limit value remains.
        g0 = gamma_at_zero(f, x) if gamma0 is None else gamma0
        return SupremumResult(g0, x, 0, 0.0)
    if dom.excluded_within(lo, hi) or lo <= dom.lower or hi >= dom.upper:
        return SupremumResult(math.inf, math.nan, 0, 0.0)
    Lf = leibniz_ratio_filled(f, x, fx, gamma0)
    return ternary_search_sup(Lf, lo, hi, omega_sup, M, max_iters)


def gamma(f: RealFunction, x: float, delta: float, omega_sup: float, M: float) -> float:
    """Gamma(delta): sup of the Leibniz ratio over the punctured delta-ball, to omega_sup."""
    return gamma_search(f, x, delta, omega_sup, M).value


def delta_map(f: RealFunction, x: float, delta: float, budget) -> float:
    """delta * Gamma(delta), within budget.omega_delta when the budget is coupled."""
    return delta * gamma_search(f, x, delta, budget.omega_sup, budget.M).value


def check_contraction(widths: Sequence[float], factor: float) -> bool:
    """True when every step shrinks the width to at most ``factor`` of the last one."""
    return all(w1 <= factor * w0 + 4 * EPS * max(1.0, w0) for w0, w1 in zip(widths, widths[1:]))
