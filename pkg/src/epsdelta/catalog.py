"""Built-in functions with known continuity functions, plus a brute-force oracle.

Each entry bundles f (with analytic derivatives) and, where one is known in
closed form, the maximal delta as a function of (x, eps). ``brute_force_delta``
is a grid search that deliberately shares nothing with the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .numerics import Domain, Interval, RealFunction

POLE = 30.0


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    function: RealFunction
    closed_form_pi: Optional[Callable[[float, float], float]]
    validity: str
    in_validity: Callable[[float, float], bool]


def _check_eps(eps: float):
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")


# Module-level callables keep entries picklable for process pools.

def _log(y):
    return math.log(y)


def _log_d1(y):
    return 1.0 / y


def _log_d2(y):
    return -1.0 / (y * y)


def _log_pi(x, eps):
    _check_eps(eps)
    if not x > 0:
        raise ValueError("x must be positive")
    return x * -math.expm1(-eps)


def _log_valid(x, eps):
    return x > 0 and eps > 0


def entry_log() -> CatalogEntry:
    f = RealFunction(_log, Domain(0.0, math.inf), _log_d1, _log_d2, "ln(y)", np.log)
    return CatalogEntry("log", f, _log_pi, "x > 0, eps > 0", _log_valid)


def _exp1(y):
    return -math.expm1(-y)


def _exp1_d1(y):
    return math.exp(-y)


def _exp1_d2(y):
    return -math.exp(-y)


def _exp1_v(y):
    return -np.expm1(-y)


def _exp1_pi(x, eps):
    _check_eps(eps)
    # x + ln(eps + e^-x) rewritten to avoid cancellation for very negative x.
    if x > 700:
        return x + math.log(eps + math.exp(-x))
    return math.log1p(eps * math.exp(x))


def _always(x, eps):
    return eps > 0


def entry_exponential() -> CatalogEntry:
    f = RealFunction(_exp1, Domain(), _exp1_d1, _exp1_d2, "1-exp(-y)", _exp1_v)
    return CatalogEntry("exp1", f, _exp1_pi, "all x, eps > 0", _always)


def _rat(y):
    return 1.0 / (y - POLE)


def _rat_d1(y):
    return -1.0 / (y - POLE) ** 2


def _rat_d2(y):
    return 2.0 / (y - POLE) ** 3


def _rat_pi(x, eps):
    _check_eps(eps)
    s = x - POLE
    if s < 0:
        return eps * s * s / (1 - eps * s)
    if s > 0:
        return eps * s * s / (1 + eps * s)
    raise ValueError("x = 30 is the pole")


def _rat_valid(x, eps):
    if x == POLE or not eps > 0:
        return False
    return x > POLE or eps < 1 / (POLE - x)


def rational_parity(t: float) -> float:
    """f(30 - t) + f(30 + t); identically zero for t != 0."""
    return _rat(POLE - t) + _rat(POLE + t)


def entry_rational() -> CatalogEntry:
    f = RealFunction(_rat, Domain(excluded=(POLE,)), _rat_d1, _rat_d2, "1/(y-30)", _rat)
    return CatalogEntry("rational30", f, _rat_pi,
                        "x > 30 and eps > 0, or x < 30 and eps < 1/(30-x)", _rat_valid)


def _aff(y):
    return 2.0 * y + 1.0


def _aff_d1(y):
    return 2.0


def _aff_d2(y):
    return 0.0


def _aff_pi(x, eps):
    _check_eps(eps)
    return eps / 2


def entry_affine() -> CatalogEntry:
    f = RealFunction(_aff, Domain(), _aff_d1, _aff_d2, "2*y+1", _aff)
    return CatalogEntry("affine21", f, _aff_pi, "all x, eps > 0", _always)


def _quad(y):
    return y * y + 11.0 * y


def _quad_d1(y):
    return 2.0 * y + 11.0


def _quad_d2(y):
    return 2.0


def _quad_valid(x, eps):
    return -5 <= x <= 5 and eps > 0


def entry_quadratic() -> CatalogEntry:
    f = RealFunction(_quad, Domain(), _quad_d1, _quad_d2, "y^2+11*y", _quad)
    return CatalogEntry("quad11", f, None, "x in [-5, 5] (no closed form)", _quad_valid)


ENTRIES = {
    "log": entry_log,
    "exp1": entry_exponential,
    "rational30": entry_rational,
    "affine21": entry_affine,
    "quad11": entry_quadratic,
}


def get(name: str) -> CatalogEntry:
    try:
        return ENTRIES[name]()
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(ENTRIES)}") from None


def brute_force_delta(f: RealFunction, x: float, eps: float, window: Interval,
                      grid: int = 10 ** 5) -> float:
    """Largest grid delta for which |f(y) - f(x)| < eps on every grid y in (x - delta, x + delta).

    Candidates are delta_j = j * h with h = radius / grid, where radius is the
    largest symmetric radius around x that fits in ``window``; the y-grid uses
    the same pitch. delta_j passes iff every offset k*h with |k| < j passes, so
    the answer is the smallest failing offset, found in one pass. The result is
    at most one pitch above the true maximal delta.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    if grid < 10 ** 4:
        raise ValueError("grid must be at least 10**4")
    if not window.lo < x < window.hi:
        raise ValueError(f"x={x!r} is not inside the window")
    dom = f.domain
    if not (window.lo in dom and window.hi in dom) or any(
            window.lo <= p <= window.hi for p in dom.excluded):
        raise ValueError(f"window [{window.lo}, {window.hi}] leaves the domain of {f.label}")
    radius = min(x - window.lo, window.hi - x)
    h = radius / grid
    k = np.arange(1, grid + 1)
    fx = f.eval(x)
    fails = np.zeros(grid, dtype=bool)
    for side in (-1.0, 1.0):
        vals = f.evaluate_many(x + side * k * h)
        with np.errstate(invalid="ignore"):
            fails |= ~(np.abs(vals - fx) < eps)
    if not fails.any():
        return radius
    return float(k[int(np.argmax(fails))] * h)


def naive_brute_force_delta(f: RealFunction, x: float, eps: float, radius: float,
                            grid: int) -> float:
    """Literal double loop over delta candidates and y points; for small grids only."""
    h = radius / grid
    fx = f.eval(x)
    best = 0.0
    for j in range(1, grid + 1):
        delta = j * h
        ok = True
        for i in range(-grid, grid + 1):
            y = x + i * h
            if abs(i) < j and not abs(f.eval(y) - fx) < eps:
                ok = False
                break
        if ok:
            best = delta
    return best
