import math

import numpy as np
import pytest

from epsdelta import catalog
from epsdelta.errors import (
    BracketError,
    HypothesisViolation,
    InvalidBracketError,
    IterationLimitError,
    NoSignChangeError,
)
from epsdelta.numerics import Interval, RealFunction, check_contraction
from epsdelta.solver import (
    Bracket,
    ErrorBudget,
    binary_search_root,
    bracket_from_bounds,
    check_hypotheses,
    default_window,
    make_budget,
    solve,
)

from conftest import exp1_pi

E = math.e
W = Interval(-1, 1)


def test_budget_affine(affine):
    b = make_budget(affine, 0, 1, 1e-6, W)
    assert b.gamma0 == 2 and b.L == pytest.approx(2 * 1.05)
    assert b.omega_delta == pytest.approx(1e-8)
    assert b.omega_sup == pytest.approx(1e-8)
    assert b.coupled(1)


def test_budget_exponential(exp1):
    b = make_budget(exp1, 0, 0.5, 1e-6, W)
    assert b.gamma0 == 1
    assert b.L == pytest.approx(E * 1.05)
    assert b.omega_sup == pytest.approx(1e-8)


def test_budget_quadratic(quad):
    b = make_budget(quad, 0, 1, 1e-6, W)
    assert b.gamma0 == 11
    assert b.L == pytest.approx(13 * 1.05)


def test_budget_zero_derivative(quad):
    with pytest.raises(HypothesisViolation):
        make_budget(quad, -5.5, 0.1, 1e-6, Interval(-6.5, -4.5))


def test_budget_invariants():
    with pytest.raises(ValueError):
        ErrorBudget(1e-6, 1e-7, 1e-9, 1, 1, 1)  # omega_delta too large
    with pytest.raises(ValueError):
        ErrorBudget(1e-6, 1e-8, 1e-9, 1, 1, 0)


def test_bracket_invariant():
    with pytest.raises(InvalidBracketError):
        Bracket(0.5, 0.5)
    with pytest.raises(InvalidBracketError):
        Bracket(-0.1, 0.5)


def test_bracket_affine_collapses_then_widens():
    # L equal to Gamma(0) collapses [eps/L, eps/Gamma0] to one point.
    budget = ErrorBudget(1e-6, 1e-8, 1e-8, 1e-12, 2.0, 2.0)
    assert bracket_from_bounds(1.0, budget) == Bracket(0.25, 1.0)


def test_bracket_exponential(exp1):
    budget = make_budget(exp1, 0, 0.5, 1e-6, W)
    br = bracket_from_bounds(0.5, budget)
    assert br.a == pytest.approx(0.5 / (1.05 * E)) and br.b == 0.5
    assert br.a == pytest.approx(0.17518, abs=1e-5)
    assert br.a < math.log(1.5) < br.b


def test_bracket_shrinks_with_eps(exp1):
    budget = make_budget(exp1, 0, 0.5, 1e-6, W)
    widths = [bracket_from_bounds(e, budget).width for e in (1e-1, 1e-3, 1e-6, 1e-9)]
    assert widths == sorted(widths, reverse=True) and widths[-1] < 1e-8


def test_bracket_expansion_exhausted():
    # Delta never reaches eps: every expansion fails.
    budget = ErrorBudget(1e-6, 1e-8, 1e-8, 1.0, 2.0, 1.0)
    with pytest.raises(BracketError):
        bracket_from_bounds(1.0, budget, lambda d: min(d, 0.1))


def test_binary_linear():
    d, it = binary_search_root(lambda d: 2 * d, 1.0, Bracket(0.25, 1.0), 1e-6)
    assert d == pytest.approx(0.5, abs=1e-6)


def test_binary_exponential_and_iteration_count():
    d, it = binary_search_root(math.expm1, 0.5, Bracket(0.175, 0.5), 1e-6)
    assert d == pytest.approx(math.log(1.5), abs=1e-6)
    assert it <= math.ceil(math.log2(0.325 / 1e-6)) + 1 == 20


def test_binary_no_sign_change():
    with pytest.raises(NoSignChangeError):
        binary_search_root(lambda d: d, 5.0, Bracket(0.1, 1.0), 1e-6)


def test_binary_iteration_limit():
    with pytest.raises(IterationLimitError):
        binary_search_root(lambda d: d, 0.5, Bracket(0.1, 1.0), 1e-12, max_iters=3)


def test_binary_contraction_random():
    rng = np.random.default_rng(3)
    for _ in range(20):
        slope = rng.uniform(0.1, 10)
        root = rng.uniform(0.1, 5)
        fn = lambda d: slope * (d - root) + 1.0
        a = root * rng.uniform(0.01, 0.99)
        b = root + rng.uniform(0.01, 5)
        omega = 10 ** rng.uniform(-10, -3)
        trace = []
        d, it = binary_search_root(fn, 1.0, Bracket(a, b), omega, trace=trace)
        widths = [b - a] + [hi - lo for lo, hi in trace]
        assert check_contraction(widths, 0.5)
        assert widths[-1] < omega
        assert it <= math.ceil(math.log2((b - a) / omega)) + 1
        assert abs(d - root) < omega


@pytest.mark.parametrize("x, eps", [(0.0, 0.5), (1.0, 0.2), (-0.5, 1.0), (0.7, 0.05)])
def test_cached_and_uncached_are_identical(exp1, x, eps):
    r1 = solve(exp1, x, eps, cache=True)
    r2 = solve(exp1, x, eps, cache=False)
    assert r1.delta == r2.delta and r1.binary_iterations == r2.binary_iterations
    assert r2.evaluations > r1.evaluations


def test_solve_exponential(exp1):
    rep = solve(exp1, 0, 0.5)
    assert rep.delta == pytest.approx(math.log(1.5), abs=1e-6)
    assert rep.residual < 1e-5
    assert rep.bracket.a - 1e-6 <= rep.delta <= rep.bracket.b + 1e-6
    assert rep.binary_iterations <= math.ceil(math.log2(rep.bracket.width / 1e-6)) + 1


def test_solve_affine_warns(affine):
    rep = solve(affine, 17, 1)
    assert rep.delta == pytest.approx(0.5, abs=1e-6)
    assert rep.warnings


def test_solve_rational_window():
    f = catalog.get("rational30").function
    rep = solve(f, 31, 1, window=Interval(30.5, 31.5))
    assert rep.delta == pytest.approx(1 * 1 / (1 + 1), abs=1e-6)


def test_solve_zero_derivative_annotated(quad):
    with pytest.raises(HypothesisViolation) as info:
        solve(quad, -5.5, 0.1)
    assert info.value.stage == "budget"


def test_solve_bracket_failure_annotated():
    f = catalog.get("log").function
    with pytest.raises(BracketError) as info:
        solve(f, 1.0, 1e6)
    assert info.value.stage == "bracket"


def test_solve_rejects_nonpositive_eps(exp1):
    with pytest.raises(ValueError):
        solve(exp1, 0, 0.0)


@pytest.mark.parametrize("eps", [10.0, 100.0, 1000.0])
def test_solve_log_large_eps_stays_inside_domain(eps):
    f = catalog.get("log").function
    assert solve(f, 1.0, eps).delta == pytest.approx(-math.expm1(-eps), abs=2e-6)


def test_solve_large_eps_uses_expansion():
    # delta* = 2 * (1 - e^-3) sits above eps / L on the default window.
    f = catalog.get("log").function
    rep = solve(f, 2.0, 3.0)
    assert rep.delta == pytest.approx(2 * (1 - math.exp(-3)), abs=2e-6)


def test_default_window_clips_to_pole():
    f = catalog.get("rational30").function
    w = default_window(f, 30.5)
    assert w.lo == pytest.approx(30.05) and w.hi == pytest.approx(30.95)
    assert default_window(f, 25) == Interval(24, 26)


def test_check_quadratic(quad):
    rep = check_hypotheses(quad, 1, Interval(-5, 5))
    assert rep.f1_at_x == 13 and rep.f2_at_x == 2
    assert rep.lagrange_ok and rep.transversal_ok and rep.unimodal_ok


def test_check_affine(affine):
    rep = check_hypotheses(affine, 0, W)
    assert not rep.lagrange_ok and not rep.transversal_ok
    assert rep.diagnostics


def test_check_exponential(exp1):
    rep = check_hypotheses(exp1, 0, W)
    assert rep.lagrange_ok and rep.f1_at_x == 1 and rep.f2_at_x == -1


def test_check_flags_two_peaks():
    # sin has a Leibniz ratio with several local maxima on a wide window.
    f = RealFunction(math.sin, d1=math.cos, d2=lambda y: -math.sin(y), label="sin")
    rep = check_hypotheses(f, 0.3, Interval(-12, 12))
    assert not rep.unimodal_ok


def test_check_rejects_small_sample(quad):
    with pytest.raises(ValueError):
        check_hypotheses(quad, 1, W, samples=10)


# Properties of the maximal delta on every catalog entry.

RANGES = {
    "log": ((0.5, 3.0), (0.05, 1.0)),
    "exp1": ((-1.0, 1.0), (0.05, 1.0)),
    "rational30": ((31.0, 33.0), (0.05, 0.5)),
    "affine21": ((-100.0, 100.0), (0.01, 1.0)),
    "quad11": ((-5.0, 5.0), (0.01, 0.5)),
}


def test_bracket_contains_solution_small_eps(entry):
    (xlo, xhi), _ = RANGES[entry.name]
    f = entry.function
    for x in np.linspace(xlo, xhi, 5):
        x = float(x)
        eps = 0.02
        rep = solve(f, x, eps)
        b = rep.budget
        assert eps / b.L - 1e-6 <= rep.delta <= eps / b.gamma0 + 1e-6


def test_log_runtime_binary_iterations(exp1):
    counts, per_call = [], []
    for k in range(21):
        rep = solve(exp1, 0.0, 0.5, 1e-3 * 2.0 ** -k)
        counts.append(rep.binary_iterations)
        per_call.append(rep.ternary_iterations_total / (rep.binary_iterations + 4))
    steps = np.diff(counts)
    assert np.all((steps >= 0) & (steps <= 2))
    # Each halving adds about log_1.5(2) ~ 1.7 ternary steps per Delta evaluation.
    assert np.all(np.diff(per_call) < 3)
