import math
import pickle

import pytest
from hypothesis import given, settings, strategies as st

from epsdelta.errors import DomainError, ExprError, ExprSyntaxError
from epsdelta.expr import (
    Binary,
    Const,
    Expression,
    FUNCTIONS,
    Named,
    Unary,
    Var,
    differentiate_numeric,
    evaluate,
    parse,
    to_source,
)
from epsdelta.catalog import ENTRIES, get


def test_parse_affine():
    assert parse("2*y+1").ast == Binary("+", Binary("*", Const(2.0), Var("y")), Const(1.0))


def test_parse_exponential():
    assert parse("1 - exp(-y)").ast == Binary("-", Const(1.0), Unary("exp", Unary("neg", Var("y"))))


def test_unbalanced_paren_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse("1/(y-30")
    assert info.value.offset == 7


@pytest.mark.parametrize("src, expected", [
    ("-y^2", Unary("neg", Binary("^", Var("y"), Const(2.0)))),
    ("2^3^y", Binary("^", Const(2.0), Binary("^", Const(3.0), Var("y")))),
    ("2^-y", Binary("^", Const(2.0), Unary("neg", Var("y")))),
    ("y-1-2", Binary("-", Binary("-", Var("y"), Const(1.0)), Const(2.0))),
    ("y/2*3", Binary("*", Binary("/", Var("y"), Const(2.0)), Const(3.0))),
    ("pi*x", Binary("*", Named("pi"), Var("x"))),
])
def test_precedence_and_associativity(src, expected):
    assert parse(src).ast == expected


@pytest.mark.parametrize("src", ["foo(y)", "y + z", "3 + 4", "2 y", "y +", "exp y", ")", "y $ 2"])
def test_rejects_bad_input(src):
    with pytest.raises(ExprError):
        parse(src)


def test_unknown_function_is_not_syntax_error():
    with pytest.raises(ExprError, match="unknown function 'foo'"):
        parse("foo(y)")


def test_multiple_variables_named():
    with pytest.raises(ExprError, match="multiple free variables: a, b"):
        parse("a*b")


def test_evaluate():
    assert evaluate(parse("2*y+1"), 3) == 7
    assert evaluate(parse("1-exp(-y)"), 0) == 0


@pytest.mark.parametrize("src, y", [
    ("1/(y-30)", 30), ("ln(y)", 0), ("ln(y)", -1), ("sqrt(y)", -4), ("exp(y)", 1e4),
    ("y^0.5", -2), ("y*1e300*1e300", 1),
])
def test_domain_errors(src, y):
    with pytest.raises(DomainError):
        evaluate(parse(src), y)


def test_domain_error_names_the_node():
    with pytest.raises(DomainError, match=r"division by zero in \(1\.0 / \(y - 30\.0\)\)"):
        evaluate(parse("1/(y-30)"), 30)


def test_differentiate_affine():
    assert differentiate_numeric(parse("2*y+1"), 5, 1) == pytest.approx(2, abs=1e-6)


def test_differentiate_quadratic():
    e = parse("y^2+11*y")
    assert differentiate_numeric(e, 1, 1) == pytest.approx(13, abs=1e-5)
    assert differentiate_numeric(e, 1, 2) == pytest.approx(2, abs=1e-3)


def test_differentiate_bad_order():
    with pytest.raises(ValueError):
        differentiate_numeric(parse("y"), 0, 3)


def test_pickle_round_trip():
    e = parse("1 - exp(-y)")
    e2 = pickle.loads(pickle.dumps(e))
    assert e2 == e and e2(0.3) == e(0.3)


EXPR_SOURCES = {
    "log": "ln(y)", "exp1": "1-exp(-y)", "rational30": "1/(y-30)",
    "affine21": "2*y+1", "quad11": "y^2+11*y",
}
SAMPLE_RANGES = {
    "log": (0.2, 5), "exp1": (-2, 2), "rational30": (31, 35), "affine21": (-10, 10),
    "quad11": (-5, 5),
}


@pytest.mark.parametrize("name", list(ENTRIES))
def test_numeric_derivatives_match_catalog(name):
    f = get(name).function
    e = parse(EXPR_SOURCES[name])
    lo, hi = SAMPLE_RANGES[name]
    for i in range(50):
        y = lo + (hi - lo) * (i + 0.5) / 50
        assert evaluate(e, y) == pytest.approx(f.eval(y), rel=1e-12, abs=1e-12)
        assert differentiate_numeric(e, y, 1) == pytest.approx(f.d1(y), abs=1e-5)
        assert differentiate_numeric(e, y, 2) == pytest.approx(f.d2(y), abs=1e-3)


# Grammar-generated trees: parse(to_source(t)) must give back t exactly.
leaves = st.one_of(
    st.just(Var("y")),
    st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False).map(Const),
    st.sampled_from([Named("pi"), Named("e")]),
)
trees = st.recursive(
    leaves,
    lambda kids: st.one_of(
        st.builds(Unary, st.sampled_from(("neg",) + FUNCTIONS), kids),
        st.builds(Binary, st.sampled_from(["+", "-", "*", "/", "^"]), kids, kids),
    ),
    max_leaves=12,
)


def _contains_var(node):
    if isinstance(node, Var):
        return True
    if isinstance(node, Unary):
        return _contains_var(node.arg)
    if isinstance(node, Binary):
        return _contains_var(node.left) or _contains_var(node.right)
    return False


def _outcome(e, y):
    try:
        return ("ok", evaluate(e, y))
    except DomainError:
        return ("domain",)


@settings(max_examples=200, deadline=None)
@given(trees)
def test_print_parse_round_trip(tree):
    if not _contains_var(tree):
        tree = Binary("+", tree, Var("y"))
    e = parse(to_source(tree))
    assert e.ast == tree
    e0 = Expression(tree, "generated")
    for i in range(100):
        y = -5 + i * 0.1
        a, b = _outcome(e, y), _outcome(e0, y)
        assert a[0] == b[0]
        if a[0] == "ok":
            assert math.isfinite(a[1]) and a[1] == b[1]
