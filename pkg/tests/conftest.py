import math

import pytest

from epsdelta import catalog
from epsdelta.numerics import RealFunction


class CountingFunction:
    """Wraps a callable and counts every call."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, y):
        self.calls += 1
        return self.fn(y)


def counted(f: RealFunction):
    counter = CountingFunction(f.eval)
    wrapped = RealFunction(counter, f.domain, f.d1, f.d2, f.label, f.veval)
    return wrapped, counter


def exp1_pi(x, eps):
    return x + math.log(eps + math.exp(-x))


@pytest.fixture(params=list(catalog.ENTRIES))
def entry(request):
    return catalog.get(request.param)


@pytest.fixture
def exp1():
    return catalog.get("exp1").function


@pytest.fixture
def affine():
    return catalog.get("affine21").function


@pytest.fixture
def quad():
    return catalog.get("quad11").function
