import os
import sys

import numpy as np
import pytest

os.environ.setdefault('OPA_LAB_ENV', 'testing')
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from models import PNorm, RealPoly  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_poly(rng):
    """Real polynomial of degree 1..5 with |a_0| >= 0.5"""
    def make(degree=None):
        degree = int(rng.integers(1, 6)) if degree is None else degree
        coeffs = rng.uniform(-2.0, 2.0, size=degree + 1)
        coeffs[0] = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
        return RealPoly(tuple(coeffs))
    return make


@pytest.fixture(params=[1.5, 3.0, 4.0, 6.0])
def p_general(request):
    return PNorm(request.param)


@pytest.fixture
def table_d2_p4():
    """Rounded extremal polynomial for d = 2, p = 4"""
    return RealPoly((1.0, 3.64836, 1.92310))
