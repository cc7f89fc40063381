import math

import pytest
from mpmath import mp

from precision import findroot_bracketed, is_extended, lu_solve, to_float, to_mp, working_precision
from radius import log_phi_at_root, tau_gap, tau_gap_extended, xi_pair


def test_is_extended():
    assert not is_extended(None)
    assert not is_extended(53)
    assert is_extended(128)


def test_working_precision():
    before = mp.prec
    with working_precision(256) as ctx:
        assert ctx.prec == 256
    assert mp.prec == before
    with working_precision(53) as ctx:
        assert ctx is None


def test_lu_solve():
    with working_precision(128):
        x = lu_solve([[2, 1], [1, 3]], to_mp([3, 5]))
        assert to_float(x) == pytest.approx([0.8, 1.4], abs=1e-30)


def test_findroot_bracketed():
    root = findroot_bracketed(lambda x: x ** 2 - 2, 1, 2, 256)
    assert float(root) == pytest.approx(2 ** 0.5, abs=1e-15)


def test_extended_gap_matches_double():
    p, t = 4.0, 1.3
    assert float(tau_gap_extended(p, t, 128)) == pytest.approx(tau_gap(p, t), abs=1e-10)


def test_log_phi_at_root_matches_direct_form():
    p, t = 4.0, 1.3
    for xi in xi_pair(p, t):
        direct = math.log((p * t - xi) * abs(xi - t) ** (p - 2))
        assert log_phi_at_root(p, t, xi) == pytest.approx(direct, abs=1e-10)
