import math

import numpy as np
import pytest

from core_lp import (absolute, divide_linear, inner_blaschke, is_bj_orthogonal, is_p_inner, lp_norm,
                     multiply, reflect, semi_inner, shift, signed_power)
from errors import DomainError
from models import PNorm, RealPoly


class TestSignedPower:
    def test_zero_convention(self):
        assert signed_power(0.0, 0.5) == 0.0

    def test_identity_exponent(self):
        assert signed_power(-2.0, 1.0) == -2.0

    def test_sign_kept(self):
        assert signed_power(-3.0, 2.0) == pytest.approx(-9.0)

    @pytest.mark.parametrize('x', [math.inf, -math.inf, math.nan])
    def test_non_finite(self, x):
        with pytest.raises(DomainError):
            signed_power(x, 2.0)


class TestNorm:
    def test_two_norm(self):
        assert lp_norm(RealPoly((1.0, 1.0)), 2) == pytest.approx(math.sqrt(2.0))

    def test_zero(self):
        assert lp_norm(RealPoly((0.0,)), 3.5) == 0.0

    def test_hand_value(self):
        assert lp_norm(RealPoly((3.0, 4.0)), 4) == pytest.approx((81 + 256) ** 0.25, rel=1e-14)

    def test_large_p_does_not_overflow(self):
        assert lp_norm(RealPoly((1e10, 1e10)), 40) == pytest.approx(1e10 * 2 ** (1 / 40))

    def test_homogeneity(self, random_poly, rng, p_general):
        for _ in range(50):
            f = random_poly()
            lam = rng.uniform(-3, 3)
            scaled = RealPoly(tuple(lam * c for c in f.coeffs))
            assert lp_norm(scaled, p_general) == pytest.approx(abs(lam) * lp_norm(f, p_general), rel=1e-12)

    def test_exponent_validated(self):
        with pytest.raises(DomainError):
            lp_norm(RealPoly((1.0,)), 1.0)


class TestSemiInner:
    def test_disjoint_supports(self):
        assert semi_inner(RealPoly((1.0, 0.0)), RealPoly((0.0, 1.0)), 3) == 0.0

    def test_euclidean(self):
        assert semi_inner(RealPoly((1.0, 1.0)), RealPoly((1.0, 1.0)), 2) == pytest.approx(2.0)

    def test_hand_value(self):
        assert semi_inner(RealPoly((2.0, -1.0)), RealPoly((1.0, 1.0)), 4) == pytest.approx(7.0)

    def test_shorter_argument_padded(self):
        assert semi_inner(RealPoly((1.0,)), RealPoly((2.0, 5.0, 7.0)), 3) == pytest.approx(2.0)

    def test_self_pairing_is_norm_power(self, random_poly, p_general):
        f = random_poly()
        assert semi_inner(f, f, p_general) == pytest.approx(lp_norm(f, p_general) ** p_general.p, rel=1e-12)

    def test_derivative_identity(self, random_poly, p_general):
        # d/da ||f + a g||^p at a = 0 equals p [f, g]
        f, g = random_poly(3), random_poly(3)
        h = 1e-6

        def power(a):
            return lp_norm(f.as_array() + a * g.as_array(), p_general) ** p_general.p

        fd = (power(h) - power(-h)) / (2 * h)
        assert fd == pytest.approx(p_general.p * semi_inner(f, g, p_general), rel=1e-6, abs=1e-6)


class TestOrthogonality:
    def test_disjoint(self):
        assert is_bj_orthogonal(RealPoly((1.0, 0.0)), RealPoly((0.0, 1.0)), 3)

    def test_not_orthogonal(self):
        assert not is_bj_orthogonal(RealPoly((1.0, 1.0)), RealPoly((0.0, 1.0)), 2)

    def test_tolerance_must_be_positive(self):
        with pytest.raises(DomainError):
            is_bj_orthogonal(RealPoly((1.0,)), RealPoly((1.0,)), 3, tol=0)

    def test_norm_does_not_drop(self, random_poly, p_general):
        f, g = random_poly(3), random_poly(3)
        lam = semi_inner(f, g, p_general) / semi_inner(f, f, p_general)
        g_perp = g.as_array() - lam * f.as_array()
        assert is_bj_orthogonal(f, g_perp, p_general)
        base = lp_norm(f, p_general)
        for alpha in np.linspace(-2, 2, 41):
            assert lp_norm(f.as_array() + alpha * g_perp, p_general) >= base - 1e-12


class TestPolynomialHelpers:
    def test_shift(self):
        assert shift(RealPoly((1.0, 2.0)), 2).coeffs == (0.0, 0.0, 1.0, 2.0)

    def test_shift_negative(self):
        with pytest.raises(DomainError):
            shift(RealPoly((1.0,)), -1)

    def test_multiply(self):
        assert multiply(RealPoly((1.0, 1.0)), RealPoly((1.0, -1.0))).coeffs == pytest.approx((1.0, 0.0, -1.0))

    def test_divide_linear(self):
        quotient, remainder = divide_linear(RealPoly((-2.0, 1.0, 1.0)), 1.0)
        assert quotient.coeffs == pytest.approx((2.0, 1.0))
        assert remainder == pytest.approx(0.0, abs=1e-14)

    def test_reflect_and_absolute(self):
        f = RealPoly((1.0, -2.0, 3.0))
        assert reflect(f).coeffs == (1.0, 2.0, 3.0)
        assert absolute(f).coeffs == (1.0, 2.0, 3.0)


class TestInner:
    @pytest.mark.parametrize('w', [0.5, -0.3, 0.8])
    def test_blaschke_is_p_inner(self, w, p_general):
        f = inner_blaschke(w, p_general, terms=400)
        assert f[0] == 1.0
        assert is_p_inner(f, p_general, n_max=6, tol=1e-8)

    def test_blaschke_p2_is_classical(self):
        w = 0.5
        f = inner_blaschke(w, 2, terms=200)
        # (1 - z/w) / (1 - w z): second coefficient w - 1/w
        assert f[1] == pytest.approx(w - 1 / w)

    def test_one_is_inner(self):
        assert is_p_inner(RealPoly((1.0,)), PNorm(3.0))

    def test_non_inner(self):
        assert not is_p_inner(RealPoly((1.0, 1.0)), PNorm(3.0))

    @pytest.mark.parametrize('w', [0.0, 1.0, -1.5])
    def test_blaschke_domain(self, w):
        with pytest.raises(DomainError):
            inner_blaschke(w, 3)
