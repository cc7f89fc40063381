import pytest

from errors import CapExceeded, DomainError, UnsupportedExponent
from extra_zeros import family_large_p, family_small_p, find_min_k_extra_zero, g_of_t
from opa import h_prime, solve_linear_opa


class TestFamilies:
    def test_small_p_members(self):
        assert family_small_p(1).coeffs == (1.0, 2.0)
        assert family_small_p(3).coeffs == (1.0, 2.0, 3.0, 4.0)
        f = family_small_p(10)
        assert len(f) == 11
        assert all(f[j] == j + 1 for j in range(11))

    def test_large_p_members(self):
        assert family_large_p(1).coeffs == (1.0, 2.0, 1.0)
        assert family_large_p(2).coeffs == pytest.approx((1.0, 2.0, 1.5, 1.0, 0.5))

    @pytest.mark.parametrize('k', [0, -1, 2.5, True])
    def test_invalid_k(self, k):
        with pytest.raises(DomainError):
            family_small_p(k)
        with pytest.raises(DomainError):
            family_large_p(k)

    @pytest.mark.parametrize('family', [family_small_p, family_large_p])
    def test_no_extra_zero_in_hilbert_space(self, family):
        for k in range(1, 9):
            assert abs(solve_linear_opa(family(k), 2).zero) >= 1


class TestSigns:
    @pytest.mark.parametrize('k,p,t', [(3, 1.5, 1.0), (7, 1.75, 1.3), (5, 1.5, 2.0)])
    def test_g_is_scaled_derivative(self, k, p, t):
        assert g_of_t(k, p, t) == pytest.approx(-h_prime(family_small_p(k), p, t) / p, rel=1e-12)

    @pytest.mark.parametrize('k', [1, 2, 5, 9])
    def test_g_at_one_closed_form(self, k):
        p = 1.5
        assert g_of_t(k, p, 1.0) == pytest.approx(k * (k + 1) / 2 - (k + 1) ** p, rel=1e-12)

    @pytest.mark.parametrize('k,p', [(1, 3.0), (3, 3.0), (2, 4.0), (4, 6.0)])
    def test_large_p_derivative_at_one(self, k, p):
        expected = -1 + k ** (1 - p) * (2 * k + 1)
        assert h_prime(family_large_p(k), p, 1.0) / p == pytest.approx(expected, rel=1e-12)


class TestSearch:
    @pytest.mark.parametrize('p,k', [(1.5, 5), (1.75, 19), (3.0, 3), (4.0, 2), (6.0, 2)])
    def test_minimal_k(self, p, k):
        witness = find_min_k_extra_zero(p)
        assert witness.k == k
        assert witness.inside_disk
        # re-solving from scratch keeps the zero inside the disk
        assert abs(solve_linear_opa(witness.f, p).zero) < 1

    def test_bracketing_signs_small_p(self):
        witness = find_min_k_extra_zero(1.5)
        assert witness.family == 'small_p'
        assert g_of_t(witness.k, 1.5, 1.0) > 0 > g_of_t(witness.k, 1.5, 2.0)

    def test_bracketing_sign_large_p(self):
        witness = find_min_k_extra_zero(4.0)
        assert witness.family == 'large_p'
        assert h_prime(witness.f, 4.0, 1.0) < 0

    def test_p_two_rejected(self):
        with pytest.raises(UnsupportedExponent):
            find_min_k_extra_zero(2.0)

    def test_cap(self):
        with pytest.raises(CapExceeded):
            find_min_k_extra_zero(1.75, cap=5)
