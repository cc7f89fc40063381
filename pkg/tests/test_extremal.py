import pytest

from config import ExtremalConfig
from errors import DomainError, UnsupportedExponent
from extremal import (direct_maximize_t, extend_solution, extremal_table, lagrange_residuals, shoot_tdp,
                      solve_tdp, sweep_table, t_linear_extremal)
from extra_zeros import family_small_p
from models import RealPoly
from opa import h_prime, solve_linear_opa
from radius import exclusion_radius, solve_tau

# (d, p, 1/T, coefficients) as printed, five or six significant digits
TABLE = [
    (2, 4.0, 1.09638, (1, 3.64836, 1.92310)),
    (2, 6.0, 0.95629, (1, 6.27424, 3.36907)),
    (2, 8.0, 0.88193, (1, 9.07101, 4.96676)),
    (2, 10.0, 0.83568, (1, 11.9663, 6.65305)),
    (3, 4.0, 0.94921, (1, 4.21406, 3.01393, 1.65036)),
    (3, 6.0, 0.82606, (1, 7.26338, 5.34352, 3.00715)),
    (3, 8.0, 0.76236, (1, 10.4938, 7.89188, 4.54074)),
    (3, 10.0, 0.72322, (1, 13.8270, 10.57437, 6.18409)),
    (4, 4.0, 0.89213, (1, 4.48365, 3.59236, 2.59647, 1.44035)),
    (4, 6.0, 0.77760, (1, 7.71608, 6.35232, 4.74328, 2.71501)),
    (4, 8.0, 0.71878, (1, 11.13000, 9.37221, 7.14758, 4.18719)),
    (4, 10.0, 0.68277, (1, 14.6463, 12.51665, 9.69994, 5.77764)),
]


class TestResiduals:
    def test_table_solution_nearly_solves(self, table_d2_p4):
        t = 1 / 1.09638
        scale = max(abs(c) for c in table_d2_p4.coeffs) ** 3
        assert all(abs(r) <= 1e-3 * scale for r in lagrange_residuals(4, t, table_d2_p4))

    def test_first_residual(self):
        residuals = lagrange_residuals(4, 0.5, RealPoly((1.0, 1.0, 0.5)))
        assert residuals[0] == pytest.approx(1.0 - 2.0)

    def test_perturbation_grows_residual(self, table_d2_p4):
        t = 1 / 1.09638
        base = max(abs(r) for r in lagrange_residuals(4, t, table_d2_p4))
        bumped = RealPoly((1.0, 3.64836, 1.92310 + 1e-2))
        assert max(abs(r) for r in lagrange_residuals(4, t, bumped)) > base

    def test_linear_closed_form(self):
        for p in (1.5, 3.0, 4.0):
            t = t_linear_extremal(p)
            f = RealPoly((1.0, p * t))
            assert max(abs(r) for r in lagrange_residuals(p, t, f)) == pytest.approx(0.0, abs=1e-12)
            assert solve_linear_opa(f, p).t_f == pytest.approx(t, abs=1e-9)


class TestSolve:
    @pytest.mark.parametrize('d,p,inv_t,coeffs', TABLE)
    def test_table_rows(self, d, p, inv_t, coeffs):
        sol = solve_tdp(p, d)
        assert sol.inv_t == pytest.approx(inv_t, abs=1e-3)
        assert sol.a.coeffs == pytest.approx(coeffs, rel=2e-3)
        assert sol.a[1] == pytest.approx(p * sol.t, abs=1e-9)
        assert abs(sol.hprime_at_t) <= 1e-8 * sol.scale
        assert sol.outside_hypothesis == (d == 2)

    def test_h_prime_vanishes_independently(self):
        sol = solve_tdp(6.0, 3)
        assert abs(h_prime(sol.a, 6.0, sol.t)) <= 1e-8 * sol.scale
        assert solve_linear_opa(sol.a, 6.0).t_f == pytest.approx(sol.t, abs=1e-8)

    def test_increasing_in_d(self):
        ts = [solve_tdp(4.0, d).t for d in (2, 3, 4)]
        assert ts[0] < ts[1] < ts[2]

    def test_seed_reuse(self):
        sol = solve_tdp(4.0, 2)
        again = solve_tdp(4.0, 2, seed=sol)
        assert again.t == pytest.approx(sol.t, abs=1e-12)
        assert solve_tdp(4.0, 3, seed=sol).inv_t == pytest.approx(0.94921, abs=1e-3)

    def test_degree_validated(self):
        with pytest.raises(DomainError):
            solve_tdp(4.0, 1)

    def test_p_two_rejected(self):
        with pytest.raises(UnsupportedExponent):
            solve_tdp(2.0, 3)

    def test_extended_precision_path(self):
        cfg = ExtremalConfig(double_max_degree=1)
        sol = solve_tdp(4.0, 2, cfg=cfg)
        assert 'extended' in sol.method
        assert sol.inv_t == pytest.approx(1.09638, abs=1e-3)


class TestSeeds:
    def test_shooting_lands_on_extremal_t(self):
        t, coeffs = shoot_tdp(4.0, 3)
        assert t == pytest.approx(solve_tdp(4.0, 3).t, abs=1e-6)
        assert coeffs[1] == pytest.approx(4.0 * t)

    def test_direct_ascent_agrees(self):
        t, a = direct_maximize_t(4.0, 2, restarts=8)
        assert t == pytest.approx(1 / 1.09638, abs=1e-4)
        assert all(c > 0 for c in a.coeffs)

    def test_direct_ascent_agrees_beyond_quadratics(self):
        t, _ = direct_maximize_t(4.0, 3, restarts=8)
        assert t == pytest.approx(solve_tdp(4.0, 3).t, abs=1e-6)


class TestSandwich:
    @pytest.mark.parametrize('p', [8.0, 10.0])
    def test_radius_tau_and_extremal_constants(self, p):
        r = exclusion_radius(p).r
        inv_tau = 1.0 / solve_tau(p).tau
        ts = [s.t for s in sweep_table([p], range(2, 7))]
        assert r < inv_tau - 1e-9
        assert all(inv_tau < 1.0 / t - 1e-9 for t in ts)
        assert all(a < b for a, b in zip(ts, ts[1:]))


class TestBelowTwo:
    def test_quadratic(self):
        assert solve_tdp(1.5, 2).t == pytest.approx(0.81662, abs=1e-4)

    def test_not_beaten_by_direct_ascent(self):
        ts = []
        for d in (2, 3, 4):
            sol = solve_tdp(1.5, d)
            assert sol.t >= direct_maximize_t(1.5, d)[0] - 1e-4
            ts.append(sol.t)
        assert ts[0] < ts[1] < ts[2]

    def test_small_p_family_is_a_lower_bound(self):
        witness = solve_linear_opa(family_small_p(5), 1.5).t_f
        assert witness == pytest.approx(1.00864, abs=1e-4)
        assert solve_tdp(1.5, 5).t >= witness - 1e-9

    def test_higher_exponent_below_two(self):
        sol = solve_tdp(1.75, 3)
        assert sol.t > solve_tdp(1.75, 2).t
        assert solve_linear_opa(sol.a, 1.75).t_f == pytest.approx(sol.t, abs=1e-6)
        if sol.method == 'direct':
            assert len(sol.residuals) == 4


class TestExtension:
    def test_zero_length(self):
        sol = solve_tdp(4.0, 2)
        assert extend_solution(sol, 0) == sol.a

    @pytest.mark.parametrize('m', [1, 3])
    def test_same_t(self, m):
        sol = solve_tdp(4.0, 2)
        g = extend_solution(sol, m)
        assert g.degree == 2 + m
        assert solve_linear_opa(g, 4.0).t_f == pytest.approx(sol.t, abs=1e-8)

    def test_negative_length(self):
        with pytest.raises(DomainError):
            extend_solution(solve_tdp(4.0, 2), -1)


class TestTables:
    def test_sweep_and_table(self):
        solutions = sweep_table([4.0, 6.0], [2, 3])
        table = extremal_table(solutions)
        assert list(table.columns) == ['d', 'p', 'inv_t', 't', 'coeffs', 'residual_max']
        assert len(table) == 4
        assert table.loc[(table.d == 3) & (table.p == 6.0), 'inv_t'].iloc[0] == pytest.approx(0.82606, abs=1e-3)
