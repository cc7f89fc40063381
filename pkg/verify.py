"""
Invariant batteries behind `app.py verify`

Each check returns a Check(name, passed, detail). A check that raises is
reported as failed with the exception text as its detail.
"""

import logging
from collections import namedtuple

import numpy as np

from config import ExtremalConfig, SolverConfig
from core_lp import is_bj_orthogonal, lp_norm, multiply, reflect, absolute, semi_inner, shift
from dynamics import branch_range, critical_points, phi, psi, ratio_residuals
from extra_zeros import find_min_k_extra_zero
from extremal import solve_tdp
from models import LEFT, MIDDLE, RIGHT, PhiPsiParams, RealPoly
from opa import duality_check, h_prime, h_value, remove_root_opa, solve_linear_opa, solve_opa
from radius import exclusion_radius, solve_tau

logger = logging.getLogger(__name__)

Check = namedtuple('Check', ['name', 'passed', 'detail'])

DEFAULT_PS = (1.5, 3.0, 4.0, 6.0)
EXTRA_ZERO_PS = (1.5, 3.0, 4.0)
ORBIT_TS = (1.0, 1.2, 1.5)

# (d, p) -> 1/T_{d,p}
EXTREMAL_ROWS = {(2, 4.0): 1.09638, (2, 6.0): 0.95629, (3, 4.0): 0.94921}
TAU_ROWS = {4.0: 1.21157, 6.0: 1.37386, 10.0: 1.54974}
EXCLUSION_ROWS = {1.5: 1.21141, 1.75: 1.07929, 4.0: 1.57890, 16.0: 1.89367}


def _random_poly(rng, degree=None):
    degree = int(rng.integers(1, 6)) if degree is None else degree
    coeffs = rng.uniform(-2.0, 2.0, size=degree + 1)
    coeffs[0] = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
    return RealPoly(tuple(coeffs))


def _run(name, fn):
    try:
        passed, detail = fn()
    except Exception as e:
        logger.error(f"check {name!r} raised: {e}")
        return Check(name, False, f"{type(e).__name__}: {e}")
    return Check(name, bool(passed), detail)


# core-lp

def _homogeneity(rng, ps):
    worst = 0.0
    for _ in range(100):
        f = _random_poly(rng)
        p = rng.choice(ps)
        lam = rng.uniform(-3.0, 3.0)
        lhs = lp_norm(RealPoly(tuple(lam * c for c in f.coeffs)), p)
        worst = max(worst, abs(lhs - abs(lam) * lp_norm(f, p)) / max(1.0, lhs))
    return worst <= 1e-12, f"max relative error {worst:.2e}"


def _semi_inner_laws(rng, ps):
    worst = 0.0
    for _ in range(100):
        f, g, h = _random_poly(rng, 4), _random_poly(rng, 4), _random_poly(rng, 4)
        p = rng.choice(ps)
        alpha, beta = rng.uniform(-2, 2, size=2)
        combo = alpha * g.as_array() + beta * h.as_array()
        linear = semi_inner(f, combo, p) - alpha * semi_inner(f, g, p) - beta * semi_inner(f, h, p)
        self_pair = semi_inner(f, f, p) - lp_norm(f, p) ** p
        worst = max(worst, abs(linear) / max(1.0, lp_norm(f, p) ** p), abs(self_pair) / max(1.0, lp_norm(f, p) ** p))
    return worst <= 1e-10, f"max relative error {worst:.2e}"


def _bj_definition(rng, ps):
    violations = 0
    for _ in range(50):
        f, g = _random_poly(rng, 3), _random_poly(rng, 3)
        p = rng.choice(ps)
        lam = semi_inner(f, g, p) / semi_inner(f, f, p)
        g_perp = g.as_array() - lam * f.as_array()
        base = lp_norm(f, p)
        for alpha in np.linspace(-2.0, 2.0, 41):
            if lp_norm(f.as_array() + alpha * g_perp, p) < base - 1e-12 * max(1.0, base):
                violations += 1
    return violations == 0, f"{violations} norm decreases along orthogonal directions"


# opa

def _p2_oracle(rng, cfg):
    worst = 0.0
    for _ in range(200):
        f = _random_poly(rng)
        a = f.as_array()
        closed = float(np.dot(a[1:], a[:-1]) / np.dot(a, a))
        worst = max(worst, abs(solve_linear_opa(f, 2.0, cfg).t_f - closed))
    return worst <= 1e-10, f"max |t - closed form| {worst:.2e}"


def _linear_residual(rng, ps, cfg):
    worst = 0.0
    for _ in range(50):
        f = _random_poly(rng)
        p = rng.choice(ps)
        result = solve_linear_opa(f, p, cfg)
        worst = max(worst, result.residual / (p * max(1.0, lp_norm(f, p) ** p)))
    return worst <= cfg.tol, f"max scaled |h'(t_f)| {worst:.2e} (tol {cfg.tol:.0e})"


def _linear_orthogonality(rng, ps, cfg):
    failures = 0
    for _ in range(200):
        f = _random_poly(rng)
        p = rng.choice(ps)
        t = solve_linear_opa(f, p, cfg).t_f
        j1 = multiply(RealPoly((1.0, -t)), f)
        if not is_bj_orthogonal(j1, shift(f), p, tol=1e-7):
            failures += 1
    return failures == 0, f"{failures} of 200 not orthogonal"


def _finite_difference(rng, ps):
    worst = 0.0
    delta = 1e-6
    for _ in range(500):
        f = _random_poly(rng)
        p = rng.choice(ps)
        t = rng.uniform(-2.0, 2.0)
        fd = (h_value(f, p, t + delta) - h_value(f, p, t - delta)) / (2 * delta)
        exact = h_prime(f, p, t)
        worst = max(worst, abs(fd - exact) / max(1.0, abs(exact)))
    return worst <= 1e-6, f"max relative error {worst:.2e}"


def _convexity(rng, ps):
    violations = 0
    for _ in range(50):
        f = _random_poly(rng)
        p = rng.choice(ps)
        ts = np.linspace(-2.0, 2.0, 201)
        hs = np.array([h_value(f, p, t) for t in ts])
        second = hs[:-2] - 2 * hs[1:-1] + hs[2:]
        violations += int(np.sum(second < -1e-9 * np.max(hs)))
    return violations == 0, f"{violations} negative second differences"


def _symmetries(rng, ps, cfg):
    worst = 0.0
    for _ in range(50):
        f = _random_poly(rng)
        p = rng.choice(ps)
        t = solve_linear_opa(f, p, cfg).t_f
        worst = max(worst,
                    abs(solve_linear_opa(RealPoly(tuple(-c for c in f.coeffs)), p, cfg).t_f - t),
                    abs(solve_linear_opa(reflect(f), p, cfg).t_f + t))
        if solve_linear_opa(absolute(f), p, cfg).t_f < t - 1e-10:
            return False, f"|a_k| did not dominate for {f.coeffs}"
    return worst <= 1e-9, f"max symmetry defect {worst:.2e}"


def _continuity(rng, cfg):
    f = RealPoly((1.0, 0.7, -0.4, 0.3))
    t = solve_linear_opa(f, 4.0, cfg).t_f
    worst = 0.0
    for _ in range(100):
        bump = rng.normal(size=len(f))
        bump *= 1e-6 / np.linalg.norm(bump)
        g = RealPoly(tuple(f.as_array() + bump))
        worst = max(worst, abs(solve_linear_opa(g, 4.0, cfg).t_f - t))
    return worst <= 1e-4, f"max |delta t| {worst:.2e}"


def _deflation(rng, ps, cfg):
    worst = 0.0
    for _ in range(20):
        f = _random_poly(rng, 3)
        p = rng.choice(ps)
        q = solve_opa(f, p, 1, cfg).q
        if q[1] == 0:
            continue
        z0 = -q[0] / q[1]
        r = remove_root_opa(f, p, 1, z0, cfg).q
        rebuilt = multiply(RealPoly((-z0, 1.0)), r)
        worst = max(worst, float(np.max(np.abs(rebuilt.as_array() - q.as_array()))))
    return worst <= 1e-7, f"max coefficient gap {worst:.2e}"


def _duality(rng, ps, cfg):
    worst = 0.0
    for _ in range(10):
        f = _random_poly(rng, 2)
        f = RealPoly(tuple(c / f[0] for c in f.coeffs))
        i_n, m_n = duality_check(f, rng.choice(ps), 1, cfg)
        worst = max(worst, abs(i_n * m_n - 1.0))
    return worst <= 1e-6, f"max |I*M - 1| {worst:.2e}"


# examples

def _extra_zeros(ps):
    details = []
    for p in ps:
        witness = find_min_k_extra_zero(p)
        again = solve_linear_opa(witness.f, p)
        if again.zero is None or abs(again.zero) >= 1:
            return False, f"p={p}: witness k={witness.k} does not re-solve inside the disk"
        details.append(f"p={p}: k={witness.k}")
    return True, ', '.join(details)


# extremal

def _extremal_rows(ps, cfg):
    worst, checked = 0.0, 0
    for (d, p), inv_t in EXTREMAL_ROWS.items():
        if p not in ps:
            continue
        sol = solve_tdp(p, d, cfg=cfg)
        worst = max(worst, abs(sol.inv_t - inv_t), abs(sol.a[1] - p * sol.t))
        checked += 1
    return worst <= 1e-3, f"{checked} rows, max gap {worst:.2e}"


def _monotone_in_d(ps, cfg):
    details = []
    for p in ps:
        if p <= 2:
            continue
        ts = [solve_tdp(p, d, cfg=cfg).t for d in (2, 3, 4)]
        if not all(b > a + 1e-9 for a, b in zip(ts, ts[1:])):
            return False, f"p={p}: T not increasing in d: {ts}"
        details.append(f"p={p}: ok")
    return True, ', '.join(details) or 'no p > 2 selected'


def _orbit_agreement(cfg):
    worst = 0.0
    for d in (3, 4):
        sol = solve_tdp(4.0, d, cfg=cfg)
        params = PhiPsiParams(4.0, sol.t)
        scale = max(abs(psi(params, sol.a[1] / sol.a[0])), 1.0)
        worst = max(worst, max(abs(r) for r in ratio_residuals(params, sol.a)) / scale)
    return worst <= 1e-6, f"max ratio residual {worst:.2e}"


# dynamics

def _phi_psi_shape(ps):
    violations = 0
    for p in ps:
        if p <= 2:
            continue
        for t in ORBIT_TS:
            params = PhiPsiParams(p, t)
            c1, c2 = critical_points(params)
            for curve, start in ((phi, 1e-6), (psi, 0.05 * t)):
                pieces = {LEFT: np.linspace(start, c1, 1000), MIDDLE: np.linspace(c1, c2, 1000),
                          RIGHT: np.linspace(c2, 3 * c2, 1000)}
                for branch, xs in pieces.items():
                    ys = np.array([curve(params, x) for x in xs])
                    slack = 1e-12 * max(1.0, float(np.max(np.abs(ys))))
                    steps = np.diff(ys)
                    increasing = branch == MIDDLE
                    violations += int(np.sum(steps < -slack if increasing else steps > slack))
                    violations += int(np.sum(~np.isfinite(ys)))
                    if curve is phi:
                        lo, hi = branch_range(params, branch)
                        violations += int(np.sum((ys < lo - 1e-9) | (ys > hi + 1e-9)))
                    else:
                        violations += int(np.sum(ys < 0))
    return violations == 0, f"{violations} monotonicity violations"


# radius

def _exclusion_rows(ps):
    worst = 0.0
    for p, s in EXCLUSION_ROWS.items():
        if p not in ps:
            continue
        result = exclusion_radius(p)
        worst = max(worst, abs(result.s_min - s), abs(result.r * result.s_min - 1.0))
    return worst <= 5e-5, f"max gap {worst:.2e}"


def _tau_rows(ps):
    worst = 0.0
    for p, tau in TAU_ROWS.items():
        if p not in ps:
            continue
        worst = max(worst, abs(solve_tau(p).tau - tau))
    return worst <= 2e-4, f"max gap {worst:.2e}"


def _sandwich(ps, cfg):
    for p in ps:
        if p <= 2:
            continue
        r = exclusion_radius(p).r
        inv_tau = 1.0 / solve_tau(p).tau
        for d in (2, 3):
            inv_t = solve_tdp(p, d, cfg=cfg).inv_t
            if not (r < inv_tau - 1e-9 and inv_tau < inv_t - 1e-9):
                return False, f"p={p} d={d}: r={r} 1/tau={inv_tau} 1/T={inv_t}"
    return True, 'r < 1/tau < 1/T'


def run_verification(ps=None, tol=None, seed=12345):
    """Run every battery; with ps == [2] only the p = 2 oracle and core checks run"""
    solver_cfg = SolverConfig() if tol is None else SolverConfig(tol=tol)
    extremal_cfg = ExtremalConfig()
    rng = np.random.default_rng(seed)
    ps = tuple(float(p) for p in (ps or DEFAULT_PS))
    general = tuple(p for p in ps if abs(p - 2.0) > 1e-6)
    core_ps = ps

    checks = [
        ('lp_norm homogeneity', lambda: _homogeneity(rng, core_ps)),
        ('semi-inner product laws', lambda: _semi_inner_laws(rng, core_ps)),
        ('Birkhoff-James definition', lambda: _bj_definition(rng, core_ps)),
        ('p=2 closed form', lambda: _p2_oracle(rng, solver_cfg)),
        ('linear OPA residual', lambda: _linear_residual(rng, core_ps, solver_cfg)),
    ]
    if general:
        checks += [
            ('linear OPA orthogonality', lambda: _linear_orthogonality(rng, general, solver_cfg)),
            ("h' finite difference", lambda: _finite_difference(rng, general)),
            ('h convexity', lambda: _convexity(rng, general)),
            ('sign and reflection symmetry', lambda: _symmetries(rng, general, solver_cfg)),
            ('continuity of t_f', lambda: _continuity(rng, solver_cfg)),
            ('deflation identity', lambda: _deflation(rng, general, solver_cfg)),
            ('duality I*M = 1', lambda: _duality(rng, general, solver_cfg)),
            ('extra zeros', lambda: _extra_zeros([p for p in EXTRA_ZERO_PS if p in general] or general)),
            ('extremal table rows', lambda: _extremal_rows(general, extremal_cfg)),
            ('T increasing in d', lambda: _monotone_in_d(general, extremal_cfg)),
            ('orbit ratios match Lagrange', lambda: _orbit_agreement(extremal_cfg)),
            ('Phi and Psi monotone pieces', lambda: _phi_psi_shape(general)),
            ('exclusion table rows', lambda: _exclusion_rows(general)),
            ('tau table rows', lambda: _tau_rows(general)),
            ('sandwich r < 1/tau < 1/T', lambda: _sandwich(general, extremal_cfg)),
        ]

    results = []
    for name, fn in checks:
        check = _run(name, fn)
        logger.info(f"{'PASS' if check.passed else 'FAIL'} {name}: {check.detail}")
        results.append(check)
    return results
