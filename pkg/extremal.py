"""
Extremal constants T_{d,p} = sup |t_f| over degree-d polynomials

The maximiser solves the Lagrange recurrence system
    (p t a_k - a_{k+1}) |a_{k+1} - t a_k|^(p-2) = (p-1) a_{k-1} |a_k - t a_{k-1}|^(p-2)
for k = 1..d with a_0 = 1, a_1 = p t and a_{d+1} = 0. It is solved by damped
Newton in the unknowns (t, a_2, ..., a_d), seeded by continuation in d, a grid
search (d = 2) and shooting along the Phi/Psi orbit. A scipy trust-region least
squares run is the fallback when Newton stalls. For 1 < p < 2 every
candidate is checked against direct ascent of t_f.
"""

import logging

import numpy as np
import pandas as pd
from mpmath import mp
from scipy.optimize import least_squares, minimize

from config import ExtremalConfig, SolverConfig
from dynamics import invert_phi, psi
from errors import (BracketFailure, BranchMiss, DomainError, InvalidBranch, NonConvergence,
                    OpaLabError)
from models import LEFT, LagrangeSolution, PhiPsiParams, RealPoly, as_pnorm
from extra_zeros import family_small_p
from opa import h_prime, solve_linear_opa, t_gradient
from precision import lu_solve, to_float, to_mp, working_precision

logger = logging.getLogger(__name__)


# Lagrange system

def _w(x, p, floor):
    return max(abs(x), floor) ** (p - 2)


def _w_prime(x, p, floor):
    if x == 0:
        return 0 * x
    sign = 1 if x > 0 else -1
    return (p - 2) * sign * max(abs(x), floor) ** (p - 3)


def _residuals(p, t, coeffs, floor):
    """[residual_0, ..., residual_d]; works on floats and mpf"""
    a = list(coeffs) + [0 * t]
    d = len(coeffs) - 1
    out = [a[1] - p * t * a[0]]
    for k in range(1, d + 1):
        lhs = (p * a[k] * t - a[k + 1]) * _w(a[k + 1] - t * a[k], p, floor)
        rhs = (p - 1) * a[k - 1] * _w(a[k] - t * a[k - 1], p, floor)
        out.append(lhs - rhs)
    return out


def lagrange_residuals(p, t, a, floor=1e-300):
    """Residuals of the Lagrange system; index 0 is a_1 - p t a_0"""
    p = as_pnorm(p)
    if a[0] == 0:
        raise DomainError("lagrange_residuals needs a_0 != 0")
    return [float(r) for r in _residuals(p.p, t, a.coeffs, floor)]


def _coeffs_from(u, p):
    return [1.0 + 0 * u[0], p * u[0]] + list(u[1:])


def _jacobian(p, t, coeffs, floor):
    """d(residual_1..d)/d(t, a_2..a_d)"""
    d = len(coeffs) - 1
    zero = 0 * t
    a = list(coeffs) + [zero]

    def da(j):
        v = [zero] * d
        if j == 1:
            v[0] = zero + p
        elif 2 <= j <= d:
            v[j - 1] = zero + 1
        return v

    grads = {j: da(j) for j in range(0, d + 2)}
    dt = [zero + 1] + [zero] * (d - 1)

    rows = []
    for k in range(1, d + 1):
        ak, ak1, akm1 = a[k], a[k + 1], a[k - 1]
        uk, vk = ak1 - t * ak, ak - t * akm1
        wu, wv = _w(uk, p, floor), _w(vk, p, floor)
        dwu, dwv = _w_prime(uk, p, floor), _w_prime(vk, p, floor)
        coef = p * t * ak - ak1
        row = []
        for i in range(d):
            d_ak, d_ak1, d_akm1, d_t = grads[k][i], grads[k + 1][i], grads[k - 1][i], dt[i]
            d_lhs = (p * d_t * ak + p * t * d_ak - d_ak1) * wu \
                + coef * dwu * (d_ak1 - d_t * ak - t * d_ak)
            d_rhs = (p - 1) * (d_akm1 * wv + akm1 * dwv * (d_ak - d_t * akm1 - t * d_akm1))
            row.append(d_lhs - d_rhs)
        rows.append(row)
    return rows


def _scale(coeffs, p):
    return max(1.0, float(max(abs(c) for c in coeffs)) ** (p - 1))


def _system(u, p, floor):
    coeffs = _coeffs_from(u, p)
    return np.array(_residuals(p, u[0], coeffs, floor)[1:], dtype=float), coeffs


def _newton(p, u0, cfg):
    """Damped Newton in double precision"""
    u = np.array(u0, dtype=float)
    floor = cfg.jacobian_floor
    for it in range(cfg.max_newton):
        F, coeffs = _system(u, p, floor)
        scale = _scale(coeffs, p)
        norm = np.max(np.abs(F)) / scale
        if norm <= cfg.newton_tol:
            return u, it
        J = np.array(_jacobian(p, u[0], coeffs, floor), dtype=float)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -F, rcond=None)[0]

        lam = 1.0
        while lam > 1e-8:
            candidate = u + lam * step
            if candidate[0] > 0 and np.all(np.isfinite(candidate)):
                Fc, cc = _system(candidate, p, floor)
                if np.all(np.isfinite(Fc)) and np.max(np.abs(Fc)) / _scale(cc, p) < (1 - 1e-4 * lam) * norm:
                    break
            lam *= 0.5
        else:
            raise NonConvergence(f"Newton line search failed at step {it}", best=u,
                                 diagnostics={'residual': float(norm)})
        u = candidate
    raise NonConvergence(f"Newton did not converge in {cfg.max_newton} steps", best=u)


def _trust_region(p, u0, cfg):
    floor = cfg.jacobian_floor
    lower = np.full(len(u0), 0.0)
    result = least_squares(
        lambda u: _system(u, p, floor)[0] / _scale(_coeffs_from(u, p), p),
        np.asarray(u0, dtype=float),
        jac=lambda u: np.array(_jacobian(p, u[0], _coeffs_from(u, p), floor), dtype=float)
        / _scale(_coeffs_from(u, p), p),
        bounds=(lower, np.inf), method='trf', xtol=1e-15, ftol=1e-15, gtol=1e-15,
        max_nfev=50 * cfg.max_newton)
    F, coeffs = _system(result.x, p, floor)
    if np.max(np.abs(F)) / _scale(coeffs, p) > cfg.newton_tol:
        raise NonConvergence("trust-region fallback did not reach tolerance", best=result.x)
    return result.x, int(result.nfev)


def _newton_extended(p, u0, cfg):
    """Damped Newton at cfg.extended_bits with mpmath"""
    with working_precision(cfg.extended_bits):
        u = to_mp(u0)
        floor = mp.mpf(cfg.jacobian_floor)
        tol = mp.mpf(cfg.newton_tol) * mp.mpf(10) ** -10
        for it in range(cfg.max_newton):
            coeffs = _coeffs_from(u, p)
            F = _residuals(p, u[0], coeffs, floor)[1:]
            scale = max(mp.mpf(1), max(abs(c) for c in coeffs) ** (p - 1))
            norm = max(abs(x) for x in F) / scale
            if norm <= tol:
                return np.array(to_float(u)), it
            step = lu_solve(_jacobian(p, u[0], coeffs, floor), [-x for x in F])
            lam = mp.mpf(1)
            while lam > mp.mpf(10) ** -8:
                candidate = [ui + lam * si for ui, si in zip(u, step)]
                if candidate[0] > 0:
                    cc = _coeffs_from(candidate, p)
                    Fc = _residuals(p, candidate[0], cc, floor)[1:]
                    sc = max(mp.mpf(1), max(abs(c) for c in cc) ** (p - 1))
                    if max(abs(x) for x in Fc) / sc < (1 - lam / 10000) * norm:
                        break
                lam /= 2
            else:
                raise NonConvergence(f"extended Newton line search failed at step {it}",
                                     best=to_float(u))
            u = candidate
    raise NonConvergence(f"extended Newton did not converge in {cfg.max_newton} steps")


# Seeds

def t_linear_extremal(p):
    """Closed-form extremal t for d = 1: ((p-1)^(p-1) / p^p)^(1/p)"""
    p = as_pnorm(p).p
    return ((p - 1) ** (p - 1) / p ** p) ** (1.0 / p)


def _exits_within(p, t, d):
    """All-left orbit from x_1 = pt reaches x <= 0 by step d+1"""
    params = PhiPsiParams(p, t)
    x = p.p * t
    for _ in range(d):
        y = psi(params, x)
        if y >= params.exit_value:
            return True
        try:
            x = invert_phi(params, y, LEFT)
        except BranchMiss:
            return False
        if x <= 0:
            return True
    return False


def shoot_tdp(p, d, max_bisections=200):
    """(t, coefficients) from bisection on the exit index of the all-left orbit"""
    p = as_pnorm(p)
    lo, hi = 0.5 * t_linear_extremal(p), 2.0
    if not _exits_within(p, lo, d) or _exits_within(p, hi, d):
        raise BracketFailure(f"shooting bracket [{lo}, {hi}] does not separate exits for d={d}",
                             {'p': p.p, 'd': d})
    for _ in range(max_bisections):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _exits_within(p, mid, d):
            lo = mid
        else:
            hi = mid

    params = PhiPsiParams(p, hi)
    ratios = [p.p * hi]
    try:
        for _ in range(d - 1):
            ratios.append(invert_phi(params, psi(params, ratios[-1]), LEFT))
    except BranchMiss as e:
        raise InvalidBranch(f"all-left orbit leaves the left piece for p={p.p} d={d}",
                            {'t': hi, 'ratios': ratios}) from e
    coeffs = list(np.cumprod([1.0] + ratios))
    logger.debug(f"shooting p={p.p} d={d}: t={hi!r}")
    return hi, coeffs


def _grid_seed(p, cfg):
    """Best cell of a t x a_2 grid for d = 2"""
    best, best_u = np.inf, None
    for t in np.linspace(0.5, 2.0, cfg.grid_size):
        for a2 in np.linspace(3 * p / cfg.grid_size, 3 * p, cfg.grid_size):
            F, coeffs = _system(np.array([t, a2]), p, cfg.jacobian_floor)
            value = np.max(np.abs(F)) / _scale(coeffs, p)
            if value < best:
                best, best_u = value, [t, a2]
    return best_u


def _continuation_seed(prev):
    """Degree-d solution extended by a small positive a_{d+1}"""
    a = list(prev.a.coeffs)
    return [prev.t] + a[2:] + [0.1 * a[-1]]


def _previous_solution(p, d, seed, cfg):
    """Degree d-1 solution for continuation, or None at d = 2"""
    if seed is not None and seed.d == d - 1:
        return seed
    if d == 2:
        return None
    try:
        return solve_tdp(p, d - 1, cfg=cfg)
    except OpaLabError as e:
        logger.warning(f"continuation seed unavailable for p={p.p} d={d}: {e}")
        return None


def _seeds(p, d, seed, previous, cfg):
    if seed is not None and seed.d == d:
        yield 'seed', [seed.t] + list(seed.a.coeffs[2:])
    elif previous is not None:
        yield 'continuation', _continuation_seed(previous)
    elif d == 2:
        yield 'grid', _grid_seed(p.p, cfg)
    if p.p < 2:
        # the all-left orbit does not describe the maximiser below p = 2
        return
    try:
        t, coeffs = shoot_tdp(p, d)
        yield 'shooting', [t] + coeffs[2:]
    except OpaLabError as e:
        logger.warning(f"shooting seed unavailable for p={p.p} d={d}: {e}")


def _direct_starts(p, d, previous):
    """Ascent starts (a_1..a_d) that already reach T_{d-1,p}, plus the small-p family"""
    if previous is not None:
        extended = extend_solution(previous, 1)
    else:
        t1 = t_linear_extremal(p)
        extended = RealPoly((1.0, t1, p.p * t1 ** 2))
    return [np.array(extended.coeffs[1:]) / extended[0],
            np.array(family_small_p(d).coeffs[1:])]


# Solvers

def _finish(p, d, u, cfg, method):
    coeffs = [float(c) for c in _coeffs_from(list(u), p.p)]
    t = float(u[0])
    if min(coeffs) <= 0 or coeffs[-1] <= 1e-12:
        raise InvalidBranch(f"non-positive coefficient at convergence: {coeffs}", {'t': t})

    scale = _scale(coeffs, p.p)
    residuals = lagrange_residuals(p, t, RealPoly(tuple(coeffs)), floor=cfg.jacobian_floor)
    if max(abs(r) for r in residuals) > 1e-9 * scale:
        raise NonConvergence(f"Lagrange residual {max(abs(r) for r in residuals):.3e} above tolerance")

    if p.p < 2:
        arguments = [coeffs[k + 1] - t * coeffs[k] for k in range(d)] + [t * coeffs[d]]
        if min(abs(x) for x in arguments) <= 10 * cfg.jacobian_floor:
            raise InvalidBranch("solution pinned at the |x|^(p-2) floor")

    a = RealPoly(tuple(coeffs))
    hprime = h_prime(a, p, t)
    if abs(hprime) > 1e-8 * scale:
        raise NonConvergence(f"h'(t) = {hprime:.3e} does not vanish at the Lagrange solution")

    monotone = 1 < t < 2
    if not monotone:
        logger.info(f"p={p.p} d={d}: t={t:.6f} outside (1, 2)")
    return LagrangeSolution(p=p, d=d, t=t, a=a, residuals=residuals, hprime_at_t=hprime,
                            method=method, outside_hypothesis=(d == 2), monotone_regime=monotone)


def _polish(p, d, u0, cfg, source):
    if d > cfg.double_max_degree:
        u, _ = _newton_extended(p.p, u0, cfg)
        return _finish(p, d, u, cfg, f"{source}+extended")
    try:
        u, _ = _newton(p.p, u0, cfg)
        return _finish(p, d, u, cfg, f"{source}+newton")
    except (NonConvergence, InvalidBranch) as e:
        logger.debug(f"Newton from {source} failed ({e}); trying trust region")
    u, _ = _trust_region(p.p, u0, cfg)
    return _finish(p, d, u, cfg, f"{source}+trust-region")


def _polish_all(p, d, seeds, cfg):
    candidates, failures = [], []
    for source, u0 in seeds:
        try:
            candidates.append(_polish(p, d, u0, cfg, source))
        except (OpaLabError, ValueError, ZeroDivisionError, np.linalg.LinAlgError) as e:
            failures.append(f"{source}: {e}")
            logger.debug(f"p={p.p} d={d} seed {source} rejected: {e}")
    return candidates, failures


def _direct_solution(p, d, t, a, cfg):
    """Direct maximiser as a LagrangeSolution; residuals are kept as diagnostics only"""
    monotone = 1 < t < 2
    return LagrangeSolution(p=p, d=d, t=t, a=a,
                            residuals=lagrange_residuals(p, t, a, floor=cfg.jacobian_floor),
                            hprime_at_t=h_prime(a, p, t), method='direct',
                            outside_hypothesis=(d == 2), monotone_regime=monotone)


def _solve_below_two(p, d, seed, previous, cfg):
    """1 < p < 2: Newton candidates checked against direct ascent of t_f

    The maximiser may sit where some a_{k+1} - t a_k vanishes, and there the
    Lagrange system has no root. A candidate that the ascent beats by more
    than cfg.oracle_slack is on a lower branch and is dropped.
    """
    t_direct, a_direct = direct_maximize_t(p, d, restarts=cfg.direct_restarts,
                                           starts=_direct_starts(p, d, previous))
    seeds = list(_seeds(p, d, seed, previous, cfg))
    seeds.append(('direct', [t_direct] + list(a_direct.coeffs[2:])))
    candidates, failures = _polish_all(p, d, seeds, cfg)

    accepted = []
    for s in candidates:
        if s.t >= t_direct - cfg.oracle_slack:
            accepted.append(s)
        else:
            logger.debug(f"p={p.p} d={d}: {s.method} t={s.t:.10f} below direct ascent {t_direct:.10f}")
    if accepted:
        return max(accepted, key=lambda s: s.t)
    logger.info(f"p={p.p} d={d}: no Lagrange root reaches t={t_direct:.10f}; keeping the direct maximiser"
                f" ({len(failures)} seeds failed)")
    return _direct_solution(p, d, t_direct, a_direct, cfg)


def solve_tdp(p, d, seed=None, cfg=None):
    """T_{d,p} and its extremal polynomial; the largest t over all converged seeds"""
    p = as_pnorm(p)
    p.require_not_two()
    cfg = cfg or ExtremalConfig()
    if d < 2:
        raise DomainError(f"extremal problem needs d >= 2, got {d}")

    reuse = seed is not None and seed.d == d
    previous = None if reuse and p.p > 2 else _previous_solution(p, d, seed, cfg)
    if p.p < 2:
        best = _solve_below_two(p, d, seed, previous, cfg)
    else:
        candidates, failures = _polish_all(p, d, _seeds(p, d, seed, previous, cfg), cfg)
        if not candidates:
            raise NonConvergence(f"no seed converged for p={p.p} d={d}", diagnostics={'failures': failures})
        best = max(candidates, key=lambda s: s.t)
    logger.info(f"T(d={d}, p={p.p}) = {best.t:.12f} (1/T = {best.inv_t:.6f}) via {best.method}")
    return best


def direct_maximize_t(p, d, restarts=8, seed=0, cfg=None, starts=None):
    """Multi-start ascent of t_f over nonnegative (a_1..a_d) with a_0 = 1

    `starts` are tried before the geometric start and the random restarts.
    """
    p = as_pnorm(p)
    p.require_not_two()
    if d < 2:
        raise DomainError(f"extremal problem needs d >= 2, got {d}")
    solver_cfg = cfg or SolverConfig()
    rng = np.random.default_rng(seed)

    def objective(x):
        f = RealPoly((1.0,) + tuple(x))
        t = solve_linear_opa(f, p, solver_cfg).t_f
        return -t, -t_gradient(f, p, t)[1:]

    starts = [np.asarray(x0, dtype=float) for x0 in (starts or [])]
    starts += [p.p * 0.6 ** np.arange(d)]
    starts += [rng.uniform(0.1, 2.0 * p.p, size=d) for _ in range(max(restarts - 1, 0))]

    best_t, best_a = -np.inf, None
    for k, x0 in enumerate(starts):
        try:
            res = minimize(objective, x0, jac=True, method='L-BFGS-B', bounds=[(0.0, None)] * d,
                           options={'ftol': 1e-15, 'gtol': 1e-12, 'maxiter': 1000})
        except OpaLabError as e:
            logger.info(f"restart {k}: failed ({e})")
            continue
        t = -res.fun
        logger.info(f"restart {k}: t={t:.10f} ({res.message})")
        if t > best_t:
            best_t, best_a = t, RealPoly((1.0,) + tuple(res.x))
    if best_a is None:
        raise NonConvergence(f"every restart failed for p={p.p} d={d}")
    return best_t, best_a


def extend_solution(sol, m):
    """a_0 + a_0 t z + ... + a_0 t^(m-1) z^(m-1) + t^m z^m f(z)"""
    if m < 0:
        raise DomainError(f"extension length must be >= 0, got {m}")
    if m == 0:
        return sol.a
    a0, t = sol.a[0], sol.t
    head = [a0 * t ** i for i in range(m)]
    return RealPoly(tuple(head + [t ** m * c for c in sol.a.coeffs]))


def sweep_table(ps, ds, cfg=None):
    """Continuation chains in d for each p"""
    cfg = cfg or ExtremalConfig()
    solutions = []
    for p in ps:
        prev = None
        for d in sorted(ds):
            prev = solve_tdp(p, d, seed=prev if prev is not None and prev.d == d - 1 else None, cfg=cfg)
            solutions.append(prev)
    return solutions


def extremal_table(solutions):
    return pd.DataFrame([{
        'd': s.d,
        'p': s.p.p,
        'inv_t': s.inv_t,
        't': s.t,
        'coeffs': ' '.join(repr(c) for c in s.a.coeffs),
        'residual_max': s.residual_max,
    } for s in solutions], columns=['d', 'p', 'inv_t', 't', 'coeffs', 'residual_max'])
