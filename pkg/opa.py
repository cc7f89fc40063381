"""
Optimal polynomial approximants of 1/f in l^p_A
Linear case by 1-D convex root finding on h'(t), general degree by convex
minimisation certified through the semi-inner orthogonality system.
"""

import logging

import numpy as np
from scipy.linalg import solve
from scipy.optimize import brentq, minimize

from config import SolverConfig
from core_lp import divide_linear, lp_norm, multiply, semi_inner, signed_power_array
from errors import DomainError, NonConvergence, NotARoot, BracketFailure, ZeroAtOrigin
from models import LinearOpaResult, OpaResult, RealPoly, as_pnorm

logger = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-14
ZERO_SCAN = (-10.0, 10.0)


def _j1(a, t):
    """Coefficients of (1 - t z) f"""
    return np.convolve(np.array([1.0, -t]), a)


def _weights(x, p):
    # |x|^(p-2), floored so p < 2 stays finite
    return np.maximum(np.abs(x), WEIGHT_FLOOR) ** (p - 2.0)


def h_value(f, p, t):
    """h(t) = ||(1 - t z) f||_p^p"""
    p = as_pnorm(p)
    return float(np.sum(np.abs(_j1(f.as_array(), t)) ** p.p))


def h_prime(f, p, t):
    p = as_pnorm(p)
    a = f.as_array()
    r = _j1(a, t)
    return float(-p.p * np.dot(signed_power_array(r[1:], p.p - 1.0), a))


def h_double_prime(f, p, t):
    """p(p-1) sum |a_k - t a_{k-1}|^(p-2) a_{k-1}^2, last term included"""
    p = as_pnorm(p)
    a = f.as_array()
    r = _j1(a, t)
    return float(p.p * (p.p - 1.0) * np.dot(_weights(r[1:], p.p), a ** 2))


def coefficient_derivatives(f, p, t):
    """d(h'/p)/da_j for j = 0..d (a_{d+1} = 0, a_{-1} = 0)"""
    p = as_pnorm(p)
    a = f.as_array()
    r = _j1(a, t)
    a_next = np.append(a[1:], 0.0)
    a_prev = np.insert(a[:-1], 0, 0.0)
    return _weights(r[1:], p.p) * (p.p * t * a - a_next) \
        - (p.p - 1.0) * a_prev * _weights(r[:-1], p.p)


def t_gradient(f, p, t):
    """Implicit-function gradient dt_f/da_j = -(dh'/da_j)/(dh'/dt)"""
    p = as_pnorm(p)
    dt = h_double_prime(f, p, t) / p.p
    return -coefficient_derivatives(f, p, t) / dt


def normalization_constant(j_norm, p):
    """1 / (1 + (||J||^p - 1)^(p'-1)) for J(0) = 1"""
    p = as_pnorm(p)
    excess = max(j_norm ** p.p - 1.0, 0.0)
    return 1.0 / (1.0 + excess ** (p.p_conj - 1.0))


def solve_linear_opa(f, p, cfg=None):
    """Minimiser t_f of h and the degree-one OPA c(1 - t_f z)"""
    p = as_pnorm(p)
    cfg = cfg or SolverConfig()
    a = f.as_array()
    if a[0] == 0:
        raise ZeroAtOrigin("f(0) = 0: the optimal approximant is identically zero", {'f': list(f.coeffs)})

    if not np.any(a[1:]):
        t, iterations = 0.0, 0
    else:
        t, iterations = _minimise_h(f, p, cfg)

    residual = abs(h_prime(f, p, t))
    j1 = _j1(a, t)
    j1_norm = lp_norm(j1, p)
    c = normalization_constant(lp_norm(j1 / a[0], p), p) / a[0]
    return LinearOpaResult(
        t_f=t,
        zero=1.0 / t if t != 0 else None,
        c=c,
        j1_norm=j1_norm,
        residual=residual,
        iterations=iterations,
    )


def _minimise_h(f, p, cfg):
    a = f.as_array()
    if p.p == 2:
        # h is quadratic: t = <z f, f> / ||f||^2
        return float(np.dot(a[1:], a[:-1]) / np.dot(a, a)), 0

    lo, hi = cfg.bracket
    hp_lo, hp_hi = h_prime(f, p, lo), h_prime(f, p, hi)
    if not (hp_lo < 0 < hp_hi):
        raise BracketFailure(
            f"h' has no sign change on [{lo}, {hi}]",
            {'bracket': (lo, hi), 'h_prime': (hp_lo, hp_hi), 'f': list(f.coeffs)})

    t, info = brentq(lambda s: h_prime(f, p, s), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                     maxiter=cfg.max_iter, full_output=True, disp=False)
    if not info.converged:
        raise NonConvergence(f"linear OPA bracket did not close in {cfg.max_iter} steps",
                             best=t, diagnostics={'flag': info.flag})
    t, polish_steps = _newton_refine(f, p, t, cfg)
    return t, info.iterations + polish_steps


def _newton_refine(f, p, t, cfg, max_steps=8):
    """Newton on h' from the bracketed root; a step must halve |h'| or it is dropped"""
    threshold = cfg.tol * p.p * max(1.0, lp_norm(f, p) ** p.p)
    hp = h_prime(f, p, t)
    for step in range(max_steps):
        if abs(hp) <= threshold:
            return t, step
        delta = 1e-7 * max(1.0, abs(t))
        h2 = (h_prime(f, p, t + delta) - h_prime(f, p, t - delta)) / (2 * delta)
        if not h2 > 0:
            break
        candidate = t - hp / h2
        hc = h_prime(f, p, candidate)
        if abs(hc) > 0.5 * abs(hp):
            break
        t, hp = candidate, hc
    else:
        return t, max_steps
    logger.debug(f"linear OPA stops at float resolution, |h'| = {abs(hp):.3e}")
    return t, step


# General degree

def convolution_matrix(f, n):
    """Matrix C with C @ q = coefficients of q f for q of degree n"""
    a = f.as_array()
    C = np.zeros((len(a) + n, n + 1))
    for j in range(n + 1):
        C[j:j + len(a), j] = a
    return C


def _orthogonality(C, q, p):
    e0 = np.zeros(C.shape[0])
    e0[0] = 1.0
    r = e0 - C @ q
    return r, C.T @ signed_power_array(r, p - 1.0)


def _orth_converged(C, r, G, p, tol):
    """max |G_j| against the size of the terms summed into G_j"""
    scale = np.max(np.abs(C).T @ np.abs(r) ** (p.p - 1.0))
    return np.max(np.abs(G)) <= tol * scale


def solve_opa(f, p, n, cfg=None):
    """OPA p_{n,f}: minimiser of ||1 - q f||_p over deg q <= n"""
    p = as_pnorm(p)
    cfg = cfg or SolverConfig()
    a = f.as_array()
    if n < 0:
        raise DomainError(f"degree must be >= 0, got {n}")
    if a[0] == 0:
        raise ZeroAtOrigin("f(0) = 0: the optimal approximant is identically zero", {'f': list(f.coeffs)})

    C = convolution_matrix(f, n)
    e0 = np.zeros(C.shape[0])
    e0[0] = 1.0
    iterations = 0

    if not np.any(a[1:]):
        q = np.zeros(n + 1)
        q[0] = 1.0 / a[0]
    else:
        q = np.linalg.lstsq(C, e0, rcond=None)[0]

        def objective(x):
            r = e0 - C @ x
            return float(np.sum(np.abs(r) ** p.p)), -p.p * (C.T @ signed_power_array(r, p.p - 1.0))

        result = minimize(objective, q, jac=True, method='BFGS',
                          options={'gtol': 1e-12, 'maxiter': cfg.max_iter})
        q = result.x
        iterations = int(result.nit)
        logger.debug(f"BFGS stage n={n} p={p.p}: {result.message}")
        q, polish_steps = _newton_polish(C, q, p, cfg)
        iterations += polish_steps

    r, G = _orthogonality(C, q, p.p)
    if not _orth_converged(C, r, G, p, cfg.orth_tol):
        raise NonConvergence(
            f"orthogonality residual {np.max(np.abs(G)):.3e} above tolerance",
            best=RealPoly(tuple(q)), diagnostics={'orth_residuals': G.tolist()})

    q_poly = RealPoly(tuple(q))
    j_n, normalization = None, None
    if q[0] != 0:
        j_n = RealPoly(tuple(C @ q / (q[0] * a[0])))
        normalization = normalization_constant(lp_norm(j_n, p), p)

    return OpaResult(
        q=q_poly,
        residual_norm=lp_norm(r, p),
        orth_residuals=G.tolist(),
        zeros=opa_zeros(q_poly),
        j_n=j_n,
        normalization=normalization,
        iterations=iterations,
    )


def _newton_polish(C, q, p, cfg, max_steps=100):
    """Damped Newton on semi_inner(1 - q f, z^j f) = 0, j = 0..n

    Steps are damped until ||G|| drops by a sufficient fraction.
    """
    for step in range(max_steps):
        r, G = _orthogonality(C, q, p.p)
        if _orth_converged(C, r, G, p, cfg.orth_tol):
            return q, step
        H = (p.p - 1.0) * C.T @ (_weights(r, p.p)[:, None] * C)
        try:
            direction = solve(H, G, assume_a='pos')
        except np.linalg.LinAlgError:
            direction = np.linalg.lstsq(H, G, rcond=None)[0]

        g_norm = np.linalg.norm(G)
        lam = 1.0
        while lam > 1e-10:
            candidate = q + lam * direction
            if np.linalg.norm(_orthogonality(C, candidate, p.p)[1]) < (1.0 - 1e-4 * lam) * g_norm:
                break
            lam *= 0.5
        else:
            logger.debug(f"Newton polish stalled at |G| = {g_norm:.3e}")
            return q, step
        q = candidate
    return q, max_steps


def find_real_zeros(q, lo=ZERO_SCAN[0], hi=ZERO_SCAN[1], samples=2001):
    """Real zeros of q from sign changes on a grid, refined with brentq"""
    xs = np.linspace(lo, hi, samples)
    values = q(xs)
    zeros = []
    for k in range(samples - 1):
        if values[k] == 0:
            zeros.append(float(xs[k]))
        elif values[k] * values[k + 1] < 0:
            zeros.append(float(brentq(q, xs[k], xs[k + 1], xtol=1e-14, rtol=1e-15)))
    if values[-1] == 0:
        zeros.append(float(xs[-1]))
    return zeros


def opa_zeros(q):
    coeffs = q.coeffs
    if len(coeffs) == 1:
        return []
    if len(coeffs) == 2:
        return [-coeffs[0] / coeffs[1]] if coeffs[1] != 0 else []
    return find_real_zeros(q)


def remove_root_opa(f, p, n, z0, cfg=None):
    """OPA of degree n-1 for g = (z - z0) f, where z0 is a zero of p_{n,f}

    The result equals p_{n,f} / (z - z0); a mismatch raises NonConvergence.
    """
    p = as_pnorm(p)
    if n < 1:
        raise DomainError(f"deflation needs n >= 1, got {n}")
    q = solve_opa(f, p, n, cfg).q
    quotient, remainder = divide_linear(q, z0)
    magnitude = sum(abs(c) * abs(z0) ** k for k, c in enumerate(q.coeffs))
    if abs(remainder) > 1e-7 * max(1.0, magnitude):
        raise NotARoot(f"{z0} is not a zero of the degree-{n} OPA", {'q(z0)': remainder})

    g = multiply(RealPoly((-z0, 1.0)), f)
    result = solve_opa(g, p, n - 1, cfg)
    gap = float(np.max(np.abs(result.q.as_array() - quotient.as_array())))
    if gap > 1e-7 * max(1.0, float(np.max(np.abs(quotient.as_array())))):
        raise NonConvergence(f"deflated OPA differs from p_n / (z - z0) by {gap:.3e}",
                             best=result.q, diagnostics={'quotient': list(quotient.coeffs)})
    return result


def duality_check(f, p, n, cfg=None):
    """(I_N, M_N): minimal norm of J in f P_N with J(0) = 1, and the dual maximum of |phi(0)|"""
    p = as_pnorm(p)
    if abs(f[0] - 1.0) > 1e-12:
        raise DomainError(f"duality_check needs f(0) = 1, got {f[0]}")
    result = solve_opa(f, p, n, cfg)
    i_n = lp_norm(result.j_n, p)

    C = convolution_matrix(f, n)
    e0 = np.zeros(n + 1)
    e0[0] = 1.0
    if not np.any(f.as_array()[1:]):
        m_n = 1.0
    else:
        constraint = {
            'type': 'ineq',
            'fun': lambda x: 1.0 - float(np.sum(np.abs(C @ x) ** p.p)),
            'jac': lambda x: -p.p * (C.T @ signed_power_array(C @ x, p.p - 1.0)),
        }
        start = e0 / lp_norm(f, p)
        res = minimize(lambda x: -x[0], start, jac=lambda x: -e0, method='SLSQP',
                       constraints=[constraint], options={'ftol': 1e-15, 'maxiter': 1000})
        m_n = abs(res.x[0]) / lp_norm(C @ res.x, p)

    logger.info(f"duality n={n} p={p.p}: I*M = {i_n * m_n:.12f}")
    return i_n, m_n


def pole_kernel(z0, terms=80):
    """Truncated series of 1 / (z - z0), |z0| > 1"""
    if abs(z0) <= 1:
        raise DomainError(f"pole_kernel needs |z0| > 1, got {z0}")
    return RealPoly(tuple(-1.0 / z0 ** (k + 1) for k in range(terms)))


def semi_inner_residuals(f, q, p):
    """semi_inner(1 - q f, z^k f) for k = 0..deg q"""
    p = as_pnorm(p)
    r = -multiply(q, f).as_array()
    r[0] += 1.0
    return [semi_inner(r, np.concatenate([np.zeros(k), f.as_array()]), p) for k in range(len(q))]
