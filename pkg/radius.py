"""
Radius constants: the exclusion radii around the origin and the critical
constant tau_p whose reciprocal bounds every OPA zero
"""

import logging
import math

import numpy as np
import pandas as pd
from mpmath import mp
from scipy.optimize import bisect, brentq

from config import ExtremalConfig
from dynamics import xi_roots
from errors import BracketFailure, Degenerate, OutOfRange
from extremal import sweep_table
from models import ExclusionResult, TauResult, as_pnorm
from precision import findroot_bracketed, is_extended

logger = logging.getLogger(__name__)

TAU_BRACKET = (1.0 + 1e-6, 2.0)
TAU_XTOL = 1e-12


def exclusion_radius(p):
    """Smallest s with (s-1)^p + s^p/(2^(p-1)-1) >= 1 (p >= 2), or (2/p)^(1/p) (p < 2)"""
    p = as_pnorm(p)
    if p.p < 2:
        s = (2.0 / p.p) ** (1.0 / p.p)
    else:
        denom = 2.0 ** (p.p - 1.0) - 1.0
        s = brentq(lambda s: (s - 1.0) ** p.p + s ** p.p / denom - 1.0, 1.0, 2.0, xtol=1e-15, rtol=1e-15)
    return ExclusionResult(p=p, s_min=s, r=1.0 / s)


def xi_pair(p, t):
    """The two positive roots of x^(p-1)(pt - x) = p - 1, on (0, t) and (t, pt)"""
    p = as_pnorm(p)
    p.require_not_two()
    if t < 1:
        raise OutOfRange(f"xi_pair needs t > 1, got {t}")
    if t == 1:
        raise Degenerate("the roots coalesce with x = t at t = 1", {'t': t})
    xi1, xi2 = xi_roots(p.p, t)
    if min(abs(xi1 - t), abs(xi2 - t)) <= 1e-12 * t:
        raise Degenerate(f"root coalescence at t = {t}", {'xi1': xi1, 'xi2': xi2})
    return xi1, xi2


def log_phi_at_root(p, t, xi):
    """log Phi(xi) using pt - xi = (p-1)/xi^(p-1), free of cancellation"""
    return math.log(p - 1) - (p - 1) * math.log(xi) + (p - 2) * math.log(abs(xi - t))


def tau_gap(p, t):
    """Sign-faithful G(t) = log Phi(xi1) - log Phi(xi2)"""
    xi1, xi2 = xi_roots(p, t)
    return log_phi_at_root(p, t, xi1) - log_phi_at_root(p, t, xi2)


def tau_gap_extended(p, t, bits):
    """G(t) recomputed with mpmath at `bits` precision"""
    with mp.workprec(bits):
        pm, tm = mp.mpf(p), mp.mpf(t)

        def g(x):
            return x ** (pm - 1) * (pm * tm - x) - (pm - 1)

        xi1 = findroot_bracketed(g, mp.mpf(0), tm, bits)
        xi2 = findroot_bracketed(g, tm, pm * tm, bits)

        def phi_at(x):
            return (pm * tm - x) * abs(x - tm) ** (pm - 2)

        return float(mp.log(phi_at(xi1)) - mp.log(phi_at(xi2)))


def solve_tau(p, precision_bits=None):
    """tau_p: the unique t in (1, 2) with Phi(xi1) = Phi(xi2)"""
    p = as_pnorm(p)
    p.require_not_two()
    if is_extended(precision_bits):
        def G(t):
            return tau_gap_extended(p.p, t, precision_bits)
    else:
        def G(t):
            return tau_gap(p.p, t)

    lo, hi = TAU_BRACKET
    g_lo, g_hi = G(lo), G(hi)
    if np.sign(g_lo) == np.sign(g_hi):
        samples = {t: G(t) for t in np.linspace(lo, hi, 11)}
        raise BracketFailure(f"G(t) has no sign change on ({lo}, {hi}) for p={p.p}", {'samples': samples})

    tau = bisect(G, lo, hi, xtol=TAU_XTOL)
    xi1, xi2 = xi_roots(p.p, tau)
    width = 2 * (TAU_XTOL + 4 * np.finfo(float).eps * tau)
    logger.info(f"tau(p={p.p}) = {tau:.12f}")
    return TauResult(p=p, tau=tau, xi1=xi1, xi2=xi2, bracket_width=width)


def tau_vs_tdp_gap(p, d_max, cfg=None):
    """tau_p - T_{d,p} for d = 2..d_max"""
    p = as_pnorm(p)
    p.require_not_two()
    tau = solve_tau(p).tau
    solutions = sweep_table([p], range(2, d_max + 1), cfg or ExtremalConfig())
    return [tau - s.t for s in solutions]


def trapping_threshold(p):
    """Diagnostic T with Psi(pT) = Phi(xi1(T))"""
    p = as_pnorm(p)
    p.require_not_two()
    q = p.p

    def D(t):
        log_psi_pt = math.log(q - 1) - math.log(q * t) + (q - 2) * math.log(1 - 1 / q)
        xi1, _ = xi_roots(q, t)
        return log_psi_pt - log_phi_at_root(q, t, xi1)

    lo, hi = TAU_BRACKET
    if np.sign(D(lo)) == np.sign(D(hi)):
        raise BracketFailure(f"no trapping threshold on ({lo}, {hi}) for p={q}")
    return brentq(D, lo, hi, xtol=1e-14)


def exclusion_table(ps):
    return pd.DataFrame([exclusion_radius(p).to_record() for p in ps], columns=['p', 's', 'r'])


def tau_table(ps, precision_bits=None):
    return pd.DataFrame([solve_tau(p, precision_bits).to_record() for p in ps],
                        columns=['p', 'tau', 'xi1', 'xi2'])
