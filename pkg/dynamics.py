"""
The implicit map Phi(R_{k+1}) = Psi(R_k) on coefficient ratios
Fixed points, branch inversion, orbit iteration and cobweb export
"""

import logging
import math

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from config import OrbitConfig
from errors import BranchMiss, CapExceeded, DomainError, OutOfRange, PoleAtZero, Singularity
from models import (BRANCHES, CONVERGED, EXHAUSTED, HORIZONTAL, LEFT, MIDDLE, RIGHT, TERMINATED,
                    VERTICAL, CobwebData, FixedPoints, OrbitPoint, OrbitTrace)

logger = logging.getLogger(__name__)

XTOL = 1e-15
RTOL = 1e-15
MAX_EXPANSIONS = 400
STATUS_RANK = {TERMINATED: 0, CONVERGED: 1, EXHAUSTED: 2}


def phi(params, x):
    """(pt - x)|x - t|^(p-2)"""
    p, t = params.p.p, params.t
    if p < 2 and x == t:
        raise Singularity(f"Phi has a pole at x = t = {t} for p = {p}")
    return (p * t - x) * abs(x - t) ** (p - 2)


def psi(params, x):
    """(p-1)/x |1 - t/x|^(p-2)"""
    p, t = params.p.p, params.t
    if x == 0:
        raise PoleAtZero("Psi is undefined at x = 0")
    if p < 2 and x == t:
        raise Singularity(f"Psi has a pole at x = t = {t} for p = {p}")
    return (p - 1) / x * abs(1 - t / x) ** (p - 2)


def critical_points(params):
    """(c1, c2): the turning points t and (p-1)t in increasing order"""
    t = params.t
    return tuple(sorted((t, (params.p.p - 1) * t)))


def phi_local_max(params):
    p, t = params.p.p, params.t
    if p < 2:
        raise OutOfRange("Phi has no interior local maximum for p < 2")
    return (p - 1) * t, (p - 2) ** (p - 2) * t ** (p - 1)


def branch_of(params, x):
    c1, c2 = critical_points(params)
    if x <= c1:
        return LEFT
    if x <= c2:
        return MIDDLE
    return RIGHT


def branch_range(params, branch):
    """Closed range of Phi on the monotone piece"""
    c1, c2 = critical_points(params)
    if params.p.p > 2:
        top = phi(params, c2)
        return {LEFT: (0.0, math.inf), MIDDLE: (0.0, top), RIGHT: (-math.inf, top)}[branch]
    bottom = phi(params, c1)
    return {LEFT: (bottom, math.inf), MIDDLE: (bottom, math.inf), RIGHT: (-math.inf, math.inf)}[branch]


def _expand(g, anchor, direction, want_sign):
    """Walk away from anchor until g changes to want_sign"""
    step = max(1.0, abs(anchor))
    for _ in range(MAX_EXPANSIONS):
        x = anchor + direction * step
        if np.sign(g(x)) in (want_sign, 0):
            return x
        step *= 2
    raise BranchMiss(f"could not bracket Phi^-1 beyond {anchor}")


def _approach_pole(g, t, direction):
    """Point t + direction*eps with g >= 0, approaching the pole at t"""
    eps = 1e-3 * t
    for _ in range(MAX_EXPANSIONS * 3):
        x = t + direction * eps
        if x != t and g(x) >= 0:
            return x
        eps *= 0.5
    raise BranchMiss(f"could not bracket Phi^-1 next to the pole at {t}")


def invert_phi(params, y, branch):
    """x on the given monotone piece with Phi(x) = y"""
    if branch not in BRANCHES:
        raise DomainError(f"unknown branch {branch!r}")
    lo_y, hi_y = branch_range(params, branch)
    if not (lo_y <= y <= hi_y):
        raise BranchMiss(f"y = {y} outside the {branch} range [{lo_y}, {hi_y}]",
                         diagnostics={'y': y, 'branch': branch, 'range': (lo_y, hi_y)})

    t = params.t
    c1, c2 = critical_points(params)

    def g(x):
        return phi(params, x) - y

    if branch == LEFT:
        a, b = _expand(g, c1, -1, 1), c1
    elif branch == MIDDLE:
        a = c1
        b = c2 if params.p.p > 2 else _approach_pole(g, t, -1)
    else:
        a = c2 if params.p.p > 2 else _approach_pole(g, t, +1)
        b = _expand(g, a, +1, -1)
    return brentq(g, a, b, xtol=XTOL, rtol=RTOL)


# Fixed points

def fixed_point_residual(p, t, x):
    """x^p - p t x^(p-1) + (p-1)"""
    return x ** (p - 1) * (x - p * t) + (p - 1)


def xi_roots(p, t):
    """Roots of x^(p-1)(pt - x) = p - 1 on (0, t) and (t, pt), t >= 1

    At t = 1 the root x = 1 is always returned first, so xi1 = t for every p.
    """
    if t < 1:
        raise OutOfRange(f"fixed points are analysed for t >= 1, got t = {t}")

    def g(x):
        return fixed_point_residual(p, t, x)

    if t == 1:
        # the other root sits on the side where g dips below 0
        if p > 2:
            return 1.0, brentq(g, 1.0 + 1e-9, p, xtol=XTOL, rtol=RTOL)
        return 1.0, brentq(g, 1e-12, 1.0 - 1e-9, xtol=XTOL, rtol=RTOL)
    xi1 = brentq(g, 0.0, t, xtol=XTOL, rtol=RTOL)
    xi2 = brentq(g, t, p * t, xtol=XTOL, rtol=RTOL)
    return xi1, xi2


def fixed_points(params):
    xi1, xi2 = xi_roots(params.p.p, params.t)
    return FixedPoints(xi1=xi1, t=params.t, xi2=xi2)


# Orbits

def fixed_policy(branch):
    return lambda step, x: branch


def pattern_policy(branches):
    """Follow the listed branches, repeating the last one"""
    seq = list(branches)
    return lambda step, x: seq[min(step, len(seq) - 1)]


def _start(params, x1):
    branch = branch_of(params, x1)
    return OrbitTrace(points=[OrbitPoint(x1, phi(params, x1), HORIZONTAL, branch)],
                      ratios=[x1], branches=[branch])


def _advance(params, trace, x, branch, cfg):
    """One vertical move to Psi and one horizontal move back to Phi"""
    y = psi(params, x)
    trace.points.append(OrbitPoint(x, y, VERTICAL, branch_of(params, x)))
    x_next = invert_phi(params, y, branch)
    trace.points.append(OrbitPoint(x_next, y, HORIZONTAL, branch))
    trace.ratios.append(x_next)
    trace.branches.append(branch)

    exit_value = params.exit_value
    if abs(x_next) <= cfg.exit_tol and abs(y - exit_value) <= cfg.exit_tol * max(1.0, exit_value):
        return TERMINATED
    if x_next <= 0 or x_next > params.p.p * params.t * (1 + 1e-12):
        raise BranchMiss(f"orbit left (0, pt] at x = {x_next}")
    return None


def iterate_orbit(params, x1, policy=None, budget=None, cfg=None):
    """Orbit from x1; without a policy the best trace of the branch search is returned"""
    cfg = cfg or OrbitConfig()
    budget = cfg.budget if budget is None else budget
    if x1 <= 0:
        raise DomainError(f"orbit start must be positive, got {x1}")
    if policy is None:
        return best_trace(search_orbits(params, x1, budget, cfg))

    trace = _start(params, x1)
    x, stable = x1, 0
    for step in range(budget):
        try:
            status = _advance(params, trace, x, policy(step, x), cfg)
        except BranchMiss as e:
            e.partial = trace
            raise
        if status:
            trace.status = status
            return trace
        x_next = trace.ratios[-1]
        stable = stable + 1 if abs(x_next - x) < cfg.converge_tol else 0
        x = x_next
        if stable >= cfg.converge_steps:
            trace.status = CONVERGED
            return trace
    trace.status = EXHAUSTED
    return trace


def search_orbits(params, x1, budget=None, cfg=None):
    """Depth-first search over branch choices; stops at the first terminating orbit"""
    cfg = cfg or OrbitConfig()
    budget = cfg.budget if budget is None else budget
    leaves = []
    nodes = 0

    def explore(trace, x, stable, depth):
        nonlocal nodes
        if depth == budget:
            leaf = trace.copy()
            leaf.status = EXHAUSTED
            leaves.append(leaf)
            return False
        for branch in (LEFT, RIGHT, MIDDLE):
            if nodes >= cfg.max_nodes:
                return False
            nodes += 1
            child = trace.copy()
            try:
                status = _advance(params, child, x, branch, cfg)
            except BranchMiss:
                continue
            if status == TERMINATED:
                child.status = status
                leaves.append(child)
                return True
            x_next = child.ratios[-1]
            s = stable + 1 if abs(x_next - x) < cfg.converge_tol else 0
            if s >= cfg.converge_steps:
                child.status = CONVERGED
                leaves.append(child)
                continue
            if explore(child, x_next, s, depth + 1):
                return True
        return False

    explore(_start(params, x1), x1, 0, 0)
    if nodes >= cfg.max_nodes:
        logger.warning(f"orbit search hit the node cap ({cfg.max_nodes}) at t={params.t}")
    if not leaves:
        if nodes >= cfg.max_nodes:
            raise CapExceeded(f"no orbit completed within {cfg.max_nodes} nodes", {'t': params.t})
        raise BranchMiss("every branch sequence was pruned", partial=_start(params, x1))
    return leaves


def best_trace(traces):
    return min(traces, key=lambda tr: (STATUS_RANK[tr.status], tr.steps))


def ratio_residuals(params, a):
    """Phi(R_{k+1}) - Psi(R_k) for R_k = a_k / a_{k-1}, k = 1..d, R_{d+1} = 0"""
    coeffs = list(a.coeffs)
    ratios = [coeffs[k] / coeffs[k - 1] for k in range(1, len(coeffs))] + [0.0]
    return [phi(params, ratios[k + 1]) - psi(params, ratios[k]) for k in range(len(ratios) - 1)]


def export_cobweb(trace, params, samples=400):
    """Curves (x, phi, psi) and the segment table of the cobweb path"""
    pt = params.p.p * params.t
    ratios = trace.ratios if trace is not None else []
    x_hi = 1.05 * max([pt] + [abs(r) for r in ratios])
    xs = np.linspace(x_hi / samples, x_hi, samples)

    def safe(fn, x):
        try:
            return float(fn(params, x))
        except (Singularity, PoleAtZero):
            return float('nan')

    curves = pd.DataFrame({
        'x': xs,
        'phi': [safe(phi, x) for x in xs],
        'psi': [safe(psi, x) for x in xs],
    })

    rows = []
    points = trace.points if trace is not None else []
    for start, end in zip(points, points[1:]):
        rows.append({'x0': start.x, 'y0': start.y, 'x1': end.x, 'y1': end.y, 'kind': end.kind})
    segments = pd.DataFrame(rows, columns=['x0', 'y0', 'x1', 'y1', 'kind'])
    return CobwebData(curves=curves, segments=segments)
