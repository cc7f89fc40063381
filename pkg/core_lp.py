"""
Scalar and sequence operations on l^p_A polynomials
Signed powers, norms, the semi-inner product and Birkhoff-James orthogonality
"""

import logging
import math

import numpy as np
from numpy.polynomial import polynomial as P

from errors import DomainError
from models import RealPoly, as_pnorm

logger = logging.getLogger(__name__)


def signed_power(x, s):
    """sign(x)|x|^s with the convention that the result is 0 at x = 0"""
    if not (math.isfinite(x) and math.isfinite(s)):
        raise DomainError(f"signed_power needs finite input, got x={x}, s={s}")
    if s < 0:
        raise DomainError(f"signed_power exponent must be >= 0, got {s}")
    if x == 0:
        return 0.0
    return math.copysign(abs(x) ** s, x)


def signed_power_array(x, s):
    """Vectorised signed_power; zero entries map to zero"""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** s


def _padded(f, g):
    a, b = np.asarray(f, dtype=float), np.asarray(g, dtype=float)
    n = max(len(a), len(b))
    return np.pad(a, (0, n - len(a))), np.pad(b, (0, n - len(b)))


def _coeffs(f):
    return f.as_array() if isinstance(f, RealPoly) else np.asarray(f, dtype=float)


def lp_norm(f, p):
    p = as_pnorm(p)
    a = np.abs(_coeffs(f))
    if not a.any():
        return 0.0
    # factor out the largest entry so large p does not overflow
    m = a.max()
    return float(m * np.sum((a / m) ** p.p) ** (1.0 / p.p))


def semi_inner(f, g, p):
    """sum a_k^<p-1> b_k; the shorter polynomial is padded with zeros"""
    p = as_pnorm(p)
    a, b = _padded(_coeffs(f), _coeffs(g))
    return float(np.dot(signed_power_array(a, p.p - 1.0), b))


def is_bj_orthogonal(f, g, p, tol=1e-9):
    """f is Birkhoff-James orthogonal to g, with a relative tolerance"""
    if tol <= 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    p = as_pnorm(p)
    scale = max(1.0, lp_norm(f, p) ** (p.p - 1.0) * lp_norm(g, p))
    return abs(semi_inner(f, g, p)) <= tol * scale


# Polynomial arithmetic

def shift(f, n=1):
    """z^n f"""
    if n < 0:
        raise DomainError(f"shift needs n >= 0, got {n}")
    return RealPoly((0.0,) * n + tuple(f.coeffs))


def multiply(f, g):
    return RealPoly(tuple(np.convolve(_coeffs(f), _coeffs(g))))


def divide_linear(q, z0):
    """Quotient and remainder of q(z) / (z - z0)"""
    if len(q) == 1:
        return RealPoly((0.0,)), float(q[0])
    quo, rem = P.polydiv(q.as_array(), np.array([-z0, 1.0]))
    return RealPoly(tuple(quo)), float(rem[0]) if len(rem) else 0.0


def reflect(f):
    """f(-z)"""
    return RealPoly(tuple(c if k % 2 == 0 else -c for k, c in enumerate(f.coeffs)))


def absolute(f):
    return RealPoly(tuple(abs(c) for c in f.coeffs))


# p-inner functions

def is_p_inner(f, p, n_max=8, tol=1e-9):
    """f is orthogonal to z^n f for n = 1..n_max"""
    p = as_pnorm(p)
    return all(is_bj_orthogonal(f, shift(f, n), p, tol) for n in range(1, n_max + 1))


def inner_blaschke(w, p, terms=200):
    """Truncated series of (1 - z/w) / (1 - w^<p'-1> z), 0 < |w| < 1"""
    p = as_pnorm(p)
    if not (0 < abs(w) < 1):
        raise DomainError(f"inner_blaschke needs 0 < |w| < 1, got {w}")
    beta = signed_power(w, p.p_conj - 1.0)
    gamma = beta - 1.0 / w
    coeffs = [1.0] + [beta ** (k - 1) * gamma for k in range(1, terms)]
    logger.debug(f"inner_blaschke w={w} p={p.p}: tail {abs(coeffs[-1]):.3e}")
    return RealPoly(tuple(coeffs))
