"""
Explicit polynomial families whose linear OPA has a zero inside the unit disk
"""

import logging

from core_lp import signed_power
from errors import CapExceeded, DomainError
from models import ExtraZeroWitness, RealPoly, as_pnorm
from opa import solve_linear_opa

logger = logging.getLogger(__name__)

DEFAULT_CAP = 5000
SMALL_P, LARGE_P = 'small_p', 'large_p'


def _check_k(k):
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise DomainError(f"family parameter must be an integer >= 1, got {k!r}")


def family_small_p(k):
    """f_k(z) = sum_{j=0}^k (j+1) z^j"""
    _check_k(k)
    return RealPoly(tuple(float(j + 1) for j in range(k + 1)))


def family_large_p(k):
    """1 + sum_{j=1}^{2k} (2 - (j-1)/k) z^j"""
    _check_k(k)
    return RealPoly((1.0,) + tuple(2.0 - (j - 1) / k for j in range(1, 2 * k + 1)))


def g_of_t(k, p, t):
    """-h'(t)/p for the small-p family"""
    _check_k(k)
    p = as_pnorm(p)
    s = p.p - 1.0
    total = sum(signed_power((j + 1) - t * j, s) * j for j in range(1, k + 1))
    return total + signed_power(-t * (k + 1), s) * (k + 1)


def find_min_k_extra_zero(p, cap=DEFAULT_CAP, cfg=None):
    """Smallest k whose family member has a linear-OPA zero inside the disk"""
    p = as_pnorm(p)
    p.require_not_two()
    family, name = (family_small_p, SMALL_P) if p.p < 2 else (family_large_p, LARGE_P)

    for k in range(1, cap + 1):
        f = family(k)
        result = solve_linear_opa(f, p, cfg)
        if result.zero is not None and abs(result.zero) < 1:
            logger.info(f"p={p.p}: extra zero at k={k}, zero={result.zero:.10f}")
            return ExtraZeroWitness(p=p.p, k=k, f=f, zero=result.zero, inside_disk=True, family=name)

    raise CapExceeded(f"no extra zero found for p={p.p} with k <= {cap}", {'p': p.p, 'cap': cap})
