"""
Extended-precision helpers built on mpmath
"""

from contextlib import contextmanager

from mpmath import mp

DOUBLE_BITS = 53


def is_extended(bits):
    return bits is not None and bits > DOUBLE_BITS


@contextmanager
def working_precision(bits):
    """Run the block with mp.prec = bits; a no-op at double precision"""
    if not is_extended(bits):
        yield None
        return
    with mp.workprec(bits):
        yield mp


def to_mp(values):
    return [mp.mpf(v) for v in values]


def to_float(values):
    return [float(v) for v in values]


def lu_solve(matrix, rhs):
    """Solve matrix x = rhs at the current mp precision"""
    x = mp.lu_solve(mp.matrix(matrix), mp.matrix(rhs))
    return [x[i] for i in range(len(rhs))]


def findroot_bracketed(func, lo, hi, bits):
    """Bracketed root at `bits` precision (Anderson-Bjorck on [lo, hi])"""
    with mp.workprec(bits):
        return mp.findroot(func, (mp.mpf(lo), mp.mpf(hi)), solver='anderson')
