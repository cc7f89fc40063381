import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from errors import DomainError, UnsupportedExponent

P_TWO_GUARD_BAND = 1e-6

# Orbit vocabulary
LEFT, MIDDLE, RIGHT = 'left', 'middle', 'right'
BRANCHES = (LEFT, MIDDLE, RIGHT)
VERTICAL, HORIZONTAL = 'vertical', 'horizontal'
TERMINATED = 'terminated-at-exit'
CONVERGED = 'converged-to-fixed-point'
EXHAUSTED = 'budget-exhausted'


@dataclass(frozen=True)
class PNorm:
    """Validated exponent 1 < p < infinity"""
    p: float

    def __post_init__(self):
        p = self.p
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            raise DomainError(f"exponent must be a real number, got {p!r}")
        if not math.isfinite(p) or p <= 1:
            raise DomainError(f"exponent must satisfy 1 < p < inf, got {p}")
        object.__setattr__(self, 'p', float(p))

    @property
    def p_conj(self):
        return self.p / (self.p - 1.0)

    def near_two(self, band=P_TWO_GUARD_BAND):
        return abs(self.p - 2.0) <= band

    def require_not_two(self):
        if self.near_two():
            raise UnsupportedExponent(
                f"p = {self.p} lies inside the p = 2 guard band",
                {'p': self.p, 'band': P_TWO_GUARD_BAND})

    def __float__(self):
        return self.p


def as_pnorm(value):
    """Accept a PNorm or a plain number"""
    return value if isinstance(value, PNorm) else PNorm(value)


@dataclass(frozen=True)
class RealPoly:
    """Coefficients (a_0, ..., a_d) of f(z) = sum a_k z^k"""
    coeffs: Tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise DomainError("polynomial needs at least one coefficient")
        if not all(math.isfinite(c) for c in coeffs):
            raise DomainError(f"non-finite coefficient in {coeffs}")
        object.__setattr__(self, 'coeffs', coeffs)

    @property
    def degree(self):
        # storage degree, trailing zeros included
        return len(self.coeffs) - 1

    def as_array(self):
        return np.asarray(self.coeffs, dtype=float)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.as_array())


@dataclass(frozen=True)
class LinearOpaResult:
    t_f: float
    zero: Optional[float]          # None when t_f = 0
    c: float                       # p_{1,f} = c (1 - t_f z)
    j1_norm: float                 # ||(1 - t_f z) f||_p
    residual: float                # |h'(t_f)|
    iterations: int = 0


@dataclass(frozen=True)
class OpaResult:
    q: RealPoly
    residual_norm: float           # ||1 - q f||_p
    orth_residuals: List[float]    # semi_inner(1 - q f, z^k f), k = 0..n
    zeros: List[float]
    j_n: Optional[RealPoly] = None
    normalization: Optional[float] = None
    iterations: int = 0


@dataclass(frozen=True)
class ExtraZeroWitness:
    p: float
    k: int
    f: RealPoly
    zero: float
    inside_disk: bool
    family: str


@dataclass(frozen=True)
class LagrangeSolution:
    p: PNorm
    d: int
    t: float
    a: RealPoly
    residuals: List[float]
    hprime_at_t: float
    method: str = 'newton'
    outside_hypothesis: bool = False   # d = 2 rows
    monotone_regime: bool = False      # 1 < t < 2 observed

    @property
    def inv_t(self):
        return 1.0 / self.t

    @property
    def residual_max(self):
        return max(abs(r) for r in self.residuals)

    @property
    def scale(self):
        return max(1.0, max(abs(c) for c in self.a.coeffs) ** (self.p.p - 1.0))

    def to_record(self):
        return {
            'p': self.p.p,
            'd': self.d,
            't': self.t,
            'inv_t': self.inv_t,
            'coeffs': list(self.a.coeffs),
            'residual_max': self.residual_max,
        }


@dataclass(frozen=True)
class PhiPsiParams:
    p: PNorm
    t: float

    def __post_init__(self):
        object.__setattr__(self, 'p', as_pnorm(self.p))
        if not math.isfinite(self.t) or self.t <= 0:
            raise DomainError(f"t must be positive, got {self.t}")
        self.p.require_not_two()

    @property
    def exit_value(self):
        """Phi(0) = p t^(p-1), the ordinate of the exit point"""
        return self.p.p * self.t ** (self.p.p - 1.0)


@dataclass(frozen=True)
class FixedPoints:
    xi1: float
    t: float
    xi2: float


@dataclass(frozen=True)
class OrbitPoint:
    x: float
    y: float
    kind: str      # segment arriving here: vertical (to Psi) or horizontal (to Phi)
    branch: str


@dataclass
class OrbitTrace:
    points: List[OrbitPoint] = field(default_factory=list)
    status: str = EXHAUSTED
    ratios: List[float] = field(default_factory=list)
    branches: List[str] = field(default_factory=list)

    @property
    def steps(self):
        """Number of horizontal moves"""
        return len(self.ratios) - 1 if self.ratios else 0

    def copy(self):
        return OrbitTrace(list(self.points), self.status, list(self.ratios), list(self.branches))


@dataclass(frozen=True)
class CobwebData:
    curves: pd.DataFrame      # x, phi, psi
    segments: pd.DataFrame    # x0, y0, x1, y1, kind


@dataclass(frozen=True)
class ExclusionResult:
    p: PNorm
    s_min: float
    r: float

    def to_record(self):
        return {'p': self.p.p, 's': self.s_min, 'r': self.r}


@dataclass(frozen=True)
class TauResult:
    p: PNorm
    tau: float
    xi1: float
    xi2: float
    bracket_width: float

    def to_record(self):
        return {'p': self.p.p, 'tau': self.tau, 'xi1': self.xi1, 'xi2': self.xi2}


@dataclass
class RunConfig:
    command: str
    p: Optional[List[float]] = None
    d: Optional[List[int]] = None
    degree: int = 1
    tol: float = 1e-11
    precision_bits: int = 53
    output_format: str = 'text'
    output_path: Optional[str] = None
    budget: int = 40
    restarts: int = 8
