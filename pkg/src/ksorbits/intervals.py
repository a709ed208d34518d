"""Interval arithmetic: scalars, matrices, verified products, weighted norms.

Two rounding strategies coexist:

* scalar / elementwise paths compute in round-to-nearest and widen the result
  by one step of nextafter in each direction (sound, since a nearest-rounded
  float is within half an ulp of the exact value);
* dense matrix products and convolutions run the underlying C/BLAS kernel
  twice under hardware directed rounding (see `rounding`), which is what makes
  the midpoint-radius product `rump_matmul` cost exactly four float products.

Transcendental enclosures (exp, log) widen libm by two ulps per side, enough
for any faithfully-rounded (<= 1 ulp) implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .rounding import UPWARD, DOWNWARD, directed

__all__ = [
    "Interval", "IntervalMatrix", "NormBound", "rump_matmul",
    "weighted_vector_norm", "weighted_operator_norm", "conv2d_enclosure",
    "DivisionByIntervalContainingZero", "DimensionMismatch",
    "IPI", "dense_product_count",
]


class DivisionByIntervalContainingZero(ZeroDivisionError):
    pass


class DimensionMismatch(ValueError):
    pass


# number of dense float matrix products issued by rump_matmul since import;
# tests use it to pin the exactly-4-products property.
dense_product_count = 0


def _dn(x: float) -> float:
    return math.nextafter(x, -math.inf)


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


class Interval:
    """Closed interval [lo, hi] of doubles; endpoints may be infinite, never NaN."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("NaN endpoint")
        if lo > hi:
            raise ValueError(f"inverted interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    # -- basics ---------------------------------------------------------
    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __eq__(self, other):
        return isinstance(other, Interval) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def width(self) -> float:
        return self.hi - self.lo

    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def mag(self) -> float:
        """sup |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> float:
        """inf |x| over the interval."""
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    @staticmethod
    def hull(*xs) -> "Interval":
        xs = [x if isinstance(x, Interval) else Interval(x) for x in xs]
        return Interval(min(x.lo for x in xs), max(x.hi for x in xs))

    # -- arithmetic ------------------------------------------------------
    @staticmethod
    def _coerce(x) -> "Interval":
        return x if isinstance(x, Interval) else Interval(x)

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __abs__(self):
        return Interval(self.mig(), self.mag())

    def __add__(self, other):
        o = self._coerce(other)
        return Interval(_dn(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return Interval(_dn(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        cands = []
        for x in (self.lo, self.hi):
            for y in (o.lo, o.hi):
                p = x * y
                cands.append(0.0 if math.isnan(p) else p)  # inf * 0 convention
        return Interval(_dn(min(cands)), _up(max(cands)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise DivisionByIntervalContainingZero(f"divisor {o!r} contains zero")
        cands = [x / y for x in (self.lo, self.hi) for y in (o.lo, o.hi)]
        return Interval(_dn(min(cands)), _up(max(cands)))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    # -- elementary functions on intervals -------------------------------
    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise ValueError("sqrt of interval with negative part")
        # math.sqrt is correctly rounded, one nextafter step suffices
        return Interval(max(0.0, _dn(math.sqrt(self.lo))), _up(math.sqrt(self.hi)))

    def exp(self) -> "Interval":
        lo = _dn(_dn(math.exp(self.lo)))
        hi = _up(_up(math.exp(self.hi)))
        return Interval(max(0.0, lo), hi)

    def log(self) -> "Interval":
        if self.lo <= 0:
            raise ValueError("log of interval touching zero")
        return Interval(_dn(_dn(math.log(self.lo))), _up(_up(math.log(self.hi))))

    def pow_frac34(self) -> "Interval":
        """x^(3/4) for x >= 0, composed from exact cube and two sqrt."""
        cube = self * self * self
        return cube.sqrt().sqrt()

    def pow_frac14(self) -> "Interval":
        return self.sqrt().sqrt()


IPI = Interval(_dn(math.pi), _up(math.pi))  # encloses pi


@dataclass(frozen=True)
class NormBound:
    """A certified upper bound of a norm, with a short provenance note."""
    value: float
    note: str = ""

    def __float__(self):
        return self.value


class IntervalMatrix:
    """Dense interval matrix/vector stored as (inf, sup) float arrays."""

    __slots__ = ("inf", "sup")

    def __init__(self, inf, sup):
        inf = np.asarray(inf, dtype=np.float64)
        sup = np.asarray(sup, dtype=np.float64)
        if inf.shape != sup.shape:
            raise DimensionMismatch(f"endpoint shapes {inf.shape} != {sup.shape}")
        if np.isnan(inf).any() or np.isnan(sup).any():
            raise ValueError("NaN endpoint")
        if (inf > sup).any():
            raise ValueError("inverted interval entry")
        self.inf = inf
        self.sup = sup

    @classmethod
    def point(cls, arr) -> "IntervalMatrix":
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr.copy(), arr.copy())

    @property
    def shape(self):
        return self.inf.shape

    def copy(self):
        return IntervalMatrix(self.inf.copy(), self.sup.copy())

    def mid(self) -> np.ndarray:
        return 0.5 * (self.inf + self.sup)

    def rad(self) -> np.ndarray:
        return 0.5 * (self.sup - self.inf)

    def mag(self) -> np.ndarray:
        """Entrywise sup |x| (exact ops, no widening needed)."""
        return np.maximum(np.abs(self.inf), np.abs(self.sup))

    def width(self) -> np.ndarray:
        return self.sup - self.inf

    def entry(self, *idx) -> Interval:
        return Interval(float(self.inf[idx]), float(self.sup[idx]))

    def contains(self, arr) -> bool:
        arr = np.asarray(arr)
        return bool((self.inf <= arr).all() and (arr <= self.sup).all())

    def reshape(self, *shape):
        return IntervalMatrix(self.inf.reshape(*shape), self.sup.reshape(*shape))

    def transpose(self, *axes):
        return IntervalMatrix(self.inf.transpose(*axes), self.sup.transpose(*axes))

    @property
    def T(self):
        return IntervalMatrix(self.inf.T, self.sup.T)

    def __getitem__(self, key):
        return IntervalMatrix(self.inf[key], self.sup[key])

    def __setitem__(self, key, value):
        if isinstance(value, IntervalMatrix):
            self.inf[key] = value.inf
            self.sup[key] = value.sup
        elif isinstance(value, Interval):
            self.inf[key] = value.lo
            self.sup[key] = value.hi
        else:
            self.inf[key] = value
            self.sup[key] = value

    def __neg__(self):
        return IntervalMatrix(-self.sup, -self.inf)

    def __add__(self, other):
        o = self._coerce(other, self.shape)
        return IntervalMatrix(np.nextafter(self.inf + o.inf, -np.inf),
                              np.nextafter(self.sup + o.sup, np.inf))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other, self.shape)
        return IntervalMatrix(np.nextafter(self.inf - o.sup, -np.inf),
                              np.nextafter(self.sup - o.inf, np.inf))

    def __rsub__(self, other):
        return self._coerce(other, self.shape) - self

    def scale(self, s) -> "IntervalMatrix":
        """Multiply every entry by the scalar interval s."""
        s = s if isinstance(s, Interval) else Interval(s)
        cands = [self.inf * s.lo, self.inf * s.hi, self.sup * s.lo, self.sup * s.hi]
        lo = np.nextafter(np.minimum.reduce(cands), -np.inf)
        hi = np.nextafter(np.maximum.reduce(cands), np.inf)
        return IntervalMatrix(lo, hi)

    def __mul__(self, other):
        """Elementwise multiplication with another interval array or scalar."""
        if isinstance(other, (Interval, int, float)):
            return self.scale(other)
        o = self._coerce(other, self.shape)
        cands = [self.inf * o.inf, self.inf * o.sup, self.sup * o.inf, self.sup * o.sup]
        cands = [np.where(np.isnan(c), 0.0, c) for c in cands]
        lo = np.nextafter(np.minimum.reduce(cands), -np.inf)
        hi = np.nextafter(np.maximum.reduce(cands), np.inf)
        return IntervalMatrix(lo, hi)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return rump_matmul(self, other)

    @staticmethod
    def _coerce(x, shape) -> "IntervalMatrix":
        if isinstance(x, IntervalMatrix):
            return x
        if isinstance(x, Interval):
            return IntervalMatrix(np.full(shape, x.lo), np.full(shape, x.hi))
        return IntervalMatrix.point(np.broadcast_to(np.asarray(x, dtype=np.float64), shape))


def rump_matmul(A: IntervalMatrix, B: IntervalMatrix) -> IntervalMatrix:
    """Verified interval matrix product via the midpoint-radius trick.

    Uses exactly four dense float matrix products, all executed by the
    platform BLAS under hardware directed rounding (pinned to one thread):

        up:   mA*mB,  |mA|*rB,  rA*(|mB|+rB)
        down: mA*mB

    Everything in the upward section rounds up, so mA >= mid(A),
    rA >= mA - inf(A) covers both half-widths, and rC bounds the radius of
    the true product set; C = [down(mA*mB) - rC, up(mA*mB) + rC] then
    contains {a @ b : a in A, b in B}.
    """
    global dense_product_count
    if not isinstance(A, IntervalMatrix):
        A = IntervalMatrix.point(A)
    if not isinstance(B, IntervalMatrix):
        B = IntervalMatrix.point(B)
    if A.shape[-1] != B.shape[0]:
        raise DimensionMismatch(f"matmul shapes {A.shape} x {B.shape}")

    with directed(UPWARD):
        mA = 0.5 * (A.inf + A.sup)
        rA = mA - A.inf
        mB = 0.5 * (B.inf + B.sup)
        rB = mB - B.inf
        rC = np.abs(mA) @ rB + rA @ (np.abs(mB) + rB)
        C2 = mA @ mB + rC
    with directed(DOWNWARD):
        C1 = mA @ mB - rC
    dense_product_count += 4
    return IntervalMatrix(C1, C2)


def conv2d_enclosure(a: np.ndarray, b: np.ndarray) -> IntervalMatrix:
    """Interval enclosure of the exact full 2-D convolution of two float arrays.

    Runs the direct (non-FFT) convolution kernel once per rounding direction;
    each run brackets the exact sum-of-products from one side.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    with directed(DOWNWARD):
        lo = convolve2d(a, b, mode="full")
    with directed(UPWARD):
        hi = convolve2d(a, b, mode="full")
    return IntervalMatrix(lo, hi)


# ---------------------------------------------------------------------------
# vectorized enclosures of elementary functions (2-ulp widening of libm)

def _vec_dn2(x):
    return np.nextafter(np.nextafter(x, -np.inf), -np.inf)


def _vec_up2(x):
    return np.nextafter(np.nextafter(x, np.inf), np.inf)


def vec_exp(lo: np.ndarray, hi: np.ndarray):
    return np.maximum(_vec_dn2(np.exp(lo)), 0.0), _vec_up2(np.exp(hi))


def vec_log1p(lo: np.ndarray, hi: np.ndarray):
    return _vec_dn2(np.log1p(lo)), _vec_up2(np.log1p(hi))


# ---------------------------------------------------------------------------
# weighted norms

def weighted_vector_norm(v: IntervalMatrix, weights: IntervalMatrix) -> NormBound:
    """Certified upper bound of sum_i sup|v_i| * M_i for interval entries v_i.

    `weights` holds interval enclosures of the positive weights M_i.
    """
    if not isinstance(v, IntervalMatrix):
        v = IntervalMatrix.point(v)
    mag = v.mag().ravel()
    wsup = weights.sup.ravel()
    if mag.shape != wsup.shape:
        raise DimensionMismatch(f"vector {mag.shape} vs weights {wsup.shape}")
    with directed(UPWARD):
        total = float(mag @ wsup)
    return NormBound(total, "weighted-l1 upper bound")


def weighted_operator_norm(T: IntervalMatrix, row_weights: IntervalMatrix,
                           col_weights: IntervalMatrix) -> NormBound:
    """Certified upper bound of the weighted-l1 operator norm
    max_j sum_i sup|T_ij| * M_i / M_j.

    Row/column weight vectors are interval enclosures; the bound uses upper
    row weights and lower column weights, all accumulated under upward
    rounding.
    """
    if not isinstance(T, IntervalMatrix):
        T = IntervalMatrix.point(T)
    mag = T.mag()
    wr = row_weights.sup.ravel()
    wc = col_weights.inf.ravel()
    if mag.shape != (wr.size, wc.size):
        raise DimensionMismatch(f"matrix {mag.shape} vs weights {wr.size}x{wc.size}")
    if (wc <= 0).any():
        raise ValueError("column weights must have positive lower bounds")
    with directed(UPWARD):
        colsums = wr @ mag
        ratios = colsums / wc
        value = float(np.max(ratios)) if ratios.size else 0.0
    return NormBound(value, "weighted-l1 operator norm upper bound")
