"""Real trigonometric polynomials in (theta, x) and their operator algebra.

The basic object is

    u(theta, x) = sum_{k1} sx(k1 x) * sum_{k2 >= 0} [ a_{k1,k2} cos(k2 theta)
                                                    + b_{k1,k2} sin(k2 theta) ]

with sx = sin (odd parity in x, k1 >= 1) or sx = cos (even parity, k1 >= 0).
Odd polynomials are the natural phase space of the flow; products of two odd
ones are even, and the x-derivative maps back.

Coefficients are stored as two float arrays `a`, `b` of shape (n1, d2+1);
column 0 of `b` multiplies sin(0*theta) and is identically zero.

The weighted l1 norm uses M(k1,k2) = (1+k1)^s1 (1+k2)^s2 exp(r(k1+k2)); with
the convention |a|+|b| per mode it coincides with the norm in the complex
exponential basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve

__all__ = [
    "WeightParams", "TrigPoly2D", "Grid2D", "ModeMap", "SingularBlock",
    "product", "dx", "dtheta", "apply_L", "apply_Sc_inv", "shift_theta",
    "eval_grid", "from_grid", "norm_M", "weight_matrix", "weight_vector",
    "mode_map", "poly_to_vec", "vec_to_poly", "to_complex", "from_complex",
    "sym_p", "structure_tensor_x", "structure_tensors_theta",
    "mult_dx_matrix", "mult_dx_matrix_1d",
]

# scipy.signal.convolve picks direct vs FFT by a cost model when "auto";
# override to force one path (tests exercise both).
PRODUCT_METHOD = "auto"


class SingularBlock(ZeroDivisionError):
    """A 2x2 frequency block of S_c is (numerically) singular."""


@dataclass(frozen=True)
class WeightParams:
    """Parameters of the weight M(k1,k2) = (1+k1)^s1 (1+k2)^s2 e^{r(k1+k2)}."""
    r: float = 0.0
    s1: float = 0.0
    s2: float = 0.0

    def __post_init__(self):
        if self.r < 0 or self.s1 < 0 or self.s2 < 0:
            raise ValueError("weight parameters must be nonnegative")

    def weight(self, k1, k2):
        k1 = np.asarray(k1, dtype=float)
        k2 = np.asarray(k2, dtype=float)
        return ((1.0 + k1) ** self.s1 * (1.0 + k2) ** self.s2
                * np.exp(self.r * (k1 + k2)))


class TrigPoly2D:
    """A real trig polynomial; see module docstring for the basis convention."""

    __slots__ = ("a", "b", "parity")

    def __init__(self, a, b, parity="odd"):
        if parity not in ("odd", "even"):
            raise ValueError(f"parity must be 'odd' or 'even', got {parity!r}")
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        b = np.atleast_2d(np.asarray(b, dtype=np.float64))
        if a.shape != b.shape:
            raise ValueError(f"coefficient shapes differ: {a.shape} vs {b.shape}")
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise ValueError("coefficients must be finite")
        if a.shape[1] >= 1 and np.any(b[:, 0] != 0.0):
            raise ValueError("sin(0*theta) column must be zero")
        self.a = a
        self.b = b
        self.parity = parity

    # -- structure --------------------------------------------------------
    @classmethod
    def zeros(cls, d1, d2, parity="odd"):
        n1 = d1 if parity == "odd" else d1 + 1
        z = np.zeros((n1, d2 + 1))
        return cls(z, z.copy(), parity)

    @property
    def d1(self) -> int:
        return self.a.shape[0] if self.parity == "odd" else self.a.shape[0] - 1

    @property
    def d2(self) -> int:
        return self.a.shape[1] - 1

    def k1_values(self) -> np.ndarray:
        lo = 1 if self.parity == "odd" else 0
        return np.arange(lo, lo + self.a.shape[0])

    @property
    def coefficient_count(self) -> int:
        n1 = self.a.shape[0]
        return n1 * (2 * self.d2 + 1)

    def copy(self):
        return TrigPoly2D(self.a.copy(), self.b.copy(), self.parity)

    def pad(self, d1, d2):
        """Zero-pad to degrees (d1, d2) >= current."""
        if d1 < self.d1 or d2 < self.d2:
            raise ValueError("pad target degrees below current degrees")
        n1 = d1 if self.parity == "odd" else d1 + 1
        a = np.zeros((n1, d2 + 1))
        b = np.zeros((n1, d2 + 1))
        a[: self.a.shape[0], : self.a.shape[1]] = self.a
        b[: self.b.shape[0], : self.b.shape[1]] = self.b
        return TrigPoly2D(a, b, self.parity)

    def truncate(self, d1, d2):
        """Drop modes above (d1, d2)."""
        d1 = min(d1, self.d1)
        d2 = min(d2, self.d2)
        n1 = d1 if self.parity == "odd" else d1 + 1
        return TrigPoly2D(self.a[:n1, : d2 + 1].copy(),
                          self.b[:n1, : d2 + 1].copy(), self.parity)

    # -- linear vector-space ops ------------------------------------------
    def _aligned(self, other):
        if self.parity != other.parity:
            raise ValueError("parity mismatch")
        d1 = max(self.d1, other.d1)
        d2 = max(self.d2, other.d2)
        return self.pad(d1, d2), other.pad(d1, d2)

    def __add__(self, other):
        u, v = self._aligned(other)
        return TrigPoly2D(u.a + v.a, u.b + v.b, u.parity)

    def __sub__(self, other):
        u, v = self._aligned(other)
        return TrigPoly2D(u.a - v.a, u.b - v.b, u.parity)

    def __neg__(self):
        return TrigPoly2D(-self.a, -self.b, self.parity)

    def __mul__(self, c):
        c = float(c)
        return TrigPoly2D(c * self.a, c * self.b, self.parity)

    __rmul__ = __mul__

    def __repr__(self):
        return (f"TrigPoly2D(parity={self.parity!r}, d1={self.d1}, d2={self.d2}, "
                f"coeffs={self.coefficient_count})")


# ---------------------------------------------------------------------------
# weights and norms

def weight_matrix(u: TrigPoly2D, w: WeightParams) -> np.ndarray:
    """M(k1,k2) aligned with u's coefficient arrays."""
    k1 = u.k1_values()[:, None]
    k2 = np.arange(u.d2 + 1)[None, :]
    return w.weight(k1, k2)


def norm_M(u: TrigPoly2D, w: WeightParams) -> float:
    """Weighted l1 norm sum (|a|+|b|) M (round-to-nearest; diagnostics grade)."""
    M = weight_matrix(u, w)
    return float(((np.abs(u.a) + np.abs(u.b)) * M).sum())


# ---------------------------------------------------------------------------
# flat coefficient vectors (basis order: k1-major, then a0, a1, b1, ..., ad2, bd2)

@dataclass(frozen=True)
class ModeMap:
    """Mode labels of a flat coefficient vector (parallel int/bool arrays)."""
    k1: np.ndarray
    k2: np.ndarray
    is_sin: np.ndarray  # True for sin(k2 theta) entries
    parity: str

    @property
    def size(self) -> int:
        return self.k1.size


def mode_map(d1: int, d2: int, parity: str = "odd") -> ModeMap:
    k1_lo = 1 if parity == "odd" else 0
    k1s, k2s, sins = [], [], []
    for k1 in range(k1_lo, d1 + 1):
        k1s.append(k1), k2s.append(0), sins.append(False)
        for k2 in range(1, d2 + 1):
            k1s.extend((k1, k1)), k2s.extend((k2, k2)), sins.extend((False, True))
    return ModeMap(np.array(k1s), np.array(k2s), np.array(sins, dtype=bool), parity)


def weight_vector(mmap: ModeMap, w: WeightParams) -> np.ndarray:
    return w.weight(mmap.k1, mmap.k2)


def poly_to_vec(u: TrigPoly2D) -> np.ndarray:
    d2 = u.d2
    n1 = u.a.shape[0]
    out = np.empty((n1, 2 * d2 + 1))
    out[:, 0] = u.a[:, 0]
    out[:, 1::2] = u.a[:, 1:]
    out[:, 2::2] = u.b[:, 1:]
    return out.ravel()


def vec_to_poly(vec: np.ndarray, d1: int, d2: int, parity: str = "odd") -> TrigPoly2D:
    n1 = d1 if parity == "odd" else d1 + 1
    m = np.asarray(vec, dtype=np.float64).reshape(n1, 2 * d2 + 1)
    a = np.zeros((n1, d2 + 1))
    b = np.zeros((n1, d2 + 1))
    a[:, 0] = m[:, 0]
    a[:, 1:] = m[:, 1::2]
    b[:, 1:] = m[:, 2::2]
    return TrigPoly2D(a, b, parity)


# ---------------------------------------------------------------------------
# complex exponential representation (exact +-1/4, +-1/2 scalings)

def to_pq(u: TrigPoly2D):
    """Real and imaginary parts of the signed-mode coefficient array.

    Returns (P, Q) of shape (2*d1+1, 2*d2+1), index [k1+d1, k2+d2], such that
    u = sum P+iQ e^{i(k1 x + k2 theta)}.  All scalings are exact powers of two.
    """
    d1, d2 = u.d1, u.d2
    aq = u.a / 4.0
    bq = u.b / 4.0
    if u.parity == "odd":
        # k1 >= 1 block, all k2
        Ppos = np.hstack([bq[:, :0:-1], -bq])
        Qpos = np.hstack([-aq[:, :0:-1], -aq])
        Qpos[:, d2] = -u.a[:, 0] / 2.0
        zrow = np.zeros((1, 2 * d2 + 1))
        P = np.vstack([-Ppos[::-1], zrow, Ppos])
        Q = np.vstack([-Qpos[::-1], zrow, Qpos])
    else:
        Ppos = np.hstack([aq[1:, :0:-1], aq[1:]])
        Ppos[:, d2] = u.a[1:, 0] / 2.0
        Qpos = np.hstack([bq[1:, :0:-1], -bq[1:]])
        mid = np.hstack([u.a[0, :0:-1] / 2.0, [u.a[0, 0]], u.a[0, 1:] / 2.0])
        midq = np.hstack([u.b[0, :0:-1] / 2.0, [0.0], -u.b[0, 1:] / 2.0])
        P = np.vstack([Ppos[::-1], mid[None, :], Ppos])
        Q = np.vstack([Qpos[::-1], midq[None, :], Qpos])
    return P, Q


def from_pq(P: np.ndarray, Q: np.ndarray, parity: str, d1: int, d2: int) -> TrigPoly2D:
    """Inverse of to_pq, reading the k1 >= (0|1), k2 >= 0 quadrant.

    (P, Q) may belong to higher degrees; entries beyond (d1, d2) are dropped.
    """
    D1 = (P.shape[0] - 1) // 2
    D2 = (P.shape[1] - 1) // 2
    if d1 > D1 or d2 > D2:
        raise ValueError("requested degrees exceed array degrees")
    if parity == "odd":
        rows = slice(D1 + 1, D1 + 1 + d1)
        a = -4.0 * Q[rows, D2: D2 + d2 + 1]
        b = -4.0 * P[rows, D2: D2 + d2 + 1]
        a[:, 0] = -2.0 * Q[rows, D2]
        b[:, 0] = 0.0
    else:
        rows = slice(D1, D1 + d1 + 1)
        a = 4.0 * P[rows, D2: D2 + d2 + 1]
        b = -4.0 * Q[rows, D2: D2 + d2 + 1]
        a[1:, 0] = 2.0 * P[D1 + 1: D1 + 1 + d1, D2]
        a[0, 1:] = 2.0 * P[D1, D2 + 1: D2 + d2 + 1]
        b[0, 1:] = -2.0 * Q[D1, D2 + 1: D2 + d2 + 1]
        a[0, 0] = P[D1, D2]
        b[:, 0] = 0.0
    return TrigPoly2D(a, b, parity)


def to_complex(u: TrigPoly2D) -> np.ndarray:
    P, Q = to_pq(u)
    return P + 1j * Q


def from_complex(C: np.ndarray, parity: str, d1: int, d2: int) -> TrigPoly2D:
    return from_pq(np.ascontiguousarray(C.real), np.ascontiguousarray(C.imag),
                   parity, d1, d2)


# ---------------------------------------------------------------------------
# products

_PARITY_PRODUCT = {("odd", "odd"): "even", ("odd", "even"): "odd",
                   ("even", "odd"): "odd", ("even", "even"): "even"}


def product(u: TrigPoly2D, v: TrigPoly2D, method: str | None = None) -> TrigPoly2D:
    """Full product u*v, degrees (d1u+d1v, d2u+d2v), no truncation.

    Small products run the exact coefficient convolution; large ones go
    through FFTs of the signed-mode arrays (scipy's convolution crossover,
    overridable via `method` or the module constant PRODUCT_METHOD).
    """
    Cu = to_complex(u)
    Cv = to_complex(v)
    C = convolve(Cu, Cv, mode="full", method=method or PRODUCT_METHOD)
    parity = _PARITY_PRODUCT[(u.parity, v.parity)]
    return from_complex(C, parity, u.d1 + v.d1, u.d2 + v.d2)


# ---------------------------------------------------------------------------
# derivative / multiplier operators

def dtheta(u: TrigPoly2D) -> TrigPoly2D:
    """d/dtheta: (a,b) at (k1,k2) -> (k2*b, -k2*a)."""
    k2 = np.arange(u.d2 + 1)[None, :]
    return TrigPoly2D(k2 * u.b, -k2 * u.a, u.parity)


def dx(u: TrigPoly2D) -> TrigPoly2D:
    """d/dx: flips parity; sin(k1 x) -> k1 cos(k1 x), cos -> -k1 sin."""
    if u.parity == "odd":
        d1 = u.d1
        a = np.zeros((d1 + 1, u.d2 + 1))
        b = np.zeros_like(a)
        k1 = np.arange(1, d1 + 1)[:, None]
        a[1:] = k1 * u.a
        b[1:] = k1 * u.b
        return TrigPoly2D(a, b, "even")
    d1 = u.d1
    if d1 == 0:
        return TrigPoly2D.zeros(1, u.d2, "odd")
    k1 = np.arange(1, d1 + 1)[:, None]
    return TrigPoly2D(-k1 * u.a[1:], -k1 * u.b[1:], "odd")


def sym_p(k1, nu: float, c: float):
    """Symbol p(k1) = nu k1^4 - k1^2 + c of the constant-coefficient part."""
    k1 = np.asarray(k1, dtype=float)
    return nu * k1 ** 4 - k1 ** 2 + c


def apply_L(u: TrigPoly2D, nu: float) -> TrigPoly2D:
    """L = nu d_x^4 + d_x^2: multiplies mode k1 by (nu k1^4 - k1^2)."""
    lam = (sym_p(u.k1_values(), nu, 0.0))[:, None]
    return TrigPoly2D(lam * u.a, lam * u.b, u.parity)


def apply_Sc_inv(u: TrigPoly2D, f: float, nu: float, c: float) -> TrigPoly2D:
    """Inverse of S_c = f d_theta + L + c, block-diagonal over (k1, k2).

    On the (cos, sin) pair at (k1, k2) the forward operator is
    [[p, f k2], [-f k2, p]] with p = p(k1), so the inverse block is
    [[p, -f k2], [f k2, p]] / (p^2 + (f k2)^2); verified against the
    complex-basis symbol 1/(p(k1) + i f k2).
    """
    p = sym_p(u.k1_values(), nu, c)[:, None]
    fk2 = f * np.arange(u.d2 + 1)[None, :]
    det = p * p + fk2 * fk2
    if np.any(det <= 0.0) or not np.all(np.isfinite(det)):
        raise SingularBlock("S_c block determinant vanishes")
    a = (p * u.a - fk2 * u.b) / det
    b = (fk2 * u.a + p * u.b) / det
    return TrigPoly2D(a, b, u.parity)


def shift_theta(u: TrigPoly2D, angle: float) -> TrigPoly2D:
    """u(theta + angle, x): rotates each (a,b) pair by k2*angle."""
    k2 = np.arange(u.d2 + 1)
    ck = np.cos(k2 * angle)[None, :]
    sk = np.sin(k2 * angle)[None, :]
    a = u.a * ck + u.b * sk
    b = u.b * ck - u.a * sk
    b[:, 0] = 0.0
    return TrigPoly2D(a, b, u.parity)


# ---------------------------------------------------------------------------
# grids

@dataclass
class Grid2D:
    """Samples of u on the uniform torus grid; rows are theta, columns x."""
    values: np.ndarray

    @property
    def n_theta(self) -> int:
        return self.values.shape[0]

    @property
    def n_x(self) -> int:
        return self.values.shape[1]

    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta

    def x(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_x) / self.n_x


def eval_grid(u: TrigPoly2D, n_theta: int, n_x: int) -> Grid2D:
    """Evaluate on the n_theta x n_x uniform grid."""
    th = 2.0 * np.pi * np.arange(n_theta) / n_theta
    xx = 2.0 * np.pi * np.arange(n_x) / n_x
    k1 = u.k1_values()
    k2 = np.arange(u.d2 + 1)
    SX = (np.sin if u.parity == "odd" else np.cos)(np.outer(xx, k1))
    CT = np.cos(np.outer(th, k2))
    ST = np.sin(np.outer(th, k2))
    V = CT @ u.a.T @ SX.T + ST @ u.b.T @ SX.T
    return Grid2D(V)


# ---------------------------------------------------------------------------
# matrices of v |-> P_trunc d_x (u * v) on flat odd coefficient vectors
#
# The matrix factors through exact structure tensors:
#   x channel:      sin(c1 x) sin(l1 x) --d_x--> sin(m1 x) rows, entries
#                   +m1/2 at m1 = c1+l1 and -m1/2 at m1 = |c1-l1|;
#   theta channel:  multiplication by cos(c2 th) / sin(c2 th) on the
#                   interleaved (a0, a1, b1, ...) layout, entries in
#                   {0, +-1/2, +-1}.
# All tensor entries are exact in binary floating point, which the rigorous
# twin of this assembly relies on.

def _theta_index(k2: int, is_sin: bool) -> int:
    if k2 == 0:
        return 0
    return 2 * k2 if is_sin else 2 * k2 - 1


def structure_tensor_x(d1u: int, d1: int) -> np.ndarray:
    """X[c1-1, m1-1, l1-1] for c1 <= d1u and m1, l1 <= d1."""
    X = np.zeros((d1u, d1, d1))
    for c1 in range(1, d1u + 1):
        for l1 in range(1, d1 + 1):
            s = c1 + l1
            if s <= d1:
                X[c1 - 1, s - 1, l1 - 1] += s / 2.0
            d = abs(c1 - l1)
            if 1 <= d <= d1:
                X[c1 - 1, d - 1, l1 - 1] -= d / 2.0
    return X


def structure_tensors_theta(d2u: int, d2: int):
    """(CT, ST): matrices of multiplication by cos/sin(c2 theta), c2 <= d2u."""
    w = 2 * d2 + 1
    CT = np.zeros((d2u + 1, w, w))
    ST = np.zeros((d2u + 1, w, w))

    def put(T, c2, m2, m_sin, q, val):
        if m2 > d2 or (m_sin and m2 == 0):
            return
        T[c2, _theta_index(m2, m_sin), q] += val

    for c2 in range(d2u + 1):
        for l2 in range(d2 + 1):
            qc = _theta_index(l2, False)
            # source cos(l2 theta)
            put(CT, c2, c2 + l2, False, qc, 0.5)
            put(CT, c2, abs(c2 - l2), False, qc, 0.5)
            put(ST, c2, c2 + l2, True, qc, 0.5)
            if l2 != c2:
                put(ST, c2, abs(c2 - l2), True, qc, 0.5 * np.sign(c2 - l2))
            if l2 == 0:
                continue
            qs = _theta_index(l2, True)
            # source sin(l2 theta)
            put(CT, c2, c2 + l2, True, qs, 0.5)
            if l2 != c2:
                put(CT, c2, abs(c2 - l2), True, qs, 0.5 * np.sign(l2 - c2))
            put(ST, c2, abs(c2 - l2), False, qs, 0.5)
            put(ST, c2, c2 + l2, False, qs, -0.5)
    return CT, ST


def mult_dx_matrix(u: TrigPoly2D, d1: int, d2: int) -> np.ndarray:
    """Matrix of v -> truncate(d_x(u*v)) on flat odd vectors at (d1, d2)."""
    if u.parity != "odd":
        raise ValueError("multiplier must be odd")
    X = structure_tensor_x(u.d1, d1)
    CT, ST = structure_tensors_theta(u.d2, d2)
    Z = np.tensordot(u.a, CT, (1, 0)) + np.tensordot(u.b, ST, (1, 0))
    G = np.tensordot(X, Z, (0, 0))          # (m1, l1, p, q)
    n = d1 * (2 * d2 + 1)
    return np.ascontiguousarray(G.transpose(0, 2, 1, 3)).reshape(n, n)


def mult_dx_matrix_1d(u1: np.ndarray, d1: int) -> np.ndarray:
    """Same for 1-d sine series: v -> d_x(u*v) truncated, u1 = coeffs k1>=1."""
    u1 = np.asarray(u1, dtype=np.float64)
    X = structure_tensor_x(u1.size, d1)
    return np.tensordot(u1, X, (0, 0))


def from_grid(values: np.ndarray, d1: int, d2: int, parity: str) -> TrigPoly2D:
    """Extract the degree-(d1,d2) polynomial from grid samples by FF2.

    The grid must be dealiased for the sampled function: n_x >= 2*d1+2 and
    n_theta >= 2*d2+2 where (d1,d2) bound the function's actual degrees.
    """
    values = np.asarray(values, dtype=np.float64)
    n_theta, n_x = values.shape
    if n_x < 2 * d1 + 2 or n_theta < 2 * d2 + 2:
        raise ValueError(f"grid {n_theta}x{n_x} too small for degrees ({d1},{d2})")
    F = np.fft.fft2(values) / (n_theta * n_x)
    k1 = np.arange(-d1, d1 + 1) % n_x
    k2 = np.arange(-d2, d2 + 1) % n_theta
    C = F[np.ix_(k2, k1)].T  # index [k1+d1, k2+d2]
    return from_complex(C, parity, d1, d2)
