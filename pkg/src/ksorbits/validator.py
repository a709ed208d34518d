"""A-posteriori validation of Newton-converged orbits.

Given a candidate (f, u) satisfying the invariance equation approximately,
this module certifies — with directed-rounding interval arithmetic — that a
true solution exists within a computable distance E of the candidate, by
verifying the hypotheses of a contraction argument for the preconditioned
fixed-point map on the weighted ell^1 space.

The certified chain, in order:

  alpha1  defect of the finite bordered block:  ||B^ A^ + A^ + B^||_M
  K1..K3  tail bounds of S_c^{-1}, S_c^{-1} d_x and multiplication by u
  alpha2  tail defect:  c K1 + K2 K3
  alpha   max(alpha1, alpha2) + K2 delta b      (must be < 1)
  e0      ||S_c^{-1} e||_M at full (2 d1, 2 d2) degrees
  e1      defect bound ||(Id+B^) S_c^{-1} e||_M, applied blockwise (the
          computed inverse on the matrix block, identity above), capped by
          the submultiplicative shortcut b e0
  e2      quadratic error constant  b (||S^-1 dth|| + ||S^-1 dx||/2)
  disc    (1 - alpha)^2 - 4 e1 e2               (must be > 0)
  E       e1 / sqrt(disc), the existence and local-uniqueness radius

Only the approximate inverse B^ is computed in plain floats; everything
entering the certificate is an outward-rounded bound.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import fourier as fx
from . import newton as nt
from .fourier import TrigPoly2D, WeightParams
from .intervals import (IPI, Interval, IntervalMatrix, NormBound,
                        conv2d_enclosure, rump_matmul, vec_exp,
                        weighted_operator_norm, weighted_vector_norm)
from .rounding import UPWARD, directed

__all__ = [
    "ValidationInput", "ValidationCertificate", "ValidationFailed",
    "SingularMatrix", "NoImprovement",
    "compute_K1", "compute_K2", "compute_K3", "sc_inv_derivative_bounds",
    "build_Bhat", "validate", "improve_analyticity",
    "interval_weights", "interval_preconditioned_residual",
    "interval_bordered_matrix", "DEFAULT_WEIGHTS", "MAX_MATRIX_DIM",
]

log = logging.getLogger(__name__)

DEFAULT_WEIGHTS = WeightParams(r=1e-12, s1=1e-12, s2=1e-12)
MAX_MATRIX_DIM = 4000

_SQRT2 = Interval(2.0).sqrt()


class ValidationFailed(RuntimeError):
    """A certified inequality did not hold; never raised silently."""

    def __init__(self, stage: str, bound: float, msg: str = ""):
        super().__init__(f"validation failed at stage {stage!r}: "
                         f"certified bound {bound:.6e} {msg}".rstrip())
        self.stage = stage
        self.bound = bound


class SingularMatrix(np.linalg.LinAlgError):
    pass


class NoImprovement(RuntimeError):
    pass


@dataclass
class ValidationInput:
    cand: nt.OrbitCandidate
    w: WeightParams = DEFAULT_WEIGHTS
    d1t: int | None = None          # matrix-stage degrees, <= orbit degrees
    d2t: int | None = None
    c: float | None = None          # shift; None means the certified 1/nu
    k3_mode: str = "sup"            # "sup" or "conservative"

    def __post_init__(self):
        u = self.cand.u
        if self.d1t is None and self.d2t is None:
            self.d1t, self.d2t = _matrix_stage_degrees(u.d1, u.d2)
        if self.d1t is None or self.d2t is None:
            raise ValueError("give both reduced degrees or neither")
        if not (1 <= self.d1t <= u.d1 and 0 <= self.d2t <= u.d2):
            raise ValueError("reduced degrees must satisfy 1 <= d~ <= d")
        if self.k3_mode not in ("sup", "conservative"):
            raise ValueError(f"unknown k3_mode {self.k3_mode!r}")


@dataclass
class ValidationCertificate:
    success: bool
    alpha: float
    alpha1: float
    alpha2: float
    e0: float
    e1: float
    e2: float
    K1: float
    K2: float
    K3: float
    b: float
    delta: float
    rho_minus: float
    E: float
    r_hat: float | None = None
    E_rhat: float | None = None
    meta: dict = field(default_factory=dict)


def _matrix_stage_degrees(d1: int, d2: int) -> tuple[int, int]:
    """Largest proportional reduction keeping the bordered dimension small.

    The residual is always measured at full degrees; only the dense matrix
    work shrinks."""
    if d1 * (2 * d2 + 1) + 1 <= MAX_MATRIX_DIM:
        return d1, d2
    lo, hi = 0.0, 1.0
    for _ in range(50):
        t = 0.5 * (lo + hi)
        if max(1, round(t * d1)) * (2 * max(0, round(t * d2)) + 1) + 1 <= MAX_MATRIX_DIM:
            lo = t
        else:
            hi = t
    return max(1, round(lo * d1)), max(0, round(lo * d2))


# ---------------------------------------------------------------------------
# interval weights

def _flat_mode_indices(d1: int, d2: int):
    k2pat = np.repeat(np.arange(d2 + 1), 2)[1:]          # 0,1,1,2,2,...
    k1 = np.repeat(np.arange(1, d1 + 1), 2 * d2 + 1)
    k2 = np.tile(k2pat, d1)
    return k1.astype(np.float64), k2.astype(np.float64)


def _low_block_indices(D1: int, D2: int, d1t: int, d2t: int) -> np.ndarray:
    """Positions, within the (D1, D2) flat layout, of the modes k1 <= d1t and
    k2 <= d2t, ordered exactly like the (d1t, d2t) flat layout."""
    stride = 2 * D2 + 1
    base = np.arange(d1t) * stride
    return (base[:, None] + np.arange(2 * d2t + 1)[None, :]).ravel()


def _weight_bounds(k1, k2, w: WeightParams):
    l1lo, l1hi = np.log1p(k1), np.log1p(k1)
    l2lo, l2hi = np.log1p(k2), np.log1p(k2)
    # log1p of exact small integers is faithful to 1 ulp; widen by 2
    l1lo, l1hi = np.nextafter(np.nextafter(l1lo, -np.inf), -np.inf), \
        np.nextafter(np.nextafter(l1hi, np.inf), np.inf)
    l2lo, l2hi = np.nextafter(np.nextafter(l2lo, -np.inf), -np.inf), \
        np.nextafter(np.nextafter(l2hi, np.inf), np.inf)
    from .rounding import DOWNWARD
    with directed(DOWNWARD):
        tlo = w.s1 * l1lo + w.s2 * l2lo + w.r * (k1 + k2)
    with directed(UPWARD):
        thi = w.s1 * l1hi + w.s2 * l2hi + w.r * (k1 + k2)
    lo, hi = vec_exp(tlo, thi)
    return lo, hi


def interval_weights(d1: int, d2: int, w: WeightParams,
                     border: bool = False) -> IntervalMatrix:
    """Enclosures of the mode weights M(k1,k2) in flat vector order."""
    k1, k2 = _flat_mode_indices(d1, d2)
    lo, hi = _weight_bounds(k1, k2, w)
    if border:
        lo = np.concatenate(([1.0], lo))
        hi = np.concatenate(([1.0], hi))
    return IntervalMatrix(lo, hi)


def _weight_grid_sup(d1: int, d2: int, w: WeightParams) -> np.ndarray:
    k1 = np.repeat(np.arange(1.0, d1 + 1), d2 + 1).reshape(d1, d2 + 1)
    k2 = np.tile(np.arange(0.0, d2 + 1), d1).reshape(d1, d2 + 1)
    _, hi = _weight_bounds(k1.ravel(), k2.ravel(), w)
    return hi.reshape(d1, d2 + 1)


# ---------------------------------------------------------------------------
# interval building blocks

def _flatten_iv(A: IntervalMatrix, B: IntervalMatrix) -> IntervalMatrix:
    """Interval twin of poly_to_vec for odd grids (a, b of shape (d1, d2+1))."""
    def flat(arr_a, arr_b):
        n1, w = arr_a.shape[0], 2 * (arr_a.shape[1] - 1) + 1
        out = np.empty((n1, w))
        out[:, 0] = arr_a[:, 0]
        out[:, 1::2] = arr_a[:, 1:]
        out[:, 2::2] = arr_b[:, 1:]
        return out.ravel()
    return IntervalMatrix(flat(A.inf, B.inf), flat(A.sup, B.sup))


def _sym_p_iv(k1: int, nu: float, c: Interval) -> Interval:
    return Interval(float(k1) ** 4) * nu - Interval(float(k1) ** 2) + c


def _sc_inv_apply_iv(Ea: IntervalMatrix, Eb: IntervalMatrix, nu: float,
                     f: float, c: Interval):
    """Apply S_c^{-1} entrywise to interval coefficient grids (in place copy)."""
    n1, w = Ea.shape
    d2 = w - 1
    Ra = Ea.copy()
    Rb = Eb.copy()
    f_iv = Interval(f)
    for i in range(n1):
        p = _sym_p_iv(i + 1, nu, c)
        Ra[i, 0] = Ea.entry(i, 0) / p
        for j in range(1, d2 + 1):
            fk2 = f_iv * float(j)
            det = p * p + fk2 * fk2
            a = Ea.entry(i, j)
            b = Eb.entry(i, j)
            Ra[i, j] = (p * a - fk2 * b) / det
            Rb[i, j] = (fk2 * a + p * b) / det
    return Ra, Rb


def _dtheta_iv(u: TrigPoly2D):
    """Enclosure of the theta-derivative coefficient grids of a float poly."""
    k2row = np.arange(u.d2 + 1, dtype=np.float64)
    A = IntervalMatrix.point(u.b) * k2row
    B = IntervalMatrix.point(u.a) * (-k2row)
    zero = Interval(0.0)
    A[:, 0] = zero
    B[:, 0] = zero
    return A, B


def interval_preconditioned_residual(cand: nt.OrbitCandidate,
                                     c: Interval) -> IntervalMatrix:
    """Flat interval vector of -S_c^{-1}(f u_th + L u + d_x(u^2)/2) at
    degrees (2 d1, 2 d2)."""
    u = cand.u
    d1, d2 = u.d1, u.d2
    D1, D2 = 2 * d1, 2 * d2
    nu, f = cand.nu, cand.f

    # quadratic term: convolve the exact signed-mode parts, extract the
    # even-parity coefficients, then apply d_x and the 1/2 factor
    P, Q = fx.to_pq(u)
    ReW = conv2d_enclosure(P, P) - conv2d_enclosure(Q, Q)
    ImW = conv2d_enclosure(P, Q).scale(2.0)
    half = np.ones((D1 + 1, D2 + 1))
    half[0, :] *= 0.5
    half[:, 0] *= 0.5
    quads = [(slice(D1, None), slice(D2, None)),
             (slice(D1, None, -1), slice(D2, None)),
             (slice(D1, None), slice(D2, None, -1)),
             (slice(D1, None, -1), slice(D2, None, -1))]
    Ae = (ReW[quads[0]] + ReW[quads[1]] + ReW[quads[2]] + ReW[quads[3]]) * half
    Be = (-ImW[quads[0]] - ImW[quads[1]] + ImW[quads[2]] + ImW[quads[3]]) * half
    Be[:, 0] = Interval(0.0)      # exact: no sin(0*theta) component
    dxcol = (-0.5 * np.arange(1.0, D1 + 1))[:, None]
    Qa = Ae[1:, :] * dxcol
    Qb = Be[1:, :] * dxcol

    # linear terms f u_theta + L u on the low block
    DA, DB = _dtheta_iv(u)
    La = DA.scale(f)
    Lb = DB.scale(f)
    p0lo = np.empty(d1)
    p0hi = np.empty(d1)
    for i in range(d1):
        p0 = Interval(float((i + 1) ** 4)) * nu - Interval(float((i + 1) ** 2))
        p0lo[i], p0hi[i] = p0.lo, p0.hi
    P0 = IntervalMatrix(np.repeat(p0lo[:, None], d2 + 1, 1),
                        np.repeat(p0hi[:, None], d2 + 1, 1))
    La = La + IntervalMatrix.point(u.a) * P0
    Lb = Lb + IntervalMatrix.point(u.b) * P0

    Ea = IntervalMatrix(np.zeros((D1, D2 + 1)), np.zeros((D1, D2 + 1)))
    Eb = Ea.copy()
    Ea[:d1, :d2 + 1] = La
    Eb[:d1, :d2 + 1] = Lb
    Ea = Ea + Qa
    Eb = Eb + Qb

    Ra, Rb = _sc_inv_apply_iv(Ea, Eb, nu, f, c)
    return -_flatten_iv(Ra, Rb)


def _sc_inv_dense_iv(nu: float, f: float, c: Interval, d1: int, d2: int):
    """Dense interval matrices of S_c^{-1} and c*S_c^{-1} on flat vectors."""
    n = d1 * (2 * d2 + 1)
    S = IntervalMatrix(np.zeros((n, n)), np.zeros((n, n)))
    CS = S.copy()
    f_iv = Interval(f)
    for k1 in range(1, d1 + 1):
        base = (k1 - 1) * (2 * d2 + 1)
        p = _sym_p_iv(k1, nu, c)
        s0 = Interval(1.0) / p
        S[base, base] = s0
        CS[base, base] = c * s0
        for k2 in range(1, d2 + 1):
            fk2 = f_iv * float(k2)
            det = p * p + fk2 * fk2
            dg = p / det
            off = fk2 / det
            ia, ib = base + 2 * k2 - 1, base + 2 * k2
            S[ia, ia] = dg
            S[ib, ib] = dg
            S[ia, ib] = -off
            S[ib, ia] = off
            CS[ia, ia] = c * dg
            CS[ib, ib] = c * dg
            CS[ia, ib] = -(c * off)
            CS[ib, ia] = c * off
    return S, CS


def _mult_dx_iv(u: TrigPoly2D, d1: int, d2: int) -> IntervalMatrix:
    """Interval enclosure of mult_dx_matrix built from the exact structure
    tensors with certified contractions."""
    X = fx.structure_tensor_x(u.d1, d1)
    CT, ST = fx.structure_tensors_theta(u.d2, d2)
    w = 2 * d2 + 1
    Z = rump_matmul(IntervalMatrix.point(u.a),
                    IntervalMatrix.point(CT.reshape(u.d2 + 1, w * w)))
    Z = Z + rump_matmul(IntervalMatrix.point(u.b),
                        IntervalMatrix.point(ST.reshape(u.d2 + 1, w * w)))
    X2 = np.ascontiguousarray(X.reshape(u.d1, d1 * d1).T)
    G = rump_matmul(IntervalMatrix.point(X2), Z)
    G = G.reshape(d1, d1, w, w).transpose(0, 2, 1, 3).reshape(d1 * w, d1 * w)
    return G


def interval_bordered_matrix(cand: nt.OrbitCandidate, c: Interval) -> IntervalMatrix:
    """Enclosure of the bordered matrix: phase row, frequency column, and the
    preconditioned core Id - c S^-1 + S^-1 d_x(u .)."""
    u = cand.u
    d1, d2 = u.d1, u.d2
    n = d1 * (2 * d2 + 1)
    G = _mult_dx_iv(u, d1, d2)
    S, CS = _sc_inv_dense_iv(cand.nu, cand.f, c, d1, d2)
    core = IntervalMatrix.point(np.eye(n)) - CS + rump_matmul(S, G)

    DA, DB = _dtheta_iv(u)
    row = _flatten_iv(DA, DB).scale(IPI * IPI)
    Ca, Cb = _sc_inv_apply_iv(DA, DB, cand.nu, cand.f, c)
    col = _flatten_iv(Ca, Cb)

    M = IntervalMatrix(np.zeros((n + 1, n + 1)), np.zeros((n + 1, n + 1)))
    M[1:, 1:] = core
    M[0, 1:] = row.reshape(n)
    M[1:, 0] = col.reshape(n)
    return M


# ---------------------------------------------------------------------------
# tail constants

def _tail_max(nu: float, c: Interval, f: float, d1: int, d2: int) -> Interval:
    """Certified max of 1/p over x > d1 combined with the theta branch
    1/(f (d2+1)); the index region is the complement 'x > d1 or y > d2'."""
    nxt = d1 + 1
    p_next = _sym_p_iv(nxt, nu, c)
    increasing = (Interval(float(nxt ** 2)) * (Interval(2.0) * nu)).lo > 1.0
    if increasing and p_next.lo > 0.0:
        xbranch = Interval(1.0) / p_next
    else:
        # global bound: min over reals of nu x^4 - x^2 is -1/(4 nu)
        denom = c - Interval(1.0) / (Interval(4.0) * nu)
        if denom.lo <= 0.0:
            raise ValidationFailed("K1", denom.lo,
                                   "(symbol lower bound not positive)")
        xbranch = Interval(1.0) / denom
    tbranch = Interval(1.0) / (Interval(f) * float(d2 + 1))
    return Interval(max(xbranch.lo, tbranch.lo), max(xbranch.hi, tbranch.hi))


def compute_K1(nu: float, c, f: float, d1: int, d2: int) -> Interval:
    """Bound of the tail block of S_c^{-1} in the weighted ell^1 norm."""
    c = c if isinstance(c, Interval) else Interval(c)
    return _SQRT2 * _tail_max(nu, c, f, d1, d2)


def compute_K2(nu: float, c, f: float, d1: int, d2: int) -> Interval:
    """Bound of the tail block of S_c^{-1} d_x."""
    c = c if isinstance(c, Interval) else Interval(c)
    amp = (Interval(4.0) / (Interval(3.0) * nu)).pow_frac14()
    return _SQRT2 * amp * _tail_max(nu, c, f, d1, d2).pow_frac34()


def compute_K3(u: TrigPoly2D, w: WeightParams, mode: str = "sup") -> Interval:
    """Bound of multiplication by u restricted to the tail block.

    "sup" uses the weighted coefficient supremum; "conservative" substitutes
    the full norm ||u||_M, which dominates it."""
    if mode == "conservative":
        flat = IntervalMatrix.point(fx.poly_to_vec(u))
        val = weighted_vector_norm(flat, interval_weights(u.d1, u.d2, w)).value
        return Interval(0.0, val)
    wsup = _weight_grid_sup(u.d1, u.d2, w)
    with directed(UPWARD):
        val = float(np.max((np.abs(u.a) + np.abs(u.b)) * wsup)) if u.d1 else 0.0
    return Interval(0.0, val)


def sc_inv_derivative_bounds(nu: float, f: float):
    """Certified bounds of ||S_c^{-1} d_x||_M and ||S_c^{-1} d_theta||_M at
    c = 1/nu (the quadratic error constants)."""
    dx_bound = _SQRT2 * (Interval(4.0) / (Interval(3.0) * nu)).pow_frac14()
    dth_bound = _SQRT2 / Interval(f)
    return dx_bound, dth_bound


# ---------------------------------------------------------------------------
# main algorithm

def build_Bhat(A_F: np.ndarray) -> np.ndarray:
    """Approximate inverse minus identity, in plain floats (no rigor needed)."""
    try:
        inv = scipy.linalg.inv(A_F)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise SingularMatrix(str(exc)) from exc
    if not np.isfinite(inv).all():
        raise SingularMatrix("non-finite inverse")
    return inv - np.eye(A_F.shape[0])


def validate(vin: ValidationInput) -> ValidationCertificate:
    """Run the certification chain; raises ValidationFailed naming the first
    inequality that cannot be verified."""
    t_start = time.perf_counter()
    cand = vin.cand
    u = cand.u
    nu, f = cand.nu, cand.f
    w = vin.w
    c = Interval(vin.c) if vin.c is not None else Interval(1.0) / Interval(nu)
    timings: dict[str, float] = {}

    ut = u.truncate(vin.d1t, vin.d2t)
    diff = u + (-1.0) * ut.pad(u.d1, u.d2)
    delta = weighted_vector_norm(IntervalMatrix.point(fx.poly_to_vec(diff)),
                                 interval_weights(u.d1, u.d2, w)).value

    t0 = time.perf_counter()
    cand_t = nt.OrbitCandidate(nu, f, ut)
    A_iv = interval_bordered_matrix(cand_t, c)
    timings["matrix_enclosure"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    Bhat = build_Bhat(nt.assemble_A(cand_t, c=1.0 / nu).M)
    timings["approx_inverse"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    n_bord = A_iv.shape[0]
    A_hat = A_iv - IntervalMatrix.point(np.eye(n_bord))
    B_iv = IntervalMatrix.point(Bhat)
    defect = rump_matmul(B_iv, A_hat) + A_hat + B_iv
    wB = interval_weights(vin.d1t, vin.d2t, w, border=True)
    alpha1 = weighted_operator_norm(defect, wB, wB).value
    timings["alpha1"] = time.perf_counter() - t0

    K1 = compute_K1(nu, c, f, vin.d1t, vin.d2t)
    K2 = compute_K2(nu, c, f, vin.d1t, vin.d2t)
    K3 = compute_K3(ut, w, vin.k3_mode)
    alpha2 = c * K1 + K2 * K3

    bnorm = weighted_operator_norm(B_iv, wB, wB).value
    b = Interval(1.0) + Interval(bnorm)

    alpha = Interval(max(alpha1, alpha2.hi)) + K2 * Interval(delta) * b
    log.info("alpha1=%.3e alpha2=%.3e delta=%.3e alpha=%.6f",
             alpha1, alpha2.hi, delta, alpha.hi)
    if not alpha.hi < 1.0:
        raise ValidationFailed("alpha", alpha.hi, "(need alpha < 1)")

    t0 = time.perf_counter()
    etil = interval_preconditioned_residual(cand, c)
    wfull = interval_weights(2 * u.d1, 2 * u.d2, w)
    e0 = weighted_vector_norm(etil, wfull).value
    timings["residual"] = time.perf_counter() - t0

    # Defect of the fixed-point map: e1 >= ||(Id+B^) F^(x^)||.  The
    # preconditioner acts as the computed inverse on the matrix block and as
    # the identity above it, so applying it blockwise is far sharper than the
    # submultiplicative shortcut b*e0 whenever the finite block is
    # ill-conditioned; both are certified upper bounds and we keep the smaller.
    t0 = time.perf_counter()
    low = _low_block_indices(2 * u.d1, 2 * u.d2, vin.d1t, vin.d2t)
    einf, esup = etil.inf.ravel(), etil.sup.ravel()
    elow = IntervalMatrix(np.concatenate(([0.0], einf[low])),
                          np.concatenate(([0.0], esup[low]))).reshape(-1, 1)
    img = rump_matmul(IntervalMatrix.point(Bhat + np.eye(n_bord)), elow)
    e1_low = weighted_vector_norm(img, wB).value
    mask = np.ones(einf.size, dtype=bool)
    mask[low] = False
    e1_tail = weighted_vector_norm(
        IntervalMatrix(einf[mask], esup[mask]),
        IntervalMatrix(wfull.inf.ravel()[mask], wfull.sup.ravel()[mask])).value
    e1_sharp = Interval(e1_low) + Interval(e1_tail)
    e1_crude = b * Interval(e0)
    e1_mode = "blockwise" if e1_sharp.hi < e1_crude.hi else "b*e0"
    e1 = e1_sharp if e1_mode == "blockwise" else e1_crude
    timings["defect_image"] = time.perf_counter() - t0

    sx, sth = sc_inv_derivative_bounds(nu, f)
    e2 = b * (sth + Interval(0.5) * sx)

    one_minus = Interval(1.0) - Interval(alpha.hi)
    disc = one_minus * one_minus - Interval(4.0) * e1 * e2
    log.info("e0=%.3e e1=%.3e (%s) e2=%.3e disc=%.6e",
             e0, e1.hi, e1_mode, e2.hi, disc.lo)
    if not disc.lo > 0.0:
        raise ValidationFailed("discriminant", disc.lo,
                               "(need (1-alpha)^2 > 4 e1 e2)")

    sq = Interval(disc.lo, disc.hi).sqrt()
    # lower root of e2 rho^2 - (1-alpha) rho + e1, in the form without
    # subtractive cancellation; E = e1/sqrt(disc) dominates it
    rho = (Interval(2.0) * e1) / (one_minus + sq)
    E = e1 / sq

    # hypotheses of the underlying contraction statement at rho_-:
    # e1 + e2 rho^2 <= (1-alpha) rho (fixed ball maps into itself) and
    # 2 e2 rho < 1 - alpha (contraction rate); checked just past the root
    rho_t = Interval(rho.hi * (1.0 + 1e-6) + 1e-300)
    ball = (e1 + e2 * rho_t * rho_t).hi <= (Interval(one_minus.lo) * rho_t).lo
    lip = (Interval(2.0) * e2 * rho_t).hi < one_minus.lo
    if not (ball and lip):
        raise ValidationFailed("consistency", rho.hi,
                               "(contraction hypotheses at rho_-)")

    timings["total"] = time.perf_counter() - t_start
    cert = ValidationCertificate(
        success=True, alpha=alpha.hi, alpha1=alpha1, alpha2=alpha2.hi,
        e0=e0, e1=e1.hi, e2=e2.hi, K1=K1.hi, K2=K2.hi, K3=K3.hi,
        b=b.hi, delta=delta, rho_minus=rho.hi, E=E.hi,
        meta={
            "nu": nu, "one_over_nu": 1.0 / nu, "f": f, "period": cand.period,
            "d1": u.d1, "d2": u.d2, "d1_matrix": vin.d1t, "d2_matrix": vin.d2t,
            "bordered_dim": n_bord, "weights": (w.r, w.s1, w.s2),
            "k3_mode": vin.k3_mode, "e1_mode": e1_mode, "time": timings,
        })
    log.info("validated: E=%.6e rho=%.3e (%.1fs)", cert.E, cert.rho_minus,
             timings["total"])
    return cert


# ---------------------------------------------------------------------------
# analyticity-radius improvement

def _scaled_chain(alpha0: float, e1_0: float, e2_0: float, r_hat: float,
                  q: float):
    rq = Interval(r_hat) * q
    grow = rq.exp()
    alpha_r = Interval(alpha0) * grow
    e1_r = Interval(e1_0) * (Interval(2.0) * rq).exp()
    e2_r = Interval(e2_0) * grow
    if not alpha_r.hi < 1.0:
        return alpha_r, e1_r, e2_r, None
    om = Interval(1.0) - Interval(alpha_r.hi)
    disc = om * om - Interval(4.0) * e1_r * e2_r
    return alpha_r, e1_r, e2_r, disc


def improve_analyticity(cert: ValidationCertificate, d1: int, d2: int):
    """Largest certified exponential weight r^ the base certificate supports.

    Rescaling the norm from r = 0 to r^ multiplies the bounds by at most
    e^{r^ q} (alpha, e2) and e^{2 r^ q} (e1), with q = d1 d2.
    Returns (r^, E_{r^}).
    """
    if not cert.success:
        raise NoImprovement("base certificate is not successful")
    q = float(d1 * d2)

    def feasible(rh: float) -> bool:
        *_, disc = _scaled_chain(cert.alpha, cert.e1, cert.e2, rh, q)
        return disc is not None and disc.lo > 0.0

    grid = np.geomspace(1e-12, 1e-2, 60)
    if not feasible(grid[0]):
        return 0.0, cert.E
    idx = 0
    for i in range(len(grid) - 1, -1, -1):
        if feasible(grid[i]):
            idx = i
            break
    if idx == len(grid) - 1:
        r_hat = float(grid[-1])
    else:
        lo, hi = float(grid[idx]), float(grid[idx + 1])
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid
        r_hat = lo
    _, e1_r, _, disc = _scaled_chain(cert.alpha, cert.e1, cert.e2, r_hat, q)
    E_r = (e1_r / Interval(disc.lo, disc.hi).sqrt()).hi
    return r_hat, E_r
