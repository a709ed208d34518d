"""Containment tests for the interval layer against a 256-bit mpmath oracle.

Every enclosure produced by the package must contain the exactly-computed
value; these tests sample operands (endpoints and interior points) and check
membership with mpmath comparisons, which are exact for double endpoints.
"""

import math

import mpmath as mp
import numpy as np
import pytest

from ksorbits import intervals as iv
from ksorbits import rounding

mp.mp.prec = 256

RNG = np.random.default_rng(20240817)


def rand_value(rng, scale_range=(-8, 8)):
    m = 10.0 ** rng.uniform(*scale_range)
    return float(rng.choice([-1, 1]) * m * rng.uniform(0.5, 1.5))


def rand_interval(rng, nonneg=False):
    c = rand_value(rng)
    if nonneg:
        c = abs(c)
    r = abs(c) * 10.0 ** rng.uniform(-12, -1)
    lo, hi = c - r, c + r
    if nonneg:
        lo = max(lo, 0.0)
    return iv.Interval(lo, hi)


def members(x: iv.Interval, rng, n=3):
    pts = [x.lo, x.hi]
    for _ in range(n):
        t = rng.uniform()
        pts.append(min(max(x.lo + t * (x.hi - x.lo), x.lo), x.hi))
    return pts


def assert_contains(z: iv.Interval, exact: mp.mpf, label=""):
    assert mp.mpf(z.lo) <= exact <= mp.mpf(z.hi), f"{label}: {exact} not in {z}"


def test_scalar_arithmetic_contains_exact():
    rng = np.random.default_rng(1)
    for _ in range(400):
        x = rand_interval(rng)
        y = rand_interval(rng)
        sums = x + y
        difs = x - y
        prods = x * y
        for xs in members(x, rng):
            for ys in members(y, rng):
                mx, my = mp.mpf(xs), mp.mpf(ys)
                assert_contains(sums, mx + my, "add")
                assert_contains(difs, mx - my, "sub")
                assert_contains(prods, mx * my, "mul")
                if not (y.lo <= 0.0 <= y.hi):
                    assert_contains(x / y, mx / my, "div")


def test_division_by_interval_containing_zero_raises():
    with pytest.raises(iv.DivisionByIntervalContainingZero):
        iv.Interval(1.0) / iv.Interval(-1.0, 2.0)
    with pytest.raises(ZeroDivisionError):  # subclass relation
        iv.Interval(1.0) / iv.Interval(0.0)


def test_nan_and_inverted_endpoints_rejected():
    with pytest.raises(ValueError):
        iv.Interval(float("nan"), 1.0)
    with pytest.raises(ValueError):
        iv.Interval(2.0, 1.0)
    with pytest.raises(ValueError):
        iv.IntervalMatrix(np.array([[1.0]]), np.array([[0.0]]))
    with pytest.raises(ValueError):
        iv.IntervalMatrix(np.array([np.nan]), np.array([1.0]))


def test_elementary_functions_contain_exact():
    rng = np.random.default_rng(2)
    for _ in range(200):
        x = rand_interval(rng, nonneg=True)
        for xs in members(x, rng):
            m = mp.mpf(xs)
            assert_contains(x.sqrt(), mp.sqrt(m), "sqrt")
            assert_contains(x.pow_frac34(), m ** mp.mpf("0.75"), "x^3/4")
            assert_contains(x.pow_frac14(), m ** mp.mpf("0.25"), "x^1/4")
            if xs > 0:
                assert_contains(x.log() if x.lo > 0 else iv.Interval(-math.inf, math.inf),
                                mp.log(m), "log")
        y = iv.Interval(-abs(rand_value(rng, (-3, 2))), abs(rand_value(rng, (-3, 2))))
        for ys in members(y, rng):
            assert_contains(y.exp(), mp.exp(mp.mpf(ys)), "exp")


def test_log_sqrt_domain_errors():
    with pytest.raises(ValueError):
        iv.Interval(-1.0, 2.0).sqrt()
    with pytest.raises(ValueError):
        iv.Interval(0.0, 1.0).log()


def test_neg_abs_hull_membership():
    rng = np.random.default_rng(3)
    for _ in range(100):
        lo = rand_value(rng)
        x = iv.Interval(lo, lo + abs(rand_value(rng)) + 10)
        for xs in members(x, rng):
            assert (-x).contains(-xs)
            assert abs(x).contains(abs(xs))
        h = iv.Interval.hull(x, -x, 0.0)
        assert h.contains(x) and h.contains(0.0)
    assert iv.Interval(-3, 5).mag() == 5.0
    assert iv.Interval(-3, 5).mig() == 0.0
    assert iv.Interval(2, 5).mig() == 2.0


def test_pi_enclosure():
    assert mp.mpf(iv.IPI.lo) < mp.pi < mp.mpf(iv.IPI.hi)
    assert iv.IPI.width() < 1e-15


def _mp_matmul(A, B):
    n, k = A.shape
    k2, m = B.shape
    out = [[mp.fsum(mp.mpf(float(A[i, t])) * mp.mpf(float(B[t, j]))
                    for t in range(k)) for j in range(m)] for i in range(n)]
    return out


def _member_matrix(M: iv.IntervalMatrix, rng):
    t = rng.uniform(size=M.shape)
    return np.clip(M.inf + t * (M.sup - M.inf), M.inf, M.sup)


def test_rump_matmul_contains_member_products():
    rng = np.random.default_rng(4)
    A = iv.IntervalMatrix(*np.sort(rng.standard_normal((2, 5, 6)), axis=0))
    B = iv.IntervalMatrix(*np.sort(rng.standard_normal((2, 6, 4)), axis=0))
    C = iv.rump_matmul(A, B)
    for _ in range(5):
        Am, Bm = _member_matrix(A, rng), _member_matrix(B, rng)
        exact = _mp_matmul(Am, Bm)
        for i in range(5):
            for j in range(4):
                assert mp.mpf(float(C.inf[i, j])) <= exact[i][j] <= mp.mpf(float(C.sup[i, j]))


def test_rump_matmul_point_inputs_tight_and_correct():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((7, 9))
    B = rng.standard_normal((9, 5))
    C = iv.rump_matmul(iv.IntervalMatrix.point(A), iv.IntervalMatrix.point(B))
    exact = _mp_matmul(A, B)
    for i in range(7):
        for j in range(5):
            assert mp.mpf(float(C.inf[i, j])) <= exact[i][j] <= mp.mpf(float(C.sup[i, j]))
    # point inputs: enclosure stays within a few ulps of the float product
    assert C.width().max() <= 1e-13 * max(1.0, np.abs(C.mid()).max())


def test_rump_matmul_issues_exactly_four_dense_products():
    before = iv.dense_product_count
    A = iv.IntervalMatrix.point(np.eye(3))
    _ = iv.rump_matmul(A, A)
    assert iv.dense_product_count - before == 4


def test_rounding_mode_restored_after_use_and_after_error():
    assert rounding.get_current_mode() == rounding.NEAREST
    _ = iv.Interval(1.0, 2.0) * iv.Interval(-3.0, 4.0)
    _ = iv.rump_matmul(iv.IntervalMatrix.point(np.eye(2)),
                       iv.IntervalMatrix.point(np.eye(2)))
    assert rounding.get_current_mode() == rounding.NEAREST
    with pytest.raises(RuntimeError):
        with rounding.directed(rounding.UPWARD):
            raise RuntimeError("boom")
    assert rounding.get_current_mode() == rounding.NEAREST


def test_conv2d_enclosure_contains_exact_convolution():
    rng = np.random.default_rng(6)
    a = rng.standard_normal((4, 5))
    b = rng.standard_normal((3, 2))
    C = iv.conv2d_enclosure(a, b)
    assert C.shape == (6, 6)
    for i in range(6):
        for j in range(6):
            acc = mp.mpf(0)
            for p in range(4):
                for q in range(5):
                    if 0 <= i - p < 3 and 0 <= j - q < 2:
                        acc += mp.mpf(float(a[p, q])) * mp.mpf(float(b[i - p, j - q]))
            assert mp.mpf(float(C.inf[i, j])) <= acc <= mp.mpf(float(C.sup[i, j]))


def test_interval_matrix_elementwise_ops_contain_members():
    rng = np.random.default_rng(7)
    A = iv.IntervalMatrix(*np.sort(rng.standard_normal((2, 6, 6)), axis=0))
    B = iv.IntervalMatrix(*np.sort(rng.standard_normal((2, 6, 6)), axis=0))
    s = iv.Interval(-2.5, 1.5)
    for _ in range(10):
        Am, Bm = _member_matrix(A, rng), _member_matrix(B, rng)
        sm = rng.uniform(s.lo, s.hi)
        assert (A + B).contains(Am + Bm)
        assert (A - B).contains(Am - Bm)
        assert (A * B).contains(Am * Bm)
        assert A.scale(s).contains(sm * Am)
        assert (-A).contains(-Am)
    # reshape/transpose preserve entries
    R = A.reshape(4, 9)
    assert np.array_equal(R.inf, A.inf.reshape(4, 9))
    assert np.array_equal(A.T.sup, A.sup.T)


def test_weighted_vector_norm_is_upper_bound():
    rng = np.random.default_rng(8)
    v = iv.IntervalMatrix(*np.sort(rng.standard_normal((2, 40)), axis=0))
    w = np.exp(rng.uniform(0, 3, size=40))
    wiv = iv.IntervalMatrix.point(w)
    bound = iv.weighted_vector_norm(v, wiv)
    exact = mp.fsum(mp.mpf(float(m)) * mp.mpf(float(ww))
                    for m, ww in zip(v.mag(), w))
    assert mp.mpf(bound.value) >= exact
    assert bound.value <= float(exact) * (1 + 1e-12)


def test_weighted_operator_norm_matches_bruteforce():
    rng = np.random.default_rng(9)
    T = iv.IntervalMatrix(*np.sort(rng.standard_normal((2, 30, 30)), axis=0))
    wr = np.exp(rng.uniform(0, 2, 30))
    wc = np.exp(rng.uniform(0, 2, 30))
    bound = iv.weighted_operator_norm(T, iv.IntervalMatrix.point(wr),
                                      iv.IntervalMatrix.point(wc))
    brute = max(
        mp.fsum(mp.mpf(float(T.mag()[i, j])) * mp.mpf(float(wr[i])) for i in range(30))
        / mp.mpf(float(wc[j]))
        for j in range(30)
    )
    assert mp.mpf(bound.value) >= brute
    assert bound.value <= float(brute) * (1 + 1e-12)
    # the bound is attained by a rank-one test operator: ||T|| * M_j >= sum_i |T_ij| M_i
    j = int(np.argmax([float(sum(T.mag()[:, j] * wr)) / wc[j] for j in range(30)]))
    assert bound.value * wc[j] >= float(sum(T.mag()[:, j] * wr)) * (1 - 1e-12)


def test_vec_exp_contains_exact():
    rng = np.random.default_rng(10)
    x = rng.uniform(-5, 5, size=50)
    lo, hi = iv.vec_exp(x, x)
    for xi, l, h in zip(x, lo, hi):
        assert mp.mpf(float(l)) <= mp.exp(mp.mpf(float(xi))) <= mp.mpf(float(h))
