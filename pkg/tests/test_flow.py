"""Galerkin flow, orbit detection, cascade bookkeeping.

Oracles:
  * hand-derived single/two-mode right-hand sides (the quadratic term of a
    one-mode field feeds mode 2 with coefficient -1/2, nothing else);
  * a dealiased pseudo-spectral evaluation of -Lu - (u^2)'/2 built directly
    on FFTs, independent of the convolution code under test;
  * linearized decay rates exp((k^2 - nu k^4) t) at tiny amplitude.
"""

import numpy as np
import pytest

import ksorbits.flow as fl
from ksorbits.flow import GalerkinState


def spectral_rhs(nu, a):
    """Pseudo-spectral oracle for the sine-Galerkin right-hand side.

    Embeds the odd field into a complex spectrum on M >= 2N+2 points (no
    aliasing for a quadratic nonlinearity), squares on the grid, projects
    back, and reads off the sine coefficients of -Lu - (u^2)'/2.
    """
    a = np.asarray(a, dtype=float)
    N = a.size
    M = 4 * N + 4
    spec = np.zeros(M // 2 + 1, dtype=complex)
    spec[1:N + 1] = -0.5j * a * M          # sin(kx) = (e^{ikx}-e^{-ikx})/2i
    u = np.fft.irfft(spec, n=M)
    sq = np.fft.rfft(u * u) / M
    k = np.arange(1, N + 1)
    lin = (k ** 2 - nu * k ** 4) * a
    # (u^2)' picks 2*Re-part cosines -> derivative turns them into sines
    dsq_sin = -k * 2 * sq[1:N + 1].real    # d/dx of sum c_k cos(kx)
    return lin - 0.5 * dsq_sin


# ---------------------------------------------------------------------------
# right-hand side

def test_rhs_single_mode_hand_case():
    nu = 0.7
    s = GalerkinState(nu, np.array([1.0, 0.0, 0.0, 0.0]))
    rhs = fl.galerkin_rhs(s)
    # linear part: (1 - nu) on mode 1; u^2 = (1 - cos 2x)/2 so the
    # nonlinearity feeds mode 2 with -1/2 and nothing else.
    assert rhs[0] == pytest.approx(1.0 - nu, abs=1e-15)
    assert rhs[1] == pytest.approx(-0.5, abs=1e-15)
    assert rhs[2] == 0.0 and rhs[3] == 0.0


def test_rhs_matches_pseudo_spectral_oracle():
    rng = np.random.default_rng(7)
    for N in (4, 12, 33):
        for _ in range(20):
            a = rng.standard_normal(N)
            nu = float(rng.uniform(0.02, 1.5))
            got = fl.galerkin_rhs(GalerkinState(nu, a))
            want = spectral_rhs(nu, a)
            np.testing.assert_allclose(got, want, rtol=0, atol=1e-11)


def test_rhs_scaling_of_quadratic_term():
    # rhs(c*a) - c*linear = c^2 * (rhs(a) - linear): the nonlinearity is
    # exactly quadratic.
    rng = np.random.default_rng(8)
    a = rng.standard_normal(10)
    nu = 0.33
    k = np.arange(1, 11)
    lin = (k ** 2 - nu * k ** 4)
    q1 = fl.galerkin_rhs(GalerkinState(nu, a)) - lin * a
    q3 = fl.galerkin_rhs(GalerkinState(nu, 3.0 * a)) - lin * (3.0 * a)
    np.testing.assert_allclose(q3, 9.0 * q1, rtol=1e-13, atol=1e-13)


def test_energy_is_coefficient_norm():
    s = GalerkinState(1.0, np.array([3.0, 4.0]))
    assert fl.energy(s) == 5.0
    assert fl.energy(np.array([0.0, 0.0, 2.0])) == 2.0


# ---------------------------------------------------------------------------
# integration

def test_tiny_amplitude_decays_at_linear_rate():
    # At amplitude 1e-8 the quadratic term is negligible; each mode follows
    # exp((k^2 - nu k^4) t) to high relative accuracy.
    # Amplitude large enough that the leading modes sit far above the
    # integrator's absolute tolerance, horizon short enough that the
    # quadratic feed a1*a2 ~ 1e-13 stays negligible.  Step control is
    # atol + rtol*|y| per component, so the fast-decaying mode 3 is only
    # tracked to absolute accuracy ~ atol.
    nu = 2.0
    a0 = 1e-6 * np.array([1.0, 0.5, 0.25])
    t1 = 0.03
    sol = fl.integrate(GalerkinState(nu, a0.copy()), t1, tol=1e-12)
    k = np.arange(1, 4)
    want = a0 * np.exp((k ** 2 - nu * k ** 4) * t1)
    got = sol.y[:, -1]
    np.testing.assert_allclose(got[:2], want[:2], rtol=1e-7)
    np.testing.assert_allclose(got[2], want[2], rtol=1e-3)


def test_all_modes_decay_above_viscosity_one():
    rng = np.random.default_rng(9)
    s0 = GalerkinState(1.3, 0.5 * rng.standard_normal(8))
    e0 = fl.energy(s0)
    sol = fl.integrate(s0, 60.0, tol=1e-10)
    assert fl.energy(sol.y[:, -1]) < 1e-6 * e0


# ---------------------------------------------------------------------------
# minima bookkeeping

def test_cluster_levels_merges_within_relative_gap():
    got = fl.cluster_levels([1.0, 1.0004, 2.0, 2.0, 0.1], rel_tol=1e-3)
    assert len(got) == 3
    assert got[0] == pytest.approx(0.1)
    assert got[1] == pytest.approx(1.0002)
    assert got[2] == pytest.approx(2.0)
    assert fl.cluster_levels([]) == []


def test_second_order_minima_keeps_deep_entries():
    # alternating deep/shallow minima: only the deep ones survive
    vals = [3.0, 1.0, 3.0, 2.0, 3.0, 1.1, 3.0]
    assert fl.second_order_minima(vals) == [1.0, 2.0, 1.1]
    assert fl.second_order_minima([5.0, 4.0]) == []


def test_bisect_transition_locates_threshold():
    root = fl.bisect_transition(lambda x: x ** 2 > 2.0, 0.0, 2.0, tol=1e-9)
    assert root == pytest.approx(np.sqrt(2.0), abs=1e-8)
    with pytest.raises(ValueError):
        fl.bisect_transition(lambda x: True, 0.0, 1.0)


def test_feigenbaum_ratio_on_logistic_map_thresholds():
    # classic logistic-map doubling parameters; the ratio of successive gaps
    # should already be near 4.669 at this depth
    r1, r2, r3 = 3.4494897, 3.5440903, 3.5644073
    q = fl.feigenbaum_ratio(r1, r2, r3)
    assert q == pytest.approx(4.66, abs=0.2)


# ---------------------------------------------------------------------------
# seeding

def test_seed_and_candidate_roundtrip(seed_3327):
    seed = seed_3327
    assert seed.period > 0.5
    assert seed.recurrence < 1e-6
    n, N = seed.samples.shape
    assert N == 20
    cand = fl.seed_to_orbit_candidate(seed, 40, 19)
    assert cand.f == pytest.approx(2 * np.pi / seed.period, rel=1e-12)
    # evaluating the trig interpolant at the sample times reproduces the
    # stored first-mode samples up to the recurrence mismatch
    theta = 2 * np.pi * np.arange(n - 1) / (n - 1)
    k2 = np.arange(cand.u.d2 + 1)
    mode1 = cand.u.a[0] @ np.cos(np.outer(k2, theta)) \
        + cand.u.b[0] @ np.sin(np.outer(k2, theta))
    np.testing.assert_allclose(mode1, seed.samples[:-1, 0], atol=5e-4)


def test_seed_with_too_few_samples_rejected(seed_3327):
    import dataclasses
    stub = dataclasses.replace(seed_3327, samples=seed_3327.samples[:8])
    with pytest.raises(fl.InsufficientSamples):
        fl.seed_to_orbit_candidate(stub, 40, 19)


def test_no_periodicity_on_decaying_flow():
    with pytest.raises(fl.NoPeriodicityDetected):
        fl.find_attracting_orbit(2.0, N=6, transient_time=5.0,
                                 observe_time=10.0)
