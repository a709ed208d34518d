"""Floquet multipliers and strip spectra.

Oracles:
  * the zero state, where the variational flow is diagonal and multipliers
    are exactly exp((k^2 - nu k^4) T);
  * the trivial phase multiplier, pinned to 1 on any true periodic orbit;
  * internal consistency: towers repeat with spacing i*f, truncation
    refinement leaves leading eigenvalues in place.
"""

import numpy as np
import pytest

import ksorbits.fourier as fx
import ksorbits.newton as nt
import ksorbits.stability as st
from ksorbits.fourier import TrigPoly2D


def zero_candidate(nu=1.0 / 33.0, f=2.0 * np.pi):
    return nt.OrbitCandidate(nu, f, TrigPoly2D.zeros(4, 2))


def test_zero_state_multipliers_are_exponentials():
    # at u = 0 the variational equation decouples: multiplier of mode k is
    # exp((k^2 - nu k^4) T); at 1/nu = 33 exactly five modes grow
    cand = zero_candidate()
    rep = st.monodromy(cand, N_x=12, tol=1e-12)
    T = 2.0 * np.pi / cand.f
    k = np.arange(1, 13)
    want = np.sort(np.exp((k ** 2 - cand.nu * k ** 4) * T))[::-1]
    got = np.sort(np.abs(rep.eigenvalues))[::-1]
    np.testing.assert_allclose(got[:6], want[:6], rtol=1e-7)
    assert rep.unstable_dimension == 5
    assert rep.marginal == 0


def test_trivial_multiplier_on_attracting_orbit(orbit_3327):
    rep = st.monodromy(orbit_3327, N_x=40)
    lead = rep.eigenvalues[0]
    assert abs(lead - 1.0) < 1e-6
    assert rep.marginal >= 1
    assert rep.unstable_dimension == 0


def test_strip_towers_repeat_with_spacing_f(orbit_3327):
    cand = nt.OrbitCandidate(orbit_3327.nu, orbit_3327.f,
                             orbit_3327.u.truncate(24, 12))
    f = cand.f
    lo = st.operator_spectrum(cand, 28, 16, a=-f / 2)
    hi = st.operator_spectrum(cand, 28, 16, a=f / 2)
    # every tower crossing the lower strip crosses the upper one i*f higher;
    # tolerance reflects dense-eigensolver noise at operator norm ~ nu*d1^4
    lead = sorted(lo.eigenvalues, key=lambda z: abs(z.real))[:10]
    for mu in lead:
        d = np.min(np.abs(hi.eigenvalues - (mu + 1j * f)))
        assert d < 1e-5


def test_spectrum_stable_under_truncation_refinement(orbit_3327):
    cand = nt.OrbitCandidate(orbit_3327.nu, orbit_3327.f,
                             orbit_3327.u.truncate(24, 12))
    r1 = st.operator_spectrum(cand, 28, 16)
    r2 = st.operator_spectrum(cand, 32, 20)
    lead = sorted(r1.eigenvalues, key=lambda z: abs(z.real))[:5]
    for mu in lead:
        assert np.min(np.abs(r2.eigenvalues - mu)) < 1e-5


def test_dtheta_matrix_matches_derivative():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((5, 4))
    b = rng.standard_normal((5, 4))
    b[:, 0] = 0.0
    u = TrigPoly2D(a, b)
    D = st.dtheta_matrix(5, 3)
    np.testing.assert_allclose(D @ fx.poly_to_vec(u),
                               fx.poly_to_vec(fx.dtheta(u)), atol=1e-14)


def test_multiplier_strip_map_round_trip():
    rng = np.random.default_rng(4)
    f, T = 7.013, 2.0 * np.pi / 7.013
    a = -f / 2
    for _ in range(50):
        mu = complex(rng.uniform(-2, 2), rng.uniform(a, a + f))
        lam = np.exp(-mu * T)
        back = st.multiplier_to_strip(lam, f, T, a)
        assert abs(back - mu) < 1e-10