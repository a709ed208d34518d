"""Non-rigorous stability classification of computed orbits.

Two independent methods, cross-checkable against each other:

* ``monodromy``: integrate the linearized (variational) flow
  f dv/dtheta = -L v - d_x(u(theta) v) over one period with v(0) = Id and
  read off Floquet multipliers of v(2*pi).
* ``operator_spectrum``: eigenvalues of the truncated operator
  f d_theta + L + d_x(u .) on the 2-D Fourier basis.  The spectrum comes in
  towers spaced by i*f; a horizontal strip of height f sees each tower once.

A multiplier lambda with |lambda| > 1 corresponds to a strip eigenvalue
-log(lambda)/T (mod i*f) with negative real part, so the operator method
counts Re < 0 as unstable.  Everything here runs in plain floats; certified
results never depend on this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import fourier as fx
from .flow import integrate_ode
from .newton import OrbitCandidate

__all__ = [
    "StabilityReport", "monodromy", "operator_spectrum",
    "dtheta_matrix", "multiplier_to_strip", "UNIT_CIRCLE_MARGIN",
]

UNIT_CIRCLE_MARGIN = 1e-6


@dataclass
class StabilityReport:
    method: str
    eigenvalues: np.ndarray
    unstable_dimension: int
    a: float | None = None
    marginal: int = 0

    def __post_init__(self):
        if self.method not in ("monodromy", "operator-spectrum"):
            raise ValueError(f"unknown method {self.method!r}")
        if not 0 <= self.unstable_dimension <= len(self.eigenvalues):
            raise ValueError("unstable_dimension out of range")


def _linear_symbol(N_x: int, nu: float) -> np.ndarray:
    k = np.arange(1, N_x + 1, dtype=np.float64)
    return nu * k ** 4 - k ** 2


def monodromy(cand: OrbitCandidate, N_x: int = 40, tol: float = 1e-10,
              margin: float = UNIT_CIRCLE_MARGIN) -> StabilityReport:
    """Floquet multipliers from the variational equation over one period.

    Unstable dimension counts |lambda| > 1 + margin; multipliers within
    `margin` of the unit circle (the trivial phase multiplier lives there)
    are tallied as marginal and excluded.
    """
    u = cand.u
    f, nu = cand.f, cand.nu
    ldiag = _linear_symbol(N_x, nu)
    X = fx.structure_tensor_x(u.d1, N_x)
    A, B = u.a, u.b
    k2 = np.arange(u.d2 + 1, dtype=np.float64)

    def rhs(theta, y):
        V = y.reshape(N_x, N_x)
        c = A @ np.cos(k2 * theta) + B @ np.sin(k2 * theta)
        M = np.tensordot(c, X, (0, 0))
        return ((-ldiag[:, None]) * V - M @ V).ravel() / f

    sol = integrate_ode(rhs, np.eye(N_x).ravel(), 2.0 * np.pi, tol=tol,
                        dense=False)
    V1 = sol.y[:, -1].reshape(N_x, N_x)
    multipliers = np.linalg.eigvals(V1)
    dist = np.abs(np.abs(multipliers) - 1.0)
    n_marginal = int(np.count_nonzero(dist <= margin))
    n_unstable = int(np.count_nonzero(np.abs(multipliers) > 1.0 + margin))
    order = np.argsort(-np.abs(multipliers))
    return StabilityReport("monodromy", multipliers[order], n_unstable,
                           marginal=n_marginal)


def dtheta_matrix(d1: int, d2: int) -> np.ndarray:
    """Matrix of d/dtheta on flat coefficient vectors."""
    n = d1 * (2 * d2 + 1)
    D = np.zeros((n, n))
    for k1 in range(1, d1 + 1):
        base = (k1 - 1) * (2 * d2 + 1)
        for k2 in range(1, d2 + 1):
            ia, ib = base + 2 * k2 - 1, base + 2 * k2
            D[ia, ib] = k2
            D[ib, ia] = -k2
    return D


def operator_spectrum(cand: OrbitCandidate, d1p: int | None = None,
                      d2p: int | None = None, a: float | None = None,
                      margin: float = UNIT_CIRCLE_MARGIN) -> StabilityReport:
    """Eigenvalues of f d_theta + L + d_x(u0 .) filtered to one strip.

    The strip {z : a <= Im(z) < a + f} (default a = -f/4) intersects each
    i*f-spaced eigenvalue tower once.  Eigenvalues with Re < -margin count
    as unstable; |Re| <= margin are marginal (the phase direction sits at 0).

    The default offset is a quarter period, not -f/2: real multipliers put
    their towers exactly on the integer grid Im = f*n (positive ones, e.g.
    the trivial multiplier) or the half grid Im = f*(n + 1/2) (negative
    ones, e.g. a period-doubling multiplier near -1), and a boundary placed
    on either grid lets round-off drop or double-count the whole family.
    Quarter-offset boundaries stay clear of both grids.
    """
    u = cand.u
    d1p = u.d1 if d1p is None else d1p
    d2p = u.d2 if d2p is None else d2p
    if d1p < u.d1 or d2p < u.d2:
        raise ValueError("truncation degrees must cover the orbit degrees")
    if a is None:
        a = -cand.f / 4.0
    T = fx.mult_dx_matrix(u, d1p, d2p) + cand.f * dtheta_matrix(d1p, d2p)
    ldiag = np.repeat(_linear_symbol(d1p, cand.nu), 2 * d2p + 1)
    T[np.diag_indices_from(T)] += ldiag
    eigs = scipy.linalg.eigvals(T)
    keep = (eigs.imag >= a) & (eigs.imag < a + cand.f)
    strip = eigs[keep]
    strip = strip[np.argsort(strip.real)]
    n_unstable = int(np.count_nonzero(strip.real < -margin))
    n_marginal = int(np.count_nonzero(np.abs(strip.real) <= margin))
    return StabilityReport("operator-spectrum", strip, n_unstable, a=a,
                           marginal=n_marginal)


def multiplier_to_strip(multiplier: complex, f: float, period: float,
                        a: float) -> complex:
    """Map a Floquet multiplier to its representative strip eigenvalue.

    mu = -log(multiplier)/T is an eigenvalue of the operator up to i*f*n;
    the representative is the tower member with Im in [a, a+f).
    """
    mu = -np.log(complex(multiplier)) / period
    shift = np.floor((mu.imag - a) / f)
    return mu - 1j * f * shift
