"""Non-rigorous exploration of the truncated sine-Galerkin flow.

The PDE restricted to odd functions u = sum a_k(t) sin(kx) becomes the ODE

    da_k/dt = (k^2 - nu k^4) a_k
              + (k/2) ( sum_{l>=1} a_{k+l} a_l - 1/2 sum_{l+m=k} a_l a_m ),

truncated at N modes.  This module integrates it (adaptive RK45), finds
attracting periodic orbits via energy-minimum recurrences, scans the
period-doubling cascade, and converts one sampled period into a seed for the
Newton solver.  Nothing here is rigorous and nothing downstream relies on it.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "GalerkinState", "OrbitSeed", "CascadePoint",
    "galerkin_rhs", "energy", "integrate", "integrate_ode",
    "find_attracting_orbit", "cascade_scan", "cluster_levels",
    "second_order_minima", "minima_levels",
    "seed_to_orbit_candidate", "bisect_transition", "feigenbaum_ratio",
    "StepSizeUnderflow", "NoPeriodicityDetected", "InsufficientSamples",
]


class StepSizeUnderflow(RuntimeError):
    """The adaptive integrator could not proceed at the requested tolerance."""


class NoPeriodicityDetected(RuntimeError):
    pass


class InsufficientSamples(ValueError):
    pass


@dataclass
class GalerkinState:
    nu: float
    a: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.float64)
        if self.a.ndim != 1 or self.a.size < 1:
            raise ValueError("coefficient vector must be 1-d, length >= 1")
        if not np.isfinite(self.a).all():
            raise ValueError("coefficients must be finite")
        if not (self.nu > 0):
            raise ValueError("nu must be positive")

    @property
    def N(self) -> int:
        return self.a.size


@dataclass
class OrbitSeed:
    """One sampled period of an (apparently) attracting orbit.

    `samples[j]` is the state at time j*T/(len-1); the first and last rows
    should nearly coincide, and `recurrence` records their distance.
    """
    nu: float
    period: float
    samples: np.ndarray
    recurrence: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.shape[0] < 4:
            raise ValueError("need at least 4 samples over the period")
        if not (self.period > 0):
            raise ValueError("period must be positive")


@dataclass
class CascadePoint:
    """Distinct energy-minimum levels of the attractor at one parameter.

    `minima` clusters every local minimum of Energy(t).  The base cycle of
    this flow dips twice per loop (a deep and a shallow minimum), so the
    lower envelope of the cascade diagram is carried by `deep_minima`: the
    minima that are lower than both neighbouring minima.  Doubling stage m
    shows 2^m deep clusters.
    """
    one_over_nu: float
    minima: list[float] = field(default_factory=list)
    deep_minima: list[float] = field(default_factory=list)
    note: str = ""


# ---------------------------------------------------------------------------
# vector field

def _rhs(a: np.ndarray, nu: float) -> np.ndarray:
    N = a.size
    k = np.arange(1, N + 1)
    lin = (k * k - nu * k ** 4) * a
    corr = np.correlate(a, a, "full")[N - 1:]     # lag m = sum_l a_{l+m} a_l
    conv = np.convolve(a, a)                      # index s-2 = sum_{k+l=s} a_k a_l
    c1 = np.zeros(N)
    c1[: N - 1] = corr[1:N]
    c2 = np.zeros(N)
    c2[1:] = conv[: N - 1]
    return lin + 0.5 * k * (c1 - 0.5 * c2)


def galerkin_rhs(s: GalerkinState) -> np.ndarray:
    """Right-hand side of the truncated ODE at the given state."""
    return _rhs(s.a, s.nu)


def energy(s) -> float:
    """Euclidean norm of the coefficient vector (the L2 energy up to scale)."""
    a = s.a if isinstance(s, GalerkinState) else np.asarray(s)
    return float(np.sqrt((a * a).sum()))


# ---------------------------------------------------------------------------
# integration

def integrate_ode(rhs, a0, t_end, tol=1e-10, events=None, dense=True, t0=0.0):
    """solve_ivp RK45 wrapper with the package's failure convention."""
    sol = solve_ivp(rhs, (t0, t_end), np.asarray(a0, dtype=np.float64),
                    method="RK45", rtol=tol, atol=tol, events=events,
                    dense_output=dense)
    if sol.status == -1:
        raise StepSizeUnderflow(sol.message)
    return sol


def integrate(s: GalerkinState, t_end: float, tol: float = 1e-10,
              events=None, dense: bool = True):
    """Integrate the Galerkin flow from `s` over [0, t_end]."""
    if not (tol > 0):
        raise ValueError("tol must be positive")
    nu = s.nu
    return integrate_ode(lambda t, y: _rhs(y, nu), s.a, t_end, tol,
                         events=events, dense=dense)


def _energy_minimum_event(nu):
    # d/dt (|a|^2) crosses zero upward at an energy minimum
    def ev(t, y):
        return float(y @ _rhs(y, nu))
    ev.direction = 1.0
    return ev


# ---------------------------------------------------------------------------
# orbit detection

def find_attracting_orbit(nu: float, N: int = 20, transient_time: float = 200.0,
                          tol: float = 1e-10, observe_time: float = 40.0,
                          recurrence_tol: float = 1e-6,
                          n_samples: int = 256) -> OrbitSeed:
    """Integrate from sin(x) past the transient and return one sampled period.

    Periodicity is declared when the state at a later energy minimum returns
    to the state at a reference minimum within `recurrence_tol` (relative).
    """
    a0 = np.zeros(N)
    a0[0] = 1.0
    settle = integrate(GalerkinState(nu, a0), transient_time, tol, dense=False)
    a1 = settle.y[:, -1]

    sol = integrate(GalerkinState(nu, a1), observe_time, tol,
                    events=_energy_minimum_event(nu))
    tmin = sol.t_events[0]
    ymin = sol.y_events[0]
    if len(tmin) < 3:
        raise NoPeriodicityDetected(
            f"only {len(tmin)} energy minima in {observe_time} time units")

    base = 1  # skip the first minimum, it may still carry transient
    ref = ymin[base]
    scale = max(float(np.linalg.norm(ref)), 1e-30)
    for j in range(base + 1, len(tmin)):
        if np.linalg.norm(ymin[j] - ref) <= recurrence_tol * scale:
            period = float(tmin[j] - tmin[base])
            return _sample_period(nu, ref, period, tol, n_samples)
    raise NoPeriodicityDetected(
        f"no recurrence below {recurrence_tol:g} relative among "
        f"{len(tmin)} minima; smallest return distance "
        f"{min(np.linalg.norm(ymin[j] - ref) for j in range(base + 1, len(tmin))) / scale:.3e}")


def _sample_period(nu, a_start, period, tol, n_samples) -> OrbitSeed:
    sol = integrate(GalerkinState(nu, a_start), period, tol)
    ts = np.linspace(0.0, period, n_samples)
    samples = sol.sol(ts).T
    rec = float(np.linalg.norm(samples[-1] - samples[0]))
    return OrbitSeed(nu=nu, period=period, samples=samples, recurrence=rec)


# ---------------------------------------------------------------------------
# cascade scans

def cluster_levels(values, rel_tol: float = 1e-3) -> list[float]:
    """Cluster a 1-d value set greedily; returns sorted cluster means."""
    vals = np.sort(np.asarray(values, dtype=float))
    if vals.size == 0:
        return []
    clusters = [[vals[0]]]
    for v in vals[1:]:
        c = clusters[-1]
        center = sum(c) / len(c)
        if abs(v - center) <= rel_tol * max(abs(center), 1e-12):
            c.append(v)
        else:
            clusters.append([v])
    return [float(sum(c) / len(c)) for c in clusters]


def second_order_minima(values) -> list[float]:
    """Entries lower than both neighbours in a time-ordered minima sequence."""
    v = np.asarray(values, dtype=float)
    return [float(v[j]) for j in range(1, v.size - 1)
            if v[j] < v[j - 1] and v[j] < v[j + 1]]


def minima_levels(nu: float, N: int = 20, transient_time: float = 200.0,
                  observe_time: float = 40.0, tol: float = 1e-10,
                  skip: int = 3, floor: float = 1e-6) -> list[float]:
    """Energy values at the attractor's energy minima (raw, unclustered)."""
    a0 = np.zeros(N)
    a0[0] = 1.0
    settle = integrate(GalerkinState(nu, a0), transient_time, tol, dense=False)
    sol = integrate(GalerkinState(nu, settle.y[:, -1]), observe_time, tol,
                    events=_energy_minimum_event(nu), dense=False)
    ys = sol.y_events[0][skip:]
    return [energy(y) for y in ys if energy(y) > floor]


def cascade_scan(one_over_nu_values, N: int = 20, transient_time: float = 200.0,
                 observe_time: float = 40.0, tol: float = 1e-10,
                 rel_tol: float = 1e-3, threads: int = 1) -> list[CascadePoint]:
    """Distinct energy-minimum levels for each parameter value (plot-ready).

    Integrator failures at individual points are recorded in the point's
    `note` and do not abort the scan.
    """
    pts = [float(x) for x in one_over_nu_values]

    def work(x):
        try:
            raw = minima_levels(1.0 / x, N=N, transient_time=transient_time,
                                observe_time=observe_time, tol=tol)
            return CascadePoint(x, cluster_levels(raw, rel_tol),
                                cluster_levels(second_order_minima(raw), rel_tol))
        except Exception as exc:  # recorded, not fatal
            return CascadePoint(x, [], [], note=f"{type(exc).__name__}: {exc}")

    if threads <= 1:
        return [work(x) for x in pts]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(work, pts))


# ---------------------------------------------------------------------------
# seeds for the solver

def seed_to_orbit_candidate(seed: OrbitSeed, d1: int, d2: int):
    """DFT the sampled coefficient series in time; returns an OrbitCandidate.

    The orbit angle is theta = 2*pi*t/T, so sample j of an equispaced closed
    sweep sits at theta_j = 2*pi*j/(m); the final duplicate sample is dropped
    before the transform.
    """
    from .newton import OrbitCandidate
    from .fourier import TrigPoly2D

    series = seed.samples[:-1]           # drop duplicated endpoint
    m, N = series.shape
    if seed.samples.shape[0] < 2 * d2 + 2:
        raise InsufficientSamples(
            f"{seed.samples.shape[0]} samples cannot resolve d2={d2}")
    F = np.fft.rfft(series, axis=0) / m  # rows: k2 = 0..m//2
    a = np.zeros((d1, d2 + 1))
    b = np.zeros((d1, d2 + 1))
    rows = min(d1, N)
    a[:rows, 0] = F[0, :rows].real
    kmax = min(d2, F.shape[0] - 1)
    a[:rows, 1: kmax + 1] = 2.0 * F[1: kmax + 1, :rows].real.T
    b[:rows, 1: kmax + 1] = -2.0 * F[1: kmax + 1, :rows].imag.T
    u = TrigPoly2D(a, b, "odd")
    f = 2.0 * np.pi / seed.period
    return OrbitCandidate(nu=seed.nu, f=f, u=u)


# ---------------------------------------------------------------------------
# doubling thresholds

def bisect_transition(predicate, lo: float, hi: float, tol: float = 1e-7,
                      max_iter: int = 80) -> float:
    """Locate where a boolean predicate flips between lo and hi by bisection."""
    plo, phi = predicate(lo), predicate(hi)
    if plo == phi:
        raise ValueError("predicate does not change over the bracket")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if predicate(mid) == plo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def feigenbaum_ratio(x1: float, x2: float, x3: float) -> float:
    """(x2-x1)/(x3-x2) for three successive doubling thresholds."""
    return (x2 - x1) / (x3 - x2)
