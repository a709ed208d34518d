"""Preconditioned Newton solver for the rescaled invariance equation

    F(f, u) = f du/dtheta + L u + 1/2 d_x(u^2) = 0,

where u is an odd trig polynomial on the torus and f = 2*pi/period.  The
linearization is preconditioned by S_c^{-1} = (f d_theta + L + c)^{-1} and
bordered with a phase-condition row (killing the theta-translation family)
and the frequency-direction column:

    [ 0          row(u0)                          ] [sigma]   [ 0          ]
    [ S^-1 dth u0   Id - c S^-1 + S^-1 d_x(u0 .)  ] [delta] = [ -S^-1 e    ]

Everything here is plain floating point; rigor lives in the validator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import fourier as fx
from .fourier import TrigPoly2D, WeightParams

__all__ = [
    "OrbitCandidate", "BorderedMatrix", "NewtonReport",
    "residual", "preconditioned_residual", "phase_row", "assemble_A",
    "newton_solve", "solve_resolved", "continue_orbit", "fix_theta_phase",
    "sc_inv_rows",
    "SingularLinearSystem", "MaxIterExceeded", "DegenerateSeed", "StepUnderflow",
]

log = logging.getLogger(__name__)


class SingularLinearSystem(np.linalg.LinAlgError):
    pass


class MaxIterExceeded(RuntimeError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class DegenerateSeed(ValueError):
    """The seed has (numerically) no theta dependence; the phase row would vanish."""


class StepUnderflow(RuntimeError):
    def __init__(self, msg, family=None):
        super().__init__(msg)
        self.family = family


@dataclass
class OrbitCandidate:
    nu: float
    f: float
    u: TrigPoly2D

    def __post_init__(self):
        if not (self.f > 0):
            raise ValueError("frequency must be positive")
        if self.u.parity != "odd":
            raise ValueError("orbit representation must be odd in x")
        if not (self.nu > 0):
            raise ValueError("nu must be positive")

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.f

    def copy(self):
        return OrbitCandidate(self.nu, self.f, self.u.copy())


@dataclass
class BorderedMatrix:
    """(n+1)^2 dense matrix; row 0 = phase functional, column 0 = frequency
    direction, entry (0,0) = 0."""
    M: np.ndarray
    d1: int
    d2: int

    @property
    def n(self) -> int:
        return self.M.shape[0] - 1


@dataclass
class NewtonReport:
    iterates: list = field(default_factory=list)  # (residual norm, step norm)
    converged: bool = False
    final: OrbitCandidate | None = None

    @property
    def residual_norms(self):
        return [r for (r, _) in self.iterates]


# ---------------------------------------------------------------------------
# residuals

def residual(cand: OrbitCandidate) -> TrigPoly2D:
    """e = f u_theta + L u + 1/2 d_x(u^2), carried at full degrees (2d1, 2d2)."""
    u = cand.u
    lin = cand.f * fx.dtheta(u) + fx.apply_L(u, cand.nu)
    quad = fx.dx(fx.product(u, u)) * 0.5
    return lin.pad(2 * u.d1, 2 * u.d2) + quad


def preconditioned_residual(cand: OrbitCandidate, c: float | None = None) -> TrigPoly2D:
    """e~ = -S_c^{-1} e at full degrees; its norm drives the Newton loop."""
    if c is None:
        c = 1.0 / cand.nu
    e = residual(cand)
    return -1.0 * fx.apply_Sc_inv(e, cand.f, cand.nu, c)


# ---------------------------------------------------------------------------
# bordered operator

def phase_row(u0: TrigPoly2D) -> np.ndarray:
    """Coefficients of delta -> integral of delta * d_theta(u0) over the torus.

    Basis orthogonality reduces the integral to pi^2 per matched (k1, k2>=1)
    mode; k2 = 0 entries vanish.
    """
    return np.pi ** 2 * fx.poly_to_vec(fx.dtheta(u0))


def sc_inv_rows(M: np.ndarray, d1: int, d2: int, f: float, nu: float,
                c: float) -> np.ndarray:
    """Apply S_c^{-1} to every column of M (rows indexed like flat vectors)."""
    p = fx.sym_p(np.arange(1, d1 + 1), nu, c)
    out = M.reshape(d1, 2 * d2 + 1, -1).copy()
    out[:, 0, :] /= p[:, None]
    for k2 in range(1, d2 + 1):
        fk2 = f * k2
        det = p * p + fk2 * fk2
        a = out[:, 2 * k2 - 1, :]
        b = out[:, 2 * k2, :]
        na = (p[:, None] * a - fk2 * b) / det[:, None]
        nb = (fk2 * a + p[:, None] * b) / det[:, None]
        out[:, 2 * k2 - 1, :] = na
        out[:, 2 * k2, :] = nb
    return out.reshape(M.shape)


def assemble_A(cand: OrbitCandidate, c: float | None = None) -> BorderedMatrix:
    """Dense bordered matrix of the preconditioned, truncated linearization."""
    if c is None:
        c = 1.0 / cand.nu
    u0 = cand.u
    d1, d2 = u0.d1, u0.d2
    n = d1 * (2 * d2 + 1)
    G = fx.mult_dx_matrix(u0, d1, d2)
    core = sc_inv_rows(G, d1, d2, cand.f, cand.nu, c)
    core -= sc_inv_rows(c * np.eye(n), d1, d2, cand.f, cand.nu, c)
    core += np.eye(n)
    M = np.zeros((n + 1, n + 1))
    M[1:, 1:] = core
    M[0, 1:] = phase_row(u0)
    M[1:, 0] = fx.poly_to_vec(fx.apply_Sc_inv(fx.dtheta(u0), cand.f, cand.nu, c))
    return BorderedMatrix(M, d1, d2)


# ---------------------------------------------------------------------------
# solver

def fix_theta_phase(cand: OrbitCandidate) -> OrbitCandidate:
    """Shift theta so the sin(theta) coefficient of the k1=1 mode vanishes.

    Keeps continuation families smoothly parameterized; a pure gauge change.
    """
    a11, b11 = cand.u.a[0, 1], cand.u.b[0, 1]
    if a11 == 0.0 and b11 == 0.0:
        return cand
    shift = np.arctan2(b11, a11)
    return OrbitCandidate(cand.nu, cand.f, fx.shift_theta(cand.u, shift))


def newton_solve(seed: OrbitCandidate, tol: float = 5e-11, max_iter: int = 25,
                 c: float | None = None,
                 weights: WeightParams = WeightParams()) -> NewtonReport:
    """Newton iteration on the bordered system; see module docstring.

    Convergence when the preconditioned residual norm, or the update norm
    |sigma| + ||delta||_M, drops below tol.
    """
    if not (tol > 0):
        raise ValueError("tol must be positive")
    cand = seed.copy()
    dth_norm = fx.norm_M(fx.dtheta(cand.u), weights)
    if dth_norm <= 1e-12 * max(fx.norm_M(cand.u, weights), 1.0):
        raise DegenerateSeed(
            f"seed has no theta dependence (||d_theta u|| = {dth_norm:.3e})")

    report = NewtonReport()
    d1, d2 = cand.u.d1, cand.u.d2
    for it in range(max_iter):
        etil = preconditioned_residual(cand, c)
        res = fx.norm_M(etil, weights)
        if not np.isfinite(res):
            raise SingularLinearSystem("residual norm is not finite")
        if res < tol:
            report.iterates.append((res, 0.0))
            log.info("newton iter=%d residual=%.3e converged", it, res)
            report.converged = True
            report.final = fix_theta_phase(cand)
            return report
        A = assemble_A(cand, c).M
        rhs = np.concatenate(([0.0], fx.poly_to_vec(etil.truncate(d1, d2))))
        try:
            z = scipy.linalg.solve(A, rhs)
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
            raise SingularLinearSystem(str(exc)) from exc
        if not np.isfinite(z).all():
            raise SingularLinearSystem("linear solve produced non-finite update")
        sigma, dvec = z[0], z[1:]
        delta = fx.vec_to_poly(dvec, d1, d2)
        step = abs(sigma) + fx.norm_M(delta, weights)
        report.iterates.append((res, step))
        log.info("newton iter=%d residual=%.3e step=%.3e f=%.12f",
                 it, res, step, cand.f)
        cand = OrbitCandidate(cand.nu, cand.f + sigma, cand.u + delta)
        if step < tol:
            etil = preconditioned_residual(cand, c)
            report.iterates.append((fx.norm_M(etil, weights), 0.0))
            report.converged = True
            report.final = fix_theta_phase(cand)
            return report
    report.final = cand   # last iterate, so callers can still inspect it
    raise MaxIterExceeded(
        f"no convergence in {max_iter} iterations; last residual "
        f"{report.iterates[-1][0]:.3e}", report=report)


def tail_fractions(u: TrigPoly2D, frac: float = 0.1,
                   weights: WeightParams = WeightParams()):
    """Relative weight of the top `frac` of x- and theta-modes."""
    total = max(fx.norm_M(u, weights), 1e-300)
    k1_cut = int(np.ceil((1 - frac) * u.d1))
    k2_cut = int(np.ceil((1 - frac) * u.d2))
    mags = np.abs(u.a) + np.abs(u.b)
    M = fx.weight_matrix(u, weights)
    x_tail = float((mags[k1_cut:] * M[k1_cut:]).sum()) / total
    t_tail = float((mags[:, k2_cut:] * M[:, k2_cut:]).sum()) / total
    return x_tail, t_tail


def solve_resolved(seed: OrbitCandidate, tol: float = 5e-11, max_iter: int = 25,
                   tail_tol: float = 1e-8, max_rounds: int = 3,
                   weights: WeightParams = WeightParams()) -> NewtonReport:
    """newton_solve plus the mode-growth policy: while the top 10% of modes
    carry more than `tail_tol` relative norm, grow degrees by 1.5x and re-solve."""
    report = newton_solve(seed, tol, max_iter, weights=weights)
    for _ in range(max_rounds):
        u = report.final.u
        x_tail, t_tail = tail_fractions(u, weights=weights)
        if x_tail <= tail_tol and t_tail <= tail_tol:
            return report
        d1 = int(np.ceil(1.5 * u.d1)) if x_tail > tail_tol else u.d1
        d2 = int(np.ceil(1.5 * u.d2)) if t_tail > tail_tol else u.d2
        log.info("mode growth: tails (%.2e, %.2e) -> degrees (%d, %d)",
                 x_tail, t_tail, d1, d2)
        grown = OrbitCandidate(report.final.nu, report.final.f,
                               report.final.u.pad(d1, d2))
        report = newton_solve(grown, tol, max_iter, weights=weights)
    return report


# ---------------------------------------------------------------------------
# continuation

def continue_orbit(start: OrbitCandidate, nu_target: float, dnu_max: float,
                   tol: float = 5e-11, max_iter: int = 12,
                   dnu_min: float = 1e-12) -> list[OrbitCandidate]:
    """Natural-parameter continuation from `start` to nu_target.

    Adaptive step: halve on Newton failure, grow by 1.3 on success.  On step
    underflow raises StepUnderflow carrying the partial family.
    """
    family = [start.copy()]
    if nu_target == start.nu or dnu_max == 0.0:
        return family
    direction = np.sign(nu_target - start.nu)
    dnu = abs(dnu_max)
    current = start.copy()
    while current.nu != nu_target:
        dnu = min(dnu, abs(nu_target - current.nu))
        nu_next = current.nu + direction * dnu
        seed = OrbitCandidate(nu_next, current.f, current.u.copy())
        try:
            rep = newton_solve(seed, tol, max_iter)
            current = rep.final
            family.append(current)
            log.info("continuation nu=%.9f (1/nu=%.5f) f=%.9f ok",
                     current.nu, 1 / current.nu, current.f)
            dnu *= 1.3
        except (MaxIterExceeded, SingularLinearSystem) as exc:
            dnu *= 0.5
            log.info("continuation step to nu=%.9f failed (%s); dnu=%.3e",
                     nu_next, type(exc).__name__, dnu)
            if dnu < dnu_min:
                raise StepUnderflow(
                    f"continuation stalled at nu={current.nu:.9f}", family)
    return family
