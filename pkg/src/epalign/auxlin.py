"""Closed-form solutions and crossing-time solvers for the frozen-beta system

    p' = k - k c q,
    q' = p - beta q.

Shifting to the equilibrium (beta/c, 1/c) gives a constant-coefficient 2x2
system whose flow is written with one formula valid in all regimes:

    P(t) = e^{-beta t/2} [ P0 C(t) + (beta P0/2 - kc Q0) S(t) ],
    Q(t) = e^{-beta t/2} [ Q0 C(t) + (P0 - beta Q0/2) S(t) ],

where C, S are the cosh/sinh pair of sqrt(mu) t with mu = beta^2/4 - kc,
continued through mu <= 0 (cos/sin for mu < 0, polynomials at mu = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .params import AuxEigen, PhysParams

__all__ = [
    "PhasePoint",
    "AuxTrajectory",
    "NoCrossing",
    "solve_aux",
    "crossing_time_q",
    "trajectory_segment",
    "phase_flow",
]


class PhasePoint(NamedTuple):
    p: float
    q: float


class NoCrossing(RuntimeError):
    """No q-crossing of the requested kind; carries the searched interval."""

    def __init__(self, message: str, interval: tuple[float, float]):
        super().__init__(f"{message} (searched t in [{interval[0]:.6g}, {interval[1]:.6g}])")
        self.interval = interval


def _cs(mu, t):
    """(cosh(sqrt(mu) t), sinh(sqrt(mu) t)/sqrt(mu)) continued through mu <= 0."""
    mu = np.asarray(mu, dtype=float)
    t = np.asarray(t, dtype=float)
    w = mu * t * t
    small = np.abs(w) < 1e-10
    # series in w = mu t^2; relative error below 1e-30 at the switch point
    c_series = 1.0 + w / 2.0 + w * w / 24.0
    s_series = t * (1.0 + w / 6.0 + w * w / 120.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.sqrt(np.abs(mu))
        arg = root * t
        c_exact = np.where(mu > 0, np.cosh(np.where(mu > 0, arg, 0.0)),
                           np.cos(np.where(mu <= 0, arg, 0.0)))
        s_exact = np.where(mu > 0, np.sinh(np.where(mu > 0, arg, 0.0)),
                           np.sin(np.where(mu <= 0, arg, 0.0))) / np.where(root == 0, 1.0, root)
    c = np.where(small, c_series, c_exact)
    s = np.where(small, s_series, s_exact)
    return c, s


def phase_flow(p, q, beta, t, params: PhysParams):
    """Exact flow of the frozen-beta system; broadcasts over array inputs."""
    kc = params.kc
    c = params.c
    beta = np.asarray(beta, dtype=float)
    big_p = np.asarray(p, dtype=float) - beta / c
    big_q = np.asarray(q, dtype=float) - 1.0 / c
    mu = beta * beta / 4.0 - kc
    cc, ss = _cs(mu, t)
    damp = np.exp(-beta * np.asarray(t, dtype=float) / 2.0)
    p_new = beta / c + damp * (big_p * cc + (beta / 2.0 * big_p - kc * big_q) * ss)
    q_new = 1.0 / c + damp * (big_q * cc + (big_p - beta / 2.0 * big_q) * ss)
    return p_new, q_new


@dataclass(frozen=True)
class AuxTrajectory:
    """Solution of the frozen-beta system through a given starting point."""

    beta: float
    start: PhasePoint
    params: PhysParams
    eigen: AuxEigen

    @property
    def equilibrium(self) -> PhasePoint:
        return PhasePoint(self.beta / self.params.c, 1.0 / self.params.c)

    def evaluate(self, t):
        """(p(t), q(t)); t may be a scalar or an array."""
        return phase_flow(self.start.p, self.start.q, self.beta, t, self.params)

    def q_of(self, t):
        return self.evaluate(t)[1]

    def q_rate(self, t):
        p, q = self.evaluate(t)
        return p - self.beta * q


def solve_aux(beta: float, start, params: PhysParams) -> AuxTrajectory:
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    start = PhasePoint(*start)
    return AuxTrajectory(beta=beta, start=start, params=params,
                         eigen=AuxEigen.from_beta(beta, params))


def _scan_step(traj: AuxTrajectory) -> float:
    """Backward scan resolution: a fraction of the oscillation half-period in
    the spiral regime, of the slow decay time otherwise."""
    e = traj.eigen
    if e.regime == "spiral":
        return (math.pi / e.theta) / 16.0
    rate = e.gamma_minus if e.gamma_minus and e.gamma_minus > 0 else e.gamma_plus
    return 0.25 / rate


def _bisect_polish(traj: AuxTrajectory, q_target: float, lo: float, hi: float,
                   tol: float) -> float:
    """Bisection on q(t) - q_target over [lo, hi] plus one Newton polish."""
    f_lo = traj.q_of(lo) - q_target
    f_hi = traj.q_of(hi) - q_target
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise NoCrossing("residual has constant sign on the bracket", (lo, hi))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = traj.q_of(mid) - q_target
        if f_mid == 0.0 or (hi - lo) < 1e-16 * max(1.0, abs(lo)):
            lo = hi = mid
            break
        if f_lo * f_mid <= 0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    t = 0.5 * (lo + hi)
    rate = traj.q_rate(t)
    if rate != 0.0:
        step = (traj.q_of(t) - q_target) / rate
        if abs(step) < max(1e-12, 1e-6 * abs(t)):
            t -= step
    if abs(traj.q_of(t) - q_target) > tol:
        raise NoCrossing("root refinement failed to reach tolerance", (lo, hi))
    return float(t)


def crossing_time_q(traj: AuxTrajectory, q_target: float, mode: str = "first_negative",
                    bracket: tuple[float, float] | None = None,
                    t_max: float | None = None) -> float:
    """Negative time at which the trajectory's q-component crosses q_target.

    mode:
      "first_negative"  -- crossing of largest t < 0 (scan backwards until the
                           residual changes sign);
      "unique_negative" -- expand the bracket by doubling; the residual must be
                           monotone through the crossing;
      "bracketed"       -- search only inside `bracket`.

    Returns t with |q(t) - q_target| < 1e-12 * max(1, |q_target|).
    """
    tol = 1e-12 * max(1.0, abs(q_target))
    if mode == "bracketed":
        if bracket is None:
            raise ValueError("bracketed mode needs a bracket")
        lo, hi = min(bracket), max(bracket)
        return _bisect_polish(traj, q_target, lo, hi, tol)

    h = _scan_step(traj)
    if t_max is None:
        t_max = 4000.0 * h

    if mode == "first_negative":
        # start just below 0 so a crossing at t = 0 (start on the target line)
        # is not reported
        t_prev = -1e-9 * max(1.0, h)
        f_prev = traj.q_of(t_prev) - q_target
        t = -h
        while t >= -t_max:
            f = traj.q_of(t) - q_target
            if f == 0.0:
                return float(t)
            if f_prev * f < 0:
                return _bisect_polish(traj, q_target, t, t_prev, tol)
            t_prev, f_prev = t, f
            t -= h
        raise NoCrossing("no sign change while scanning backwards", (-t_max, 0.0))

    if mode == "unique_negative":
        t_hi = -1e-9 * max(1.0, h)
        f_hi = traj.q_of(t_hi) - q_target
        t_lo = -h
        while t_lo >= -t_max:
            f_lo = traj.q_of(t_lo) - q_target
            if f_lo == 0.0:
                return float(t_lo)
            if f_lo * f_hi < 0:
                return _bisect_polish(traj, q_target, t_lo, t_hi, tol)
            t_hi, f_hi = t_lo, f_lo
            t_lo *= 2.0
        raise NoCrossing("no sign change while expanding the bracket", (-t_max, 0.0))

    raise ValueError(f"unknown crossing mode {mode!r}")


def trajectory_segment(traj: AuxTrajectory, t_from: float, t_to: float,
                       n_samples: int = 512):
    """Uniform-t polyline along the trajectory; endpoints exact.

    Returns (ts, pts) with pts of shape (n_samples, 2).
    """
    if not t_from < t_to:
        raise ValueError(f"need t_from < t_to, got [{t_from}, {t_to}]")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    ts = np.linspace(t_from, t_to, n_samples)
    p, q = traj.evaluate(ts)
    return ts, np.column_stack([p, q])
