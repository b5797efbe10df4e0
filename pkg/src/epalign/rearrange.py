"""Decreasing rearrangement of a tabulated kernel and sharpened bounds on the
convolution psi * rho under a mass constraint and box constraints on rho.

For any density with integral c and rho_min <= rho <= rho_max,

    rho_min ||psi||_1 + (rho_max - rho_min) gamma1(d)
        <= (psi * rho)(x)
        <= rho_max ||psi||_1 - (rho_max - rho_min) gamma2(d_hat),

where gamma1/gamma2 are tail integrals of the decreasing rearrangement at the
thresholds d = (rho_max - c)/(rho_max - rho_min), d_hat = (c - rho_min)/
(rho_max - rho_min).  The extremizers are bang-bang densities, which the
discrete greedy oracle below constructs exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RearrangedKernel",
    "BoundsConfig",
    "BadBoundsConfig",
    "rearrange_kernel",
    "improved_bounds",
    "bound_oracle",
]


class BadBoundsConfig(ValueError):
    """Density box incompatible with the mass constraint."""


@dataclass(frozen=True)
class BoundsConfig:
    """Density box [rho_min, rho_max] around the mean c, with the derived
    rearrangement thresholds."""

    rho_min: float
    rho_max: float
    c: float
    d: float = field(init=False)
    d_hat: float = field(init=False)

    def __post_init__(self):
        if not (0.0 <= self.rho_min < self.c < self.rho_max):
            raise BadBoundsConfig(
                f"need 0 <= rho_min < c < rho_max, got "
                f"[{self.rho_min}, {self.rho_max}] around c={self.c}"
            )
        spread = self.rho_max - self.rho_min
        object.__setattr__(self, "d", (self.rho_max - self.c) / spread)
        object.__setattr__(self, "d_hat", (self.c - self.rho_min) / spread)

    @property
    def spread(self) -> float:
        return self.rho_max - self.rho_min

    @property
    def symmetric(self) -> bool:
        return abs(self.rho_min + self.rho_max - 2.0 * self.c) <= 1e-12 * self.c


@dataclass(frozen=True)
class RearrangedKernel:
    """Non-increasing cell values of the rearranged kernel on (0, 1]."""

    values: np.ndarray  # sorted non-increasing
    cell_width: float
    l1_norm: float
    gamma: float  # tail integral over (1/2, 1]

    def tail_integral(self, d: float) -> float:
        """Integral of the rearranged step function over (d, 1]."""
        if not (0.0 <= d <= 1.0):
            raise ValueError(f"threshold must lie in [0, 1], got {d}")
        if d >= 1.0:
            return 0.0
        n = self.values.size
        h = self.cell_width
        j = min(int(d / h), n - 1)
        partial = ((j + 1) * h - d) * self.values[j]
        return float(partial + self.values[j + 1 :].sum() * h)

    def gamma1(self, d: float) -> float:
        return self.tail_integral(d)

    def gamma2(self, d_hat: float) -> float:
        return self.tail_integral(d_hat)


def rearrange_kernel(samples: np.ndarray) -> RearrangedKernel:
    """Sort cell averages into the decreasing rearrangement; exact cell sums."""
    s = np.asarray(samples, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("kernel samples must be a nonempty 1-D array")
    if np.any(s < 0):
        raise ValueError("kernel cell averages must be nonnegative")
    values = np.sort(s)[::-1].copy()
    n = values.size
    h = 1.0 / n
    l1 = float(values.sum() * h)
    j = min(int(0.5 / h), n - 1)
    gamma = float(((j + 1) * h - 0.5) * values[j] + values[j + 1 :].sum() * h)
    return RearrangedKernel(values=values, cell_width=h, l1_norm=l1, gamma=gamma)


def improved_bounds(kernel: RearrangedKernel, cfg: BoundsConfig) -> tuple[float, float]:
    """(lower, upper) bounds on psi * rho for densities confined by cfg."""
    lower = cfg.rho_min * kernel.l1_norm + cfg.spread * kernel.gamma1(cfg.d)
    upper = cfg.rho_max * kernel.l1_norm - cfg.spread * kernel.gamma2(cfg.d_hat)
    return float(lower), float(upper)


def bound_oracle(samples: np.ndarray, cfg: BoundsConfig, target: str = "min"):
    """Exact extremum of sum_i psi_i rho_i dx over the discrete feasible set
    { rho_min <= rho_i <= rho_max, sum_i rho_i dx = c }.

    Greedy bang-bang assignment: sort psi descending and saturate the
    clamped level at the large-psi cells (rho_min for "min", rho_max for
    "max"); at most one cell is fractional.  Ties broken by cell index.

    Returns (value, density) with the density in the original cell order.
    """
    s = np.asarray(samples, dtype=float)
    if np.any(s < 0):
        raise ValueError("kernel cell averages must be nonnegative")
    if target not in ("min", "max"):
        raise ValueError(f"target must be 'min' or 'max', got {target!r}")
    n = s.size
    h = 1.0 / n
    # stable descending sort: by (-psi, index)
    order = np.lexsort((np.arange(n), -s))
    rho = np.full(n, cfg.rho_max if target == "min" else cfg.rho_min)
    # mass to shed (min) or to add (max) by converting large-psi cells
    if target == "min":
        excess = cfg.rho_max - cfg.c  # = sum rho h - c
    else:
        excess = cfg.c - cfg.rho_min
    per_cell = h * cfg.spread
    full = int(excess / per_cell)
    frac = excess - full * per_cell
    if full > n or (full == n and frac > 1e-15):
        raise BadBoundsConfig("mass constraint infeasible for the density box")
    sat_level = cfg.rho_min if target == "min" else cfg.rho_max
    rho[order[:full]] = sat_level
    if full < n and frac > 0:
        if target == "min":
            rho[order[full]] = cfg.rho_max - frac / h
        else:
            rho[order[full]] = cfg.rho_min + frac / h
    value = float(np.dot(s, rho) * h)
    return value, rho
