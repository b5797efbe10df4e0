"""Model parameters, influence kernels, and closed-form admissibility conditions.

The phase-plane constructions freeze the nonlocal alignment term at the edges
of its a-priori band [beta_min, beta_max] and compare against the linear
system p' = k - k*c*q, q' = p - beta*q.  Everything in this module is scalar
closed-form math: the eigenstructure of that system, the extended exponential
that unifies its oscillatory (spiral) and overdamped (node) branches, and the
inequalities guaranteeing that glued boundary segments close into a region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PhysParams",
    "AlignmentBand",
    "AuxEigen",
    "InfluenceModel",
    "AdmissibilityReport",
    "AdmissibilityViolated",
    "RegimeMismatch",
    "extended_exponential",
    "admissibility_weak",
    "admissibility_medium",
    "admissibility_weakly_singular",
]

# Regime borderline: |beta^2 - 4kc| below this (relative to kc) is treated as
# the repeated-eigenvalue case.
_DEGENERATE_RTOL = 1e-12


class RegimeMismatch(ValueError):
    """Alignment band incompatible with the requested construction."""


class AdmissibilityViolated(RuntimeError):
    """A closure condition fails; carries the (negative) margin."""

    def __init__(self, message: str, margin: float):
        super().__init__(message)
        self.margin = margin


@dataclass(frozen=True)
class PhysParams:
    """Force strength k, background density c, and the derived rate 2*sqrt(k/c).

    k = 0 is accepted so the solver can run force-free sanity cases; the
    threshold constructions require k > 0 and raise otherwise.
    """

    k: float
    c: float
    lam: float = field(init=False)

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"force strength must be nonnegative, got k={self.k}")
        if self.c <= 0:
            raise ValueError(f"background density must be positive, got c={self.c}")
        object.__setattr__(self, "lam", 2.0 * math.sqrt(self.k / self.c))

    @property
    def kc(self) -> float:
        return self.k * self.c

    @property
    def sqrt_kc(self) -> float:
        return math.sqrt(self.k * self.c)

    def require_repulsive(self) -> None:
        if self.k <= 0:
            raise ValueError("construction requires a strictly repulsive force (k > 0)")


@dataclass(frozen=True)
class AlignmentBand:
    """A-priori bounds on the alignment term along trajectories."""

    beta_min: float
    beta_max: float

    def __post_init__(self):
        if not (0.0 <= self.beta_min <= self.beta_max):
            raise ValueError(
                f"need 0 <= beta_min <= beta_max, got [{self.beta_min}, {self.beta_max}]"
            )

    @property
    def gap(self) -> float:
        return self.beta_max - self.beta_min

    def regime(self, params: PhysParams) -> str:
        """'weak' | 'strong' | 'medium' by comparing the band against 2*sqrt(kc)."""
        four_kc = 4.0 * params.kc
        if self.beta_max**2 < four_kc:
            return "weak"
        if self.beta_min**2 >= four_kc:
            return "strong"
        return "medium"


@dataclass(frozen=True)
class AuxEigen:
    """Eigenstructure of the frozen-beta linear system at one beta value.

    The coefficient matrix [[0, -kc], [1, -beta]] has eigenvalues
    (-beta +- sqrt(beta^2 - 4kc))/2: complex (spiral) when beta^2 < 4kc, real
    (node) when beta^2 > 4kc, repeated (degenerate) on the border.
    """

    beta: float
    regime: str  # "spiral" | "node" | "degenerate"
    tau: float  # sqrt(kc)/beta, +inf at beta = 0
    theta: float | None = None  # spiral half-frequency, sqrt(4kc - beta^2)/2
    gamma_plus: float | None = None  # node decay rates (beta +- sqrt(beta^2-4kc))/2
    gamma_minus: float | None = None
    z: float | None = None  # sqrt(4kc/beta^2 - 1), real only in the spiral regime

    @classmethod
    def from_beta(cls, beta: float, params: PhysParams) -> "AuxEigen":
        if beta < 0:
            raise ValueError(f"beta must be nonnegative, got {beta}")
        kc = params.kc
        disc = beta * beta - 4.0 * kc
        tau = math.inf if beta == 0 else math.sqrt(kc) / beta
        if abs(disc) <= _DEGENERATE_RTOL * max(kc, beta * beta):
            return cls(beta=beta, regime="degenerate", tau=tau, gamma_plus=beta / 2,
                       gamma_minus=beta / 2)
        if disc < 0:
            theta = 0.5 * math.sqrt(-disc)
            z = math.inf if beta == 0 else 2.0 * theta / beta
            return cls(beta=beta, regime="spiral", tau=tau, theta=theta, z=z)
        root = math.sqrt(disc)
        return cls(beta=beta, regime="node", tau=tau,
                   gamma_plus=(beta + root) / 2, gamma_minus=(beta - root) / 2)


def extended_exponential(tau: float) -> float:
    """The factor exp(atan(z)/z), z = sqrt(4 tau^2 - 1), continued to all tau > 0.

    For tau < 1/2 the continuation is ((1+y)/(1-y))^(1/(2y)) with
    y = sqrt(1 - 4 tau^2); at tau = 1/2 both branches give e.  Strictly
    decreasing from +inf (tau -> 0) to 1 (tau -> inf).
    """
    if math.isinf(tau):
        return 1.0
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    disc = 4.0 * tau * tau - 1.0
    if abs(disc) < 1e-14:
        return math.e
    if disc > 0:
        z = math.sqrt(disc)
        return math.exp(math.atan(z) / z)
    y = math.sqrt(-disc)
    # exp(log1p(2y/(1-y)) / (2y)) stays accurate as y -> 0
    return math.exp(math.log1p(2.0 * y / (1.0 - y)) / (2.0 * y))


def _exp_neg_pi_over_z(eigen: AuxEigen) -> float:
    """exp(-pi/z) for a spiral-regime beta; 1 in the beta = 0 limit."""
    if eigen.beta == 0.0:
        return 1.0
    if eigen.regime != "spiral":
        raise RegimeMismatch(
            f"exp(-pi/z) needs an oscillatory beta, got beta={eigen.beta} ({eigen.regime})"
        )
    return math.exp(-math.pi / eigen.z)


@dataclass(frozen=True)
class AdmissibilityReport:
    """Signed closure margin; the condition holds iff margin > 0."""

    holds: bool
    margin: float
    kind: str

    def require(self) -> None:
        if not self.holds:
            raise AdmissibilityViolated(
                f"{self.kind} closure condition fails (margin {self.margin:.6g})",
                self.margin,
            )


def admissibility_weak(params: PhysParams, band: AlignmentBand) -> AdmissibilityReport:
    """Closure condition when the whole band is oscillatory (beta_max^2 < 4kc).

    Holds iff
      (beta_max-beta_min)(1+e^{-pi/zt}) e^{-atan(zh)/zh}
          < sqrt(kc) (1 - e^{-pi/zh - pi/zt}),
    with zh, zt evaluated at beta_max, beta_min.  Margin = rhs - lhs.
    """
    params.require_repulsive()
    eh = AuxEigen.from_beta(band.beta_max, params)
    et = AuxEigen.from_beta(band.beta_min, params)
    if eh.regime != "spiral":
        raise RegimeMismatch(
            f"weak-alignment condition needs beta_max^2 < 4kc, got beta_max={band.beta_max}"
        )
    e_h = _exp_neg_pi_over_z(eh)
    e_t = _exp_neg_pi_over_z(et)
    lhs = band.gap * (1.0 + e_t) / extended_exponential(eh.tau)
    rhs = params.sqrt_kc * (1.0 - e_h * e_t)
    margin = rhs - lhs
    return AdmissibilityReport(margin > 0, margin, "weak")


def admissibility_medium(params: PhysParams, band: AlignmentBand) -> AdmissibilityReport:
    """Closure condition for beta_min^2 < 4kc <= beta_max^2.

    Holds iff sqrt(kc) E(tau_max) > (beta_max-beta_min)(1+e^{-pi/zt}), where E
    is the extended exponential on its overdamped branch.  Margin = lhs - rhs.
    """
    params.require_repulsive()
    eh = AuxEigen.from_beta(band.beta_max, params)
    et = AuxEigen.from_beta(band.beta_min, params)
    if eh.regime == "spiral" or et.regime != "spiral":
        raise RegimeMismatch(
            f"medium-alignment condition needs beta_min^2 < 4kc <= beta_max^2, "
            f"got band [{band.beta_min}, {band.beta_max}]"
        )
    lhs = params.sqrt_kc * extended_exponential(eh.tau)
    rhs = band.gap * (1.0 + _exp_neg_pi_over_z(et))
    margin = lhs - rhs
    return AdmissibilityReport(margin > 0, margin, "medium")


def admissibility_weakly_singular(
    params: PhysParams, band: AlignmentBand, rho_max: float
) -> AdmissibilityReport:
    """Closure condition for the integrable-kernel construction (weak case).

    Same shape as the weak condition but scaled by (1 - c/rho_max) because the
    first boundary segment starts on the line q = 1/rho_max instead of at the
    origin.  Requires rho_max > c.
    """
    params.require_repulsive()
    if rho_max <= params.c:
        raise ValueError(f"rho_max must exceed c={params.c}, got {rho_max}")
    eh = AuxEigen.from_beta(band.beta_max, params)
    et = AuxEigen.from_beta(band.beta_min, params)
    if eh.regime != "spiral":
        raise RegimeMismatch(
            f"weakly-singular weak condition needs beta_max^2 < 4kc, got beta_max={band.beta_max}"
        )
    e_h = _exp_neg_pi_over_z(eh)
    e_t = _exp_neg_pi_over_z(et)
    rhs = (
        params.sqrt_kc
        * (1.0 - params.c / rho_max)
        * extended_exponential(eh.tau)
        * (1.0 - e_h * e_t)
        / (1.0 + e_t)
    )
    margin = rhs - band.gap
    return AdmissibilityReport(margin > 0, margin, "weakly_singular")


# ---------------------------------------------------------------------------
# Influence kernels


@dataclass(frozen=True)
class InfluenceModel:
    """Alignment kernel on the unit torus, with the integrals the theory needs.

    Kernels are carried either by a closed-form family (so cell averages at any
    resolution are exact) or by tabulated cell averages.  `samples[d]` is the
    average of the periodic kernel over the displacement bin
    [d/n - 1/(2n), d/n + 1/(2n)); the mean of the samples equals the L1 norm.

    gamma is the integral of the decreasing rearrangement over (1/2, 1];
    gamma1/gamma2 generalize it to arbitrary thresholds.
    """

    kind: str  # "bounded" | "weakly_singular" | "tabulated"
    l1_norm: float
    psi_min: float | None = None
    psi_max: float | None = None
    gamma: float | None = None
    samples: np.ndarray | None = None
    family: tuple | None = None  # ("constant", psi0) | ("cosine", (lo, hi)) | ("inv_sqrt", (A, B))

    def __post_init__(self):
        if self.l1_norm < 0:
            raise ValueError("kernel L1 norm must be nonnegative")
        if self.gamma is not None and not (0.0 <= 2.0 * self.gamma <= self.l1_norm * (1 + 1e-12) + 1e-15):
            raise ValueError(
                f"need 0 <= 2*gamma <= l1_norm, got gamma={self.gamma}, l1={self.l1_norm}"
            )
        if self.samples is not None:
            s = np.asarray(self.samples, dtype=float)
            if np.any(s < 0):
                raise ValueError("tabulated kernel cell averages must be nonnegative")
            if abs(s.mean() - self.l1_norm) > 1e-12 * max(1.0, self.l1_norm):
                raise ValueError("tabulated cell averages inconsistent with the L1 norm")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def constant(psi0: float) -> "InfluenceModel":
        if psi0 < 0:
            raise ValueError("constant kernel value must be nonnegative")
        return InfluenceModel(
            kind="bounded", l1_norm=psi0, psi_min=psi0, psi_max=psi0,
            gamma=psi0 / 2, family=("constant", psi0),
        )

    @staticmethod
    def bounded_cosine(psi_min: float, psi_max: float) -> "InfluenceModel":
        """psi(x) = psi_min + (psi_max-psi_min)(1+cos(2 pi x))/2: radial, decreasing."""
        if not (0.0 <= psi_min <= psi_max):
            raise ValueError("need 0 <= psi_min <= psi_max")
        l1 = 0.5 * (psi_min + psi_max)
        gamma = psi_min / 2 + (psi_max - psi_min) * (0.25 - 0.5 / math.pi)
        return InfluenceModel(
            kind="bounded", l1_norm=l1, psi_min=psi_min, psi_max=psi_max,
            gamma=gamma, family=("cosine", (psi_min, psi_max)),
        )

    @staticmethod
    def inverse_sqrt(l1_norm: float, gamma: float) -> "InfluenceModel":
        """psi(x) = A |x|^{-1/2} + B on [-1/2, 1/2), fitted to (l1_norm, gamma).

        Integrable but unbounded at the origin.  Feasible when
        l1*(1 - 1/sqrt(2)) <= gamma <= l1/2.
        """
        a = (l1_norm - 2.0 * gamma) / (4.0 - 2.0 * math.sqrt(2.0))
        b = l1_norm - 2.0 * math.sqrt(2.0) * a
        if a < 0 or b < -1e-14:
            raise ValueError(
                f"(l1_norm={l1_norm}, gamma={gamma}) not representable by this family"
            )
        return InfluenceModel(
            kind="weakly_singular", l1_norm=l1_norm, psi_min=None, psi_max=None,
            gamma=gamma, family=("inv_sqrt", (a, max(b, 0.0))),
        )

    @staticmethod
    def from_samples(samples: np.ndarray, kind: str = "tabulated") -> "InfluenceModel":
        s = np.asarray(samples, dtype=float)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("kernel samples must be a 1-D array of cell averages")
        l1 = float(s.mean())
        gamma = _sorted_tail_integral(np.sort(s)[::-1], 0.5)
        return InfluenceModel(kind=kind, l1_norm=l1, gamma=gamma, samples=s)

    # -- derived quantities -------------------------------------------------

    def band(self, params: PhysParams) -> AlignmentBand:
        """A-priori band c*[psi_min, psi_max]; bounded kernels only."""
        if self.kind != "bounded" or self.psi_min is None or self.psi_max is None:
            raise ValueError(
                "pointwise band needs a bounded kernel; use band_from_bounds for "
                "integrable kernels"
            )
        return AlignmentBand(params.c * self.psi_min, params.c * self.psi_max)

    def gamma1(self, d: float) -> float:
        """Integral of the decreasing rearrangement over (d, 1]."""
        return self._rearranged_tail(d)

    def gamma2(self, d_hat: float) -> float:
        """Integral of the decreasing rearrangement over (d_hat, 1]."""
        return self._rearranged_tail(d_hat)

    def _rearranged_tail(self, d: float) -> float:
        if not (0.0 <= d <= 1.0):
            raise ValueError(f"threshold must lie in [0, 1], got {d}")
        if self.family is not None:
            name, args = self.family
            if name == "constant":
                return args * (1.0 - d)
            if name == "cosine":
                lo, hi = args
                # rearrangement of the cosine bump: psi*(y) = lo + (hi-lo)(1+cos(pi y))/2
                return lo * (1 - d) + 0.5 * (hi - lo) * ((1 - d) - math.sin(math.pi * d) / math.pi)
            if name == "inv_sqrt":
                a, b = args
                # psi*(y) = A sqrt(2) y^{-1/2} + B
                return 2.0 * math.sqrt(2.0) * a * (1.0 - math.sqrt(d)) + b * (1.0 - d)
        if self.samples is not None:
            return _sorted_tail_integral(np.sort(self.samples)[::-1], d)
        raise ValueError("kernel carries neither a closed form nor samples")

    def band_from_bounds(self, params: PhysParams, rho_min: float, rho_max: float) -> AlignmentBand:
        """Alignment band implied by density confinement to [rho_min, rho_max].

        beta_min = rho_min*l1 + (rho_max-rho_min)*gamma1(d),
        beta_max = rho_max*l1 - (rho_max-rho_min)*gamma2(d_hat),
        with d = (rho_max-c)/(rho_max-rho_min), d_hat = (c-rho_min)/(rho_max-rho_min).
        """
        c = params.c
        if not (0.0 <= rho_min < c < rho_max):
            raise ValueError(f"need 0 <= rho_min < c < rho_max, got [{rho_min}, {rho_max}]")
        spread = rho_max - rho_min
        d = (rho_max - c) / spread
        d_hat = (c - rho_min) / spread
        beta_min = rho_min * self.l1_norm + spread * self.gamma1(d)
        beta_max = rho_max * self.l1_norm - spread * self.gamma2(d_hat)
        return AlignmentBand(beta_min, beta_max)

    # -- tabulation ----------------------------------------------------------

    def tabulate(self, n: int) -> np.ndarray:
        """Exact cell averages on n displacement bins (closed-form families),
        or the stored samples when already tabulated at that resolution."""
        if self.samples is not None:
            if self.samples.size != n:
                raise ValueError(
                    f"kernel tabulated at {self.samples.size} cells, solver needs {n}"
                )
            return np.asarray(self.samples, dtype=float)
        if self.family is None:
            raise ValueError("kernel carries neither a closed form nor samples")
        name, args = self.family
        h = 1.0 / n
        d = np.arange(n)
        # displacement of each bin center, folded to [-1/2, 1/2)
        x = d / n
        x = np.where(x >= 0.5, x - 1.0, x)
        if name == "constant":
            return np.full(n, float(args))
        if name == "cosine":
            lo, hi = args
            # average of cos(2 pi x) over [x-h/2, x+h/2]
            avg_cos = (np.sin(2 * np.pi * (x + h / 2)) - np.sin(2 * np.pi * (x - h / 2))) / (
                2 * np.pi * h
            )
            return lo + 0.5 * (hi - lo) * (1.0 + avg_cos)
        if name == "inv_sqrt":
            a, b = args
            r = np.abs(x)
            vals = np.empty(n)
            for i in range(n):
                vals[i] = a * _avg_inv_sqrt_cell(r[i], h) + b
            return vals
        raise ValueError(f"unknown kernel family {name!r}")


def _sorted_tail_integral(values_desc: np.ndarray, d: float) -> float:
    """Integral over (d, 1] of the step function taking values_desc on the
    uniform cells ((i-1)/n, i/n] of (0, 1]."""
    n = values_desc.size
    h = 1.0 / n
    if d >= 1.0:
        return 0.0
    j = min(int(d / h), n - 1)  # cell containing d (0-based)
    partial = ((j + 1) * h - d) * values_desc[j]
    return float(partial + values_desc[j + 1 :].sum() * h)


def _avg_inv_sqrt_cell(r: float, h: float) -> float:
    """Cell average of |x|^{-1/2} (1-periodic) over [r-h/2, r+h/2], 0 <= r <= 1/2."""
    lo, hi = r - h / 2, r + h / 2
    if lo < 0.0:
        # cell contains the singularity at the origin
        return 2.0 * (math.sqrt(hi) + math.sqrt(-lo)) / h
    if hi > 0.5:
        # cell straddles the far point x = 1/2; the overhang reflects back
        inner = 2.0 * (math.sqrt(0.5) - math.sqrt(lo))
        over = 2.0 * (math.sqrt(0.5) - math.sqrt(0.5 - (hi - 0.5)))
        return (inner + over) / h
    return 2.0 * (math.sqrt(hi) - math.sqrt(lo)) / h
