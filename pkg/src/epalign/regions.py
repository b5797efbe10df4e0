"""Phase-plane region construction and membership queries.

Regions live in the (p, q) half-plane q > 0, where p = G/rho and q = 1/rho
along characteristics.  Boundaries are glued from trajectories of the
frozen-beta auxiliary systems:

  sigma1   closed; whole band oscillatory (weak alignment)
  sigma2   unbounded; whole band overdamped (strong alignment)
  sigma3   closed; band straddling the border (medium alignment)
  delta1   complement of a closed enclosure (weak-alignment breakdown)
  delta2   unbounded set left of the glued curves (strong/medium breakdown)
  sigma_l  region for integrable kernels, confined to q >= 1/rho_max

The involution F(p, q) = (p/q, 1/q) carries a region to the (G, rho) plane;
membership there resolves back through F, with rho = 0 queries answered by
the region's axis ray when it has one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import auxlin
from .params import (
    AdmissibilityReport,
    AdmissibilityViolated,
    AlignmentBand,
    AuxEigen,
    InfluenceModel,
    PhysParams,
    RegimeMismatch,
    admissibility_medium,
    admissibility_weak,
    admissibility_weakly_singular,
    extended_exponential,
)
from .rearrange import BoundsConfig

__all__ = [
    "Segment",
    "RegionScaffold",
    "Region",
    "MembershipVerdict",
    "build_sigma1",
    "build_sigma2",
    "build_sigma3",
    "build_delta1",
    "build_delta2",
    "build_sigma_l",
    "build_region",
    "to_grho",
    "membership",
    "sample_interior",
    "boundary_rows",
    "scaffold_dict",
]

SUBCRITICAL_KINDS = ("sigma1", "sigma2", "sigma3", "sigma_l")
SUPERCRITICAL_KINDS = ("delta1", "delta2")

_DEFAULT_SAMPLES = 512
_DEFAULT_EPS_SCALE = 1e-6


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class Segment:
    label: str
    ts: np.ndarray  # trajectory times; nan for straight edges
    pts: np.ndarray  # (n, 2), columns (p, q) or (G, rho) depending on plane


@dataclass(frozen=True)
class RegionScaffold:
    kind: str
    params: PhysParams
    band: AlignmentBand
    p1: float | None = None
    p2: float | None = None
    p3: float | None = None
    t1: float | None = None
    t2: float | None = None
    t3: float | None = None
    q_star: float | None = None
    admissibility: AdmissibilityReport | None = None
    rho_bounds: tuple[float, float] | None = None
    case: str | None = None  # alignment case for sigma_l


@dataclass(frozen=True)
class MembershipVerdict:
    label: str  # "inside" | "outside" | "indeterminate"
    distance_estimate: float


# ---------------------------------------------------------------------------
# geometry helpers


def _point_in_polygon(poly: np.ndarray, p: float, q: float) -> bool:
    """Crossing-number test against a closed polygon (first != last is fine)."""
    x, y = poly[:, 0], poly[:, 1]
    x2, y2 = np.roll(x, -1), np.roll(y, -1)
    crosses = (y > q) != (y2 > q)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_int = x + (q - y) * (x2 - x) / (y2 - y)
    hits = crosses & (x_int > p)
    return bool(np.count_nonzero(hits) % 2 == 1)


def _dist_to_polyline(pts: np.ndarray, p: float, q: float) -> float:
    a = pts[:-1]
    b = pts[1:]
    ab = b - a
    ap = np.array([p, q]) - a
    denom = np.einsum("ij,ij->i", ab, ab)
    tpar = np.clip(np.divide(np.einsum("ij,ij->i", ap, ab), np.where(denom == 0, 1.0, denom)), 0.0, 1.0)
    proj = a + tpar[:, None] * ab
    d = np.hypot(proj[:, 0] - p, proj[:, 1] - q)
    return float(d.min())


def _dist_to_ray(origin: np.ndarray, direction: np.ndarray, p: float, q: float) -> float:
    v = np.array([p, q]) - origin
    t = max(0.0, float(np.dot(v, direction)) / float(np.dot(direction, direction)))
    proj = origin + t * direction
    return float(math.hypot(proj[0] - p, proj[1] - q))


@dataclass
class _Profile:
    """q-monotone boundary chains enabling vectorized in/out tests."""

    kind: str  # "between" | "outside_between" | "right_of" | "left_of"
    q_floor: float
    q_top: float | None
    left_q: np.ndarray | None = None
    left_p: np.ndarray | None = None
    right_q: np.ndarray | None = None
    right_p: np.ndarray | None = None
    chain_q: np.ndarray | None = None
    chain_p: np.ndarray | None = None
    extrap_slope: float = 0.0

    def margins(self, p, q):
        """Signed proxy margin: > 0 inside, < 0 outside; magnitude is an
        estimate of the boundary distance (exact sign at polyline level)."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if self.kind in ("between", "outside_between"):
            lp = np.interp(q, self.left_q, self.left_p)
            rp = np.interp(q, self.right_q, self.right_p)
            m = np.minimum.reduce([p - lp, rp - p, q - self.q_floor, self.q_top - q])
            if self.kind == "outside_between":
                m = np.minimum(q, -m)
            return m
        chain_top = self.chain_q[-1]
        bp = np.interp(q, self.chain_q, self.chain_p)
        above = q > chain_top
        if np.any(above):
            bp = np.where(above, self.chain_p[-1] + self.extrap_slope * (q - chain_top), bp)
        horiz = p - bp if self.kind == "right_of" else bp - p
        return np.minimum(horiz, q - self.q_floor)


class Region:
    """A labeled region: boundary polylines plus membership logic.

    Immutable after construction; all queries are pure.
    """

    def __init__(self, *, kind: str, scaffold: RegionScaffold, segments: list[Segment],
                 closure: str, sense: str, profile: _Profile, floor_q: float,
                 q_cap: float, rho_cap: float, rho_zero_ray: tuple | None,
                 epsilon_boundary: float, plane: str = "pq",
                 boundary_rays: list[tuple[np.ndarray, np.ndarray]] | None = None,
                 pq_source: "Region | None" = None,
                 literal_paper_boundary: bool = False):
        self.kind = kind
        self.scaffold = scaffold
        self.segments = segments
        self.closure = closure
        self.sense = sense
        self.plane = plane
        self.floor_q = floor_q
        self.q_cap = q_cap
        self.rho_cap = rho_cap
        self.rho_zero_ray = rho_zero_ray
        self.epsilon_boundary = epsilon_boundary
        self.literal_paper_boundary = literal_paper_boundary
        self._profile = profile
        self._rays = boundary_rays or []
        self._pq = pq_source
        if plane == "pq":
            self._polygon = self._assemble_polygon()

    # -- construction helpers ------------------------------------------------

    def _assemble_polygon(self) -> np.ndarray | None:
        if self.sense not in ("between", "enclosed", "outside_between", "complement"):
            return None
        walk = [seg.pts for seg in self.segments]
        return np.vstack(walk)

    @property
    def subcritical(self) -> bool:
        return self.kind in SUBCRITICAL_KINDS

    # -- membership ----------------------------------------------------------

    def _to_pq_point(self, point, plane: str):
        """Resolve a query point to pq coordinates, or to an axis-ray verdict."""
        a, b = float(point[0]), float(point[1])
        if plane == "pq":
            return (a, b), None
        # (G, rho) query
        if b < 0:
            return None, MembershipVerdict("outside", -abs(b))
        if b == 0.0:
            return None, self._axis_ray_verdict(a)
        return (a / b, 1.0 / b), None

    def _axis_ray_verdict(self, g: float) -> MembershipVerdict:
        eps = self.epsilon_boundary
        ray = self.rho_zero_ray
        if ray is None:
            return MembershipVerdict("outside", -math.inf)
        if ray[0] == "all":
            return MembershipVerdict("inside", math.inf)
        op, thr = ray
        signed = (g - thr) if op == ">" else (thr - g)
        if abs(signed) < eps:
            return MembershipVerdict("indeterminate", signed)
        return MembershipVerdict("inside" if signed > 0 else "outside", signed)

    def membership(self, point, plane: str | None = None) -> MembershipVerdict:
        plane = plane or self.plane
        if self._pq is not None:
            # grho view: delegate through the involution
            pq_point, early = self._to_pq_point(point, "grho" if plane == "grho" else plane)
            if early is not None:
                return early
            return self._pq.membership(pq_point, plane="pq")
        pq_point, early = self._to_pq_point(point, plane)
        if early is not None:
            return early
        p, q = pq_point
        if self.sense in ("enclosed", "complement"):
            inside_poly = q > 0 and _point_in_polygon(self._polygon, p, q)
            inside = (not inside_poly) and q > 0 if self.sense == "complement" else inside_poly
        else:
            inside = bool(self._profile.margins(p, q) > 0)
        d = self._true_distance(p, q)
        if d < self.epsilon_boundary:
            return MembershipVerdict("indeterminate", d if inside else -d)
        return MembershipVerdict("inside" if inside else "outside", d if inside else -d)

    def _true_distance(self, p: float, q: float) -> float:
        d = min((_dist_to_polyline(seg.pts, p, q) for seg in self.segments), default=math.inf)
        for origin, direction in self._rays:
            d = min(d, _dist_to_ray(origin, direction, p, q))
        return d

    def membership_batch(self, pts: np.ndarray, plane: str | None = None):
        """Fast labels for many points: (+1 inside, -1 outside, 0 near-boundary),
        plus the signed proxy margins.  Near-boundary means the proxy margin is
        within a small multiple of epsilon; callers needing exact verdicts
        there should fall back to `membership`."""
        plane = plane or self.plane
        pts = np.asarray(pts, dtype=float)
        if self._pq is not None:
            return self._pq.membership_batch(self._batch_to_pq(pts, plane), plane="pq")
        if plane == "grho":
            pts = self._batch_to_pq(pts, plane)
        m = self._profile.margins(pts[:, 0], pts[:, 1])
        labels = np.where(m > 0, 1, -1).astype(np.int8)
        labels[np.abs(m) < 8.0 * self.epsilon_boundary] = 0
        return labels, m

    def _batch_to_pq(self, pts: np.ndarray, plane: str) -> np.ndarray:
        if plane == "pq":
            return pts
        g, rho = pts[:, 0], pts[:, 1]
        rho_safe = np.where(rho > 0, rho, np.nan)
        return np.column_stack([g / rho_safe, 1.0 / rho_safe])


def membership(region: Region, point, plane: str | None = None) -> MembershipVerdict:
    """Verdict for one point; plane defaults to the region's own plane."""
    return region.membership(point, plane)


# ---------------------------------------------------------------------------
# anchor formulas


def _atan_over_z(eigen: AuxEigen) -> float:
    """atan(z)/z for a spiral beta; 0 in the beta = 0 limit."""
    if eigen.beta == 0.0:
        return 0.0
    if eigen.regime != "spiral":
        raise RegimeMismatch("atan(z)/z needs an oscillatory beta")
    return math.atan(eigen.z) / eigen.z


def _exp_pi_over_z(eigen: AuxEigen) -> float:
    """exp(pi/z) for a spiral beta; 1 in the beta = 0 limit."""
    if eigen.beta == 0.0:
        return 1.0
    if eigen.regime != "spiral":
        raise RegimeMismatch("exp(pi/z) needs an oscillatory beta")
    return math.exp(math.pi / eigen.z)


def _t1_origin(eigen: AuxEigen) -> float:
    """Backward time for the trajectory from an origin-type start to reach
    q = 1/c; scale-invariant along the ray toward the equilibrium."""
    if eigen.regime == "spiral":
        theta = eigen.theta
        if eigen.beta == 0.0:
            return -(math.pi / 2.0) / theta
        return -math.atan(2.0 * theta / eigen.beta) / theta
    if eigen.regime == "degenerate":
        return -2.0 / eigen.beta
    gp, gm = eigen.gamma_plus, eigen.gamma_minus
    return -math.log(gp / gm) / (gp - gm)


def _p1_anchor(params: PhysParams, beta: float, scale: float = 1.0) -> float:
    """p-coordinate where the backward trajectory from the scaled origin-type
    start meets q = 1/c: beta/c - sqrt(k/c) * scale * E(sqrt(kc)/beta)."""
    tau = math.inf if beta == 0 else params.sqrt_kc / beta
    return beta / params.c - math.sqrt(params.k / params.c) * scale * extended_exponential(tau)


def _p2_anchor(params: PhysParams, eigen_min: AuxEigen, p1: float) -> float:
    e = _exp_pi_over_z(eigen_min)
    return eigen_min.beta / params.c * (1.0 + e) - p1 * e


def _q_star(params: PhysParams, eigen_min: AuxEigen, p1: float) -> float:
    factor = math.exp(math.pi / eigen_min.z - _atan_over_z(eigen_min)) if eigen_min.beta > 0 else 1.0
    return 1.0 / params.c + factor * (eigen_min.beta / params.c - p1) / params.sqrt_kc


def _sample(traj: auxlin.AuxTrajectory, t_from: float, t_to: float, n: int,
            label: str, reverse: bool = False) -> Segment:
    ts, pts = auxlin.trajectory_segment(traj, t_from, t_to, n)
    if reverse:
        ts, pts = ts[::-1].copy(), pts[::-1].copy()
    return Segment(label=label, ts=ts, pts=pts)


def _straight(label: str, a, b, n: int) -> Segment:
    pts = np.linspace(a, b, n)
    return Segment(label=label, ts=np.full(n, np.nan), pts=pts)


def _chain_from_segments(segs: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    pts = np.vstack(segs)
    q = pts[:, 1]
    # enforce strictly ascending q for interpolation
    order = np.argsort(q, kind="stable")
    q_sorted = q[order]
    p_sorted = pts[order, 0]
    keep = np.concatenate([[True], np.diff(q_sorted) > 0])
    return q_sorted[keep], p_sorted[keep]


def _scale_of(points: np.ndarray) -> float:
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    return float(np.hypot(*(hi - lo)))


def _split_at_apex(pts: np.ndarray):
    ja = int(np.argmax(pts[:, 1]))
    right = pts[: ja + 1]  # q ascending from 1/c to apex
    left = pts[ja:][::-1]  # q ascending from 1/c to apex on the other side
    return left, right


# ---------------------------------------------------------------------------
# builders


def _closed_region(kind: str, params: PhysParams, band: AlignmentBand,
                   beta_lo: float, beta_hi: float, start, floor_q: float,
                   admissibility: AdmissibilityReport | None,
                   n: int, q_cap: float, rho_cap: float, eps_scale: float,
                   rho_bounds=None, case=None, scale: float = 1.0) -> Region:
    """Shared construction for the closed kinds (sigma1/sigma3/sigma_l weak &
    medium) and for the enclosure of delta1 (with the band roles swapped by
    the caller): three glued trajectories plus a floor edge."""
    c = params.c
    e_hi = AuxEigen.from_beta(beta_hi, params)
    e_lo = AuxEigen.from_beta(beta_lo, params)

    t1 = _t1_origin(e_hi)
    p1 = _p1_anchor(params, beta_hi, scale)
    traj1 = auxlin.solve_aux(beta_hi, start, params)

    theta_lo = AuxEigen.from_beta(beta_lo, params).theta
    if theta_lo is None:
        raise RegimeMismatch(f"{kind}: the lower band edge must be oscillatory")
    t2 = -math.pi / theta_lo
    traj2 = auxlin.solve_aux(beta_lo, (p1, 1.0 / c), params)
    p2 = _p2_anchor(params, e_lo, p1)
    q_star = _q_star(params, e_lo, p1)

    traj3 = auxlin.solve_aux(beta_hi, (p2, 1.0 / c), params)
    if e_hi.regime == "spiral":
        t_turn = (-math.pi + math.atan(e_hi.z)) / e_hi.theta
        t3 = auxlin.crossing_time_q(traj3, floor_q, mode="bracketed", bracket=(t_turn, 0.0))
    else:
        t3 = auxlin.crossing_time_q(traj3, floor_q, mode="unique_negative")
    p3 = float(traj3.evaluate(t3)[0])

    seg1 = _sample(traj1, t1, 0.0, n, "C1")
    seg2 = _sample(traj2, t2, 0.0, n, "C2")
    seg3 = _sample(traj3, t3, 0.0, n, "C3")

    # boundary walk: start -> C1 -> (p1,1/c) -> C2 -> (p2,1/c) -> C3 -> (p3,floor) -> floor -> start
    walk = [
        Segment("C1", seg1.ts[::-1].copy(), seg1.pts[::-1].copy()),
        Segment("C2", seg2.ts[::-1].copy(), seg2.pts[::-1].copy()),
        seg3,
        _straight("C4" if floor_q > 0 else "axis", seg3.pts[0], seg1.pts[::-1][0], max(2, n // 8)),
    ]

    up_left, up_right = _split_at_apex(seg2.pts)
    left_q, left_p = _chain_from_segments([seg1.pts, up_left])
    right_q, right_p = _chain_from_segments([seg3.pts, up_right])
    profile = _Profile(kind="between", q_floor=floor_q, q_top=q_star,
                       left_q=left_q, left_p=left_p, right_q=right_q, right_p=right_p)

    scaffold = RegionScaffold(kind=kind, params=params, band=band, p1=p1, p2=p2, p3=p3,
                              t1=t1, t2=t2, t3=t3, q_star=q_star,
                              admissibility=admissibility, rho_bounds=rho_bounds, case=case)
    eps = eps_scale * _scale_of(np.vstack([s.pts for s in walk]))
    return Region(kind=kind, scaffold=scaffold, segments=walk, closure="bounded",
                  sense="enclosed", profile=profile, floor_q=floor_q, q_cap=q_cap,
                  rho_cap=rho_cap, rho_zero_ray=None, epsilon_boundary=eps)


def build_sigma1(params: PhysParams, band: AlignmentBand, *,
                 samples_per_segment: int = _DEFAULT_SAMPLES, q_cap: float | None = None,
                 rho_cap: float | None = None, epsilon_scale: float = _DEFAULT_EPS_SCALE) -> Region:
    """Closed invariant region for an all-oscillatory band (weak alignment)."""
    params.require_repulsive()
    if band.regime(params) != "weak":
        raise RegimeMismatch(f"sigma1 needs beta_max^2 < 4kc, band [{band.beta_min}, {band.beta_max}]")
    report = admissibility_weak(params, band)
    report.require()
    return _closed_region("sigma1", params, band, band.beta_min, band.beta_max,
                          (0.0, 0.0), 0.0, report, samples_per_segment,
                          q_cap or 1e3 / params.c, rho_cap or 1e3 * params.c, epsilon_scale)


def build_sigma3(params: PhysParams, band: AlignmentBand, *,
                 samples_per_segment: int = _DEFAULT_SAMPLES, q_cap: float | None = None,
                 rho_cap: float | None = None, epsilon_scale: float = _DEFAULT_EPS_SCALE) -> Region:
    """Closed invariant region when the band straddles the spiral/node border."""
    params.require_repulsive()
    if band.regime(params) != "medium":
        raise RegimeMismatch(
            f"sigma3 needs beta_min^2 < 4kc <= beta_max^2, band [{band.beta_min}, {band.beta_max}]")
    report = admissibility_medium(params, band)
    report.require()
    return _closed_region("sigma3", params, band, band.beta_min, band.beta_max,
                          (0.0, 0.0), 0.0, report, samples_per_segment,
                          q_cap or 1e3 / params.c, rho_cap or 1e3 * params.c, epsilon_scale)


def build_delta1(params: PhysParams, band: AlignmentBand, *,
                 samples_per_segment: int = _DEFAULT_SAMPLES, q_cap: float | None = None,
                 rho_cap: float | None = None, epsilon_scale: float = _DEFAULT_EPS_SCALE) -> Region:
    """Breakdown region for weak alignment: everything outside a closed
    enclosure built like sigma1 but with the band roles swapped.  No closure
    condition is needed (the swapped condition holds automatically)."""
    params.require_repulsive()
    if band.regime(params) != "weak":
        raise RegimeMismatch(f"delta1 needs beta_max^2 < 4kc, band [{band.beta_min}, {band.beta_max}]")
    c = params.c
    n = samples_per_segment
    e_lo = AuxEigen.from_beta(band.beta_min, params)
    e_hi = AuxEigen.from_beta(band.beta_max, params)

    t1 = _t1_origin(e_lo)
    p1 = _p1_anchor(params, band.beta_min)
    traj1 = auxlin.solve_aux(band.beta_min, (0.0, 0.0), params)

    t2 = -math.pi / e_hi.theta
    traj2 = auxlin.solve_aux(band.beta_max, (p1, 1.0 / c), params)
    e_piz = _exp_pi_over_z(e_hi)
    p2 = band.beta_max / c * (1.0 + e_piz) - p1 * e_piz
    q_star = _q_star(params, e_hi, p1)

    traj3 = auxlin.solve_aux(band.beta_min, (p2, 1.0 / c), params)
    if band.beta_min == 0.0:
        t_turn = (-math.pi + math.pi / 2.0) / e_lo.theta
    else:
        t_turn = (-math.pi + math.atan(e_lo.z)) / e_lo.theta
    t3 = auxlin.crossing_time_q(traj3, 0.0, mode="bracketed", bracket=(t_turn, 0.0))
    p3 = float(traj3.evaluate(t3)[0])

    seg1 = _sample(traj1, t1, 0.0, n, "B1")
    seg2 = _sample(traj2, t2, 0.0, n, "B2")
    seg3 = _sample(traj3, t3, 0.0, n, "B3")
    walk = [
        Segment("B1", seg1.ts[::-1].copy(), seg1.pts[::-1].copy()),
        Segment("B2", seg2.ts[::-1].copy(), seg2.pts[::-1].copy()),
        seg3,
        _straight("axis", seg3.pts[0], np.array([0.0, 0.0]), max(2, n // 8)),
    ]
    up_left, up_right = _split_at_apex(seg2.pts)
    left_q, left_p = _chain_from_segments([seg1.pts, up_left])
    right_q, right_p = _chain_from_segments([seg3.pts, up_right])
    profile = _Profile(kind="outside_between", q_floor=0.0, q_top=q_star,
                       left_q=left_q, left_p=left_p, right_q=right_q, right_p=right_p)
    scaffold = RegionScaffold(kind="delta1", params=params, band=band, p1=p1, p2=p2, p3=p3,
                              t1=t1, t2=t2, t3=t3, q_star=q_star, admissibility=None)
    eps = epsilon_scale * _scale_of(np.vstack([s.pts for s in walk]))
    return Region(kind="delta1", scaffold=scaffold, segments=walk, closure="unbounded",
                  sense="complement", profile=profile, floor_q=0.0,
                  q_cap=q_cap or 1e3 / c, rho_cap=rho_cap or 1e3 * c,
                  rho_zero_ray=("all",), epsilon_boundary=eps)


def _side_region(kind: str, params: PhysParams, band: AlignmentBand,
                 beta_first: float, beta_second: float, start, floor_q: float,
                 floor_ray_dir: float, side: str, ray_threshold: float | None,
                 n: int, q_cap: float, rho_cap: float, eps_scale: float,
                 rho_bounds=None, case=None, scale: float = 1.0,
                 literal_paper_boundary: bool = False) -> Region:
    """Shared construction for the unbounded kinds: one trajectory from the
    start to (p1, 1/c), a second one continued up to the q-cap, and a floor
    ray; the region is the open set on `side` of the glued chain."""
    c = params.c
    e1 = AuxEigen.from_beta(beta_first, params)
    t1 = _t1_origin(e1)
    p1 = _p1_anchor(params, beta_first, scale)
    traj1 = auxlin.solve_aux(beta_first, start, params)

    traj2 = auxlin.solve_aux(beta_second, (p1, 1.0 / c), params)
    t_cap = auxlin.crossing_time_q(traj2, q_cap, mode="unique_negative")

    seg1 = _sample(traj1, t1, 0.0, n, "C1" if kind.startswith("sigma") else "B1", reverse=True)
    seg2 = _sample(traj2, t_cap, 0.0, n, "C2" if kind.startswith("sigma") else "B2", reverse=True)

    segments = [seg1, seg2]
    chain_parts = [seg1.pts, seg2.pts]
    if literal_paper_boundary and floor_q > 0:
        wall = _straight("wall", np.array([start[0], 0.0]), np.array([start[0], floor_q]),
                         max(2, n // 8))
        segments.insert(0, wall)
        chain_parts.insert(0, wall.pts)
        floor_q = 0.0
    chain_q, chain_p = _chain_from_segments(chain_parts)
    slope = (chain_p[-1] - chain_p[-2]) / max(chain_q[-1] - chain_q[-2], 1e-300)
    profile = _Profile(kind=side, q_floor=floor_q, q_top=None,
                       chain_q=chain_q, chain_p=chain_p, extrap_slope=slope)

    ray_origin = np.array([chain_p[0], floor_q])
    rays = [(ray_origin, np.array([floor_ray_dir, 0.0]))]

    scaffold = RegionScaffold(kind=kind, params=params, band=band, p1=p1, t1=t1,
                              admissibility=None, rho_bounds=rho_bounds, case=case)
    anchor_cloud = np.vstack([seg1.pts, [[chain_p[0], floor_q], [0.0, 4.0 / c]]])
    eps = eps_scale * _scale_of(anchor_cloud)
    ray = None
    if ray_threshold is not None:
        ray = (">" if side == "right_of" else "<", ray_threshold)
    return Region(kind=kind, scaffold=scaffold, segments=segments, closure="unbounded",
                  sense=side, profile=profile, floor_q=floor_q, q_cap=q_cap,
                  rho_cap=rho_cap, rho_zero_ray=ray, epsilon_boundary=eps,
                  boundary_rays=rays, literal_paper_boundary=literal_paper_boundary)


def build_sigma2(params: PhysParams, band: AlignmentBand, *,
                 samples_per_segment: int = _DEFAULT_SAMPLES, q_cap: float | None = None,
                 rho_cap: float | None = None, epsilon_scale: float = _DEFAULT_EPS_SCALE) -> Region:
    """Unbounded invariant region for an all-overdamped band (strong
    alignment); includes the vacuum ray G > gamma_minus(beta_min)."""
    params.require_repulsive()
    if band.regime(params) != "strong":
        raise RegimeMismatch(f"sigma2 needs beta_min^2 >= 4kc, band [{band.beta_min}, {band.beta_max}]")
    e_lo = AuxEigen.from_beta(band.beta_min, params)
    thr = e_lo.gamma_minus
    return _side_region("sigma2", params, band, band.beta_max, band.beta_min,
                        (0.0, 0.0), 0.0, +1.0, "right_of", thr,
                        samples_per_segment, q_cap or 1e3 / params.c,
                        rho_cap or 1e3 * params.c, epsilon_scale)


def build_delta2(params: PhysParams, band: AlignmentBand, *,
                 samples_per_segment: int = _DEFAULT_SAMPLES, q_cap: float | None = None,
                 rho_cap: float | None = None, epsilon_scale: float = _DEFAULT_EPS_SCALE) -> Region:
    """Breakdown region for strong/medium alignment: everything left of the
    glued curves; includes the vacuum ray G < gamma_minus(beta_max)."""
    params.require_repulsive()
    if band.regime(params) == "weak":
        raise RegimeMismatch(f"delta2 needs 4kc <= beta_max^2, band [{band.beta_min}, {band.beta_max}]")
    e_hi = AuxEigen.from_beta(band.beta_max, params)
    thr = e_hi.gamma_minus if e_hi.gamma_minus is not None else e_hi.beta / 2.0
    return _side_region("delta2", params, band, band.beta_min, band.beta_max,
                        (0.0, 0.0), 0.0, -1.0, "left_of", thr,
                        samples_per_segment, q_cap or 1e3 / params.c,
                        rho_cap or 1e3 * params.c, epsilon_scale)


def build_sigma_l(params: PhysParams, influence: InfluenceModel,
                  bounds: BoundsConfig | None = None, *,
                  samples_per_segment: int = _DEFAULT_SAMPLES, q_cap: float | None = None,
                  rho_cap: float | None = None, epsilon_scale: float = _DEFAULT_EPS_SCALE,
                  literal_paper_boundary: bool = False) -> Region:
    """Invariant region for an integrable (possibly unbounded) kernel.

    The alignment band comes from confining the density to
    [rho_min, rho_max]; the construction starts on the line q = 1/rho_max so
    that the confinement is self-consistent.  The symmetric choice
    rho_min + rho_max = 2c is required (default rho_min = 0, rho_max = 2c).
    """
    params.require_repulsive()
    c = params.c
    if bounds is None:
        bounds = BoundsConfig(0.0, 2.0 * c, c)
    if bounds.c != c:
        raise ValueError("bounds configured around a different mean density")
    if not bounds.symmetric:
        raise ValueError("construction requires rho_min + rho_max = 2c")
    band = influence.band_from_bounds(params, bounds.rho_min, bounds.rho_max)
    case = band.regime(params)
    rho_max = bounds.rho_max
    floor_q = 1.0 / rho_max
    start = (band.beta_max / rho_max, floor_q)
    scale = 1.0 - c / rho_max
    q_cap = q_cap or 1e3 / c
    rho_cap = rho_cap or 1e3 * c

    if case == "weak":
        report = admissibility_weakly_singular(params, band, rho_max)
        report.require()
        return _closed_region("sigma_l", params, band, band.beta_min, band.beta_max,
                              start, floor_q, report, samples_per_segment, q_cap, rho_cap,
                              epsilon_scale, rho_bounds=(bounds.rho_min, rho_max),
                              case=case, scale=scale)
    if case == "strong":
        return _side_region("sigma_l", params, band, band.beta_max, band.beta_min,
                            start, floor_q, +1.0, "right_of", None,
                            samples_per_segment, q_cap, rho_cap, epsilon_scale,
                            rho_bounds=(bounds.rho_min, rho_max), case=case, scale=scale,
                            literal_paper_boundary=literal_paper_boundary)
    # medium: closed, floored; closure condition is the medium one scaled by
    # the floored start
    e_hi = AuxEigen.from_beta(band.beta_max, params)
    e_lo = AuxEigen.from_beta(band.beta_min, params)
    lhs = params.sqrt_kc * scale * extended_exponential(e_hi.tau)
    rhs = band.gap * (1.0 + (math.exp(-math.pi / e_lo.z) if band.beta_min > 0 else 1.0))
    report = AdmissibilityReport(lhs - rhs > 0, lhs - rhs, "medium_weakly_singular")
    report.require()
    return _closed_region("sigma_l", params, band, band.beta_min, band.beta_max,
                          start, floor_q, report, samples_per_segment, q_cap, rho_cap,
                          epsilon_scale, rho_bounds=(bounds.rho_min, rho_max),
                          case=case, scale=scale)


_BUILDERS = {
    "sigma1": build_sigma1,
    "sigma2": build_sigma2,
    "sigma3": build_sigma3,
    "delta1": build_delta1,
    "delta2": build_delta2,
}


def build_region(kind: str, params: PhysParams, band: AlignmentBand | None = None,
                 influence: InfluenceModel | None = None,
                 bounds: BoundsConfig | None = None, **kwargs) -> Region:
    """Dispatch by kind; sigma_l takes the kernel, the others take a band."""
    if kind == "sigma_l":
        if influence is None:
            raise ValueError("sigma_l needs the influence kernel")
        return build_sigma_l(params, influence, bounds, **kwargs)
    if kind not in _BUILDERS:
        raise ValueError(f"unknown region kind {kind!r}")
    if band is None:
        if influence is None:
            raise ValueError(f"{kind} needs an alignment band or a bounded kernel")
        band = influence.band(params)
    return _BUILDERS[kind](params, band, **kwargs)


# ---------------------------------------------------------------------------
# plane transfer and export


def to_grho(region: Region) -> Region:
    """Image of a pq-plane region under F(p, q) = (p/q, 1/q).

    Boundary samples with q below 1/rho_cap are clipped to the cap before
    mapping (the floor of axis-touching regions maps to rho = infinity).
    Membership delegates back to the pq region through F.
    """
    if region.plane != "pq":
        raise ValueError("region is already in the (G, rho) plane")
    q_min = 1.0 / region.rho_cap
    mapped = []
    for seg in region.segments:
        q = np.maximum(seg.pts[:, 1], q_min)
        g = seg.pts[:, 0] / q
        rho = 1.0 / q
        mapped.append(Segment(seg.label, seg.ts.copy(), np.column_stack([g, rho])))
    return Region(kind=region.kind, scaffold=region.scaffold, segments=mapped,
                  closure=region.closure, sense=region.sense, profile=region._profile,
                  floor_q=region.floor_q, q_cap=region.q_cap, rho_cap=region.rho_cap,
                  rho_zero_ray=region.rho_zero_ray,
                  epsilon_boundary=region.epsilon_boundary, plane="grho",
                  pq_source=region,
                  literal_paper_boundary=region.literal_paper_boundary)


def boundary_rows(region: Region):
    """Rows (segment_label, t, a, b) for CSV export, in boundary-walk order."""
    for seg in region.segments:
        for t, (a, b) in zip(seg.ts, seg.pts):
            yield seg.label, float(t), float(a), float(b)


def scaffold_dict(region: Region) -> dict:
    s = region.scaffold
    adm = None
    if s.admissibility is not None:
        adm = {"holds": bool(s.admissibility.holds), "margin": float(s.admissibility.margin)}
    out = {
        "kind": s.kind,
        "p1": s.p1, "p2": s.p2, "p3": s.p3,
        "t1": s.t1, "t2": s.t2, "t3": s.t3,
        "q_star": s.q_star,
        "beta_min": s.band.beta_min, "beta_max": s.band.beta_max,
        "admissibility": adm,
    }
    if s.rho_bounds is not None:
        out["rho_min"], out["rho_max"] = s.rho_bounds
        out["case"] = s.case
    if region.rho_zero_ray is not None:
        ray = region.rho_zero_ray
        out["rho_zero_ray"] = {"all": True} if ray[0] == "all" else {ray[0]: ray[1]}
    return out


# ---------------------------------------------------------------------------
# interior sampling


def sample_interior(region: Region, rng: np.random.Generator, n: int,
                    margin_factor: float = 2.0) -> np.ndarray:
    """n points strictly inside the region, at proxy margin greater than
    margin_factor * epsilon from the boundary."""
    eps = region.epsilon_boundary
    need = margin_factor * eps
    out = []
    if region.sense in ("enclosed", "complement"):
        poly = region._polygon
        lo = poly.min(axis=0)
        hi = poly.max(axis=0)
        if region.sense == "complement":
            size = hi - lo
            lo = lo - 0.75 * size
            hi = hi + 0.75 * size
            lo[1] = max(lo[1], eps)
        while sum(len(a) for a in out) < n:
            cand = rng.uniform(lo, hi, size=(4 * n, 2))
            m = region._profile.margins(cand[:, 0], cand[:, 1])
            good = cand[m > need]
            out.append(good)
        return np.vstack(out)[:n]
    prof = region._profile
    q_lo = region.floor_q + max(need, 0.02 / region.scaffold.params.c)
    q_hi = 4.0 / region.scaffold.params.c
    span = float(prof.chain_p.max() - prof.chain_p.min()) + math.sqrt(
        region.scaffold.params.k / region.scaffold.params.c)
    qs = rng.uniform(q_lo, q_hi, size=n)
    offs = rng.uniform(need + eps, 2.0 * span, size=n)
    base = np.interp(qs, prof.chain_q, prof.chain_p)
    ps = base + offs if region.sense == "right_of" else base - offs
    return np.column_stack([ps, qs])
