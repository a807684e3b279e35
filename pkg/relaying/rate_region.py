"""Convex polygon arithmetic for rate regions in the (R_a, R_b) quadrant.

Regions are stored by their vertices, counterclockwise, starting from the
lexicographically smallest vertex (the origin for every non-empty region
built here). Half-planes are accepted as input only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple

from relaying.errors import EmptyRegionError, InvalidArgumentError, UnboundedRegionError

FEAS_TOL = 1e-9
COLLINEAR_TOL = 1e-12
TIE_TOL = 1e-12
_PARALLEL_TOL = 1e-14

Point = Tuple[float, float]


@dataclass(frozen=True)
class RatePair:
    r_a: float
    r_b: float

    def __post_init__(self) -> None:
        for name in ("r_a", "r_b"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidArgumentError(f"{name} must be finite and >= 0, got {value!r}", parameter=name)

    def as_tuple(self) -> Point:
        return (self.r_a, self.r_b)


@dataclass(frozen=True)
class HalfPlane:
    """coef_a * R_a + coef_b * R_b <= rhs"""

    coef_a: float
    coef_b: float
    rhs: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.coef_a, self.coef_b, self.rhs)):
            raise InvalidArgumentError("half-plane coefficients must be finite", parameter="planes")
        if self.coef_a == 0 and self.coef_b == 0:
            raise InvalidArgumentError("half-plane normal must be non-zero", parameter="planes")

    def violation(self, r_a: float, r_b: float) -> float:
        return self.coef_a * r_a + self.coef_b * r_b - self.rhs


def _clamp(x: float) -> float:
    return x if x > 0 else 0.0


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _convex_hull(points: Iterable[Point]) -> List[Point]:
    """Monotone chain; drops collinear and duplicate points."""
    pts = sorted({(_clamp(x), _clamp(y)) for x, y in points})
    if len(pts) <= 1:
        return pts

    lower: List[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= COLLINEAR_TOL:
            lower.pop()
        lower.append(p)
    upper: List[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= COLLINEAR_TOL:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


@dataclass(frozen=True)
class RateRegion:
    vertices: Tuple[RatePair, ...] = ()

    @classmethod
    def from_points(cls, points: Iterable[Point]) -> "RateRegion":
        return cls(tuple(RatePair(x, y) for x, y in _convex_hull(points)))

    @classmethod
    def empty(cls) -> "RateRegion":
        return cls(())

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def points(self) -> List[Point]:
        return [v.as_tuple() for v in self.vertices]

    def area(self) -> float:
        pts = self.points()
        if len(pts) < 3:
            return 0.0
        return 0.5 * sum(
            pts[i][0] * pts[(i + 1) % len(pts)][1] - pts[(i + 1) % len(pts)][0] * pts[i][1]
            for i in range(len(pts))
        )

    def halfplanes(self) -> List[HalfPlane]:
        """Edge inequalities of a polygon with at least three vertices."""
        pts = self.points()
        if len(pts) < 3:
            raise InvalidArgumentError("degenerate regions have no edge inequalities", parameter="region")
        planes = []
        for u, w in zip(pts, pts[1:] + pts[:1]):
            n_a, n_b = w[1] - u[1], u[0] - w[0]
            planes.append(HalfPlane(n_a, n_b, n_a * u[0] + n_b * u[1]))
        return planes


def _is_unbounded(planes: Sequence[HalfPlane]) -> bool:
    """True when some nonzero direction d >= 0 satisfies every plane's normal . d <= 0."""
    directions = [(1.0, 0.0), (0.0, 1.0)]
    for p in planes:
        for d in ((p.coef_b, -p.coef_a), (-p.coef_b, p.coef_a)):
            if d[0] >= 0 and d[1] >= 0:
                norm = math.hypot(*d)
                directions.append((d[0] / norm, d[1] / norm))
    return any(
        all(p.coef_a * d[0] + p.coef_b * d[1] <= 0 for p in planes)
        for d in directions
    )


def region_from_halfplanes(planes: Sequence[HalfPlane]) -> RateRegion:
    """Vertex polygon of {(R_a, R_b) >= 0} intersected with every plane."""
    if not planes:
        raise InvalidArgumentError("at least one half-plane is required", parameter="planes")
    bounded = list(planes) + [HalfPlane(-1.0, 0.0, 0.0), HalfPlane(0.0, -1.0, 0.0)]

    candidates: List[Point] = []
    for p, q in combinations(bounded, 2):
        det = p.coef_a * q.coef_b - q.coef_a * p.coef_b
        if abs(det) < _PARALLEL_TOL:
            continue
        x = (p.rhs * q.coef_b - q.rhs * p.coef_b) / det
        y = (p.coef_a * q.rhs - q.coef_a * p.rhs) / det
        if all(h.violation(x, y) <= FEAS_TOL for h in bounded):
            candidates.append((x, y))

    if not candidates:
        return RateRegion.empty()
    if _is_unbounded(planes):
        raise UnboundedRegionError("half-planes do not bound the rate quadrant", parameter="planes")
    return RateRegion.from_points(candidates)


def contains(region: RateRegion, p: RatePair, tol: float = FEAS_TOL) -> bool:
    pts = region.points()
    x, y = p.as_tuple()
    if not pts:
        return False
    if len(pts) == 1:
        return math.hypot(x - pts[0][0], y - pts[0][1]) <= tol
    if len(pts) == 2:
        (ux, uy), (wx, wy) = pts
        ex, ey = wx - ux, wy - uy
        t = min(1.0, max(0.0, ((x - ux) * ex + (y - uy) * ey) / (ex * ex + ey * ey)))
        return math.hypot(x - ux - t * ex, y - uy - t * ey) <= tol

    for u, w in zip(pts, pts[1:] + pts[:1]):
        length = math.hypot(w[0] - u[0], w[1] - u[1])
        if _cross(u, w, (x, y)) < -tol * length:
            return False
    return True


def hull_union(regions: Sequence[RateRegion]) -> RateRegion:
    """Convex hull of the union, i.e. the time-sharing closure."""
    if not regions:
        raise InvalidArgumentError("at least one region is required", parameter="regions")
    return RateRegion.from_points(pt for region in regions for pt in region.points())


def max_weighted_rate(region: RateRegion, mu: float) -> Tuple[float, RatePair]:
    """Maximize mu*R_a + (1-mu)*R_b; ties go to larger R_a, then larger R_b."""
    if not 0.0 <= mu <= 1.0:
        raise InvalidArgumentError(f"mu must lie in [0, 1], got {mu!r}", parameter="mu")
    if region.is_empty:
        raise EmptyRegionError("cannot maximize over an empty region", parameter="region")

    best_value, best = -math.inf, region.vertices[0]
    for v in region.vertices:
        value = mu * v.r_a + (1.0 - mu) * v.r_b
        if value > best_value + TIE_TOL:
            best_value, best = value, v
        elif abs(value - best_value) <= TIE_TOL and v.as_tuple() > best.as_tuple():
            best_value, best = max(value, best_value), v
    return best_value, best


def exists_point_outside(a: RateRegion, b: RateRegion, tol: float = FEAS_TOL) -> Optional[RatePair]:
    """First vertex of `a` (in vertex order) lying outside `b`, if any."""
    for v in a.vertices:
        if not contains(b, v, tol):
            return v
    return None
