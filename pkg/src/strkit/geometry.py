"""Polygon algebra: areas, hulls, minimum bounding rectangles, IoU.

Coordinates are pixel coordinates (x right, y down), double precision.
All operations are pure and safe for unrestricted parallel use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

Point = tuple[float, float]

# Degeneracy / collinearity threshold, in squared-pixel units.
EPS = 1e-9


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Polygon:
    """Simple polygon with >= 3 vertices and positive area."""

    vertices: tuple[Point, ...]

    def __init__(self, vertices: Iterable[Sequence[float]]):
        verts = tuple((float(x), float(y)) for x, y in vertices)
        object.__setattr__(self, "vertices", verts)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def xs(self) -> tuple[float, ...]:
        return tuple(v[0] for v in self.vertices)

    @property
    def ys(self) -> tuple[float, ...]:
        return tuple(v[1] for v in self.vertices)


@dataclass(frozen=True)
class AABB:
    """Axis-aligned box, x_min <= x_max and y_min <= y_max."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise GeometryError(f"inverted box: {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_polygon(self) -> Polygon:
        return Polygon([
            (self.x_min, self.y_min),
            (self.x_max, self.y_min),
            (self.x_max, self.y_max),
            (self.x_min, self.y_max),
        ])


@dataclass(frozen=True)
class RotatedRect:
    """Oriented rectangle in canonical form: width >= height, angle in [-90, 90).

    The width axis points along (cos(angle), sin(angle)) with angles in
    degrees; y grows downward as in pixel coordinates.
    """

    center: Point
    width: float
    height: float
    angle: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise GeometryError(f"degenerate rect: {self}")

    @property
    def area(self) -> float:
        return self.width * self.height

    def corners(self) -> Polygon:
        a = math.radians(self.angle)
        ux, uy = math.cos(a), math.sin(a)
        vx, vy = -uy, ux
        cx, cy = self.center
        hw, hh = self.width / 2.0, self.height / 2.0
        return Polygon([
            (cx - hw * ux - hh * vx, cy - hw * uy - hh * vy),
            (cx + hw * ux - hh * vx, cy + hw * uy - hh * vy),
            (cx + hw * ux + hh * vx, cy + hw * uy + hh * vy),
            (cx - hw * ux + hh * vx, cy - hw * uy + hh * vy),
        ])


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def signed_area(vertices: Sequence[Point]) -> float:
    """Shoelace signed area; positive for counter-clockwise vertex order."""
    total = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return total / 2.0


def polygon_area(p: Polygon) -> float:
    """Positive area regardless of vertex orientation."""
    area = abs(signed_area(p.vertices))
    if area <= EPS:
        raise GeometryError("degenerate polygon: area is zero")
    return area


def orient_ccw(p: Polygon) -> Polygon:
    """Return the polygon with counter-clockwise vertex order."""
    if signed_area(p.vertices) < 0:
        return Polygon(tuple(reversed(p.vertices)))
    return p


def _segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """Proper or touching intersection of two segments, excluding shared endpoints."""
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > EPS and d2 < -EPS) or (d1 < -EPS and d2 > EPS)) and (
        (d3 > EPS and d4 < -EPS) or (d3 < -EPS and d4 > EPS)
    ):
        return True
    return False


def is_simple(p: Polygon) -> bool:
    """True when no two non-adjacent edges cross each other."""
    n = len(p.vertices)
    edges = [(p.vertices[i], p.vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            # skip adjacent edges (they share an endpoint)
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(*edges[i], *edges[j]):
                return False
    return True


def convex_hull(points: Iterable[Sequence[float]]) -> Polygon:
    """Convex hull via monotone chain: counter-clockwise, minimal vertex set.

    Raises GeometryError when all points are collinear.
    """
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) < 3:
        raise GeometryError("need >= 3 distinct points")

    def half(seq):
        out: list[Point] = []
        for pt in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], pt) <= EPS:
                out.pop()
            out.append(pt)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise GeometryError("all points are collinear")
    return Polygon(hull)


def min_aabb(*polys: Polygon) -> AABB:
    """Tightest axis-aligned box containing every vertex of every polygon."""
    if not polys:
        raise GeometryError("min_aabb needs at least one polygon")
    xs = [x for p in polys for x in p.xs]
    ys = [y for p in polys for y in p.ys]
    return AABB(min(xs), min(ys), max(xs), max(ys))


def min_rotated_rect(p: Polygon) -> RotatedRect:
    """Minimum-area enclosing rectangle via rotating calipers on the convex hull.

    The optimum has a side collinear with a hull edge, so only hull-edge
    angles are examined. Result is canonical: width >= height, angle in
    [-90, 90).
    """
    hull = convex_hull(p.vertices).vertices
    n = len(hull)
    best = None  # (area, angle_rad, x0, x1, y0, y1)
    for i in range(n):
        ex = hull[(i + 1) % n][0] - hull[i][0]
        ey = hull[(i + 1) % n][1] - hull[i][1]
        norm = math.hypot(ex, ey)
        if norm <= math.sqrt(EPS):
            continue
        ux, uy = ex / norm, ey / norm
        # project hull onto the edge direction and its normal
        us = [x * ux + y * uy for x, y in hull]
        vs = [-x * uy + y * ux for x, y in hull]
        u0, u1 = min(us), max(us)
        v0, v1 = min(vs), max(vs)
        area = (u1 - u0) * (v1 - v0)
        if best is None or area < best[0] - EPS:
            best = (area, math.atan2(uy, ux), u0, u1, v0, v1)
    if best is None:
        raise GeometryError("degenerate polygon")
    _, angle, u0, u1, v0, v1 = best
    cu, cv = (u0 + u1) / 2.0, (v0 + v1) / 2.0
    ux, uy = math.cos(angle), math.sin(angle)
    center = (cu * ux - cv * uy, cu * uy + cv * ux)
    w, h = u1 - u0, v1 - v0
    angle_deg = math.degrees(angle)
    if w < h:
        w, h = h, w
        angle_deg += 90.0
    # normalize to [-90, 90)
    angle_deg = (angle_deg + 90.0) % 180.0 - 90.0
    return RotatedRect(center, w, h, angle_deg)


def _clip_halfplane(subject: list[Point], a: Point, b: Point) -> list[Point]:
    """Keep the part of `subject` on the left of directed line a->b."""
    out: list[Point] = []
    n = len(subject)
    for i in range(n):
        cur = subject[i]
        prv = subject[i - 1]
        cur_in = _cross(a, b, cur) >= -EPS
        prv_in = _cross(a, b, prv) >= -EPS
        if cur_in:
            if not prv_in:
                out.append(_line_intersection(prv, cur, a, b))
            out.append(cur)
        elif prv_in:
            out.append(_line_intersection(prv, cur, a, b))
    return out


def _line_intersection(p1: Point, p2: Point, a: Point, b: Point) -> Point:
    dx1, dy1 = p2[0] - p1[0], p2[1] - p1[1]
    dx2, dy2 = b[0] - a[0], b[1] - a[1]
    denom = dx1 * dy2 - dy1 * dx2
    if abs(denom) < 1e-15:
        return p2
    t = ((a[0] - p1[0]) * dy2 - (a[1] - p1[1]) * dx2) / denom
    return (p1[0] + t * dx1, p1[1] + t * dy1)


def convex_intersection_area(a: Polygon, b: Polygon) -> float:
    """Intersection area of two convex polygons by half-plane clipping."""
    clip = orient_ccw(a).vertices
    subject = list(orient_ccw(b).vertices)
    n = len(clip)
    for i in range(n):
        if not subject:
            return 0.0
        subject = _clip_halfplane(subject, clip[i], clip[(i + 1) % n])
    if len(subject) < 3:
        return 0.0
    return abs(signed_area(subject))


def polygon_iou(a: Polygon, b: Polygon) -> float:
    """Intersection over union in [0, 1]; non-convex inputs are hulled first."""
    ha = convex_hull(a.vertices)
    hb = convex_hull(b.vertices)
    inter = convex_intersection_area(ha, hb)
    if inter <= 0.0:
        return 0.0
    union = polygon_area(ha) + polygon_area(hb) - inter
    if union <= EPS:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)


def is_vertical_instance(p: Polygon, label: str) -> bool:
    """Vertical text predicate: bounding-box height at least twice the width
    and a label longer than one character."""
    box = min_aabb(p)
    return box.height >= 2.0 * box.width and len(label) > 1
