"""2D geometry kernel: room polygons, wall features, oriented rectangular footprints.

All coordinates are meters in a right-handed plane. Rotations are degrees
counter-clockwise; a footprint at rotation 0 has its front face toward +y,
its left face toward -x (the left hand of someone standing at the center
facing front).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

Point = tuple[float, float]

_EPS = 1e-9


class GeometryError(ValueError):
    pass


class FootprintOutsideRoom(GeometryError):
    """A footprint corner lies outside the room polygon."""


# ---------------------------------------------------------------------------
# vector helpers
# ---------------------------------------------------------------------------

def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def _dot(a: Point, b: Point) -> float:
    return a[0] * b[0] + a[1] * b[1]


def _cross(a: Point, b: Point) -> float:
    return a[0] * b[1] - a[1] * b[0]


def _norm(v: Point) -> Point:
    l = math.hypot(v[0], v[1])
    if l < _EPS:
        return (0.0, 0.0)
    return (v[0] / l, v[1] / l)


def angle_between(a: Point, b: Point) -> float:
    """Angle between two vectors in degrees, in [0, 180]."""
    na, nb = _norm(a), _norm(b)
    d = max(-1.0, min(1.0, _dot(na, nb)))
    return math.degrees(math.acos(d))


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ab = _sub(b, a)
    ab2 = _dot(ab, ab)
    if ab2 < _EPS:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = max(0.0, min(1.0, _dot(_sub(p, a), ab) / ab2))
    proj = (a[0] + ab[0] * t, a[1] + ab[1] * t)
    return math.hypot(p[0] - proj[0], p[1] - proj[1])


def _segments_intersect(p1: Point, p2: Point, p3: Point, p4: Point) -> bool:
    d1 = _cross(_sub(p4, p3), _sub(p1, p3))
    d2 = _cross(_sub(p4, p3), _sub(p2, p3))
    d3 = _cross(_sub(p2, p1), _sub(p3, p1))
    d4 = _cross(_sub(p2, p1), _sub(p4, p1))
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    return False


def segment_segment_distance(a1: Point, a2: Point, b1: Point, b2: Point) -> float:
    """Minimum distance between two closed segments (0 if they cross)."""
    if _segments_intersect(a1, a2, b1, b2):
        return 0.0
    return min(
        point_segment_distance(a1, b1, b2),
        point_segment_distance(a2, b1, b2),
        point_segment_distance(b1, a1, a2),
        point_segment_distance(b2, a1, a2),
    )


def polygon_area(vertices: list[Point]) -> float:
    """Signed shoelace area (positive for counter-clockwise winding)."""
    total = 0.0
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        total += x1 * y2 - x2 * y1
    return total / 2.0


def point_in_polygon(p: Point, vertices: list[Point], tol: float = 1e-9) -> bool:
    """Even-odd test; points within tol of an edge count as inside."""
    n = len(vertices)
    for i in range(n):
        if point_segment_distance(p, vertices[i], vertices[(i + 1) % n]) <= tol:
            return True
    x, y = p
    inside = False
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xi = (x2 - x1) * (y - y1) / (y2 - y1) + x1
            if x < xi:
                inside = not inside
    return inside


def convex_clip(subject: list[Point], clip: list[Point]) -> list[Point]:
    """Sutherland-Hodgman clipping of `subject` against convex CCW `clip`."""
    output = list(subject)
    n = len(clip)
    for i in range(n):
        if not output:
            return []
        a = clip[i]
        b = clip[(i + 1) % n]
        edge = _sub(b, a)
        inp = output
        output = []
        prev = inp[-1]
        prev_in = _cross(edge, _sub(prev, a)) >= -_EPS
        for cur in inp:
            cur_in = _cross(edge, _sub(cur, a)) >= -_EPS
            if cur_in:
                if not prev_in:
                    output.append(_line_intersection(prev, cur, a, b))
                output.append(cur)
            elif prev_in:
                output.append(_line_intersection(prev, cur, a, b))
            prev, prev_in = cur, cur_in
    return output


def _line_intersection(p1: Point, p2: Point, a: Point, b: Point) -> Point:
    d1 = _sub(p2, p1)
    d2 = _sub(b, a)
    den = _cross(d1, d2)
    if abs(den) < _EPS:
        return p2
    t = _cross(_sub(a, p1), d2) / den
    return (p1[0] + d1[0] * t, p1[1] + d1[1] * t)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WallFeature:
    """A door, window, or doorless opening occupying a sub-span of one wall.

    `start` and `end` are offsets in meters measured along the wall from its
    first vertex. Doors carry a swing clearance depth; windows and opens are
    zero-swing.
    """

    kind: str  # door | window | open
    wall_index: int
    start: float
    end: float
    swing_depth: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("door", "window", "open"):
            raise GeometryError(f"unknown wall feature kind: {self.kind!r}")
        if self.end < self.start:
            raise GeometryError("feature span end must be >= start")
        if self.swing_depth < 0:
            raise GeometryError("swing_depth must be >= 0")


@dataclass(frozen=True)
class RoomPolygon:
    """A simple polygon room boundary. Winding is normalized to CCW."""

    vertices: tuple[Point, ...]
    features: tuple[WallFeature, ...] = ()

    def __init__(self, vertices, features=()):
        verts = [(float(x), float(y)) for x, y in vertices]
        if len(verts) < 3:
            raise GeometryError("a room polygon needs at least 3 vertices")
        area = polygon_area(verts)
        if abs(area) < _EPS:
            raise GeometryError("room polygon has zero area")
        if area < 0:
            verts.reverse()
        if _self_intersects(verts):
            raise GeometryError("room polygon is self-intersecting")
        feats = tuple(features)
        for f in feats:
            if not 0 <= f.wall_index < len(verts):
                raise GeometryError(f"feature wall_index {f.wall_index} out of range")
            wall_len = math.dist(verts[f.wall_index], verts[(f.wall_index + 1) % len(verts)])
            if f.end > wall_len + 1e-6:
                raise GeometryError("feature span exceeds wall length")
        object.__setattr__(self, "vertices", tuple(verts))
        object.__setattr__(self, "features", feats)

    @cached_property
    def walls(self) -> tuple[tuple[Point, Point], ...]:
        n = len(self.vertices)
        return tuple((self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n))

    @cached_property
    def area(self) -> float:
        return polygon_area(list(self.vertices))

    @cached_property
    def diagonal(self) -> float:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return math.hypot(max(xs) - min(xs), max(ys) - min(ys))

    @cached_property
    def bounds(self) -> tuple[float, float, float, float]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    def wall_inward_normal(self, index: int) -> Point:
        a, b = self.walls[index]
        d = _norm(_sub(b, a))
        return (-d[1], d[0])  # interior lies left of a CCW wall

    def feature_segment(self, feature: WallFeature) -> tuple[Point, Point]:
        a, b = self.walls[feature.wall_index]
        d = _norm(_sub(b, a))
        p1 = (a[0] + d[0] * feature.start, a[1] + d[1] * feature.start)
        p2 = (a[0] + d[0] * feature.end, a[1] + d[1] * feature.end)
        return (p1, p2)

    def contains_point(self, p: Point, tol: float = 1e-9) -> bool:
        return point_in_polygon(p, list(self.vertices), tol)

    def contains_footprint(self, fp: "Footprint", tol: float = 1e-9) -> bool:
        corners = fp.corners
        if not all(self.contains_point(c, tol) for c in corners):
            return False
        # corners inside is not enough for concave rooms: edges must not cross walls
        for i in range(4):
            c1, c2 = corners[i], corners[(i + 1) % 4]
            for w1, w2 in self.walls:
                if _segments_intersect(c1, c2, w1, w2):
                    return False
        return True

    def corner_exit_depth(self, fp: "Footprint") -> float:
        """Total distance of footprint corners outside the boundary (0 if inside)."""
        total = 0.0
        for c in fp.corners:
            if not self.contains_point(c):
                total += min(
                    point_segment_distance(c, w1, w2) for w1, w2 in self.walls
                )
        return total


def _self_intersects(verts: list[Point]) -> bool:
    n = len(verts)
    for i in range(n):
        a1, a2 = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = verts[j], verts[(j + 1) % n]
            if _segments_intersect(a1, a2, b1, b2):
                return True
    return False


FACES = ("front", "back", "left", "right")

# local outward normals per face at rotation 0 (front toward +y, left toward -x)
_FACE_NORMALS = {
    "front": (0.0, 1.0),
    "back": (0.0, -1.0),
    "left": (-1.0, 0.0),
    "right": (1.0, 0.0),
}


@dataclass(frozen=True)
class Footprint:
    """Oriented rectangle: center, half extents (half-width, half-depth), rotation.

    rotation is normalized to [0, 360); the front face is the +depth edge.
    """

    center: Point
    half_extents: tuple[float, float]
    rotation: float = 0.0

    def __post_init__(self) -> None:
        hw, hd = self.half_extents
        if hw <= 0 or hd <= 0:
            raise GeometryError("half extents must be > 0")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "half_extents", (float(hw), float(hd)))
        object.__setattr__(self, "rotation", float(self.rotation) % 360.0)

    @cached_property
    def _rot(self) -> tuple[float, float]:
        r = math.radians(self.rotation)
        return (math.cos(r), math.sin(r))

    def to_world(self, local: Point) -> Point:
        c, s = self._rot
        x, y = local
        return (self.center[0] + c * x - s * y, self.center[1] + s * x + c * y)

    def to_local(self, world: Point) -> Point:
        c, s = self._rot
        x = world[0] - self.center[0]
        y = world[1] - self.center[1]
        return (c * x + s * y, -s * x + c * y)

    @cached_property
    def corners(self) -> tuple[Point, Point, Point, Point]:
        hw, hd = self.half_extents
        return (
            self.to_world((-hw, -hd)),
            self.to_world((hw, -hd)),
            self.to_world((hw, hd)),
            self.to_world((-hw, hd)),
        )

    @cached_property
    def area(self) -> float:
        return 4.0 * self.half_extents[0] * self.half_extents[1]

    def axis(self, face: str) -> Point:
        """World-space outward normal of the named face (unit vector)."""
        nx, ny = _FACE_NORMALS[face]
        c, s = self._rot
        return (c * nx - s * ny, s * nx + c * ny)

    @property
    def front_dir(self) -> Point:
        return self.axis("front")

    def face_segment(self, face: str) -> tuple[Point, Point]:
        hw, hd = self.half_extents
        if face == "front":
            a, b = (-hw, hd), (hw, hd)
        elif face == "back":
            a, b = (-hw, -hd), (hw, -hd)
        elif face == "left":
            a, b = (-hw, -hd), (-hw, hd)
        elif face == "right":
            a, b = (hw, -hd), (hw, hd)
        else:
            raise GeometryError(f"unknown face {face!r}")
        return (self.to_world(a), self.to_world(b))

    def face_width(self, face: str) -> float:
        hw, hd = self.half_extents
        return 2.0 * (hw if face in ("front", "back") else hd)

    def translated(self, dx: float, dy: float) -> "Footprint":
        return Footprint((self.center[0] + dx, self.center[1] + dy), self.half_extents, self.rotation)

    def contains_point(self, p: Point, tol: float = 0.0) -> bool:
        lx, ly = self.to_local(p)
        hw, hd = self.half_extents
        return abs(lx) <= hw + tol and abs(ly) <= hd + tol


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def nearest_wall_gap(fp: Footprint, face: str, room: RoomPolygon) -> tuple[float, int, float]:
    """Gap from one face of a footprint to the nearest wall.

    Returns (gap meters, wall index, angle deviation in degrees). The angle is
    measured between the face's outward normal and the wall's outward normal,
    so a face resting flat against a wall reads 0.
    """
    if not all(room.contains_point(c, tol=1e-7) for c in fp.corners):
        raise FootprintOutsideRoom(f"footprint at {fp.center} exits the room polygon")
    seg = fp.face_segment(face)
    best_gap = math.inf
    best_index = 0
    for i, (w1, w2) in enumerate(room.walls):
        d = segment_segment_distance(seg[0], seg[1], w1, w2)
        if d < best_gap:
            best_gap = d
            best_index = i
    inward = room.wall_inward_normal(best_index)
    outward = (-inward[0], -inward[1])
    angle_dev = angle_between(fp.axis(face), outward)
    return (best_gap, best_index, angle_dev)


def footprint_overlap_area(a: Footprint, b: Footprint) -> float:
    """Intersection area of two oriented rectangles (0 when disjoint)."""
    # cheap AABB reject before clipping
    ax = [c[0] for c in a.corners]
    ay = [c[1] for c in a.corners]
    bx = [c[0] for c in b.corners]
    by = [c[1] for c in b.corners]
    if max(ax) < min(bx) or max(bx) < min(ax) or max(ay) < min(by) or max(by) < min(ay):
        return 0.0
    poly = convex_clip(list(a.corners), list(b.corners))
    if len(poly) < 3:
        return 0.0
    return abs(polygon_area(poly))


def clearance_zone(fp: Footprint, direction: str, depth: float) -> Footprint:
    """Rectangle extruded `depth` meters from the front or back face.

    For direction "down" the zone is the footprint itself (the floor area the
    object occupies). A zero depth yields a degenerate sliver of ~zero area.
    """
    if depth < 0:
        raise GeometryError("clearance depth must be >= 0")
    if direction == "down":
        return fp
    if direction not in ("front", "back"):
        raise GeometryError(f"unknown clearance direction {direction!r}")
    hw, hd = fp.half_extents
    half_depth = max(depth / 2.0, 1e-9)
    sign = 1.0 if direction == "front" else -1.0
    local_center = (0.0, sign * (hd + depth / 2.0))
    return Footprint(fp.to_world(local_center), (hw, half_depth), fp.rotation)


def pair_distance(a: Footprint, b: Footprint) -> float:
    """Minimum boundary-to-boundary distance between two rectangles (0 if overlapping)."""
    if footprints_intersect(a, b):
        return 0.0
    ca, cb = a.corners, b.corners
    best = math.inf
    for i in range(4):
        a1, a2 = ca[i], ca[(i + 1) % 4]
        for j in range(4):
            d = segment_segment_distance(a1, a2, cb[j], cb[(j + 1) % 4])
            if d < best:
                best = d
    return best


def footprints_intersect(a: Footprint, b: Footprint) -> bool:
    """Separating-axis test for two oriented rectangles (touching counts as intersecting)."""
    for rect in (a, b):
        c, s = rect._rot
        for axis in ((c, s), (-s, c)):
            amin, amax = _project(a.corners, axis)
            bmin, bmax = _project(b.corners, axis)
            if amax < bmin - _EPS or bmax < amin - _EPS:
                return False
    return True


def _project(corners, axis) -> tuple[float, float]:
    vals = [c[0] * axis[0] + c[1] * axis[1] for c in corners]
    return min(vals), max(vals)


def footprint_to_segment_distance(fp: Footprint, seg: tuple[Point, Point]) -> float:
    """Distance from a rectangle (interior included) to a segment."""
    if fp.contains_point(seg[0]) or fp.contains_point(seg[1]):
        return 0.0
    corners = fp.corners
    best = math.inf
    for i in range(4):
        d = segment_segment_distance(corners[i], corners[(i + 1) % 4], seg[0], seg[1])
        if d < best:
            best = d
    return best


def door_swing_zone(feature: WallFeature, room: RoomPolygon) -> Footprint | None:
    """Swing clearance of a door, approximated by a square abutting the wall.

    The square has side `swing_depth`, centered on the door span, extruded
    into the room. Zero-swing features have no zone.
    """
    if feature.swing_depth <= 0:
        return None
    p1, p2 = room.feature_segment(feature)
    mid = ((p1[0] + p2[0]) / 2.0, (p1[1] + p2[1]) / 2.0)
    inward = room.wall_inward_normal(feature.wall_index)
    half = feature.swing_depth / 2.0
    center = (mid[0] + inward[0] * half, mid[1] + inward[1] * half)
    rotation = math.degrees(math.atan2(-inward[0], inward[1]))
    return Footprint(center, (half, half), rotation)
