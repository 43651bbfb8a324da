"""Loss and violation functions over layouts.

Score terms become weighted soft penalties in [0, weight]; constraint kinds
become graded violations that read 0 exactly when the stated geometric
predicate holds and grow with distance-to-satisfaction. The combined energy
is loss + lambda * violation, with hard feasibility penalties (exit from the
room, object overlap, blocked door swings) folded into the violation side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import geometry
from .geometry import (
    Footprint,
    RoomPolygon,
    angle_between,
    footprint_overlap_area,
    footprint_to_segment_distance,
    pair_distance,
    segment_segment_distance,
)
from .ruledsl import (
    AccessTerm,
    AngleTerm,
    ConstraintRule,
    DistanceTerm,
    FocusTerm,
    RuleBundle,
    VolumeTerm,
)


class UnknownRelated(KeyError):
    """A term references a name with no instances and no wall-feature meaning."""

    def __str__(self) -> str:
        return self.args[0] if self.args else ""


@dataclass(frozen=True)
class Placement:
    instance_id: str
    object_name: str
    factory: str
    variant_index: int
    footprint: Footprint
    tier: str
    parent_instance: str | None = None

    def moved(self, footprint: Footprint) -> "Placement":
        return replace(self, footprint=footprint)


@dataclass
class Layout:
    room: RoomPolygon
    placements: list[Placement]

    def copy(self) -> "Layout":
        return Layout(self.room, list(self.placements))

    def by_id(self, instance_id: str) -> Placement:
        for p in self.placements:
            if p.instance_id == instance_id:
                return p
        raise KeyError(instance_id)

    def of_object(self, object_name: str) -> list[Placement]:
        return [p for p in self.placements if p.object_name == object_name]


@dataclass(frozen=True)
class Energy:
    loss: float
    violation: float
    lam: float = 100.0

    @property
    def total(self) -> float:
        return self.loss + self.lam * self.violation


@dataclass(frozen=True)
class EnergyParams:
    """Weights combining soft loss with hard violations.

    Feasibility must dominate aesthetics, so lambda is 10x the maximum term
    weight. Hard penalties (exit depth, overlap area, blocked door swings)
    carry their own coefficient on top.
    """

    lam: float = 100.0
    hard_coeff: float = 10.0
    # windows and doorless openings obstruct as a strip this deep into the room
    feature_obstacle_depth: float = 0.30


DEFAULT_PARAMS = EnergyParams()

_OVERLAP_EXEMPT = ("rugs",)  # flat layer: other objects may stand on them


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


# ---------------------------------------------------------------------------
# related-name resolution
# ---------------------------------------------------------------------------

def _children_of(placement: Placement, layout: Layout) -> set[str]:
    return {p.instance_id for p in layout.placements if p.parent_instance == placement.instance_id}


def _related_placements(related: str, placement: Placement, layout: Layout) -> list[Placement]:
    if related == "furniture":
        skip = _children_of(placement, layout) | {placement.instance_id}
        return [p for p in layout.placements if p.instance_id not in skip]
    found = [p for p in layout.placements if p.object_name == related and p.instance_id != placement.instance_id]
    return found


def _feature_segments(kind: str, room: RoomPolygon):
    return [room.feature_segment(f) for f in room.features if f.kind == kind]


_FEATURE_KINDS = {"doors": "door", "windows": "window", "opens": "open"}


def _resolve_targets(related: str, placement: Placement, layout: Layout):
    """Targets a term measures against: ('instances', [...]) or ('segments', [...])."""
    if related in _FEATURE_KINDS:
        return ("segments", _feature_segments(_FEATURE_KINDS[related], layout.room))
    if related in ("walls", "rooms"):
        return ("segments", list(layout.room.walls))
    if related == "furniture":
        return ("instances", _related_placements(related, placement, layout))
    instances = _related_placements(related, placement, layout)
    if not instances and not any(p.object_name == related for p in layout.placements):
        raise UnknownRelated(f"no instances of {related!r} in the layout")
    return ("instances", instances)


def _min_distance_to(related: str, placement: Placement, layout: Layout) -> float | None:
    kind, targets = _resolve_targets(related, placement, layout)
    if not targets:
        return None
    fp = placement.footprint
    if kind == "instances":
        return min(pair_distance(fp, t.footprint) for t in targets)
    return min(footprint_to_segment_distance(fp, seg) for seg in targets)


def _nearest_target(related: str, placement: Placement, layout: Layout):
    """(anchor point, facing direction) of the nearest related target, or None."""
    kind, targets = _resolve_targets(related, placement, layout)
    if not targets:
        return None
    cx, cy = placement.footprint.center
    if kind == "instances":
        best = min(targets, key=lambda t: (t.footprint.center[0] - cx) ** 2 + (t.footprint.center[1] - cy) ** 2)
        return (best.footprint.center, best.footprint.front_dir)
    room = layout.room
    best_seg = min(targets, key=lambda s: geometry.point_segment_distance((cx, cy), s[0], s[1]))
    mid = ((best_seg[0][0] + best_seg[1][0]) / 2.0, (best_seg[0][1] + best_seg[1][1]) / 2.0)
    d = ((best_seg[1][0] - best_seg[0][0]), (best_seg[1][1] - best_seg[0][1]))
    l = math.hypot(*d) or 1.0
    normal = (-d[1] / l, d[0] / l)  # CCW boundary: this points into the room
    return (mid, normal)


# ---------------------------------------------------------------------------
# obstacle sets for accessibility
# ---------------------------------------------------------------------------

def _obstacle_footprints(related: str, placement: Placement, layout: Layout, params: EnergyParams):
    room = layout.room
    if related == "doors":
        return [z for z in (geometry.door_swing_zone(f, room) for f in room.features if f.kind == "door") if z]
    if related in ("windows", "opens"):
        kind = _FEATURE_KINDS[related]
        zones = []
        for f in room.features:
            if f.kind != kind:
                continue
            p1, p2 = room.feature_segment(f)
            mid = ((p1[0] + p2[0]) / 2.0, (p1[1] + p2[1]) / 2.0)
            inward = room.wall_inward_normal(f.wall_index)
            depth = params.feature_obstacle_depth
            half_w = max(math.dist(p1, p2) / 2.0, 1e-9)
            center = (mid[0] + inward[0] * depth / 2.0, mid[1] + inward[1] * depth / 2.0)
            rotation = math.degrees(math.atan2(-inward[0], inward[1]))
            zones.append(Footprint(center, (half_w, depth / 2.0), rotation))
        return zones
    if related in ("walls", "rooms"):
        return "room-boundary"
    return [p.footprint for p in _related_placements(related, placement, layout)]


_ACCESS_DIRECTIONS = {"cu.front_dir": "front", "cu.back_dir": "back", "cu.down_dir": "down"}


def _obstructed_fraction(term: AccessTerm, placement: Placement, layout: Layout, params: EnergyParams) -> float:
    if term.distance <= 0.0 and term.direction != "cu.down_dir":
        return 0.0
    zone = geometry.clearance_zone(placement.footprint, _ACCESS_DIRECTIONS[term.direction], term.distance)
    if zone.area <= 1e-12:
        return 0.0
    obstacles = _obstacle_footprints(term.related, placement, layout, params)
    if obstacles == "room-boundary":
        inside = geometry.convex_clip(list(layout.room.vertices), list(zone.corners))
        inside_area = abs(geometry.polygon_area(inside)) if len(inside) >= 3 else 0.0
        return _clamp01((zone.area - inside_area) / zone.area)
    covered = math.fsum(footprint_overlap_area(zone, ob) for ob in obstacles)
    return _clamp01(covered / zone.area)


# ---------------------------------------------------------------------------
# term losses
# ---------------------------------------------------------------------------

def term_loss(term, placement: Placement, layout: Layout, params: EnergyParams = DEFAULT_PARAMS) -> float:
    """Penalty of one score term for one placement, in [0, weight].

    A term whose related class has no targets in this room (e.g. doors in a
    doorless room) costs nothing.
    """
    if isinstance(term, DistanceTerm):
        d = _min_distance_to(term.related, placement, layout)
        if d is None:
            return 0.0
        if term.range is None:
            raw = _clamp01(d / layout.room.diagonal)
        else:
            lo, hi = term.range
            raw = _clamp01((d - lo) / (hi - lo)) if hi > lo else (0.0 if d <= lo else 1.0)
        return term.weight * raw if term.minmax == "min" else term.weight * (1.0 - raw)

    if isinstance(term, AccessTerm):
        raw = _obstructed_fraction(term, placement, layout, params)
        return term.weight * raw if term.minmax == "max" else term.weight * (1.0 - raw)

    if isinstance(term, AngleTerm):
        if term.orientation in ("cu.top", "cu.bottom"):
            return 0.0
        target = _nearest_target(term.related, placement, layout)
        if target is None:
            return 0.0
        anchor, _facing = target
        cx, cy = placement.footprint.center
        to_target = (anchor[0] - cx, anchor[1] - cy)
        if abs(to_target[0]) < 1e-12 and abs(to_target[1]) < 1e-12:
            theta = 0.0
        elif term.orientation in ("cu.side", "cu.leftright"):
            theta = min(
                angle_between(placement.footprint.axis("left"), to_target),
                angle_between(placement.footprint.axis("right"), to_target),
            )
        else:
            face = "front" if term.orientation == "cu.front" else "back"
            theta = angle_between(placement.footprint.axis(face), to_target)
        raw = theta / 180.0
        return term.weight * raw if term.minmax == "min" else term.weight * (1.0 - raw)

    if isinstance(term, FocusTerm):
        target = _nearest_target(term.related, placement, layout)
        if target is None:
            return 0.0
        anchor, facing = target
        cx, cy = placement.footprint.center
        ray = (cx - anchor[0], cy - anchor[1])
        if abs(ray[0]) < 1e-12 and abs(ray[1]) < 1e-12:
            phi = 0.0
        else:
            phi = angle_between(facing, ray)
        raw = phi / 180.0
        return term.weight * raw if term.minmax == "min" else term.weight * (1.0 - raw)

    if isinstance(term, VolumeTerm):
        raw = _clamp01(placement.footprint.area / layout.room.area)
        return term.weight * raw if term.minmax == "min" else term.weight * (1.0 - raw)

    raise TypeError(f"not a score term: {term!r}")


# ---------------------------------------------------------------------------
# constraint violations
# ---------------------------------------------------------------------------

def _face_wall_gap(fp: Footprint, face: str, room: RoomPolygon) -> tuple[float, int, float]:
    """nearest_wall_gap without the in-room precondition (scoring must always evaluate)."""
    seg = fp.face_segment(face)
    best_gap, best_index = math.inf, 0
    for i, (w1, w2) in enumerate(room.walls):
        d = segment_segment_distance(seg[0], seg[1], w1, w2)
        if d < best_gap:
            best_gap, best_index = d, i
    inward = room.wall_inward_normal(best_index)
    angle_dev = angle_between(fp.axis(face), (-inward[0], -inward[1]))
    return best_gap, best_index, angle_dev


def _wall_violation(fp: Footprint, face: str, room: RoomPolygon, gap_tol: float, angle_tol: float | None) -> float:
    gap, _idx, ang = _face_wall_gap(fp, face, room)
    v = max(0.0, gap - gap_tol)
    if angle_tol is not None:
        v += max(0.0, ang - angle_tol) / 180.0
    return v


def _anti_parallel_excess(a, b, tol_deg: float) -> float:
    dev = 180.0 - angle_between(a, b)
    return max(0.0, dev - tol_deg) / 180.0


def _resolve_parent(rule: ConstraintRule, placement: Placement, layout: Layout) -> Placement | None:
    if placement.parent_instance is not None:
        try:
            parent = layout.by_id(placement.parent_instance)
            if parent.object_name == rule.parent:
                return parent
        except KeyError:
            pass
    candidates = layout.of_object(rule.parent)
    if not candidates:
        return None
    cx, cy = placement.footprint.center
    return min(candidates, key=lambda p: (p.footprint.center[0] - cx) ** 2 + (p.footprint.center[1] - cy) ** 2)


def _kind_violation(kind: str, placement: Placement, layout: Layout, parent: Placement | None) -> float:
    fp = placement.footprint
    room = layout.room

    if kind == "none":
        return 0.0

    if kind == "against_wall":
        return _wall_violation(fp, "back", room, 0.05, 5.0)
    if kind == "flush_wall":
        return _wall_violation(fp, "back", room, 0.01, None)
    if kind == "back_near_wall":
        return _wall_violation(fp, "back", room, 0.30, 15.0)
    if kind == "side_against_wall":
        return min(
            _wall_violation(fp, "left", room, 0.05, 5.0),
            _wall_violation(fp, "right", room, 0.05, 5.0),
        )
    if kind == "side_near_wall":
        return min(
            _wall_violation(fp, "left", room, 0.30, 15.0),
            _wall_violation(fp, "right", room, 0.30, 15.0),
        )
    if kind == "spaced_wall":
        gap, _idx, _ang = _face_wall_gap(fp, "back", room)
        return max(0.0, 0.10 - gap) + max(0.0, gap - 0.50)
    if kind == "corner_against_wall":
        v = _wall_violation(fp, "back", room, 0.05, 5.0)
        _gap, back_idx, _ang = _face_wall_gap(fp, "back", room)
        n = len(room.walls)
        adjacent = (room.walls[(back_idx - 1) % n], room.walls[(back_idx + 1) % n])
        side_gap = math.inf
        for face in ("left", "right"):
            seg = fp.face_segment(face)
            for w1, w2 in adjacent:
                side_gap = min(side_gap, segment_segment_distance(seg[0], seg[1], w1, w2))
        return v + max(0.0, side_gap - 0.05)

    # object-to-object kinds need a resolvable parent instance
    if parent is None:
        return 1.0  # orphaned rule: constant pressure, nothing to grade against
    pfp = parent.footprint

    if kind == "front_against":
        cseg = fp.face_segment("front")
        d = min(
            segment_segment_distance(cseg[0], cseg[1], *pfp.face_segment(face))
            for face in ("front", "left", "right")
        )
        return max(0.0, d - 0.05)

    if kind == "front_to_front":
        v = _anti_parallel_excess(fp.front_dir, pfp.front_dir, 10.0)
        cseg = fp.face_segment("front")
        pseg = pfp.face_segment("front")
        gap = segment_segment_distance(cseg[0], cseg[1], pseg[0], pseg[1])
        v += max(0.0, gap - 1.0) + max(0.0, 0.05 - gap)
        axis = pfp.axis("right")
        pvals = [p[0] * axis[0] + p[1] * axis[1] for p in pseg]
        cvals = [p[0] * axis[0] + p[1] * axis[1] for p in cseg]
        overlap = max(0.0, min(max(pvals), max(cvals)) - max(min(pvals), min(cvals)))
        frac = overlap / min(fp.face_width("front"), pfp.face_width("front"))
        return v + max(0.0, 0.5 - frac)

    if kind == "leftright_leftright":
        gap_l = footprint_to_segment_distance(fp, pfp.face_segment("left"))
        gap_r = footprint_to_segment_distance(fp, pfp.face_segment("right"))
        v = max(0.0, min(gap_l, gap_r) - 0.15)
        siblings = [
            q
            for q in layout.placements
            if q.object_name == placement.object_name and q.parent_instance == placement.parent_instance
        ]
        if len(siblings) >= 2:
            sides = set()
            for q in siblings:
                ql = footprint_to_segment_distance(q.footprint, pfp.face_segment("left"))
                qr = footprint_to_segment_distance(q.footprint, pfp.face_segment("right"))
                sides.add("left" if ql <= qr else "right")
            if len(sides) == 1:
                v += 0.25  # flanks must be shared, not crowded on one side
        return v

    if kind == "side_by_side":
        best = math.inf
        for cface in ("left", "right"):
            for pface in ("left", "right"):
                v = _anti_parallel_excess(fp.axis(cface), pfp.axis(pface), 10.0)
                cseg = fp.face_segment(cface)
                pseg = pfp.face_segment(pface)
                v += max(0.0, segment_segment_distance(cseg[0], cseg[1], pseg[0], pseg[1]) - 0.20)
                best = min(best, v)
        return best

    if kind == "back_to_back":
        v = _anti_parallel_excess(fp.axis("back"), pfp.axis("back"), 10.0)
        cseg = fp.face_segment("back")
        pseg = pfp.face_segment("back")
        return v + max(0.0, segment_segment_distance(cseg[0], cseg[1], pseg[0], pseg[1]) - 0.20)

    raise ValueError(f"unknown constraint kind {kind!r}")


def constraint_violation(rule: ConstraintRule, placement: Placement, layout: Layout) -> float:
    """Graded violation of one rule for one placement; 0 iff satisfied."""
    parent = None if rule.wall_relative else _resolve_parent(rule, placement, layout)
    return math.fsum(_kind_violation(kind, placement, layout, parent) for kind in rule.kinds)


# ---------------------------------------------------------------------------
# combined energy
# ---------------------------------------------------------------------------

def hard_penalties(layout: Layout, params: EnergyParams = DEFAULT_PARAMS) -> float:
    """Feasibility penalties: room exits, object overlap, blocked door swings."""
    room = layout.room
    ordered = sorted(layout.placements, key=lambda p: p.instance_id)
    contributions: list[float] = []
    for p in ordered:
        contributions.append(room.corner_exit_depth(p.footprint))
    solid = [p for p in ordered if p.object_name not in _OVERLAP_EXEMPT]
    for i, a in enumerate(solid):
        for b in solid[i + 1 :]:
            contributions.append(footprint_overlap_area(a.footprint, b.footprint))
    swings = [z for z in (geometry.door_swing_zone(f, room) for f in room.features if f.kind == "door") if z]
    for p in solid:
        for z in swings:
            contributions.append(footprint_overlap_area(p.footprint, z))
    return params.hard_coeff * math.fsum(contributions)


def total_energy(bundle: RuleBundle, layout: Layout, params: EnergyParams = DEFAULT_PARAMS) -> Energy:
    """Energy of a layout under a rule bundle; deterministic and order-independent."""
    ordered = sorted(layout.placements, key=lambda p: p.instance_id)
    loss_parts: list[float] = []
    violation_parts: list[float] = []
    for p in ordered:
        term_set = bundle.score_terms_for(p.object_name)
        if term_set is not None:
            for _slot, term in term_set.active_terms():
                loss_parts.append(term_loss(term, p, layout, params))
        rule = bundle.constraints_for(p.object_name)
        if rule is not None:
            violation_parts.append(constraint_violation(rule, p, layout))
    violation = math.fsum(violation_parts) + hard_penalties(layout, params)
    return Energy(loss=math.fsum(loss_parts), violation=violation, lam=params.lam)
