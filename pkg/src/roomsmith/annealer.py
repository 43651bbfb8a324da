"""Tiered simulated-annealing placement optimizer.

Objects anneal one at a time, largest tier first and parents before children,
with per-tier iteration budgets (80/60/30 for large/medium/small). Each
iteration proposes a single move (translate, rotate, wall snap, or variant
swap), evaluates the full layout energy, and applies the Metropolis rule:
accept improvements outright, accept regressions with probability
exp(-dE/T) under a geometric cooling schedule. Moves that would push a
footprint out of the room are recorded but never accepted.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

from .catalog import Catalog
from .geometry import Footprint, RoomPolygon, footprints_intersect, point_segment_distance
from .ruledsl import RuleBundle
from .scoring import DEFAULT_PARAMS, Energy, EnergyParams, Layout, Placement, total_energy

TIER_RANK = {"large": 0, "medium": 1, "small": 2}


class Unplaceable(RuntimeError):
    """No variant of an object fits inside the room."""


@dataclass(frozen=True)
class AnnealConfig:
    iters_large: int = 80
    iters_medium: int = 60
    iters_small: int = 30
    t0: float = 1.0
    t_end: float = 0.01
    alpha: float | None = None  # explicit cooling factor; default derived per object
    move_weights: tuple[float, float, float, float] = (0.5, 0.2, 0.2, 0.1)
    seed: int = 0
    snapshot_stride: int = 10
    global_polish: bool = False

    def __post_init__(self) -> None:
        if min(self.iters_large, self.iters_medium, self.iters_small) < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.t0 <= 0:
            raise ValueError("t0 must be > 0")
        if self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    def iterations_for(self, tier: str) -> int:
        return {"large": self.iters_large, "medium": self.iters_medium, "small": self.iters_small}[tier]


@dataclass(frozen=True)
class TraceRecord:
    object_id: str
    iteration: int
    proposed_total: float
    accepted: bool
    best_total: float
    temperature: float


@dataclass
class LossTrace:
    records: list[TraceRecord] = field(default_factory=list)

    CSV_HEADER = "object_id,iteration,proposed_total,accepted,best_total,temperature"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for r in self.records:
            lines.append(
                f"{r.object_id},{r.iteration},{r.proposed_total!r},"
                f"{'true' if r.accepted else 'false'},{r.best_total!r},{r.temperature!r}"
            )
        return "\n".join(lines) + "\n"


@dataclass
class OptimizeResult:
    layout: Layout
    trace: LossTrace
    snapshots: list[tuple[Layout, Energy]]
    initial_energy: Energy
    final_energy: Energy


def snapshot_stream(result: OptimizeResult):
    """Iterate (layout, energy) snapshots recorded during a run."""
    yield from result.snapshots


# ---------------------------------------------------------------------------
# initial layout
# ---------------------------------------------------------------------------

def _parent_links(bundle: RuleBundle) -> dict[str, str]:
    """object name -> parent object name, from object-relative constraint rules."""
    return {r.object_name: r.parent for r in bundle.constraints if not r.wall_relative}


def _sample_footprint(
    rng: random.Random, room: RoomPolygon, half_extents: tuple[float, float]
) -> Footprint:
    minx, miny, maxx, maxy = room.bounds
    center = (rng.uniform(minx, maxx), rng.uniform(miny, maxy))
    rotation = rng.choice((0.0, 90.0, 180.0, 270.0))
    return Footprint(center, half_extents, rotation)


def initial_layout(bundle: RuleBundle, room: RoomPolygon, catalog: Catalog, seed: int = 0) -> Layout:
    """Expand selection quantities into seeded placements inside the room.

    Placement is rejection-sampled: up to 1000 draws looking for an
    overlap-free pose, then another 1000 accepting overlap as long as the
    footprint stays in the room. Raises Unplaceable when even the smallest
    variant never fits.
    """
    rng = random.Random(seed)
    parents = _parent_links(bundle)
    layout = Layout(room, [])
    placed_ids: dict[str, list[str]] = {}

    for item in bundle.selections:
        entry = catalog.lookup(item.factory)
        for k in range(item.quantity):
            instance_id = f"{item.object_name}_{k}"
            variant_order = [0] + sorted(
                range(len(entry.variants)), key=lambda i: entry.variants[i][0] * entry.variants[i][1]
            )
            placement = None
            for variant_index in dict.fromkeys(variant_order):
                he = entry.footprint_extents(variant_index)
                fp = _seed_pose(rng, layout, he, solid=item.object_name != "rugs")
                if fp is not None:
                    placement = Placement(
                        instance_id=instance_id,
                        object_name=item.object_name,
                        factory=item.factory,
                        variant_index=variant_index,
                        footprint=fp,
                        tier=entry.tier,
                    )
                    break
            if placement is None:
                raise Unplaceable(
                    f"{item.object_name} does not fit in the room with any variant"
                )
            layout.placements.append(placement)
            placed_ids.setdefault(item.object_name, []).append(instance_id)

    # wire children to parents round-robin
    for i, p in enumerate(layout.placements):
        parent_name = parents.get(p.object_name)
        if parent_name and parent_name in placed_ids:
            siblings = placed_ids[p.object_name]
            parent_ids = placed_ids[parent_name]
            parent_id = parent_ids[siblings.index(p.instance_id) % len(parent_ids)]
            layout.placements[i] = replace(p, parent_instance=parent_id)
    return layout


def _seed_pose(rng, layout: Layout, half_extents, solid: bool) -> Footprint | None:
    room = layout.room
    obstacles = [p.footprint for p in layout.placements if p.object_name != "rugs"] if solid else []
    for _ in range(1000):
        fp = _sample_footprint(rng, room, half_extents)
        if not room.contains_footprint(fp):
            continue
        if solid and any(footprints_intersect(fp, ob) for ob in obstacles):
            continue
        return fp
    for _ in range(1000):  # overlap-allowed fallback: still must be in the room
        fp = _sample_footprint(rng, room, half_extents)
        if room.contains_footprint(fp):
            return fp
    return None


# ---------------------------------------------------------------------------
# moves
# ---------------------------------------------------------------------------

_MOVES = ("translate", "rotate", "wall_snap", "variant_swap")


def _propose(
    rng: random.Random,
    placement: Placement,
    entry_variants: int,
    entry_extents,
    room: RoomPolygon,
    config: AnnealConfig,
    temperature: float,
) -> Placement:
    move = rng.choices(_MOVES, weights=config.move_weights, k=1)[0]
    fp = placement.footprint

    if move == "translate":
        sigma = max(0.02, 0.10 * room.diagonal * (temperature / config.t0))
        return placement.moved(fp.translated(rng.gauss(0.0, sigma), rng.gauss(0.0, sigma)))

    if move == "rotate":
        rotation = rng.choice((0.0, 90.0, 180.0, 270.0)) + rng.uniform(-15.0, 15.0)
        return placement.moved(Footprint(fp.center, fp.half_extents, rotation))

    if move == "wall_snap":
        walls = room.walls
        idx = min(
            range(len(walls)),
            key=lambda i: point_segment_distance(fp.center, walls[i][0], walls[i][1]),
        )
        w1, w2 = walls[idx]
        inward = room.wall_inward_normal(idx)
        rotation = math.degrees(math.atan2(-inward[0], inward[1]))
        wall_len = math.dist(w1, w2)
        d = ((w2[0] - w1[0]) / wall_len, (w2[1] - w1[1]) / wall_len)
        t = (fp.center[0] - w1[0]) * d[0] + (fp.center[1] - w1[1]) * d[1]
        hw, hd = fp.half_extents
        if wall_len > 2 * hw:
            t = min(max(t, hw), wall_len - hw)
        else:
            t = wall_len / 2.0
        foot = (w1[0] + d[0] * t, w1[1] + d[1] * t)
        offset = hd + 0.002
        center = (foot[0] + inward[0] * offset, foot[1] + inward[1] * offset)
        return placement.moved(Footprint(center, fp.half_extents, rotation))

    # variant swap: resize in place; degenerates to a no-op with one variant
    if entry_variants > 1:
        others = [i for i in range(entry_variants) if i != placement.variant_index]
        new_index = rng.choice(others)
        he = entry_extents(new_index)
        return replace(placement, variant_index=new_index, footprint=Footprint(fp.center, he, fp.rotation))
    return placement


# ---------------------------------------------------------------------------
# optimization loop
# ---------------------------------------------------------------------------

def _schedule(layout: Layout) -> list[int]:
    """Indices of placements in annealing order: tier, then parents first."""
    depth: dict[str, int] = {}

    def depth_of(p: Placement) -> int:
        if p.instance_id in depth:
            return depth[p.instance_id]
        d = 0
        if p.parent_instance is not None:
            try:
                d = depth_of(layout.by_id(p.parent_instance)) + 1
            except KeyError:
                d = 1
        depth[p.instance_id] = d
        return d

    order = list(range(len(layout.placements)))
    order.sort(key=lambda i: (TIER_RANK[layout.placements[i].tier], depth_of(layout.placements[i]), i))
    return order


def optimize(
    bundle: RuleBundle,
    layout: Layout,
    catalog: Catalog,
    config: AnnealConfig | None = None,
    params: EnergyParams = DEFAULT_PARAMS,
    on_snapshot=None,
) -> OptimizeResult:
    """Anneal every placement and return the best layout visited plus the trace."""
    config = config or AnnealConfig()
    rng = random.Random(config.seed)
    current = layout.copy()
    cur_energy = total_energy(bundle, current, params)
    best = current.copy()
    best_energy = cur_energy
    initial_energy = cur_energy
    trace = LossTrace()
    snapshots: list[tuple[Layout, Energy]] = []
    accepted_count = 0

    def emit_snapshot() -> None:
        snap = (best.copy(), best_energy)
        snapshots.append(snap)
        if on_snapshot is not None:
            on_snapshot(*snap)

    passes = 2 if config.global_polish else 1
    for pass_index in range(passes):
        t0 = config.t0 if pass_index == 0 else config.t0 * 0.1
        for idx in _schedule(current):
            placement = current.placements[idx]
            entry = catalog.lookup(placement.factory)
            iters = config.iterations_for(placement.tier)
            alpha = config.alpha if config.alpha is not None else (config.t_end / t0) ** (1.0 / iters)
            temperature = t0
            for it in range(1, iters + 1):
                placement = current.placements[idx]
                candidate = _propose(
                    rng, placement, len(entry.variants), entry.footprint_extents, current.room, config, temperature
                )
                trial = current.copy()
                trial.placements[idx] = candidate
                trial_energy = total_energy(bundle, trial, params)
                in_room = current.room.contains_footprint(candidate.footprint)
                if in_room:
                    delta = trial_energy.total - cur_energy.total
                    accepted = delta < 0 or rng.random() < math.exp(-delta / temperature)
                else:
                    accepted = False
                if accepted:
                    current = trial
                    cur_energy = trial_energy
                    accepted_count += 1
                    if trial_energy.total < best_energy.total:
                        best = trial.copy()
                        best_energy = trial_energy
                    if accepted_count % config.snapshot_stride == 0:
                        emit_snapshot()
                trace.records.append(
                    TraceRecord(
                        object_id=placement.instance_id,
                        iteration=it,
                        proposed_total=trial_energy.total,
                        accepted=accepted,
                        best_total=best_energy.total,
                        temperature=temperature,
                    )
                )
                temperature *= alpha
    emit_snapshot()
    return OptimizeResult(
        layout=best,
        trace=trace,
        snapshots=snapshots,
        initial_energy=initial_energy,
        final_energy=best_energy,
    )
