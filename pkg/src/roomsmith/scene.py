"""Scene document: the exported record of a finished layout.

A scene document is a JSON-serializable dict with four blocks: the room, the
placed objects (dims, pose, tier, parenting), run metrics, and provenance (the
accepted rule texts plus timestamps). `scene_json` emits canonical bytes so
identical runs export identical files. The schema ships in
docs/scene_document.md.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .annealer import OptimizeResult
from .catalog import Catalog
from .geometry import Footprint
from .roomspec import RoomSpec, room_from_dict
from .ruledsl import RuleBundle, parse_bundle, serialize
from .scoring import DEFAULT_PARAMS, Energy, EnergyParams, Layout, Placement, total_energy

SCENE_FORMAT = "roomsmith-scene/1"


class SceneError(ValueError):
    pass


@dataclass(frozen=True)
class SceneDocument:
    doc: dict

    @property
    def objects(self) -> list[dict]:
        return self.doc["objects"]

    @property
    def metrics(self) -> dict:
        return self.doc["metrics"]

    @property
    def provenance(self) -> dict:
        return self.doc["provenance"]

    def object_names(self) -> list[str]:
        return [o["object_name"] for o in self.objects]

    def room(self) -> RoomSpec:
        return room_from_dict(self.doc["room"])


def build_scene_document(
    bundle: RuleBundle,
    room: RoomSpec,
    result: OptimizeResult,
    catalog: Catalog,
    seed: int,
    created_ts: float,
    finished_ts: float,
) -> SceneDocument:
    objects = []
    for p in sorted(result.layout.placements, key=lambda p: p.instance_id):
        entry = catalog.lookup(p.factory)
        w, d, h = entry.variants[p.variant_index]
        objects.append(
            {
                "id": p.instance_id,
                "object_name": p.object_name,
                "factory": p.factory,
                "variant_index": p.variant_index,
                "dims": [w, d, h],
                "position": [p.footprint.center[0], p.footprint.center[1]],
                "rotation": p.footprint.rotation,
                "tier": p.tier,
                "parent": p.parent_instance,
            }
        )
    expected = sum(q for _name, q in bundle.quantities())
    if len(objects) != expected:
        raise SceneError(f"scene has {len(objects)} objects, accepted rules promise {expected}")
    ids = {o["id"] for o in objects}
    for o in objects:
        if o["parent"] is not None and o["parent"] not in ids:
            raise SceneError(f"object {o['id']} has dangling parent {o['parent']}")
    selection_text, constraints_text, score_terms_text = serialize(bundle)
    doc = {
        "format": SCENE_FORMAT,
        "room": room.to_dict(),
        "objects": objects,
        "metrics": {
            "final_loss": result.final_energy.loss,
            "final_violation": result.final_energy.violation,
            "initial_total": result.initial_energy.total,
            "final_total": result.final_energy.total,
            "iterations": len(result.trace.records),
            "seed": seed,
        },
        "provenance": {
            "selection_text": selection_text,
            "constraints_text": constraints_text,
            "score_terms_text": score_terms_text,
            "created_ts": created_ts,
            "finished_ts": finished_ts,
        },
    }
    return SceneDocument(doc)


def scene_json(scene: SceneDocument) -> str:
    return json.dumps(scene.doc, indent=2, sort_keys=True) + "\n"


def load_scene(text_or_doc) -> SceneDocument:
    doc = json.loads(text_or_doc) if isinstance(text_or_doc, (str, bytes)) else text_or_doc
    if doc.get("format") != SCENE_FORMAT:
        raise SceneError(f"not a scene document (format={doc.get('format')!r})")
    for key in ("room", "objects", "metrics", "provenance"):
        if key not in doc:
            raise SceneError(f"scene document missing {key!r}")
    return SceneDocument(doc)


def scene_layout(scene: SceneDocument, catalog: Catalog) -> Layout:
    """Rebuild the placed layout from a scene document."""
    room = scene.room()
    placements = []
    for o in scene.objects:
        entry = catalog.lookup(o["factory"])
        w, d, _h = o["dims"]
        hw, hd = (w / 2.0, d / 2.0) if entry.front_axis == "depth" else (d / 2.0, w / 2.0)
        placements.append(
            Placement(
                instance_id=o["id"],
                object_name=o["object_name"],
                factory=o["factory"],
                variant_index=o.get("variant_index", 0),
                footprint=Footprint(tuple(o["position"]), (hw, hd), o["rotation"]),
                tier=o["tier"],
                parent_instance=o.get("parent"),
            )
        )
    return Layout(room.polygon, placements)


def scene_bundle(scene: SceneDocument, catalog: Catalog) -> RuleBundle:
    prov = scene.provenance
    return parse_bundle(
        prov["selection_text"], prov["constraints_text"], prov["score_terms_text"], catalog
    )


def reverify_metrics(scene: SceneDocument, catalog: Catalog, params: EnergyParams = DEFAULT_PARAMS) -> Energy:
    """Recompute the stored layout's energy; must reproduce the stored metrics."""
    layout = scene_layout(scene, catalog)
    bundle = scene_bundle(scene, catalog)
    return total_energy(bundle, layout, params)


# ---------------------------------------------------------------------------
# layout <-> dict for snapshot events
# ---------------------------------------------------------------------------

def layout_to_dict(layout: Layout) -> dict:
    return {
        "placements": [
            {
                "id": p.instance_id,
                "object_name": p.object_name,
                "factory": p.factory,
                "variant_index": p.variant_index,
                "center": [p.footprint.center[0], p.footprint.center[1]],
                "half_extents": [p.footprint.half_extents[0], p.footprint.half_extents[1]],
                "rotation": p.footprint.rotation,
                "tier": p.tier,
                "parent": p.parent_instance,
            }
            for p in layout.placements
        ]
    }


def layout_from_dict(doc: dict, room) -> Layout:
    placements = [
        Placement(
            instance_id=rec["id"],
            object_name=rec["object_name"],
            factory=rec["factory"],
            variant_index=rec["variant_index"],
            footprint=Footprint(tuple(rec["center"]), tuple(rec["half_extents"]), rec["rotation"]),
            tier=rec["tier"],
            parent_instance=rec.get("parent"),
        )
        for rec in doc["placements"]
    ]
    return Layout(room, placements)
