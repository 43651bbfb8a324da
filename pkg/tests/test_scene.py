from __future__ import annotations

import json

import pytest

import fixtures
from roomsmith.annealer import AnnealConfig, initial_layout, optimize
from roomsmith.render import render_loss_curve, render_top_view, view_frame, world_to_pixel
from roomsmith.ruledsl import parse_bundle
from roomsmith.scene import (
    SceneError,
    build_scene_document,
    layout_from_dict,
    layout_to_dict,
    load_scene,
    reverify_metrics,
    scene_json,
    scene_layout,
)


@pytest.fixture(scope="module")
def finished_run(catalog_ext):
    room = fixtures.case_study_room()
    bundle = parse_bundle(
        fixtures.SELECTION_V2, fixtures.CONSTRAINTS_TEXT, fixtures.SCORE_TERMS_TEXT, catalog_ext
    )
    layout = initial_layout(bundle, room.polygon, catalog_ext, seed=11)
    result = optimize(bundle, layout, catalog_ext, AnnealConfig(seed=11))
    scene = build_scene_document(bundle, room, result, catalog_ext, seed=11, created_ts=0.0, finished_ts=1.0)
    return room, bundle, result, scene


class TestSceneDocument:
    def test_object_count_matches_quantities(self, finished_run):
        _room, bundle, _result, scene = finished_run
        assert len(scene.objects) == sum(q for _n, q in bundle.quantities())

    def test_parents_resolve(self, finished_run):
        *_ignored, scene = finished_run
        ids = {o["id"] for o in scene.objects}
        for o in scene.objects:
            assert o["parent"] is None or o["parent"] in ids

    def test_metrics_reverify_exactly(self, finished_run, catalog_ext):
        _room, _bundle, result, scene = finished_run
        energy = reverify_metrics(scene, catalog_ext)
        assert energy.loss == pytest.approx(scene.metrics["final_loss"], abs=1e-9)
        assert energy.violation == pytest.approx(scene.metrics["final_violation"], abs=1e-9)
        assert energy.total == pytest.approx(scene.metrics["final_total"], abs=1e-9)

    def test_json_round_trip(self, finished_run, catalog_ext):
        *_ignored, scene = finished_run
        text = scene_json(scene)
        again = load_scene(text)
        assert again.doc == scene.doc
        layout = scene_layout(again, catalog_ext)
        assert len(layout.placements) == len(scene.objects)

    def test_canonical_bytes(self, finished_run):
        *_ignored, scene = finished_run
        assert scene_json(scene) == scene_json(load_scene(scene_json(scene)))

    def test_load_rejects_foreign_documents(self):
        with pytest.raises(SceneError):
            load_scene(json.dumps({"format": "something-else"}))
        with pytest.raises(SceneError):
            load_scene(json.dumps({"format": "roomsmith-scene/1", "room": {}}))

    def test_layout_dict_round_trip(self, finished_run):
        room, _bundle, result, _scene = finished_run
        doc = layout_to_dict(result.layout)
        again = layout_from_dict(doc, room.polygon)
        assert again.placements == result.layout.placements


class TestTopView:
    def test_empty_room_renders_outline_only(self, catalog):
        from roomsmith.annealer import OptimizeResult, LossTrace
        from roomsmith.scoring import Energy, Layout

        room = fixtures.case_study_room()
        bundle = parse_bundle("", "", "", catalog)
        result = OptimizeResult(
            layout=Layout(room.polygon, []), trace=LossTrace(), snapshots=[],
            initial_energy=Energy(0, 0), final_energy=Energy(0, 0),
        )
        scene = build_scene_document(bundle, room, result, catalog, seed=0, created_ts=0, finished_ts=0)
        png = render_top_view(scene)
        assert png[:8] == b"\x89PNG\r\n\x1a\n"

    def test_identical_scenes_identical_bytes(self, finished_run):
        *_ignored, scene = finished_run
        assert render_top_view(scene) == render_top_view(scene)

    def test_single_sofa_pixel_position(self, catalog):
        from roomsmith.annealer import OptimizeResult, LossTrace
        from roomsmith.geometry import Footprint
        from roomsmith.scoring import Energy, Layout, Placement

        room = fixtures.case_study_room()
        bundle = parse_bundle("livingroom | sofas | seating.SofaFactory | 1", "", "", catalog)
        sofa = Placement(
            "sofas_0", "sofas", "seating.SofaFactory", 1,
            Footprint((2.0, 1.0), (1.0, 0.45), 0.0), "large",
        )
        result = OptimizeResult(
            layout=Layout(room.polygon, [sofa]), trace=LossTrace(), snapshots=[],
            initial_energy=Energy(0, 0), final_energy=Energy(0, 0),
        )
        scene = build_scene_document(bundle, room, result, catalog, seed=0, created_ts=0, finished_ts=0)
        png = render_top_view(scene, px_per_m=50.0, label_objects=False)

        from io import BytesIO
        from PIL import Image

        img = Image.open(BytesIO(png)).convert("RGB")
        frame, size_px = view_frame(room.polygon.vertices, 50.0)
        assert (img.width, img.height) == size_px
        cx, cy = world_to_pixel((2.0, 1.0), frame, size_px)
        ox, oy = world_to_pixel((2.0, 3.5), frame, size_px)
        # object fill color #7fa8c9 at the sofa center, background white elsewhere
        assert img.getpixel((round(cx), round(cy))) == (127, 168, 201)
        assert img.getpixel((round(ox), round(oy))) == (255, 255, 255)


class TestLossCurve:
    def test_curve_png(self, finished_run):
        _room, _bundle, result, _scene = finished_run
        png = render_loss_curve(result.trace)
        assert png[:8] == b"\x89PNG\r\n\x1a\n"
        assert render_loss_curve(result.trace) == png
