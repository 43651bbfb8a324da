from __future__ import annotations

import json
from pathlib import Path

import pytest
from jsonschema import validate

import fixtures
from roomsmith.agents import MockCompletionClient
from roomsmith.annealer import AnnealConfig, initial_layout, optimize
from roomsmith.report import compare_report, report_csv, report_json, write_report_files
from roomsmith.ruledsl import parse_bundle
from roomsmith.scene import build_scene_document

SCHEMA = json.loads((Path(__file__).parent.parent / "docs" / "report.schema.json").read_text())

BASELINE_REPLY = (
    "User-intent alignment: 7\nAesthetic coherence: 7\nFunctionality: 6\nCirculation design: 5\n"
    "Evaluation: adequate but cramped."
)
INTERACTIVE_REPLY = (
    "User-intent alignment: 8\nAesthetic coherence: 8\nFunctionality: 7\nCirculation design: 7\n"
    "Evaluation: the fundamentals already meet the brief."
)


@pytest.fixture(scope="module")
def two_scenes(catalog_ext):
    room = fixtures.case_study_room()
    bundle = parse_bundle(
        fixtures.SELECTION_V2, fixtures.CONSTRAINTS_TEXT, fixtures.SCORE_TERMS_TEXT, catalog_ext
    )
    scenes = []
    for seed in (21, 22):
        layout = initial_layout(bundle, room.polygon, catalog_ext, seed=seed)
        result = optimize(bundle, layout, catalog_ext, AnnealConfig(seed=seed, iters_large=10, iters_medium=8, iters_small=4))
        scenes.append(build_scene_document(bundle, room, result, catalog_ext, seed=seed, created_ts=0, finished_ts=1))
    return scenes


def evaluator_client(replies):
    return MockCompletionClient({("evaluator", "design"): list(replies)})


class TestCompareReport:
    def test_four_criteria_averages(self, two_scenes):
        client = evaluator_client([BASELINE_REPLY, INTERACTIVE_REPLY])
        report = compare_report(two_scenes[0], two_scenes[1], client, labels=("baseline", "interactive"))
        assert report["averages"]["baseline"] == 6.25
        assert report["averages"]["interactive"] == 7.50
        assert report["averages"]["delta"] == 1.25
        deltas = {r["criterion"]: r["delta"] for r in report["rows"]}
        assert deltas == {"user_intent": 1, "aesthetic": 1, "functionality": 1, "circulation": 2}

    def test_identical_scene_and_reply_zero_deltas(self, two_scenes):
        client = evaluator_client([BASELINE_REPLY, BASELINE_REPLY])
        report = compare_report(two_scenes[0], two_scenes[0], client)
        assert report["averages"]["delta"] == 0.0
        assert all(r["delta"] == 0 for r in report["rows"])

    def test_report_validates_against_published_schema(self, two_scenes):
        client = evaluator_client([BASELINE_REPLY, INTERACTIVE_REPLY])
        report = compare_report(two_scenes[0], two_scenes[1], client)
        validate(json.loads(report_json(report)), SCHEMA)

    def test_evaluator_receives_rendered_image(self, two_scenes):
        client = evaluator_client([BASELINE_REPLY, INTERACTIVE_REPLY])
        compare_report(two_scenes[0], two_scenes[1], client)
        assert all(c.image_count == 1 for c in client.calls)

    def test_csv_shape(self, two_scenes):
        client = evaluator_client([BASELINE_REPLY, INTERACTIVE_REPLY])
        report = compare_report(two_scenes[0], two_scenes[1], client)
        lines = report_csv(report).strip().splitlines()
        assert lines[0] == "criterion,a,b,delta"
        assert len(lines) == 6  # header + 4 criteria + average
        assert lines[-1].startswith("average,6.25,7.5,")

    def test_written_files(self, two_scenes, tmp_path):
        client = evaluator_client([BASELINE_REPLY, INTERACTIVE_REPLY])
        report = compare_report(two_scenes[0], two_scenes[1], client)
        written = write_report_files(report, tmp_path / "report")
        names = {p.name for p in written}
        assert names == {"top_view_a.png", "top_view_b.png", "report.json", "report.csv", "scores.png"}
        for p in written:
            assert p.exists() and p.stat().st_size > 0
