from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

import fixtures

CLI = [sys.executable, "-m", "roomsmith.gateway.cli"]

DECISIONS = [
    {"action": "reject", "feedback": fixtures.FEEDBACK_TEXT},
    {"action": "accept"},
    {"action": "accept"},
    {"action": "accept"},
]


def write_polygon(path: Path) -> Path:
    room = fixtures.case_study_room()
    path.write_text(json.dumps(room.to_dict()["polygon"]))
    return path


def run_cli(*args: str):
    return subprocess.run(CLI + list(args), capture_output=True, text=True, timeout=300)


@pytest.fixture
def workdir(tmp_path):
    write_polygon(tmp_path / "room.json")
    fixtures.write_fixture_file(tmp_path / "mock.json", fixtures.case_study_responses(("Score: 60", "Score: 80")))
    (tmp_path / "decisions.json").write_text(json.dumps(DECISIONS))
    return tmp_path


def generate_args(workdir: Path, out: str, name: str, mode: str, seed: int = 7, extensions: bool = True):
    args = [
        "generate",
        "--room-type", "livingroom",
        "--room-size", "22",
        "--polygon", str(workdir / "room.json"),
        "--requirement", "living room with dining function",
        "--mode", mode,
        "--seed", str(seed),
        "--out", str(workdir / out),
        "--name", name,
        "--provider", "mock",
        "--fixtures", str(workdir / "mock.json"),
    ]
    if extensions:
        args.append("--extensions")
    if mode == "manual":
        args += ["--decisions", str(workdir / "decisions.json")]
    return args


class TestGenerate:
    def test_auto_run_exit_zero_and_exports(self, workdir):
        result = run_cli(*generate_args(workdir, "out1", "floorplan_1b1b", "auto"))
        assert result.returncode == 0, result.stderr
        exports = workdir / "out1" / "floorplan_1b1b" / "exports"
        for f in ("scene.json", "loss.csv", "top_view.png", "loss_curve.png"):
            assert (exports / f).exists()
        assert "export:" in result.stdout

    def test_same_command_twice_byte_identical(self, workdir):
        a = run_cli(*generate_args(workdir, "outa", "run", "auto"))
        b = run_cli(*generate_args(workdir, "outb", "run", "auto"))
        assert a.returncode == 0 and b.returncode == 0
        for rel in ("exports/scene.json", "exports/loss.csv", "events.jsonl"):
            fa = (workdir / "outa" / "run" / rel).read_bytes()
            fb = (workdir / "outb" / "run" / rel).read_bytes()
            assert fa == fb, f"{rel} differs between identical runs"

    def test_manual_replay_roster(self, workdir):
        result = run_cli(*generate_args(workdir, "out2", "floorplan_1b1b", "manual"))
        assert result.returncode == 0, result.stderr
        scene = json.loads((workdir / "out2" / "floorplan_1b1b" / "exports" / "scene.json").read_text())
        names = [o["object_name"] for o in scene["objects"]]
        assert names.count("plants") == 3
        assert "sidetables" not in names and "armchairs" not in names

    def test_missing_polygon_is_config_error(self, workdir):
        args = generate_args(workdir, "out3", "x", "auto")
        args[args.index("--polygon") + 1] = str(workdir / "nope.json")
        result = run_cli(*args)
        assert result.returncode == 2
        assert "config error" in result.stderr

    def test_exhausted_decisions_is_config_error(self, workdir):
        (workdir / "decisions.json").write_text(json.dumps(DECISIONS[:1]))
        result = run_cli(*generate_args(workdir, "out4", "x", "manual"))
        assert result.returncode == 2
        assert "decisions" in result.stderr

    def test_garbage_provider_is_stage_failure(self, workdir):
        fixtures.write_fixture_file(
            workdir / "garbage.json",
            {("spatial", "selection"): ["nonsense"], ("interactive", "selection"): ["?"]},
        )
        args = generate_args(workdir, "out5", "x", "auto")
        args[args.index("--fixtures") + 1] = str(workdir / "garbage.json")
        result = run_cli(*args)
        assert result.returncode == 3

    def test_tiny_room_is_unplaceable(self, workdir):
        (workdir / "tiny.json").write_text(json.dumps({"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}))
        args = generate_args(workdir, "out6", "x", "auto")
        args[args.index("--polygon") + 1] = str(workdir / "tiny.json")
        args[args.index("--room-size") + 1] = "1"
        result = run_cli(*args)
        assert result.returncode == 4

    def test_extension_vocabulary_is_opt_in(self, workdir):
        result = run_cli(*generate_args(workdir, "out7", "x", "manual", extensions=False))
        assert result.returncode == 3  # plants line never parses under the core vocabulary


class TestReport:
    def test_report_over_two_scenes(self, workdir):
        for out, seed in (("ra", 1), ("rb", 2)):
            result = run_cli(*generate_args(workdir, out, "run", "auto", seed=seed))
            assert result.returncode == 0, result.stderr
        eval_reply_a = "User-intent alignment: 7\nAesthetic coherence: 7\nFunctionality: 6\nCirculation design: 5"
        eval_reply_b = "User-intent alignment: 8\nAesthetic coherence: 8\nFunctionality: 7\nCirculation design: 7"
        fixtures.write_fixture_file(
            workdir / "eval.json", {("evaluator", "design"): [eval_reply_a, eval_reply_b]}
        )
        result = run_cli(
            "report",
            str(workdir / "ra" / "run" / "exports" / "scene.json"),
            str(workdir / "rb" / "run" / "exports" / "scene.json"),
            "--out", str(workdir / "report"),
            "--provider", "mock",
            "--fixtures", str(workdir / "eval.json"),
            "--labels", "baseline,interactive",
        )
        assert result.returncode == 0, result.stderr
        assert "average,6.25,7.5" in result.stdout
        report = json.loads((workdir / "report" / "report.json").read_text())
        assert report["averages"]["delta"] == 1.25
        assert (workdir / "report" / "scores.png").exists()

    def test_report_requires_fixtures_for_mock(self, workdir):
        result = run_cli("report", str(workdir / "room.json"), str(workdir / "room.json"), "--out", str(workdir / "r"))
        assert result.returncode == 2
