"""Command-line interface: headless generation, the HTTP service, and
scene-comparison reports.

Headless runs use a logical counter clock for event timestamps, so the same
command with the same seed produces byte-identical exports.
"""

from __future__ import annotations

import itertools
import json
import sys
from pathlib import Path

import click

from ..agents import ProviderConfig, StageFailed, make_client
from ..annealer import AnnealConfig, Unplaceable
from ..catalog import load_catalog
from ..config import ConfigError, ServiceConfig, build_engine, load_config
from ..geometry import GeometryError
from ..report import compare_report, report_csv, write_report_files
from ..roomspec import InvalidRoom, RoomSpec, room_from_dict
from ..scene import load_scene
from ..scoring import EnergyParams
from ..session import EngineConfig, SessionEngine, SessionStore

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE_FAILED = 3
EXIT_UNPLACEABLE = 4


class _Counter:
    def __init__(self):
        self._it = itertools.count()

    def __call__(self) -> float:
        return float(next(self._it))


def _load_polygon_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"polygon file does not exist: {path}")
    try:
        doc = json.loads(p.read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"polygon file is not valid JSON: {e}") from e
    if isinstance(doc, list):  # bare vertex list
        return {"vertices": doc, "features": []}
    return doc


@click.group()
def main():
    """Furniture-layout co-design engine."""


@main.command()
@click.option("--room-type", required=True, help="e.g. livingroom, bedroom")
@click.option("--room-size", type=float, default=None, help="nominal size in m2 (default: polygon area)")
@click.option("--polygon", "polygon_file", required=True, help="JSON file with room vertices and wall features")
@click.option("--requirement", default="", help="free-text user requirement")
@click.option("--function", "room_function", default="", help="intended room function")
@click.option("--mode", type=click.Choice(["auto", "manual"]), default="auto", show_default=True)
@click.option("--decisions", "decisions_file", default=None,
              help="JSON list of {action, feedback} consumed per pending proposal (manual mode)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", required=True, help="output root; exports land in <out>/<name>/exports")
@click.option("--name", default="session", show_default=True, help="session directory name")
@click.option("--provider", type=click.Choice(["mock", "live"]), default="mock", show_default=True)
@click.option("--fixtures", "fixtures_path", default=None, help="mock provider fixture file")
@click.option("--endpoint", default="", help="live provider endpoint")
@click.option("--model", default="", help="live provider model id")
@click.option("--reference-image", "reference_images", multiple=True, help="reference image file (repeatable)")
@click.option("--extensions/--no-extensions", default=False, show_default=True,
              help="allow extension factories beyond the core vocabulary")
@click.option("--threshold", type=int, default=75, show_default=True, help="auto-mode grader threshold")
@click.option("--catalog", "catalog_path", default=None, help="catalog data file (default: packaged)")
def generate(
    room_type, room_size, polygon_file, requirement, room_function, mode, decisions_file,
    seed, out_dir, name, provider, fixtures_path, endpoint, model, reference_images,
    extensions, threshold, catalog_path,
):
    """Run the whole pipeline headless and write exports."""
    try:
        room_doc = _load_polygon_file(polygon_file)
        room = room_from_dict(
            {
                "room_type": room_type,
                "requirement": requirement,
                "function": room_function,
                "size": room_size,
                "polygon": room_doc,
            }
        )
        provider_config = ProviderConfig(
            kind=provider, fixtures_path=fixtures_path, endpoint=endpoint, model=model
        )
        if provider == "mock" and not fixtures_path:
            raise ConfigError("mock provider needs --fixtures")
        if fixtures_path and not Path(fixtures_path).exists():
            raise ConfigError(f"fixtures file does not exist: {fixtures_path}")
        client = make_client(provider_config)
        catalog = load_catalog(catalog_path, allow_extensions=extensions)
        decisions = []
        if decisions_file:
            p = Path(decisions_file)
            if not p.exists():
                raise ConfigError(f"decisions file does not exist: {decisions_file}")
            decisions = json.loads(p.read_text("utf-8"))
        images = []
        for image_path in reference_images:
            p = Path(image_path)
            if not p.exists():
                raise ConfigError(f"reference image does not exist: {image_path}")
            images.append((p.name, p.read_bytes()))
    except (ConfigError, InvalidRoom, GeometryError) as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)

    store = SessionStore(out_dir)
    engine = SessionEngine(
        store,
        catalog,
        client,
        config=EngineConfig(auto_threshold=threshold, anneal=AnnealConfig(seed=seed), energy=EnergyParams()),
        clock=_Counter(),
    )
    try:
        session = engine.create(
            room, mode=mode, options={"seed": seed, "name": name},
            reference_images=images, session_id=name,
        )
    except FileExistsError:
        click.echo(f"config error: output session directory already exists: {Path(out_dir) / name}", err=True)
        sys.exit(EXIT_CONFIG)

    decision_cursor = 0
    try:
        while session.stage in ("selection", "constraints", "score_terms"):
            engine.advance(session)
            if session.mode == "manual" and session.pending is not None:
                if decision_cursor >= len(decisions):
                    click.echo("config error: manual run exhausted --decisions while a proposal is pending", err=True)
                    sys.exit(EXIT_CONFIG)
                d = decisions[decision_cursor]
                decision_cursor += 1
                engine.decide(session, d["action"], feedback=d.get("feedback", ""), raw_text=d.get("raw_text", ""))
        session, _scene = engine.run_optimization(session)
    except StageFailed:
        click.echo("stage failed: the rule generator never produced parseable output", err=True)
        sys.exit(EXIT_STAGE_FAILED)
    except Unplaceable as e:
        click.echo(f"unplaceable: {e}", err=True)
        sys.exit(EXIT_UNPLACEABLE)

    exports = store.exports_dir(session.id)
    click.echo(f"session: {store.session_dir(session.id)}")
    for filename in ("scene.json", "loss.csv", "loss_curve.png", "top_view.png"):
        click.echo(f"export: {exports / filename}")
    click.echo(f"event log: {store.session_dir(session.id) / 'events.jsonl'}")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--config", "config_file", required=True, help="service config JSON")
def serve(config_file):
    """Run the HTTP gateway."""
    import uvicorn

    from .api import create_app

    try:
        config = load_config(config_file)
        engine = build_engine(config)
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    app = create_app(engine, api_token=config.api_token)
    uvicorn.run(app, host=config.host, port=config.port)


@main.command()
@click.argument("scene_a", type=click.Path(exists=True))
@click.argument("scene_b", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True)
@click.option("--provider", type=click.Choice(["mock", "live"]), default="mock", show_default=True)
@click.option("--fixtures", "fixtures_path", default=None)
@click.option("--endpoint", default="")
@click.option("--model", default="")
@click.option("--labels", default="a,b", show_default=True, help="two comma-separated scene labels")
def report(scene_a, scene_b, out_dir, provider, fixtures_path, endpoint, model, labels):
    """Evaluate two scenes side by side and write a comparison report."""
    try:
        if provider == "mock" and not fixtures_path:
            raise ConfigError("mock provider needs --fixtures")
        client = make_client(
            ProviderConfig(kind=provider, fixtures_path=fixtures_path, endpoint=endpoint, model=model)
        )
        label_pair = tuple(labels.split(","))
        if len(label_pair) != 2:
            raise ConfigError("--labels needs exactly two comma-separated names")
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    doc_a = load_scene(Path(scene_a).read_text("utf-8"))
    doc_b = load_scene(Path(scene_b).read_text("utf-8"))
    result = compare_report(doc_a, doc_b, client, labels=label_pair)
    written = write_report_files(result, out_dir)
    click.echo(report_csv(result), nl=False)
    for path in written:
        click.echo(f"wrote: {path}")
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
