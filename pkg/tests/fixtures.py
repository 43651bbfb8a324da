"""Shared scripted-provider fixtures: a full living-room co-design dialogue
with one rejection round, plus helpers to build engines over temp storage."""

from __future__ import annotations

import itertools
import json
from pathlib import Path

from roomsmith.agents import MockCompletionClient
from roomsmith.catalog import load_catalog
from roomsmith.geometry import RoomPolygon, WallFeature
from roomsmith.roomspec import RoomSpec
from roomsmith.session import EngineConfig, SessionEngine, SessionStore

FEEDBACK_TEXT = "I don't want any side tables and armchair. Add 3 plants to make room more vivid."

SELECTION_V1 = """\
livingroom | sofas | seating.SofaFactory | 1
livingroom | coffeetables | tables.CoffeeTableFactory | 1
livingroom | sidetables | tables.SideTableFactory | 2
livingroom | armchairs | seating.ArmChairFactory | 1
livingroom | diningtables | tables.TableDiningFactory | 1
livingroom | chairs | seating.ChairFactory | 2
livingroom | tvstands | shelves.TVStandFactory | 1
livingroom | rugs | elements.RugFactory | 1
livingroom | floorlamps | lamp.FloorLampFactory | 1"""

SELECTION_V2 = """\
livingroom | sofas | seating.SofaFactory | 1
livingroom | coffeetables | tables.CoffeeTableFactory | 1
livingroom | diningtables | tables.TableDiningFactory | 1
livingroom | chairs | seating.ChairFactory | 2
livingroom | tvstands | shelves.TVStandFactory | 1
livingroom | rugs | elements.RugFactory | 1
livingroom | floorlamps | lamp.FloorLampFactory | 1
livingroom | plants | elements.PlantFactory | 3"""

CONSTRAINTS_TEXT = """\
sofas | rooms, against_wall
tvstands | rooms, against_wall
diningtables | rooms, spaced_wall
coffeetables | sofas, front_to_front
chairs | diningtables, front_against
floorlamps | rooms, corner_against_wall
plants | rooms, none
rugs | rooms, none"""

SCORE_TERMS_TEXT = """\
sofas | doors, 1.5 - 3.0, max, 5.0 | furniture, cu.front_dir, 0.1, max, 6.0 | none | none | min, 8.0
coffeetables | none | none | sofas, cu.front, min, 5.0 | sofas, min, 6.0 | none
tvstands | none | furniture, cu.front_dir, 0.5, max, 4.0 | sofas, cu.front, min, 3.0 | none | none
diningtables | walls, 0.2 - 0.8, min, 4.0 | furniture, cu.front_dir, 0.4, max, 3.0 | none | none | min, 2.0
chairs | none | none | diningtables, cu.front, min, 4.0 | diningtables, min, 5.0 | none
floorlamps | walls, 0.0 - 0.5, min, 3.0 | none | none | none | none
plants | walls, 0.0 - 0.4, min, 2.0 | none | none | none | min, 1.0
rugs | none | none | none | none | none"""


def case_study_room() -> RoomSpec:
    return RoomSpec(
        room_type="livingroom",
        polygon=RoomPolygon(
            [(0, 0), (5.5, 0), (5.5, 4), (0, 4)],
            features=(
                WallFeature("door", 0, 0.6, 1.5, swing_depth=0.9),
                WallFeature("window", 2, 1.5, 3.5),
            ),
        ),
        requirement="living room with dining function",
        size=22.0,
    )


def case_study_responses(grader_scores=("Score: 80",)) -> dict:
    return {
        ("spatial", "selection"): [SELECTION_V1, SELECTION_V2],
        ("interactive", "selection"): [
            "I picked a sofa, a coffee table, two side tables, an armchair, a dining set, a TV stand, a rug and a floor lamp.",
            "I picked a sofa, a coffee table, a dining set, a TV stand, a rug, a floor lamp and 3 plants.",
        ],
        ("spatial", "constraints"): [CONSTRAINTS_TEXT],
        ("interactive", "constraints"): [
            "The sofa and TV stand go against walls; the coffee table faces the sofa; chairs pull up to the dining table."
        ],
        ("spatial", "score_terms"): [SCORE_TERMS_TEXT],
        ("interactive", "score_terms"): [
            "The sofa stays clear of the door, everything keeps breathing room, and the plants hug the walls."
        ],
        ("grader", "score"): list(grader_scores),
        ("reference", "describe"): ["A sofa faces a TV stand along the long wall; a dining table sits by the window."],
    }


def case_study_client(grader_scores=("Score: 80",)) -> MockCompletionClient:
    return MockCompletionClient(case_study_responses(grader_scores))


def write_fixture_file(path: Path, responses: dict | None = None, supports_images: bool = True) -> Path:
    responses = responses if responses is not None else case_study_responses()
    records = []
    for (agent, stage), texts in responses.items():
        for i, text in enumerate(texts, start=1):
            records.append({"agent": agent, "stage": stage, "attempt": i, "text": text})
    doc = {"supports_images": supports_images, "responses": records}
    path.write_text(json.dumps(doc, indent=2) + "\n", "utf-8")
    return path


class CountingClock:
    """Deterministic monotone clock for byte-identical logs."""

    def __init__(self, start: float = 0.0):
        self._counter = itertools.count()
        self._start = start

    def __call__(self) -> float:
        return self._start + float(next(self._counter))


def make_engine(tmp_path, client=None, config: EngineConfig | None = None, allow_extensions=True):
    store = SessionStore(tmp_path / "sessions")
    catalog = load_catalog(allow_extensions=allow_extensions)
    engine = SessionEngine(
        store=store,
        catalog=catalog,
        client=client if client is not None else case_study_client(),
        config=config or EngineConfig(),
        clock=CountingClock(),
    )
    return engine
