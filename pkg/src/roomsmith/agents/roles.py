"""The four agent roles: reference description, spatial rule generation with
parse-repair, plain-language translation, and scoring (0-100 rule grading plus
the four-criterion design evaluation)."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Sequence

from ..catalog import Catalog
from ..roomspec import RoomSpec
from ..ruledsl import ParseError, RuleBundle, parse_constraints, parse_score_terms, parse_selection, serialize
from .client import ClientError, CompletionClient
from .templates import (
    EXTENSIONS_HEADER,
    FEEDBACK_HEADER,
    GUIDELINES_HEADER,
    REPAIR_HEADER,
    append_section,
    render_prompt,
)

log = logging.getLogger(__name__)

STAGES = ("selection", "constraints", "score_terms")

_SPATIAL_TEMPLATES = {
    "selection": "spatial_selection",
    "constraints": "spatial_constraints",
    "score_terms": "spatial_score_terms",
}
_INTERACTIVE_TEMPLATES = {
    "selection": "interactive_selection",
    "constraints": "interactive_constraints",
    "score_terms": "interactive_score_terms",
}
_RAW_PLACEHOLDER = {
    "selection": "raw_object_selection_text",
    "constraints": "raw_constraints_text",
    "score_terms": "raw_scoreterms_text",
}


class StageFailed(RuntimeError):
    """The rule generator kept producing unparseable output."""

    def __init__(self, stage: str, attempts: list[str], last_error: ParseError):
        self.stage = stage
        self.attempts = attempts
        self.last_error = last_error
        super().__init__(f"stage {stage!r} failed after {len(attempts)} attempts: {last_error}")


class UngradableReply(ValueError):
    pass


class CapabilityError(RuntimeError):
    """Operation needs an image-capable client."""


@dataclass(frozen=True)
class ReferenceNote:
    image_ref: str
    guide_id: str
    description: str


@dataclass(frozen=True)
class EvaluationScores:
    user_intent: int
    aesthetic: int
    functionality: int
    circulation: int
    rationale: str

    def as_dict(self) -> dict:
        return {
            "user_intent": self.user_intent,
            "aesthetic": self.aesthetic,
            "functionality": self.functionality,
            "circulation": self.circulation,
        }

    @property
    def average(self) -> float:
        return (self.user_intent + self.aesthetic + self.functionality + self.circulation) / 4.0


def _room_spec_text(room: RoomSpec, reference_notes: Sequence[str] = ()) -> str:
    parts = [room.requirement or "no special requirement"]
    if room.function:
        parts.append(f"intended function: {room.function}")
    for note in reference_notes:
        parts.append(f"reference room: {note}")
    return "; ".join(parts)


def _selected_objects_text(bundle: RuleBundle) -> str:
    return ", ".join(f"{name}: {q}" for name, q in bundle.quantities())


def stage_bindings(
    stage: str, room: RoomSpec, prior: RuleBundle, reference_notes: Sequence[str] = ()
) -> dict:
    bindings = {
        "room_type": room.room_type,
        "room_size": f"{room.size:g}",
        "room_polygon": room.polygon_text(),
        "room_spec": _room_spec_text(room, reference_notes),
    }
    if stage in ("constraints", "score_terms"):
        bindings["selected_objects"] = _selected_objects_text(prior)
    return bindings


def _check_stage_order(stage: str, prior: RuleBundle) -> None:
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    if stage == "constraints" and not prior.selections:
        raise ValueError("constraints stage needs an accepted selection")
    if stage == "score_terms" and not prior.constraints:
        raise ValueError("score_terms stage needs accepted constraints")


def _parse_stage(stage: str, raw: str, prior: RuleBundle, catalog: Catalog):
    if stage == "selection":
        return parse_selection(raw, catalog)
    if stage == "constraints":
        return parse_constraints(raw, prior.selections)
    return parse_score_terms(raw, prior.selections)


def _extension_section(catalog: Catalog) -> str:
    extras = [e for e in catalog.visible_entries() if not e.canonical]
    if not extras:
        return ""
    lines = [f"{e.factory_name} ({e.object_name})" for e in extras]
    return "These extension factories are also available:\n" + "\n".join(lines)


def spatial_propose(
    stage: str,
    room: RoomSpec,
    prior: RuleBundle,
    feedback: str | None,
    context: Sequence[str],
    client: CompletionClient,
    catalog: Catalog,
    reference_notes: Sequence[str] = (),
    max_attempts: int = 3,
):
    """Generate one stage's rules, re-prompting on parse failures.

    Returns (raw_text, parsed). Raises StageFailed with every raw attempt
    preserved once the repair budget is spent.
    """
    _check_stage_order(stage, prior)
    prompt = render_prompt(_SPATIAL_TEMPLATES[stage], stage_bindings(stage, room, prior, reference_notes))
    if stage == "selection":
        prompt = append_section(prompt, EXTENSIONS_HEADER, _extension_section(catalog))
    prompt = append_section(prompt, GUIDELINES_HEADER, "\n\n".join(context))
    prompt = append_section(prompt, FEEDBACK_HEADER, feedback or "")

    attempts: list[str] = []
    last_error: ParseError | None = None
    current_prompt = prompt
    for _attempt in range(max_attempts):
        raw = client.complete(current_prompt, key=("spatial", stage))
        attempts.append(raw)
        try:
            parsed = _parse_stage(stage, raw, prior, catalog)
        except ParseError as e:
            last_error = e
            current_prompt = append_section(
                prompt,
                REPAIR_HEADER,
                f"Your previous output was rejected: {e}\n\nPrevious output:\n{raw}\n\n"
                "Return the corrected full output in the required format.",
            )
            continue
        return raw, parsed
    assert last_error is not None
    raise StageFailed(stage, attempts, last_error)


def translate(stage: str, raw_text: str, client: CompletionClient) -> str:
    """Plain-language paraphrase of raw rule text; output is displayed verbatim."""
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    if not raw_text.strip():
        raise ValueError("nothing to translate: raw_text is empty")
    prompt = render_prompt(_INTERACTIVE_TEMPLATES[stage], {_RAW_PLACEHOLDER[stage]: raw_text})
    return client.complete(prompt, key=("interactive", stage))


_INT_RE = re.compile(r"-?\d+")


def grade(
    bundle: RuleBundle,
    room: RoomSpec,
    reference_images: Sequence,
    client: CompletionClient,
) -> int:
    """Score proposed rules 0-100; parses the first in-range integer of the reply."""
    if reference_images and not client.supports_images:
        raise CapabilityError("grading against reference images needs an image-capable client")
    if not reference_images:
        log.warning("grading without reference images: text-only review")
    selection_text, constraints_text, score_terms_text = serialize(bundle)
    prompt = render_prompt(
        "grader",
        {
            "room_type": room.room_type,
            "room_spec": _room_spec_text(room),
            "room_size": f"{room.size:g}",
            "selection_text": selection_text or "(none yet)",
            "constraints_text": constraints_text or "(none yet)",
            "score_terms_text": score_terms_text or "(none yet)",
        },
    )
    reply = client.complete(prompt, key=("grader", "score"), images=reference_images)
    for token in _INT_RE.findall(reply):
        value = int(token)
        if 0 <= value <= 100:
            return value
    raise UngradableReply(f"no integer in [0, 100] found in grader reply: {reply!r}")


def describe_reference(image, client: CompletionClient, image_ref: str = "reference") -> ReferenceNote:
    """Turn one reference image into a furniture/arrangement description."""
    if not client.supports_images:
        raise CapabilityError("reference description needs an image-capable client")
    prompt = render_prompt("reference_guide", {})
    description = client.complete(prompt, key=("reference", "describe"), images=[image]).strip()
    if not description:
        raise ClientError("reference description came back empty")
    return ReferenceNote(image_ref=image_ref, guide_id="reference_guide", description=description)


_CRITERIA_PATTERNS = {
    "user_intent": re.compile(r"user[\s\-]*intent[\s\-]*alignment\s*[:=]?\s*(\d+)", re.I),
    "aesthetic": re.compile(r"aesthetic[\s\-]*coherence\s*[:=]?\s*(\d+)", re.I),
    "functionality": re.compile(r"functionality\s*[:=]?\s*(\d+)", re.I),
    "circulation": re.compile(r"circulation(?:[\s\-]*design)?\s*[:=]?\s*(\d+)", re.I),
}


def evaluate_design(
    top_view_image,
    room: RoomSpec,
    rubric_text: str,
    client: CompletionClient,
) -> EvaluationScores:
    """Four-criterion 0-10 evaluation of a rendered layout."""
    prompt = render_prompt(
        "evaluator",
        {
            "design_criteria_rubric": rubric_text,
            "room_type": room.room_type,
            "room_spec": _room_spec_text(room),
            "room_size": f"{room.size:g}",
        },
    )
    images = [top_view_image] if top_view_image is not None else []
    if images and not client.supports_images:
        raise CapabilityError("design evaluation needs an image-capable client")
    reply = client.complete(prompt, key=("evaluator", "design"), images=images)
    scores = {}
    for name, pattern in _CRITERIA_PATTERNS.items():
        m = pattern.search(reply)
        if m is None:
            raise UngradableReply(f"criterion {name!r} missing from evaluator reply")
        value = int(m.group(1))
        if not 0 <= value <= 10:
            raise UngradableReply(f"criterion {name!r} scored {value}, outside [0, 10]")
        scores[name] = value
    return EvaluationScores(rationale=reply, **scores)


def default_rubric_text() -> str:
    from importlib import resources

    return resources.files("roomsmith.data").joinpath("rubric.md").read_text("utf-8")
