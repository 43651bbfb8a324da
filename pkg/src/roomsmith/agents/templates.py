"""Prompt template loading and rendering.

Template bodies live as data files and are never edited programmatically;
extra material (user feedback, retrieved guidelines, repair hints) is
appended under fixed section headers so the stored bodies stay pristine.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

TEMPLATE_IDS = (
    "spatial_selection",
    "spatial_constraints",
    "spatial_score_terms",
    "interactive_selection",
    "interactive_constraints",
    "interactive_score_terms",
    "evaluator",
    "reference_guide",
    "grader",
)

FEEDBACK_HEADER = "USER FEEDBACK"
GUIDELINES_HEADER = "DESIGN GUIDELINES"
REPAIR_HEADER = "PREVIOUS ATTEMPT FAILED"
EXTENSIONS_HEADER = "EXTRA FACTORIES"

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


class MissingPlaceholder(KeyError):
    def __str__(self) -> str:
        return self.args[0] if self.args else ""


@lru_cache(maxsize=None)
def template_body(template_id: str) -> str:
    if template_id not in TEMPLATE_IDS:
        raise KeyError(f"unknown template id {template_id!r}")
    return (
        resources.files("roomsmith.data")
        .joinpath(f"templates/{template_id}.txt")
        .read_text("utf-8")
    )


def placeholders(template_id: str) -> set[str]:
    return set(_PLACEHOLDER_RE.findall(template_body(template_id)))


def render_prompt(template_id: str, bindings: dict) -> str:
    """Substitute every placeholder; unbound names fail loudly."""
    body = template_body(template_id)
    missing = [name for name in placeholders(template_id) if name not in bindings]
    if missing:
        raise MissingPlaceholder(
            f"template {template_id!r} is missing bindings for: {', '.join(sorted(missing))}"
        )
    return _PLACEHOLDER_RE.sub(lambda m: str(bindings[m.group(1)]), body)


def append_section(prompt: str, header: str, text: str) -> str:
    if not text:
        return prompt
    return f"{prompt.rstrip()}\n\n{header}\n\n{text.strip()}\n"
