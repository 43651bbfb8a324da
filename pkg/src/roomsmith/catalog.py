"""Furniture factory registry.

Loads the closed factory vocabulary from a JSON data file and answers
name/factory lookups and size-tier queries. Extension entries (marked
canonical=false in the data file) are hidden unless explicitly enabled,
so the core vocabulary stays closed by default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

TIERS = ("large", "medium", "small")


class UnknownFactory(KeyError):
    """Requested name is not in the factory registry."""

    def __str__(self) -> str:  # KeyError quotes its repr by default
        return self.args[0] if self.args else ""


@dataclass(frozen=True)
class FactoryEntry:
    factory_name: str
    object_name: str
    variants: tuple[tuple[float, float, float], ...]  # (width, depth, height) meters
    tier: str
    front_axis: str = "depth"
    canonical: bool = True

    def __post_init__(self) -> None:
        if self.tier not in TIERS:
            raise ValueError(f"bad tier {self.tier!r} for {self.factory_name}")
        if self.front_axis not in ("depth", "width"):
            raise ValueError(f"bad front_axis {self.front_axis!r} for {self.factory_name}")
        if not self.variants:
            raise ValueError(f"{self.factory_name} needs at least one variant")
        for w, d, h in self.variants:
            if w <= 0 or d <= 0 or h <= 0:
                raise ValueError(f"non-positive variant dimension in {self.factory_name}")
        name = self.object_name
        if name != name.lower() or " " in name:
            raise ValueError(f"object name must be lowercase without spaces: {name!r}")

    def footprint_extents(self, variant_index: int) -> tuple[float, float]:
        """Half extents (half-width, half-depth) with the front along local +depth."""
        w, d, _h = self.variants[variant_index]
        if self.front_axis == "width":
            w, d = d, w
        return (w / 2.0, d / 2.0)


@dataclass
class Catalog:
    entries: list[FactoryEntry]
    allow_extensions: bool = False
    _by_object: dict[str, FactoryEntry] = field(init=False, repr=False)
    _by_factory: dict[str, FactoryEntry] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._by_object = {}
        self._by_factory = {}
        for e in self.entries:
            if e.object_name in self._by_object:
                raise ValueError(f"duplicate object name {e.object_name!r}")
            self._by_object[e.object_name] = e
            self._by_factory[e.factory_name] = e

    def _visible(self, entry: FactoryEntry) -> bool:
        return entry.canonical or self.allow_extensions

    def lookup(self, name_or_factory: str) -> FactoryEntry:
        """Resolve an entry by object name (case-insensitive) or exact factory name."""
        key = name_or_factory.strip()
        entry = self._by_factory.get(key) or self._by_object.get(key.lower())
        if entry is None or not self._visible(entry):
            raise UnknownFactory(f"unknown factory or object name: {name_or_factory!r}")
        return entry

    def knows(self, name_or_factory: str) -> bool:
        try:
            self.lookup(name_or_factory)
            return True
        except UnknownFactory:
            return False

    def canonical_entries(self) -> list[FactoryEntry]:
        return [e for e in self.entries if e.canonical]

    def visible_entries(self) -> list[FactoryEntry]:
        return [e for e in self.entries if self._visible(e)]

    def factory_prompt_list(self) -> str:
        """Comma-separated factory names for prompt injection, grouped by namespace."""
        groups: dict[str, list[str]] = {}
        for e in self.visible_entries():
            ns = e.factory_name.split(".")[0]
            groups.setdefault(ns, []).append(e.factory_name)
        return "\n".join(", ".join(names) for _ns, names in sorted(groups.items()))


def tier_of(entry: FactoryEntry) -> str:
    return entry.tier


def load_catalog(path: str | Path | None = None, allow_extensions: bool = False) -> Catalog:
    """Load the registry from `path`, or the packaged default data file."""
    if path is None:
        raw = resources.files("roomsmith.data").joinpath("catalog.json").read_text("utf-8")
    else:
        raw = Path(path).read_text("utf-8")
    doc = json.loads(raw)
    entries = [
        FactoryEntry(
            factory_name=rec["factory"],
            object_name=rec["name"],
            variants=tuple(tuple(v) for v in rec["variants"]),
            tier=rec["tier"],
            front_axis=rec.get("front_axis", "depth"),
            canonical=rec.get("canonical", True),
        )
        for rec in doc["factories"]
    ]
    return Catalog(entries, allow_extensions=allow_extensions)
