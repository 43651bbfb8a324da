"""Parser, validator, and serializer for the pipe-delimited spatial rule language.

Three grammars share the `field | field | ...` line shape:

  selection:    room_type | object_name | factory | quantity
  constraints:  object_name | parent, kind [| parent, kind]
  score terms:  object_name | distance | accessibility | angle_alignment | focus_score | volume

Parsing is total: any input yields typed values or a ParseError carrying a
stable machine-readable code (see ERROR_CODES). The full grammar is documented
in docs/rule_language.md.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

from .catalog import Catalog, UnknownFactory

# constraint kinds allowed with the literal parent "rooms"
WALL_KINDS = frozenset(
    {
        "none",
        "against_wall",
        "corner_against_wall",
        "flush_wall",
        "spaced_wall",
        "side_against_wall",
        "back_near_wall",
        "side_near_wall",
    }
)

# constraint kinds allowed with another selected object as parent
OBJECT_KINDS = frozenset(
    {
        "none",
        "front_against",
        "front_to_front",
        "leftright_leftright",
        "side_by_side",
        "back_to_back",
    }
)

# related names usable in score terms besides selected objects
RELATED_CLASSES = frozenset({"doors", "windows", "furniture", "opens", "walls", "rooms"})

ACCESS_DIRECTIONS = frozenset({"cu.front_dir", "cu.back_dir", "cu.down_dir"})
ANGLE_ORIENTATIONS = frozenset({"cu.front", "cu.side", "cu.back", "cu.top", "cu.leftright", "cu.bottom"})
# orientations with no meaning on a 2D floor plane; parsed but scored as zero
DEGENERATE_ORIENTATIONS = frozenset({"cu.top", "cu.bottom"})

SCORE_COLUMNS = ("distance", "accessibility", "angle_alignment", "focus_score", "volume")

MAX_WEIGHT = 10.0

ERROR_CODES = frozenset(
    {
        "field_count",
        "empty_field",
        "object_name_case",
        "unknown_factory",
        "object_factory_mismatch",
        "bad_quantity",
        "floorlamp_limit",
        "unknown_object",
        "unknown_parent",
        "self_parent",
        "unknown_kind",
        "kind_parent_mismatch",
        "mixed_parents",
        "too_many_constraints",
        "malformed_constraint",
        "unknown_related",
        "multi_term",
        "wrong_column_term",
        "malformed_term",
        "bad_range",
        "bad_direction",
        "bad_orientation",
        "bad_minmax",
        "bad_weight",
        "bad_distance",
    }
)


class ParseError(ValueError):
    """A rejected rule line, with a stable error code for UI display."""

    def __init__(self, line_no: int, code: str, reason: str, text: str = ""):
        assert code in ERROR_CODES, f"unregistered error code {code!r}"
        self.line_no = line_no
        self.code = code
        self.reason = reason
        self.text = text
        super().__init__(f"line {line_no}: [{code}] {reason}")


class RuleDslWarning(UserWarning):
    pass


def _warn(msg: str) -> None:
    warnings.warn(msg, RuleDslWarning, stacklevel=3)


# ---------------------------------------------------------------------------
# typed rule values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SelectionItem:
    room_type: str
    object_name: str
    factory: str
    quantity: int


@dataclass(frozen=True)
class ConstraintRule:
    object_name: str
    parent: str  # "rooms" or another selected object name
    kinds: tuple[str, ...]

    @property
    def wall_relative(self) -> bool:
        return self.parent == "rooms"


@dataclass(frozen=True)
class DistanceTerm:
    related: str
    range: tuple[float, float] | None  # None means "no specific range"
    minmax: str
    weight: float


@dataclass(frozen=True)
class AccessTerm:
    related: str
    direction: str  # cu.front_dir | cu.back_dir | cu.down_dir
    distance: float
    minmax: str
    weight: float


@dataclass(frozen=True)
class AngleTerm:
    related: str
    orientation: str
    minmax: str
    weight: float


@dataclass(frozen=True)
class FocusTerm:
    related: str
    minmax: str
    weight: float


@dataclass(frozen=True)
class VolumeTerm:
    minmax: str
    weight: float


@dataclass(frozen=True)
class ScoreTermSet:
    object_name: str
    distance: DistanceTerm | None = None
    accessibility: AccessTerm | None = None
    angle: AngleTerm | None = None
    focus: FocusTerm | None = None
    volume: VolumeTerm | None = None

    def active_terms(self):
        for name in ("distance", "accessibility", "angle", "focus", "volume"):
            term = getattr(self, name)
            if term is not None:
                yield name, term


@dataclass(frozen=True)
class RuleBundle:
    selections: tuple[SelectionItem, ...] = ()
    constraints: tuple[ConstraintRule, ...] = ()
    score_terms: tuple[ScoreTermSet, ...] = ()

    def selection_names(self) -> list[str]:
        return [s.object_name for s in self.selections]

    def quantities(self) -> list[tuple[str, int]]:
        """The (object name, quantity) projection of the selection list."""
        return [(s.object_name, s.quantity) for s in self.selections]

    def constraints_for(self, object_name: str) -> ConstraintRule | None:
        for rule in self.constraints:
            if rule.object_name == object_name:
                return rule
        return None

    def score_terms_for(self, object_name: str) -> ScoreTermSet | None:
        for ts in self.score_terms:
            if ts.object_name == object_name:
                return ts
        return None


# ---------------------------------------------------------------------------
# shared line handling
# ---------------------------------------------------------------------------

def _lines(text: str):
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line:
            yield i, line


def _split_pipes(line: str) -> list[str]:
    return [f.strip() for f in line.split("|")]


def _selection_names(selections) -> set[str]:
    names = set()
    for s in selections:
        names.add(s.object_name if isinstance(s, SelectionItem) else str(s))
    return names


def _parse_weight(raw: str, line_no: int, text: str) -> float:
    try:
        w = float(raw)
    except ValueError:
        raise ParseError(line_no, "bad_weight", f"weight {raw!r} is not a number", text)
    if not 0.0 <= w <= MAX_WEIGHT:
        raise ParseError(
            line_no, "bad_weight", f"weight {w} outside [0.0, {MAX_WEIGHT}]", text
        )
    return w


def _parse_minmax(raw: str, line_no: int, text: str) -> str:
    if raw not in ("min", "max"):
        raise ParseError(line_no, "bad_minmax", f"expected min or max, got {raw!r}", text)
    return raw


# ---------------------------------------------------------------------------
# selection grammar
# ---------------------------------------------------------------------------

def parse_selection(text: str, catalog: Catalog) -> list[SelectionItem]:
    """Parse object-selection lines; factories validate against the catalog."""
    items: dict[str, SelectionItem] = {}
    order: list[str] = []
    for line_no, line in _lines(text):
        fields = _split_pipes(line)
        if len(fields) != 4:
            raise ParseError(
                line_no, "field_count", f"expected 4 pipe-separated fields, got {len(fields)}", line
            )
        room_type, object_name, factory, qty_raw = fields
        if not room_type or not object_name or not factory or not qty_raw:
            raise ParseError(line_no, "empty_field", "empty field in selection line", line)
        if object_name != object_name.lower() or " " in object_name:
            raise ParseError(
                line_no,
                "object_name_case",
                f"object names must be lowercase without spaces: {object_name!r}",
                line,
            )
        try:
            entry = catalog.lookup(factory)
        except UnknownFactory:
            raise ParseError(line_no, "unknown_factory", f"unknown factory {factory!r}", line)
        if entry.object_name != object_name:
            raise ParseError(
                line_no,
                "object_factory_mismatch",
                f"{factory} produces {entry.object_name!r}, not {object_name!r}",
                line,
            )
        try:
            quantity = int(qty_raw)
        except ValueError:
            raise ParseError(line_no, "bad_quantity", f"quantity {qty_raw!r} is not an integer", line)
        if quantity < 1:
            raise ParseError(line_no, "bad_quantity", f"quantity must be >= 1, got {quantity}", line)
        if object_name == "floorlamps" and quantity > 1:
            raise ParseError(line_no, "floorlamp_limit", "at most 1 floor lamp per room", line)
        if object_name in items:
            _warn(f"duplicate selection for {object_name!r}; keeping the last line")
        else:
            order.append(object_name)
        items[object_name] = SelectionItem(room_type, object_name, factory, quantity)
    return [items[name] for name in order]


# ---------------------------------------------------------------------------
# constraint grammar
# ---------------------------------------------------------------------------

# kind pairs that pull the same gap in incompatible directions
_CONFLICTING_KINDS = (
    frozenset({"against_wall", "spaced_wall"}),
    frozenset({"flush_wall", "spaced_wall"}),
)


def parse_constraints(text: str, selections) -> list[ConstraintRule]:
    """Parse constraint lines against an accepted selection list."""
    names = _selection_names(selections)
    rules: dict[str, ConstraintRule] = {}
    order: list[str] = []
    for line_no, line in _lines(text):
        fields = _split_pipes(line)
        if len(fields) < 2:
            raise ParseError(line_no, "field_count", "expected an object and 1-2 constraints", line)
        if len(fields) > 3:
            raise ParseError(
                line_no, "too_many_constraints", f"at most 2 constraints per object, got {len(fields) - 1}", line
            )
        object_name = fields[0]
        if object_name not in names:
            raise ParseError(
                line_no, "unknown_object", f"{object_name!r} is not in the accepted selection", line
            )
        parent: str | None = None
        kinds: list[str] = []
        for cell in fields[1:]:
            parts = [p.strip() for p in cell.split(",")]
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ParseError(
                    line_no, "malformed_constraint", f"constraint cell {cell!r} must be 'parent, kind'", line
                )
            cell_parent, kind = parts
            if kind not in WALL_KINDS | OBJECT_KINDS:
                raise ParseError(line_no, "unknown_kind", f"unknown constraint kind {kind!r}", line)
            if cell_parent == "rooms":
                if kind not in WALL_KINDS:
                    raise ParseError(
                        line_no,
                        "kind_parent_mismatch",
                        f"{kind!r} is an object-to-object kind but parent is 'rooms'",
                        line,
                    )
            else:
                if cell_parent not in names:
                    raise ParseError(
                        line_no, "unknown_parent", f"parent {cell_parent!r} is not in the selection", line
                    )
                if cell_parent == object_name:
                    raise ParseError(
                        line_no, "self_parent", f"{object_name!r} cannot relate to itself", line
                    )
                if kind not in OBJECT_KINDS:
                    raise ParseError(
                        line_no,
                        "kind_parent_mismatch",
                        f"{kind!r} is a wall kind and may only relate to 'rooms'",
                        line,
                    )
            if parent is None:
                parent = cell_parent
            elif cell_parent != parent:
                raise ParseError(
                    line_no,
                    "mixed_parents",
                    f"constraints on one object must share a parent ({parent!r} vs {cell_parent!r})",
                    line,
                )
            kinds.append(kind)
        assert parent is not None
        for pair in _CONFLICTING_KINDS:
            if pair <= set(kinds):
                _warn(f"constraint kinds {sorted(pair)} on {object_name!r} pull against each other")
        if object_name in rules:
            _warn(f"duplicate constraint line for {object_name!r}; keeping the last line")
        else:
            order.append(object_name)
        rules[object_name] = ConstraintRule(object_name, parent, tuple(kinds))
    return [rules[name] for name in order]


# ---------------------------------------------------------------------------
# score-term grammar
# ---------------------------------------------------------------------------

def _infer_term_family(parts: list[str]) -> str | None:
    """Guess which column a comma-split cell was written for."""
    n = len(parts)
    if n == 5 and parts[1] in ACCESS_DIRECTIONS:
        return "accessibility"
    if n == 4 and parts[1] in ANGLE_ORIENTATIONS:
        return "angle_alignment"
    if n == 4 and (parts[1] == "none" or _RANGE_RE.match(parts[1])):
        return "distance"
    if n == 3 and parts[1] in ("min", "max"):
        return "focus_score"
    if n == 2 and parts[0] in ("min", "max"):
        return "volume"
    return None


def _check_related(related: str, names: set[str], line_no: int, text: str) -> str:
    if related in names or related in RELATED_CLASSES:
        return related
    raise ParseError(
        line_no,
        "unknown_related",
        f"related object {related!r} is neither a selection nor one of {sorted(RELATED_CLASSES)}",
        text,
    )


_FLOAT = r"[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?"
_RANGE_RE = re.compile(rf"^({_FLOAT})\s*-\s*({_FLOAT})$")


def _parse_range(raw: str, line_no: int, text: str) -> tuple[float, float] | None:
    if raw == "none":
        return None
    m = _RANGE_RE.match(raw.strip())
    if m is None:
        raise ParseError(line_no, "bad_range", f"distance range {raw!r} must be 'lo - hi' or 'none'", text)
    lo, hi = float(m.group(1)), float(m.group(2))
    if hi < lo:
        raise ParseError(line_no, "bad_range", f"need 0 <= lo <= hi in range {raw!r}", text)
    return (lo, hi)


def _parse_term_cell(column: str, cell: str, names: set[str], line_no: int, line: str):
    if cell == "none":
        return None
    if ";" in cell:
        raise ParseError(
            line_no, "multi_term", f"only one term per column; found ';' in {column} cell", line
        )
    parts = [p.strip() for p in cell.split(",")]
    family = _infer_term_family(parts)
    if family is not None and family != column:
        raise ParseError(
            line_no,
            "wrong_column_term",
            f"{family}-shaped term in {column} column: {cell!r}",
            line,
        )
    if column == "distance":
        if len(parts) != 4:
            raise ParseError(
                line_no, "malformed_term", f"distance term needs 4 comma fields, got {len(parts)}", line
            )
        related = _check_related(parts[0], names, line_no, line)
        rng = _parse_range(parts[1], line_no, line)
        minmax = _parse_minmax(parts[2], line_no, line)
        weight = _parse_weight(parts[3], line_no, line)
        return DistanceTerm(related, rng, minmax, weight)
    if column == "accessibility":
        if len(parts) != 5:
            raise ParseError(
                line_no, "malformed_term", f"accessibility term needs 5 comma fields, got {len(parts)}", line
            )
        related = _check_related(parts[0], names, line_no, line)
        if parts[1] not in ACCESS_DIRECTIONS:
            raise ParseError(
                line_no, "bad_direction", f"direction must be one of {sorted(ACCESS_DIRECTIONS)}, got {parts[1]!r}", line
            )
        try:
            dist = float(parts[2])
        except ValueError:
            raise ParseError(line_no, "bad_distance", f"clearance distance {parts[2]!r} is not a number", line)
        if dist < 0:
            raise ParseError(line_no, "bad_distance", "clearance distance must be >= 0", line)
        minmax = _parse_minmax(parts[3], line_no, line)
        weight = _parse_weight(parts[4], line_no, line)
        return AccessTerm(related, parts[1], dist, minmax, weight)
    if column == "angle_alignment":
        if len(parts) != 4:
            raise ParseError(
                line_no, "malformed_term", f"angle term needs 4 comma fields, got {len(parts)}", line
            )
        related = _check_related(parts[0], names, line_no, line)
        if parts[1] not in ANGLE_ORIENTATIONS:
            raise ParseError(
                line_no, "bad_orientation", f"orientation must be one of {sorted(ANGLE_ORIENTATIONS)}, got {parts[1]!r}", line
            )
        if parts[1] in DEGENERATE_ORIENTATIONS:
            _warn(f"orientation {parts[1]} has no meaning on the floor plane; term scores 0")
        minmax = _parse_minmax(parts[2], line_no, line)
        weight = _parse_weight(parts[3], line_no, line)
        return AngleTerm(related, parts[1], minmax, weight)
    if column == "focus_score":
        if len(parts) != 3:
            raise ParseError(
                line_no, "malformed_term", f"focus term needs 3 comma fields, got {len(parts)}", line
            )
        related = _check_related(parts[0], names, line_no, line)
        minmax = _parse_minmax(parts[1], line_no, line)
        weight = _parse_weight(parts[2], line_no, line)
        return FocusTerm(related, minmax, weight)
    if column == "volume":
        if len(parts) != 2:
            raise ParseError(
                line_no, "malformed_term", f"volume term needs 2 comma fields, got {len(parts)}", line
            )
        minmax = _parse_minmax(parts[0], line_no, line)
        weight = _parse_weight(parts[1], line_no, line)
        return VolumeTerm(minmax, weight)
    raise AssertionError(f"unknown column {column}")


def parse_score_terms(text: str, selections) -> list[ScoreTermSet]:
    """Parse score-term lines (six fixed columns) against an accepted selection."""
    names = _selection_names(selections)
    sets: dict[str, ScoreTermSet] = {}
    order: list[str] = []
    for line_no, line in _lines(text):
        fields = _split_pipes(line)
        if len(fields) != 6:
            raise ParseError(
                line_no,
                "field_count",
                f"expected 6 pipe-separated columns (object + {' | '.join(SCORE_COLUMNS)}), got {len(fields)}",
                line,
            )
        object_name = fields[0]
        if object_name not in names:
            raise ParseError(
                line_no, "unknown_object", f"{object_name!r} is not in the accepted selection", line
            )
        cells = {
            column: _parse_term_cell(column, cell, names, line_no, line)
            for column, cell in zip(SCORE_COLUMNS, fields[1:])
        }
        term_set = ScoreTermSet(
            object_name=object_name,
            distance=cells["distance"],
            accessibility=cells["accessibility"],
            angle=cells["angle_alignment"],
            focus=cells["focus_score"],
            volume=cells["volume"],
        )
        if object_name in sets:
            _warn(f"duplicate score-term line for {object_name!r}; keeping the last line")
        else:
            order.append(object_name)
        sets[object_name] = term_set
    return [sets[name] for name in order]


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _serialize_term(term) -> str:
    if term is None:
        return "none"
    if isinstance(term, DistanceTerm):
        rng = "none" if term.range is None else f"{_fmt(term.range[0])} - {_fmt(term.range[1])}"
        return f"{term.related}, {rng}, {term.minmax}, {_fmt(term.weight)}"
    if isinstance(term, AccessTerm):
        return f"{term.related}, {term.direction}, {_fmt(term.distance)}, {term.minmax}, {_fmt(term.weight)}"
    if isinstance(term, AngleTerm):
        return f"{term.related}, {term.orientation}, {term.minmax}, {_fmt(term.weight)}"
    if isinstance(term, FocusTerm):
        return f"{term.related}, {term.minmax}, {_fmt(term.weight)}"
    if isinstance(term, VolumeTerm):
        return f"{term.minmax}, {_fmt(term.weight)}"
    raise TypeError(f"not a score term: {term!r}")


def serialize(bundle: RuleBundle) -> tuple[str, str, str]:
    """Render a bundle back to its three canonical rule texts.

    Canonical form pads pipe separators with single spaces; parsing the output
    reproduces the bundle exactly.
    """
    sel_lines = [
        f"{s.room_type} | {s.object_name} | {s.factory} | {s.quantity}" for s in bundle.selections
    ]
    con_lines = [
        " | ".join([r.object_name] + [f"{r.parent}, {k}" for k in r.kinds])
        for r in bundle.constraints
    ]
    score_lines = [
        " | ".join(
            [ts.object_name]
            + [
                _serialize_term(getattr(ts, attr))
                for attr in ("distance", "accessibility", "angle", "focus", "volume")
            ]
        )
        for ts in bundle.score_terms
    ]
    return ("\n".join(sel_lines), "\n".join(con_lines), "\n".join(score_lines))


def parse_bundle(
    selection_text: str, constraints_text: str, score_terms_text: str, catalog: Catalog
) -> RuleBundle:
    """Parse all three rule texts into one validated bundle."""
    selections = parse_selection(selection_text, catalog)
    constraints = parse_constraints(constraints_text, selections)
    score_terms = parse_score_terms(score_terms_text, selections)
    return RuleBundle(tuple(selections), tuple(constraints), tuple(score_terms))
