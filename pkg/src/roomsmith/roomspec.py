"""Room brief: type, function, nominal size, boundary polygon, free-text requirement."""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import GeometryError, RoomPolygon, WallFeature

MAX_ROOM_SIZE = 1000.0  # square meters


class InvalidRoom(ValueError):
    pass


@dataclass(frozen=True)
class RoomSpec:
    room_type: str
    polygon: RoomPolygon
    requirement: str = ""
    function: str = ""
    size: float | None = None  # nominal m2; defaults to polygon area

    def __post_init__(self) -> None:
        if not self.room_type.strip():
            raise InvalidRoom("room_type must be non-empty")
        size = self.size if self.size is not None else self.polygon.area
        if not 0.0 < size <= MAX_ROOM_SIZE:
            raise InvalidRoom(f"room size must be in (0, {MAX_ROOM_SIZE}] m2, got {size}")
        object.__setattr__(self, "size", float(size))

    def polygon_text(self) -> str:
        return "[" + ", ".join(f"({x:g}, {y:g})" for x, y in self.polygon.vertices) + "]"

    def to_dict(self) -> dict:
        return {
            "room_type": self.room_type,
            "function": self.function,
            "size": self.size,
            "requirement": self.requirement,
            "polygon": {
                "vertices": [list(v) for v in self.polygon.vertices],
                "features": [
                    {
                        "kind": f.kind,
                        "wall_index": f.wall_index,
                        "start": f.start,
                        "end": f.end,
                        "swing_depth": f.swing_depth,
                    }
                    for f in self.polygon.features
                ],
            },
        }


def room_from_dict(doc: dict) -> RoomSpec:
    try:
        poly = doc["polygon"]
        vertices = [tuple(v) for v in poly["vertices"]]
        features = tuple(
            WallFeature(
                kind=f["kind"],
                wall_index=f["wall_index"],
                start=f["start"],
                end=f["end"],
                swing_depth=f.get("swing_depth", 0.0),
            )
            for f in poly.get("features", [])
        )
        polygon = RoomPolygon(vertices, features)
    except (KeyError, TypeError, ValueError, GeometryError) as e:
        raise InvalidRoom(f"bad room document: {e}") from e
    return RoomSpec(
        room_type=doc.get("room_type", ""),
        polygon=polygon,
        requirement=doc.get("requirement", ""),
        function=doc.get("function", ""),
        size=doc.get("size"),
    )
