"""Deterministic matplotlib rendering: top-view rasters and loss curves.

The top view maps the room into a fixed-scale orthographic frame (px/m is
configurable) with the axes spanning the padded room bounding box, so tests
can invert pixel coordinates exactly. PNG metadata is stripped to keep
identical scenes byte-identical.
"""

from __future__ import annotations

import io
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Polygon as MplPolygon
from matplotlib.patches import Rectangle
from matplotlib.transforms import Affine2D

from .annealer import LossTrace
from .scene import SceneDocument

MARGIN_M = 0.5  # padding around the room bounding box

OBJECT_FILL = "#7fa8c9"
OBJECT_EDGE = "#2b4a66"
DOOR_COLOR = "#b03a2e"
WINDOW_COLOR = "#2874a6"
OPEN_COLOR = "#7d8a8f"


def view_frame(room_vertices, px_per_m: float = 50.0):
    """((xmin, ymin, xmax, ymax) world frame incl. margin, (width_px, height_px))."""
    xs = [v[0] for v in room_vertices]
    ys = [v[1] for v in room_vertices]
    xmin, xmax = min(xs) - MARGIN_M, max(xs) + MARGIN_M
    ymin, ymax = min(ys) - MARGIN_M, max(ys) + MARGIN_M
    width_px = round((xmax - xmin) * px_per_m)
    height_px = round((ymax - ymin) * px_per_m)
    return (xmin, ymin, xmax, ymax), (width_px, height_px)


def world_to_pixel(p, frame, size_px):
    """Invert the top-view projection (pixel row 0 is the top of the image)."""
    (xmin, ymin, xmax, ymax) = frame
    w, h = size_px
    px = (p[0] - xmin) / (xmax - xmin) * w
    py = h - (p[1] - ymin) / (ymax - ymin) * h
    return (px, py)


def render_top_view(scene: SceneDocument, px_per_m: float = 50.0, label_objects: bool = True) -> bytes:
    room = scene.room()
    frame, size_px = view_frame(room.polygon.vertices, px_per_m)
    dpi = 100.0
    fig = plt.figure(figsize=(size_px[0] / dpi, size_px[1] / dpi), dpi=dpi)
    ax = fig.add_axes((0.0, 0.0, 1.0, 1.0))
    ax.set_xlim(frame[0], frame[2])
    ax.set_ylim(frame[1], frame[3])
    ax.set_aspect("equal")
    ax.axis("off")

    ax.add_patch(
        MplPolygon(list(room.polygon.vertices), closed=True, fill=False, edgecolor="black", linewidth=2.0)
    )
    for feature in room.polygon.features:
        seg = room.polygon.feature_segment(feature)
        color = {"door": DOOR_COLOR, "window": WINDOW_COLOR, "open": OPEN_COLOR}[feature.kind]
        ax.plot([seg[0][0], seg[1][0]], [seg[0][1], seg[1][1]], color=color, linewidth=4.0, solid_capstyle="butt")
        if feature.kind == "door" and feature.swing_depth > 0:
            from .geometry import door_swing_zone

            zone = door_swing_zone(feature, room.polygon)
            if zone is not None:
                ax.add_patch(
                    MplPolygon(list(zone.corners), closed=True, fill=False, edgecolor=color,
                               linewidth=0.8, linestyle="--")
                )

    for obj in sorted(scene.objects, key=lambda o: o["id"]):
        w, d, _h = obj["dims"]
        cx, cy = obj["position"]
        rot = obj["rotation"]
        rect = Rectangle((-w / 2.0, -d / 2.0), w, d, facecolor=OBJECT_FILL, edgecolor=OBJECT_EDGE, linewidth=1.2)
        rect.set_transform(Affine2D().rotate_deg(rot).translate(cx, cy) + ax.transData)
        ax.add_patch(rect)
        # front tick: short stroke from the front edge midpoint outward
        r = math.radians(rot)
        fx, fy = -math.sin(r), math.cos(r)
        x0, y0 = cx + fx * d / 2.0, cy + fy * d / 2.0
        ax.plot([x0, x0 + fx * 0.12], [y0, y0 + fy * 0.12], color=OBJECT_EDGE, linewidth=1.6)
        if label_objects:
            ax.text(cx, cy, obj["object_name"], fontsize=6, ha="center", va="center", color="#1b2b3a")

    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=dpi, metadata={"Software": None})
    plt.close(fig)
    return buf.getvalue()


def render_loss_curve(trace: LossTrace) -> bytes:
    fig, ax = plt.subplots(figsize=(6.4, 3.6), dpi=100)
    xs = range(1, len(trace.records) + 1)
    ax.plot(xs, [r.proposed_total for r in trace.records], color="#c9d4dd", linewidth=0.6, label="proposed")
    ax.plot(xs, [r.best_total for r in trace.records], color="#2b4a66", linewidth=1.6, label="best so far")
    ax.set_xlabel("proposal")
    ax.set_ylabel("energy")
    ax.legend(loc="upper right", frameon=False)
    fig.tight_layout()
    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata={"Software": None})
    plt.close(fig)
    return buf.getvalue()
