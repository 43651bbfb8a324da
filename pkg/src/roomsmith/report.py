"""Side-by-side evaluation of two scenes against the design criteria rubric.

Renders both top views, asks the evaluator for the four criterion scores of
each, and emits a comparison document (JSON, schema in
docs/report.schema.json) plus a delimited table and matplotlib figures.
"""

from __future__ import annotations

import base64
import io
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .agents import default_rubric_text, evaluate_design
from .render import render_top_view
from .scene import SceneDocument

REPORT_FORMAT = "roomsmith-report/1"

CRITERIA = ("user_intent", "aesthetic", "functionality", "circulation")
CRITERIA_LABELS = {
    "user_intent": "User-intent alignment",
    "aesthetic": "Aesthetic coherence",
    "functionality": "Functionality",
    "circulation": "Circulation design",
}


def compare_report(
    scene_a: SceneDocument,
    scene_b: SceneDocument,
    client,
    rubric_text: str | None = None,
    labels: tuple[str, str] = ("a", "b"),
    px_per_m: float = 50.0,
) -> dict:
    rubric = rubric_text if rubric_text is not None else default_rubric_text()
    report_scenes = []
    pngs = []
    for label, scene in zip(labels, (scene_a, scene_b)):
        png = render_top_view(scene, px_per_m)
        pngs.append(png)
        image_b64 = base64.b64encode(png).decode("ascii")
        scores = evaluate_design(image_b64, scene.room(), rubric, client)
        report_scenes.append(
            {
                "label": label,
                "object_count": len(scene.objects),
                "scores": scores.as_dict(),
                "average": scores.average,
                "rationale": scores.rationale,
            }
        )
    a, b = report_scenes
    rows = [
        {
            "criterion": c,
            "label": CRITERIA_LABELS[c],
            labels[0]: a["scores"][c],
            labels[1]: b["scores"][c],
            "delta": b["scores"][c] - a["scores"][c],
        }
        for c in CRITERIA
    ]
    report = {
        "format": REPORT_FORMAT,
        "labels": list(labels),
        "scenes": report_scenes,
        "rows": rows,
        "averages": {
            labels[0]: a["average"],
            labels[1]: b["average"],
            "delta": b["average"] - a["average"],
        },
    }
    report["_pngs"] = pngs  # stripped before serialization
    return report


def report_csv(report: dict) -> str:
    la, lb = report["labels"]
    lines = [f"criterion,{la},{lb},delta"]
    for row in report["rows"]:
        lines.append(f"{row['criterion']},{row[la]},{row[lb]},{row['delta']}")
    avg = report["averages"]
    lines.append(f"average,{avg[la]},{avg[lb]},{avg['delta']}")
    return "\n".join(lines) + "\n"


def report_json(report: dict) -> str:
    doc = {k: v for k, v in report.items() if not k.startswith("_")}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def render_score_chart(report: dict) -> bytes:
    la, lb = report["labels"]
    fig, ax = plt.subplots(figsize=(6.4, 3.2), dpi=100)
    x = range(len(CRITERIA))
    width = 0.38
    ax.bar([i - width / 2 for i in x], [r[la] for r in report["rows"]], width, label=la, color="#c9a66b")
    ax.bar([i + width / 2 for i in x], [r[lb] for r in report["rows"]], width, label=lb, color="#2b4a66")
    ax.set_xticks(list(x))
    ax.set_xticklabels([CRITERIA_LABELS[c] for c in CRITERIA], fontsize=7)
    ax.set_ylim(0, 10)
    ax.set_ylabel("score / 10")
    ax.legend(frameon=False)
    fig.tight_layout()
    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata={"Software": None})
    plt.close(fig)
    return buf.getvalue()


def write_report_files(report: dict, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    la, lb = report["labels"]
    for label, png in zip((la, lb), report["_pngs"]):
        p = out / f"top_view_{label}.png"
        p.write_bytes(png)
        written.append(p)
    p = out / "report.json"
    p.write_text(report_json(report), "utf-8")
    written.append(p)
    p = out / "report.csv"
    p.write_text(report_csv(report), "utf-8")
    written.append(p)
    p = out / "scores.png"
    p.write_bytes(render_score_chart(report))
    written.append(p)
    return written
