"""Participatory design sessions: three decision stages, manual accept/reject
loops or grader-driven auto loops, then optimization and export.

Sessions are event-sourced. Every engine operation appends records to an
append-only log and folds them into the in-memory state through the same
`apply_event` used on reload, so replaying a log reconstructs the session
exactly. One directory per session:

    <root>/<session_id>/
        session.json     static record: room, mode, options, reference notes
        events.jsonl     append-only event log
        exports/         scene.json, loss.csv, top_view.png, loss_curve.png
        images/          uploaded reference images
"""

from __future__ import annotations

import hashlib
import json
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

from . import agents, render, scene as scene_mod
from .annealer import AnnealConfig, Unplaceable, initial_layout, optimize
from .catalog import Catalog
from .roomspec import InvalidRoom, RoomSpec, room_from_dict
from .ruledsl import ParseError, RuleBundle, parse_bundle
from .scoring import DEFAULT_PARAMS, EnergyParams

STAGES = ("selection", "constraints", "score_terms", "optimizing", "done", "failed")
DECISION_STAGES = ("selection", "constraints", "score_terms")
_NEXT_STAGE = {"selection": "constraints", "constraints": "score_terms", "score_terms": "optimizing"}

EVENT_KINDS = (
    "created",
    "proposal",
    "translation",
    "accept",
    "reject",
    "feedback",
    "grade",
    "mode_change",
    "snapshot",
    "export",
    "error",
)

# which event kinds may be applied in which stage; anything else is an
# invalid transition and must raise, never silently drop
TRANSITIONS: dict[str, frozenset] = {
    "selection": frozenset({"created", "proposal", "translation", "accept", "reject", "feedback", "grade", "mode_change", "error"}),
    "constraints": frozenset({"proposal", "translation", "accept", "reject", "feedback", "grade", "mode_change", "error"}),
    "score_terms": frozenset({"proposal", "translation", "accept", "reject", "feedback", "grade", "mode_change", "error"}),
    "optimizing": frozenset({"snapshot", "export", "mode_change", "error"}),
    "done": frozenset(),
    "failed": frozenset(),
}


class SessionError(RuntimeError):
    code = "session_error"


class NoPendingProposal(SessionError):
    code = "no_pending_proposal"


class WrongMode(SessionError):
    code = "wrong_mode"


class SessionClosed(SessionError):
    code = "session_closed"


class InvalidTransition(SessionError):
    code = "invalid_transition"


@dataclass(frozen=True)
class Event:
    seq: int
    ts: float
    kind: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {"seq": self.seq, "ts": self.ts, "kind": self.kind, "payload": self.payload},
            sort_keys=True,
            separators=(",", ":"),
        )

    @staticmethod
    def from_json(line: str) -> "Event":
        doc = json.loads(line)
        return Event(seq=doc["seq"], ts=doc["ts"], kind=doc["kind"], payload=doc["payload"])


@dataclass
class PendingProposal:
    stage: str
    raw: str
    translated: str = ""


@dataclass
class Session:
    id: str
    room: RoomSpec
    mode: str
    options: dict = field(default_factory=dict)
    stage: str = "selection"
    accepted: dict = field(default_factory=dict)  # stage -> raw text
    pending: PendingProposal | None = None
    feedback: str | None = None
    grades: list[dict] = field(default_factory=list)
    reference_notes: list[str] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    exports: dict = field(default_factory=dict)  # kind -> file name
    snapshot_count: int = 0
    last_snapshot: dict | None = None
    error: str | None = None

    @property
    def seed(self) -> int:
        return int(self.options.get("seed", 0))

    @property
    def name(self) -> str:
        return self.options.get("name", self.id)

    def bundle(self, catalog: Catalog) -> RuleBundle:
        return parse_bundle(
            self.accepted.get("selection", ""),
            self.accepted.get("constraints", ""),
            self.accepted.get("score_terms", ""),
            catalog,
        )

    def state_hash(self) -> str:
        payload = {
            "id": self.id,
            "stage": self.stage,
            "mode": self.mode,
            "accepted": self.accepted,
            "pending": None if self.pending is None else [self.pending.stage, self.pending.raw, self.pending.translated],
            "feedback": self.feedback,
            "grades": self.grades,
            "exports": self.exports,
            "snapshot_count": self.snapshot_count,
            "error": self.error,
            "events": len(self.events),
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def apply_event(session: Session, event: Event) -> None:
    """Fold one event into session state; identical on live path and replay."""
    if event.kind not in EVENT_KINDS:
        raise InvalidTransition(f"unknown event kind {event.kind!r}")
    if event.kind not in TRANSITIONS[session.stage]:
        raise InvalidTransition(f"event {event.kind!r} is not legal in stage {session.stage!r}")
    if session.events and event.ts < session.events[-1].ts:
        raise InvalidTransition("event timestamps must be monotone")
    payload = event.payload

    if event.kind == "created":
        pass
    elif event.kind == "proposal":
        session.pending = PendingProposal(stage=payload["stage"], raw=payload["raw"])
    elif event.kind == "translation":
        if session.pending is None:
            raise InvalidTransition("translation without a pending proposal")
        session.pending.translated = payload["text"]
    elif event.kind == "accept":
        if session.pending is None:
            raise InvalidTransition("accept without a pending proposal")
        stage = session.pending.stage
        session.accepted[stage] = session.pending.raw
        session.pending = None
        session.feedback = None
        session.stage = _NEXT_STAGE[stage]
    elif event.kind == "reject":
        if session.pending is None:
            raise InvalidTransition("reject without a pending proposal")
        session.pending = None
        session.feedback = payload.get("feedback") or None
    elif event.kind == "feedback":
        session.feedback = payload.get("feedback") or None
    elif event.kind == "grade":
        session.grades.append({"stage": session.stage, "round": payload["round"], "score": payload["score"]})
    elif event.kind == "mode_change":
        session.mode = payload["mode"]
    elif event.kind == "snapshot":
        session.snapshot_count += 1
        session.last_snapshot = payload
    elif event.kind == "export":
        session.exports[payload["kind"]] = payload["file"]
        if payload["kind"] == "scene":
            session.stage = "done"
    elif event.kind == "error":
        session.error = payload.get("message", "unknown error")
        session.stage = "failed"
    session.events.append(event)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

class SessionStore:
    """One directory per session; the event log is the source of truth."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def session_dir(self, session_id: str) -> Path:
        return self.root / session_id

    def exports_dir(self, session_id: str) -> Path:
        return self.session_dir(session_id) / "exports"

    def initialize(self, session: Session) -> None:
        d = self.session_dir(session.id)
        d.mkdir(parents=True, exist_ok=False)
        (d / "exports").mkdir()
        (d / "images").mkdir()
        record = {
            "id": session.id,
            "room": session.room.to_dict(),
            "mode": session.mode,
            "options": session.options,
            "reference_notes": session.reference_notes,
        }
        (d / "session.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", "utf-8")
        (d / "events.jsonl").touch()

    def append_event(self, session_id: str, event: Event) -> None:
        with (self.session_dir(session_id) / "events.jsonl").open("a", encoding="utf-8") as f:
            f.write(event.to_json() + "\n")

    def save_reference_notes(self, session: Session) -> None:
        d = self.session_dir(session.id)
        record = json.loads((d / "session.json").read_text("utf-8"))
        record["reference_notes"] = session.reference_notes
        (d / "session.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", "utf-8")

    def list_sessions(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if (p / "session.json").exists())

    def exists(self, session_id: str) -> bool:
        return (self.session_dir(session_id) / "session.json").exists()

    def load(self, session_id: str) -> Session:
        d = self.session_dir(session_id)
        record = json.loads((d / "session.json").read_text("utf-8"))
        session = Session(
            id=record["id"],
            room=room_from_dict(record["room"]),
            mode=record["mode"],
            options=record["options"],
            reference_notes=list(record.get("reference_notes", [])),
        )
        for line in (d / "events.jsonl").read_text("utf-8").splitlines():
            if line.strip():
                apply_event(session, Event.from_json(line))
        return session

    def event_log_bytes(self, session_id: str) -> bytes:
        return (self.session_dir(session_id) / "events.jsonl").read_bytes()


# ---------------------------------------------------------------------------
# engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EngineConfig:
    auto_threshold: int = 75
    max_grade_rounds: int = 3
    rag_k: int = 3
    expert_edit: bool = False
    anneal: AnnealConfig = AnnealConfig()
    energy: EnergyParams = DEFAULT_PARAMS
    px_per_m: float = 50.0


class SessionEngine:
    """Drives sessions: proposal generation, decisions, grading, optimization."""

    def __init__(
        self,
        store: SessionStore,
        catalog: Catalog,
        client,
        rag_store: agents.RagStore | None = None,
        config: EngineConfig | None = None,
        clock: Callable[[], float] = time.time,
    ):
        self.store = store
        self.catalog = catalog
        self.client = client
        self.rag_store = rag_store if rag_store is not None else agents.RagStore([])
        self.config = config or EngineConfig()
        self.clock = clock

    # -- event plumbing ------------------------------------------------------

    def _emit(self, session: Session, kind: str, payload: dict) -> Event:
        event = Event(seq=len(session.events), ts=self.clock(), kind=kind, payload=payload)
        apply_event(session, event)  # validates before anything is persisted
        self.store.append_event(session.id, event)
        return event

    def _fail(self, session: Session, message: str) -> None:
        self._emit(session, "error", {"message": message})

    # -- operations ----------------------------------------------------------

    def create(
        self,
        room: RoomSpec,
        mode: str = "manual",
        options: dict | None = None,
        reference_images: Sequence[tuple[str, bytes]] = (),
        session_id: str | None = None,
    ) -> Session:
        if mode not in ("manual", "auto"):
            raise SessionError(f"mode must be manual or auto, got {mode!r}")
        if not isinstance(room, RoomSpec):
            raise InvalidRoom("room must be a RoomSpec")
        session = Session(
            id=session_id or uuid.uuid4().hex[:12], room=room, mode=mode, options=dict(options or {})
        )
        self.store.initialize(session)
        self._emit(session, "created", {"room_type": room.room_type, "mode": mode, "name": session.name})
        for name, data in reference_images:
            path = self.store.session_dir(session.id) / "images" / name
            path.write_bytes(data)
            note = agents.describe_reference(data, self.client, image_ref=name)
            session.reference_notes.append(note.description)
        if reference_images:
            self.store.save_reference_notes(session)
        return session

    def _retrieve(self, session: Session, stage: str) -> list[str]:
        query = " ".join(
            filter(None, [session.room.room_type, session.room.function, session.room.requirement, stage])
        )
        return agents.retrieve_context(self.rag_store, query, k=self.config.rag_k)

    def _propose(self, session: Session) -> None:
        stage = session.stage
        prior = session.bundle(self.catalog)
        try:
            raw, _parsed = agents.spatial_propose(
                stage,
                session.room,
                prior,
                session.feedback,
                self._retrieve(session, stage),
                self.client,
                self.catalog,
                reference_notes=session.reference_notes,
            )
        except agents.StageFailed as e:
            self._fail(session, f"stage {stage} failed: {e.last_error}")
            raise
        self._emit(session, "proposal", {"stage": stage, "raw": raw})
        translated = agents.translate(stage, raw, self.client)
        self._emit(session, "translation", {"text": translated})

    def advance(self, session: Session) -> Session:
        """Generate the next proposal; in auto mode, also run the grader loop."""
        if session.stage in ("done", "failed"):
            raise SessionClosed(f"session is {session.stage}")
        if session.stage == "optimizing":
            raise InvalidTransition("session is ready to optimize; call run_optimization")
        if session.mode == "manual":
            if session.pending is None:
                self._propose(session)
            return session

        # auto mode: propose -> grade until threshold or best-of-N
        rounds: list[tuple[int, str, str]] = []
        stage = session.stage
        for round_no in range(1, self.config.max_grade_rounds + 1):
            if session.pending is None:
                self._propose(session)
            assert session.pending is not None
            pending_raw, pending_translated = session.pending.raw, session.pending.translated
            candidate = _with_pending(session.bundle(self.catalog), stage, pending_raw, self.catalog)
            score = agents.grade(candidate, session.room, [], self.client)
            self._emit(session, "grade", {"round": round_no, "score": score})
            rounds.append((score, pending_raw, pending_translated))
            if score >= self.config.auto_threshold:
                self._emit(session, "accept", {"stage": stage, "auto": True, "score": score})
                return session
            self._emit(
                session,
                "reject",
                {
                    "feedback": f"grader score {score} below threshold {self.config.auto_threshold}",
                    "source": "grader",
                },
            )
        best_score, best_raw, best_translated = max(rounds, key=lambda r: r[0])
        self._emit(session, "proposal", {"stage": stage, "raw": best_raw, "revived_best": True})
        self._emit(session, "translation", {"text": best_translated})
        self._emit(
            session,
            "accept",
            {
                "stage": stage,
                "auto": True,
                "score": best_score,
                "warning": f"no proposal reached threshold {self.config.auto_threshold}; "
                f"accepted best of {len(rounds)} rounds",
            },
        )
        return session

    def decide(self, session: Session, action: str, feedback: str = "", raw_text: str = "") -> Session:
        if session.stage in ("done", "failed"):
            raise SessionClosed(f"session is {session.stage}")
        if session.mode != "manual":
            raise WrongMode("decisions are only accepted in manual mode")
        if session.pending is None:
            raise NoPendingProposal("no proposal awaiting a decision")
        if action == "accept":
            self._emit(session, "accept", {"stage": session.pending.stage})
        elif action == "reject":
            self._emit(session, "reject", {"feedback": feedback, "source": "user"})
        elif action == "edit":
            if not self.config.expert_edit and not session.options.get("expert_edit"):
                raise SessionError("expert rule editing is disabled for this session")
            stage = session.pending.stage
            prior = session.bundle(self.catalog)
            _validate_stage_text(stage, raw_text, prior, self.catalog)  # raises ParseError
            self._emit(session, "proposal", {"stage": stage, "raw": raw_text, "edited": True})
            translated = agents.translate(stage, raw_text, self.client)
            self._emit(session, "translation", {"text": translated})
        else:
            raise SessionError(f"unknown decision {action!r}")
        return session

    def set_mode(self, session: Session, mode: str) -> Session:
        if session.stage in ("done", "failed"):
            raise SessionClosed(f"session is {session.stage}")
        if mode not in ("manual", "auto"):
            raise SessionError(f"mode must be manual or auto, got {mode!r}")
        self._emit(session, "mode_change", {"mode": mode})
        return session

    def run_optimization(self, session: Session):
        if session.stage != "optimizing":
            raise InvalidTransition(f"optimization starts from stage 'optimizing', not {session.stage!r}")
        bundle = session.bundle(self.catalog)
        created_ts = session.events[0].ts if session.events else 0.0
        try:
            layout = initial_layout(bundle, session.room.polygon, self.catalog, seed=session.seed)
        except Unplaceable as e:
            self._fail(session, f"unplaceable: {e}")
            raise
        config = replace(self.config.anneal, seed=session.seed)

        def on_snapshot(snap_layout, energy):
            self._emit(
                session,
                "snapshot",
                {
                    "layout": scene_mod.layout_to_dict(snap_layout),
                    "loss": energy.loss,
                    "violation": energy.violation,
                    "total": energy.total,
                },
            )

        result = optimize(bundle, layout, self.catalog, config, self.config.energy, on_snapshot=on_snapshot)
        scene = scene_mod.build_scene_document(
            bundle, session.room, result, self.catalog,
            seed=session.seed, created_ts=created_ts, finished_ts=self.clock(),
        )
        exports = self.store.exports_dir(session.id)
        (exports / "loss.csv").write_text(result.trace.to_csv(), "utf-8")
        self._emit(session, "export", {"kind": "loss_csv", "file": "loss.csv"})
        (exports / "loss_curve.png").write_bytes(render.render_loss_curve(result.trace))
        self._emit(session, "export", {"kind": "loss_curve", "file": "loss_curve.png"})
        (exports / "top_view.png").write_bytes(render.render_top_view(scene, self.config.px_per_m))
        self._emit(session, "export", {"kind": "top_view", "file": "top_view.png"})
        (exports / "scene.json").write_text(scene_mod.scene_json(scene), "utf-8")
        self._emit(session, "export", {"kind": "scene", "file": "scene.json"})
        return session, scene


def _with_pending(bundle: RuleBundle, stage: str, raw: str, catalog: Catalog) -> RuleBundle:
    """Bundle view including the not-yet-accepted stage text (for grading)."""
    from .ruledsl import serialize

    sel, con, score = serialize(bundle)
    texts = {"selection": sel, "constraints": con, "score_terms": score}
    texts[stage] = raw
    return parse_bundle(texts["selection"], texts["constraints"], texts["score_terms"], catalog)


def _validate_stage_text(stage: str, raw: str, prior: RuleBundle, catalog: Catalog):
    from .ruledsl import parse_constraints, parse_score_terms, parse_selection

    if stage == "selection":
        return parse_selection(raw, catalog)
    if stage == "constraints":
        return parse_constraints(raw, prior.selections)
    return parse_score_terms(raw, prior.selections)
