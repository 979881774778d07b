"""HTTP session service for interactive episodes (human UI, remote agents).

Endpoints (all JSON):
    POST /sessions {split?, record_id?, owner?}      -> session + question
    GET  /sessions/{id}/observation                  -> page, candidates, done
    POST /sessions/{id}/action {index}               -> new observation
    POST /sessions/{id}/answer {text}                -> per-episode scores
    GET  /reports/{run_id}                           -> stored MetricsReport
Static mounts: /static (site snapshot: screenshots and assets) and /ui
(the built human-UI bundle, when configured).

Sessions hold one live episode each, are serialized per session (concurrent
requests to one session get 409), and expire after an idle timeout.
"""

from __future__ import annotations

import json
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import Body, Depends, FastAPI, Header, HTTPException
from fastapi.responses import RedirectResponse
from fastapi.staticfiles import StaticFiles

from .metrics import compute_report
from .simulator import (
    DEFAULT_MAX_STEPS,
    EpisodeRecord,
    EpisodeState,
    Trajectory,
    finish_with_answer,
    observe,
    read_records,
    reset,
    step,
)
from .sitegraph import NavGraph, load_site
from .taxonomy import Taxonomy, load_taxonomy, toy_taxonomy
from .errors import EpisodeFinished, EpisodeNotFinished, InvalidActionIndex


@dataclass
class ServiceConfig:
    site_dir: Path
    dataset_path: Path
    runs_dir: Path = Path("runs")
    ui_dist: Optional[Path] = None
    taxonomy_path: Optional[Path] = None
    auth_token: str = ""
    default_split: str = "val"
    session_idle_seconds: float = 1800.0
    max_steps: int = DEFAULT_MAX_STEPS
    seed: int = 0

    @staticmethod
    def from_file(path: Path | str, **overrides) -> "ServiceConfig":
        raw = json.loads(Path(path).read_text())
        raw.update({k: v for k, v in overrides.items() if v is not None})
        for key in ("site_dir", "dataset_path", "runs_dir", "ui_dist", "taxonomy_path"):
            if raw.get(key):
                raw[key] = Path(raw[key])
        return ServiceConfig(**raw)


@dataclass
class Session:
    session_id: str
    state: EpisodeState
    record: EpisodeRecord
    owner: str
    created_at: float
    last_access: float
    lock: threading.Lock = field(default_factory=threading.Lock)
    trajectory: Optional[Trajectory] = None


class SessionStore:
    def __init__(self, idle_seconds: float):
        self.idle_seconds = idle_seconds
        self._sessions: dict[str, Session] = {}
        self._guard = threading.Lock()

    def put(self, session: Session) -> None:
        with self._guard:
            self._purge()
            self._sessions[session.session_id] = session

    def get(self, session_id: str) -> Session:
        with self._guard:
            self._purge()
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown or expired session")
        session.last_access = time.monotonic()
        return session

    def _purge(self) -> None:
        now = time.monotonic()
        expired = [
            sid for sid, s in self._sessions.items()
            if now - s.last_access > self.idle_seconds
        ]
        for sid in expired:
            del self._sessions[sid]


def observation_payload(session: Session, graph: NavGraph) -> dict:
    state = session.state
    base = {
        "session_id": session.session_id,
        "record_id": session.record.record_id,
        "step": state.t,
        "done": state.done,
        "forced_stop": state.forced_stop,
        "page_id": state.current_page_id,
    }
    page = graph.page(state.current_page_id)
    base["screenshot_url"] = f"/static/{page.screenshot_ref}" if page.screenshot_ref else None
    if state.done:
        base["candidates"] = []
        return base
    obs = observe(state, graph)
    candidates = []
    for index, candidate in enumerate(obs.candidates):
        if candidate.is_stop:
            candidates.append(
                {"index": index, "kind": "stop", "description": "[stop]", "image_url": None}
            )
        else:
            button = candidate.button
            candidates.append(
                {
                    "index": index,
                    "kind": "click",
                    "description": button.description,
                    "image_url": f"/static/{button.image_ref}" if button.image_ref else None,
                }
            )
    base["candidates"] = candidates
    return base


def create_app(config: ServiceConfig) -> FastAPI:
    graph = load_site(config.site_dir)
    records = read_records(config.dataset_path)
    by_id = {r.record_id: r for r in records}
    tax: Taxonomy = (
        load_taxonomy(config.taxonomy_path) if config.taxonomy_path else toy_taxonomy()
    )
    store = SessionStore(config.session_idle_seconds)
    rng = random.Random(config.seed)
    config.runs_dir.mkdir(parents=True, exist_ok=True)
    session_log = config.runs_dir / "sessions.jsonl"

    app = FastAPI(title="webnavkit session service")
    app.state.graph = graph
    app.state.records = by_id
    app.state.store = store

    def check_auth(x_auth_token: Optional[str] = Header(default=None)) -> None:
        if config.auth_token and x_auth_token != config.auth_token:
            raise HTTPException(status_code=401, detail="bad or missing X-Auth-Token")

    guarded = [Depends(check_auth)]

    @app.post("/sessions", dependencies=guarded)
    def create_session(body: dict = Body(default={})) -> dict:
        record_id = body.get("record_id")
        if record_id is not None:
            record = by_id.get(record_id)
            if record is None:
                raise HTTPException(status_code=404, detail=f"unknown record {record_id}")
        else:
            split = body.get("split", config.default_split)
            pool = [r for r in records if not split or r.split == split]
            if not pool:
                raise HTTPException(status_code=404, detail=f"no records in split {split!r}")
            record = rng.choice(pool)
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            state=reset(graph, record, max_steps=config.max_steps),
            record=record,
            owner=body.get("owner", "human"),
            created_at=time.monotonic(),
            last_access=time.monotonic(),
        )
        store.put(session)
        return {
            "session_id": session.session_id,
            "record_id": record.record_id,
            "question": record.question,
            "description": record.description,
        }

    @app.get("/sessions/{session_id}/observation", dependencies=guarded)
    def get_observation(session_id: str) -> dict:
        session = store.get(session_id)
        return observation_payload(session, graph)

    @app.post("/sessions/{session_id}/action", dependencies=guarded)
    def post_action(session_id: str, body: dict = Body(...)) -> dict:
        session = store.get(session_id)
        if not session.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="session busy")
        try:
            if "index" not in body:
                raise HTTPException(status_code=400, detail="missing action index")
            try:
                index = int(body["index"])
            except (TypeError, ValueError):
                raise HTTPException(status_code=400, detail="action index must be an integer")
            try:
                step(session.state, index, graph)
            except EpisodeFinished:
                raise HTTPException(status_code=409, detail="episode already finished")
            except InvalidActionIndex:
                n = len(observe(session.state, graph).candidates)
                raise HTTPException(
                    status_code=400,
                    detail=f"action index {index} out of range ({n} candidates)",
                )
            return observation_payload(session, graph)
        finally:
            session.lock.release()

    @app.post("/sessions/{session_id}/answer", dependencies=guarded)
    def post_answer(session_id: str, body: dict = Body(...)) -> dict:
        session = store.get(session_id)
        if not session.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="session busy")
        try:
            try:
                trajectory = finish_with_answer(session.state, str(body.get("text", "")))
            except EpisodeNotFinished:
                raise HTTPException(
                    status_code=409, detail="episode still running; stop first"
                )
            session.trajectory = trajectory
            report = compute_report([trajectory], by_id, graph, tax)
            entry = {
                "trajectory_id": f"{session.session_id}-{trajectory.record_id}",
                "owner": session.owner,
                **trajectory.to_json(),
            }
            with session_log.open("a") as fh:
                fh.write(json.dumps(entry) + "\n")
            return {
                "trajectory_id": entry["trajectory_id"],
                "trajectory": trajectory.to_json(),
                "scores": {
                    "sr": report.sr,
                    "osr": report.osr,
                    "spl": report.spl,
                    "tl": report.tl,
                    "wups09": report.wups09,
                    "wups00": report.wups00,
                },
            }
        finally:
            session.lock.release()

    @app.get("/reports/{run_id}", dependencies=guarded)
    def get_report(run_id: str) -> dict:
        path = config.runs_dir / run_id / "report.json"
        if not path.exists() or not path.resolve().is_relative_to(config.runs_dir.resolve()):
            raise HTTPException(status_code=404, detail=f"no report for run {run_id!r}")
        return json.loads(path.read_text())

    app.mount("/static", StaticFiles(directory=config.site_dir), name="static")
    if config.ui_dist and Path(config.ui_dist).exists():
        app.mount("/ui", StaticFiles(directory=config.ui_dist, html=True), name="ui")

        @app.get("/")
        def index() -> RedirectResponse:
            return RedirectResponse(url="/ui/")

    return app


def serve(config: ServiceConfig, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port, log_level="info")
