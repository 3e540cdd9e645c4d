"""HTTP session service.

Wraps the engine in a JSON API: create a session, fetch the pending display,
submit a sort or a favorite, inspect state, and manage datasets. Sessions
created with simulated_user=true keep a hidden utility vector server-side and
can be advanced with the auto endpoint; that vector never appears in any
response body or persisted document.

Per-session submissions are serialized with a lock; a submission that loses
the race fails the round check and surfaces as 409.
"""
from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path
from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import engine, harness
from .data_io import Dataset, make_dataset, parse_delimited
from .geometry import l1_width
from .simuser import HiddenUser, favorite, sample_user, sort_with_ranks


class CreateSessionRequest(BaseModel):
    dataset: str
    algorithm: str = "sorting-simplex"
    s: int = Field(default=3, ge=2, le=10)
    epsilon: float = Field(default=0.05, ge=0.0, le=1.0)
    seed: int = 0
    simulated_user: bool = False
    user_seed: int = 0


class SortRequest(BaseModel):
    order: List[int]
    ranks: Optional[List[int]] = None
    round: int


class FavoriteRequest(BaseModel):
    favorite: int
    round: int


class AutoRequest(BaseModel):
    rounds: int = Field(default=1, ge=1, le=500)


class UploadDatasetRequest(BaseModel):
    name: str
    content: str
    columns: Optional[List[str]] = None
    label_column: Optional[str] = None
    invert: Optional[List[bool]] = None


def create_app(
    datasets: Optional[Dict[str, Dataset]] = None,
    store_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="sortpick", version="1.0")
    # The browser client is served as static files from a different origin.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    registry: Dict[str, Dataset] = dict(datasets or {})
    sessions: Dict[str, engine.Session] = {}
    hidden_users: Dict[str, HiddenUser] = {}
    locks: Dict[str, threading.Lock] = {}
    store = Path(store_dir) if store_dir else None
    if store:
        store.mkdir(parents=True, exist_ok=True)

    def persist(session_id: str) -> None:
        if store is None:
            return
        doc = engine.session_to_doc(sessions[session_id])
        (store / f"{session_id}.json").write_text(json.dumps(doc))

    def get_session(session_id: str) -> engine.Session:
        if session_id in sessions:
            return sessions[session_id]
        if store is not None:
            path = store / f"{session_id}.json"
            if path.exists():
                doc = json.loads(path.read_text())
                name = doc.get("dataset")
                if name not in registry:
                    raise HTTPException(404, f"dataset {name!r} not registered")
                try:
                    session = harness.replay(doc, registry[name])
                except harness.ReplayError as exc:
                    raise HTTPException(409, str(exc))
                sessions[session_id] = session
                locks[session_id] = threading.Lock()
                return session
        raise HTTPException(404, f"unknown session {session_id!r}")

    def cards_for(ds: Dataset, ids: List[int]) -> List[dict]:
        names = ds.columns or [f"x{j}" for j in range(ds.d)]
        out = []
        for i in ids:
            row = ds.raw_rows[i]
            out.append(
                {
                    "id": i,
                    "label": ds.labels[i] if i < len(ds.labels) else None,
                    "values": {names[j]: float(row[j]) for j in range(ds.d)},
                }
            )
        return out

    def display_payload(session_id: str, session: engine.Session) -> Optional[dict]:
        if session.pending_display is None:
            return None
        return {
            "round": session.round,
            "mode": "sort" if session.strategy.feedback == engine.FULL_SORT else "choose",
            "cards": cards_for(session.dataset, list(session.pending_display)),
        }

    def state_payload(session_id: str, session: engine.Session) -> dict:
        recommendation = None
        if session.status != engine.AWAITING_FEEDBACK or session.history:
            point, bound = engine.recommend(session)
            recommendation = {
                "id": point.id,
                "bound": bound,
                "card": cards_for(session.dataset, [point.id])[0],
            }
        return {
            "session_id": session_id,
            "dataset": session.dataset.name,
            "algorithm": engine.algorithm_name(session.strategy),
            "s": session.s,
            "epsilon": session.epsilon,
            "status": session.status,
            "stop_reason": session.stop_reason,
            "round": session.round,
            "candidates_remaining": len(session.candidates),
            "width": l1_width(session.polytope),
            "display": display_payload(session_id, session),
            "recommendation": recommendation,
            "rounds": [
                {
                    "round": r.round,
                    "shown": list(r.shown),
                    "response": dict(r.response),
                    "candidates_after": r.candidates_after,
                    "width_after": r.width_after,
                }
                for r in session.history
            ],
        }

    @app.get("/datasets")
    def list_datasets() -> List[dict]:
        return [
            {"name": ds.name, "d": ds.d, "n": ds.n, "columns": ds.columns}
            for ds in registry.values()
        ]

    @app.post("/datasets")
    def upload_dataset(req: UploadDatasetRequest) -> dict:
        try:
            points, labels, dropped = parse_delimited(
                req.content, req.columns, req.label_column, origin=req.name
            )
            ds = make_dataset(req.name, points, labels=labels, invert=req.invert,
                              columns=req.columns)
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        registry[ds.name] = ds
        return {"name": ds.name, "d": ds.d, "n": ds.n, "dropped_rows": dropped}

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest) -> dict:
        if req.dataset not in registry:
            raise HTTPException(404, f"unknown dataset {req.dataset!r}")
        if req.algorithm not in engine.ALGORITHMS:
            raise HTTPException(422, f"unknown algorithm {req.algorithm!r}")
        ds = registry[req.dataset]
        try:
            session = engine.start_session(
                ds,
                engine.ALGORITHMS[req.algorithm],
                s=req.s,
                epsilon=req.epsilon,
                seed=req.seed,
            )
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        session_id = uuid.uuid4().hex[:12]
        sessions[session_id] = session
        locks[session_id] = threading.Lock()
        if req.simulated_user:
            hidden_users[session_id] = sample_user(ds.d, req.user_seed)
        persist(session_id)
        return state_payload(session_id, session)

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str) -> dict:
        return state_payload(session_id, get_session(session_id))

    @app.get("/sessions/{session_id}/display")
    def get_display(session_id: str) -> dict:
        session = get_session(session_id)
        payload = display_payload(session_id, session)
        if payload is None:
            raise HTTPException(409, "session has no pending display")
        payload["candidates_remaining"] = len(session.candidates)
        payload["status"] = session.status
        return payload

    def apply_feedback(session_id: str, fn) -> dict:
        session = get_session(session_id)
        lock = locks.setdefault(session_id, threading.Lock())
        with lock:
            try:
                fn(session)
            except engine.FeedbackError as exc:
                raise HTTPException(422, str(exc))
            except engine.StaleRoundError as exc:
                raise HTTPException(409, str(exc))
            except RuntimeError as exc:
                raise HTTPException(409, str(exc))
        persist(session_id)
        return state_payload(session_id, session)

    @app.post("/sessions/{session_id}/sort")
    def submit_sort(session_id: str, req: SortRequest) -> dict:
        return apply_feedback(
            session_id,
            lambda s: engine.submit_sort(
                s, req.order, ranks=req.ranks, round_index=req.round
            ),
        )

    @app.post("/sessions/{session_id}/favorite")
    def submit_favorite(session_id: str, req: FavoriteRequest) -> dict:
        return apply_feedback(
            session_id,
            lambda s: engine.submit_favorite(s, req.favorite, round_index=req.round),
        )

    @app.post("/sessions/{session_id}/auto")
    def auto_advance(session_id: str, req: AutoRequest) -> dict:
        session = get_session(session_id)
        user = hidden_users.get(session_id)
        if user is None:
            raise HTTPException(409, "session was not created with simulated_user")
        lock = locks.setdefault(session_id, threading.Lock())
        with lock:
            for _ in range(req.rounds):
                if session.status != engine.AWAITING_FEEDBACK:
                    break
                shown = engine.next_display(session)
                if session.strategy.feedback == engine.FULL_SORT:
                    ids, ranks = sort_with_ranks(user, shown)
                    engine.submit_sort(session, ids, ranks=ranks)
                else:
                    engine.submit_favorite(session, favorite(user, shown))
        persist(session_id)
        return state_payload(session_id, session)

    return app
