"""HTTP face of the trainer service: JSON endpoints over sessions plus a
server-sent event stream. Paths are stable; payloads are plain JSON documents
mirroring the session methods one-to-one."""

from __future__ import annotations

import json
import threading

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse
from pydantic import BaseModel, Field

from .frames import FrameError
from .scenario import ScenarioError
from .session import Session, SessionError, resolve_ruleset, resolve_scenario

EVENT_POLL_SECONDS = 2.0


class CreateSessionBody(BaseModel):
    scenario: str | dict = "test_city"
    ruleset: str | None = None
    seed: int = 0
    step_delay: float = Field(default=0.0, ge=0.0, le=10.0)


class ControlBody(BaseModel):
    command: str
    arg: int | None = None


class UpdateBody(BaseModel):
    entity: str
    tree: str
    proposed: str
    time: int | None = None


class CommitBody(BaseModel):
    literal_indices: list[int]


class RulesetPathBody(BaseModel):
    path: str


def create_app() -> FastAPI:
    app = FastAPI(title="goalsmith trainer service")
    # The trainer console is served separately (any static file server), so
    # browsers talk to this API cross-origin.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    counter = {"n": 0}

    def fetch(sid: str) -> Session:
        session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, f"no session {sid!r}")
        return session

    @app.exception_handler(SessionError)
    async def _session_error(_req: Request, err: SessionError):
        raise HTTPException(err.http_status, str(err))

    @app.exception_handler(ScenarioError)
    async def _scenario_error(_req: Request, err: ScenarioError):
        raise HTTPException(400, str(err))

    @app.exception_handler(FrameError)
    async def _frame_error(_req: Request, err: FrameError):
        raise HTTPException(400, str(err))

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        scenario = resolve_scenario(body.scenario)
        kb = resolve_ruleset(body.ruleset)
        with registry_lock:
            counter["n"] += 1
            sid = f"s{counter['n']}"
            session = Session(
                scenario, kb, seed=body.seed, sid=sid, step_delay=body.step_delay
            )
            sessions[sid] = session
        doc = session.control_doc()
        doc["scenario"] = scenario.name
        doc["seed"] = body.seed
        doc["counts"] = scenario.counts()
        return doc

    @app.get("/sessions")
    def list_sessions():
        with registry_lock:
            return {"sessions": [s.control_doc() for s in sessions.values()]}

    @app.post("/sessions/{sid}/control")
    def control(sid: str, body: ControlBody):
        return fetch(sid).control(body.command, body.arg)

    @app.get("/sessions/{sid}/state")
    def state(sid: str, t: int | None = None):
        return fetch(sid).query_state(t)

    @app.get("/sessions/{sid}/goals")
    def goals(sid: str):
        return fetch(sid).goal_ledger_doc()

    @app.get("/sessions/{sid}/rdr/{tree}")
    def rdr_tree(sid: str, tree: str):
        return fetch(sid).tree_doc(tree)

    @app.post("/sessions/{sid}/updates")
    def begin_update(sid: str, body: UpdateBody):
        return fetch(sid).begin_rule_update(
            entity=body.entity, tree=body.tree, proposed=body.proposed, time=body.time
        )

    @app.post("/sessions/{sid}/updates/{uid}/commit")
    def commit_update(sid: str, uid: str, body: CommitBody):
        return fetch(sid).commit_rule_update(uid, body.literal_indices)

    @app.delete("/sessions/{sid}/updates/{uid}")
    def discard_update(sid: str, uid: str):
        return fetch(sid).discard_update(uid)

    @app.post("/sessions/{sid}/ruleset/save")
    def ruleset_save(sid: str, body: RulesetPathBody):
        return fetch(sid).save_ruleset(body.path)

    @app.post("/sessions/{sid}/ruleset/load")
    def ruleset_load(sid: str, body: RulesetPathBody):
        return fetch(sid).load_ruleset(body.path)

    @app.get("/sessions/{sid}/events")
    def events(sid: str, request: Request, since: int = 0, follow: bool = True):
        session = fetch(sid)

        def stream():
            last = since
            backlog = session.events_since(last)
            while True:
                for event in backlog:
                    last = event["seq"]
                    yield (
                        f"id: {event['seq']}\n"
                        f"event: {event['event']}\n"
                        f"data: {json.dumps(event)}\n\n"
                    )
                if not follow:
                    return
                backlog = session.wait_events(last, timeout=EVENT_POLL_SECONDS)
                if not backlog:
                    yield ": keep-alive\n\n"

        return StreamingResponse(
            stream(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    return app


app = create_app()
