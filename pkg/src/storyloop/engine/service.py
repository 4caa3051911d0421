"""HTTP JSON API over the session engine.

Endpoints mirror the two interaction channels (messages and choices), the
live state panels, a server-sent-events stream of tagged segments, the raw
trace, and feedback intake for the rating pipeline.
"""

from __future__ import annotations

import json
from typing import Any

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse, StreamingResponse
from pydantic import BaseModel

from ..architect import EmotionalSeed
from ..config import EngineConfig
from .session import STATUS_ACTIVE, EpisodeSession, SessionError, SessionManager


class SeedBody(BaseModel):
    free_text: str
    profiling_answers: list[tuple[str, str]] = []
    keywords: list[str] = []


class CreateSessionBody(BaseModel):
    seed: SeedBody
    config: dict[str, Any] | None = None
    session_id: str | None = None
    scripts: dict[str, list[str]] | None = None


class MessageBody(BaseModel):
    text: str


class ChoiceBody(BaseModel):
    choice: int | str


class FeedbackBody(BaseModel):
    group_id: str
    rater_id: str
    ratings: list[dict[str, Any]]


def _segments_payload(session: EpisodeSession, response) -> dict[str, Any]:
    return {
        "session_id": session.session_id,
        "status": session.status,
        "segments": [
            {"tag": s.tag, "payload": s.payload, "speaker": s.speaker}
            for s in response.segments
        ],
        "choices": list(response.choices),
        "exchange_count": session.pacing.exchange_count,
    }


def create_app(manager: SessionManager) -> FastAPI:
    app = FastAPI(title="storyloop", version="0.1.0")

    def _get(session_id: str) -> EpisodeSession:
        try:
            return manager.get(session_id)
        except SessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.post("/sessions")
    def create_session(body: CreateSessionBody) -> dict[str, Any]:
        config = (
            EngineConfig.from_dict(body.config)
            if body.config is not None
            else manager.default_config
        )
        if config is None:
            raise HTTPException(status_code=422, detail="no engine config available")
        try:
            seed = EmotionalSeed(
                free_text=body.seed.free_text,
                profiling_answers=tuple(tuple(p) for p in body.seed.profiling_answers),
                keywords=tuple(body.seed.keywords),
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        try:
            session = manager.create_session(
                seed, config, session_id=body.session_id, scripts=body.scripts
            )
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        out: dict[str, Any] = {
            "session_id": session.session_id,
            "status": session.status,
            "failure": session.failure,
        }
        if session.status == STATUS_ACTIVE:
            out["opening"] = _segments_payload(session, session.opening_response())
            out["title"] = session.blueprint.foundation.title
        return out

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody) -> dict[str, Any]:
        session = _get(session_id)
        try:
            response = session.advance(text=body.text)
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return _segments_payload(session, response)

    @app.post("/sessions/{session_id}/choices")
    def post_choice(session_id: str, body: ChoiceBody) -> dict[str, Any]:
        session = _get(session_id)
        try:
            response = session.advance(choice=body.choice)
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return _segments_payload(session, response)

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str) -> dict[str, Any]:
        return _get(session_id).state_panels()

    @app.get("/sessions/{session_id}/stream")
    def get_stream(session_id: str, after: int = 0, wait: bool = False):
        session = _get(session_id)

        def sse():
            for event in session.stream_events(after, wait=wait):
                data = json.dumps(event, sort_keys=True)
                yield f"event: {event['event']}\ndata: {data}\n\n"
            yield "event: stream_end\ndata: {}\n\n"

        return StreamingResponse(sse(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str) -> PlainTextResponse:
        session = _get(session_id)
        return PlainTextResponse(
            session.trace_path.read_text(encoding="utf-8"),
            media_type="application/x-ndjson",
        )

    @app.post("/sessions/{session_id}/feedback")
    def post_feedback(session_id: str, body: FeedbackBody) -> dict[str, Any]:
        session = _get(session_id)
        payload = {
            "group_id": body.group_id,
            "rater_id": body.rater_id,
            "ratings": body.ratings,
        }
        session.record_feedback(payload)
        return {"recorded": True, "session_id": session_id}

    return app
