"""HTTP front for the gateway: request/response turns plus a server-push
event stream for robot-initiated dialogues.

All response bodies are canonically encoded wire messages (or arrays of
them), so byte-level conformance holds across the network boundary.
"""

from __future__ import annotations

import json
import queue

from fastapi import FastAPI, Request, Response
from fastapi.responses import StreamingResponse

from . import wire
from .gateway import Gateway, GatewayError

_EVENT_POLL_S = 0.2


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def _error_response(session: str, code: str, message: str, status: int) -> Response:
    body = wire.encode(wire.error(session, 1, code, message))
    return Response(content=body, status_code=status, media_type="application/json")


def create_app(gateway: Gateway) -> FastAPI:
    app = FastAPI(title="convoforge gateway", version="1.0")

    @app.post("/session")
    async def create_session(request: Request) -> Response:
        raw = await request.body()
        try:
            msg = wire.decode(raw)
        except wire.WireError as exc:
            return _error_response("", exc.code, exc.message, 400)
        try:
            session = gateway.create_session(msg)
        except GatewayError as exc:
            return _error_response(msg.session, exc.code, exc.message, exc.http_status)
        return Response(
            content=_canonical({"session": session.id}),
            status_code=201,
            media_type="application/json",
        )

    @app.post("/session/{session_id}/turn")
    async def turn(session_id: str, request: Request) -> Response:
        raw = await request.body()
        try:
            session = gateway.get_session(session_id)
            msg = wire.decode(raw, last_seq=session.last_client_seq)
            if msg.session != session_id:
                return _error_response(
                    session_id, wire.E_BAD_ENVELOPE, "session id mismatch", 400
                )
            replies = gateway.user_turn(msg)
        except wire.WireError as exc:
            return _error_response(session_id, exc.code, exc.message, 400)
        except GatewayError as exc:
            return _error_response(session_id, exc.code, exc.message, exc.http_status)
        body = b"[" + b",".join(wire.encode(r) for r in replies) + b"]"
        return Response(content=body, media_type="application/json")

    @app.get("/session/{session_id}/events")
    async def events(session_id: str) -> Response:
        try:
            session = gateway.get_session(session_id)
        except GatewayError as exc:
            return _error_response(session_id, exc.code, exc.message, exc.http_status)

        def stream():
            while True:
                try:
                    item = session.event_queue.get(timeout=_EVENT_POLL_S)
                except queue.Empty:
                    yield b": keep-alive\n\n"
                    continue
                if item is None:  # session ended
                    return
                yield b"data: " + _canonical(item) + b"\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.delete("/session/{session_id}")
    async def delete(session_id: str) -> Response:
        try:
            msg = gateway.delete_session(session_id)
        except GatewayError as exc:
            return _error_response(session_id, exc.code, exc.message, exc.http_status)
        return Response(content=wire.encode(msg), media_type="application/json")

    return app


def serve(gateway: Gateway, port: int, host: str = "127.0.0.1") -> None:
    """Run the gateway service until interrupted. Fails fast on bind errors."""
    import uvicorn

    uvicorn.run(create_app(gateway), host=host, port=port, log_level="warning")
