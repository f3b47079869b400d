"""HTTP+JSON facade over the study service.

Mutating endpoints are idempotent via client-supplied request ids; the video
stream endpoint serves byte ranges from a media directory.
"""

from __future__ import annotations

import os
import time

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from .errors import (
    DuplicateRating,
    EmptyStore,
    GapNotElapsed,
    NoPlaylistRemaining,
    OutOfRange,
    PendingRating,
    SessionComplete,
    VqaLabError,
    WrongVideo,
)
from .study import StudyService

_ERROR_STATUS = {
    GapNotElapsed: 409,
    NoPlaylistRemaining: 409,
    PendingRating: 409,
    SessionComplete: 409,
    DuplicateRating: 409,
    WrongVideo: 400,
    OutOfRange: 400,
    EmptyStore: 404,
}


def create_app(service: StudyService, media_dir: str | None = None, clock=time.time) -> FastAPI:
    app = FastAPI(title="vqalab study service")
    idempotency_cache: dict[str, dict] = {}

    @app.exception_handler(VqaLabError)
    async def _domain_error(_request: Request, exc: VqaLabError):
        status = _ERROR_STATUS.get(type(exc), 400)
        body = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, GapNotElapsed):
            body["remaining_hours"] = exc.remaining_hours
        return JSONResponse(status_code=status, content=body)

    def _idempotent(request_id, fn):
        if request_id and request_id in idempotency_cache:
            return idempotency_cache[request_id]
        result = fn()
        if request_id:
            idempotency_cache[request_id] = result
        return result

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/subjects")
    async def create_subject(payload: dict, x_request_id: str | None = Header(default=None)):
        subject_id = payload["subject_id"]
        if subject_id not in service.assignment:
            return JSONResponse(status_code=404, content={"error": "UnknownSubject"})
        return _idempotent(x_request_id, lambda: {
            "subject_id": subject_id,
            "playlists": list(service.assignment[subject_id]),
        })

    @app.post("/sessions")
    async def start_session(payload: dict, x_request_id: str | None = Header(default=None)):
        def run():
            session = service.start_session(payload["subject_id"], now=clock())
            return {"session_id": session.session_id, "phase": session.state,
                    "playlist_id": session.playlist_id, "session_index": session.session_index}

        return _idempotent(x_request_id, run)

    @app.get("/sessions/{session_id}/next")
    async def next_item(session_id: str):
        item = service.next_item(session_id)
        item["stream_url"] = f"/videos/{item['video_id']}/stream"
        return item

    @app.post("/sessions/{session_id}/ratings")
    async def record_rating(session_id: str, payload: dict,
                            x_request_id: str | None = Header(default=None)):
        def run():
            record = service.record_rating(session_id, payload["video_id"],
                                           float(payload["score"]), now=clock())
            session = service.sessions[session_id]
            return {"stored": True, "video_id": record.video_id,
                    "phase": session.state, "is_training": record.is_training}

        return _idempotent(x_request_id, run)

    @app.get("/videos/{video_id}/stream")
    async def stream(video_id: str, range: str | None = Header(default=None)):
        if media_dir is None:
            return JSONResponse(status_code=404, content={"error": "NoMediaDir"})
        path = os.path.join(media_dir, f"{video_id}.y4m")
        if not os.path.isfile(path):
            return JSONResponse(status_code=404, content={"error": "UnknownVideo"})
        size = os.path.getsize(path)
        start, end = 0, size - 1
        status = 200
        if range and range.startswith("bytes="):
            spec, _, _ = range[6:].partition(",")
            lo, _, hi = spec.partition("-")
            start = int(lo) if lo else 0
            end = int(hi) if hi else size - 1
            status = 206
        with open(path, "rb") as fh:
            fh.seek(start)
            data = fh.read(end - start + 1)
        headers = {"Accept-Ranges": "bytes", "Content-Range": f"bytes {start}-{end}/{size}"}
        return Response(content=data, status_code=status, media_type="video/x-yuv4mpeg", headers=headers)

    @app.get("/export/opinions.csv")
    async def export():
        return PlainTextResponse(service.export_opinion_csv(), media_type="text/csv")

    return app
