"""HTTP API over the questionnaire: sessions, answers, manifests, validation.

Sessions live in an in-memory store with an idle TTL; the manifest file is
the durable artifact. Per-session operations are serialized by a lock so
concurrent requests on one session cannot interleave; distinct sessions are
independent.
"""

from __future__ import annotations

import logging
import secrets
import threading
import time
from dataclasses import dataclass, field

from fastapi import Body, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .clocks import Clock, system_clock
from .errors import (
    AtLeafError,
    AtRootError,
    IncompleteSessionError,
    MalformedManifestError,
    ShepherdError,
    UnknownAnswerError,
)
from .manifest import build_manifest, parse_manifest, serialize_manifest
from .model import DecisionTree, LeafNode, QuestionNode
from .traversal import (
    TraversalSession,
    apply_answer,
    current_prompt,
    is_complete,
    missing_fields,
    set_field,
    start_session,
    undo,
)
from .validators import deep_validate

logger = logging.getLogger("shepherd.service")

DEFAULT_TTL_SECONDS = 3600
LIVE_URL_CAP = 16


class SessionGone(ShepherdError):
    code = "E_SESSION_NOT_FOUND"


class SessionExpired(ShepherdError):
    code = "E_SESSION_EXPIRED"


class NoTreeLoaded(ShepherdError):
    code = "E_NO_TREE"


@dataclass
class SessionRecord:
    session_id: str
    session: TraversalSession
    last_activity: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """Thread-safe in-memory store; expired records are dropped lazily on
    first access past the TTL (that access still reports E_SESSION_EXPIRED)."""

    def __init__(self, ttl_seconds: float = DEFAULT_TTL_SECONDS, now=time.monotonic):
        self.ttl_seconds = ttl_seconds
        self._now = now
        self._records: dict[str, SessionRecord] = {}
        self._lock = threading.Lock()

    def create(self, session: TraversalSession) -> SessionRecord:
        record = SessionRecord(
            session_id=secrets.token_hex(16),
            session=session,
            last_activity=self._now(),
        )
        with self._lock:
            self._records[record.session_id] = record
        return record

    def fetch(self, session_id: str) -> SessionRecord:
        with self._lock:
            record = self._records.get(session_id)
            if record is None:
                raise SessionGone(f"no session {session_id!r}")
            if self._now() - record.last_activity > self.ttl_seconds:
                del self._records[session_id]
                raise SessionExpired(f"session {session_id!r} expired")
            record.last_activity = self._now()
            return record

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)


def tree_as_dict(tree: DecisionTree) -> dict:
    nodes: dict[str, dict] = {}
    for node_id, node in tree.nodes.items():
        if isinstance(node, QuestionNode):
            nodes[node_id] = {
                "kind": "question",
                "prompt": node.prompt,
                "answers": [
                    {"id": a.answer_id, "label": a.label, "target": a.target}
                    for a in node.answers
                ],
            }
        else:
            nodes[node_id] = {
                "kind": "leaf",
                "prescription": node.prescription,
                "fields": [
                    {
                        "id": f.field_id,
                        "type": f.field_type,
                        "required": f.required,
                        "hint": f.hint,
                    }
                    for f in node.fields
                ],
            }
    return {
        "id": tree.tree_id,
        "version": tree.version,
        "root": tree.root,
        "nodes": nodes,
    }


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"code": code, "message": message, **extra}
    )


def _snapshot(record: SessionRecord) -> dict:
    session = record.session
    return {
        "prompt": current_prompt(session).as_dict(),
        "path": [list(pair) for pair in session.path],
        "complete": is_complete(session),
    }


def create_app(
    tree: DecisionTree | None,
    *,
    clock: Clock = system_clock,
    ttl_seconds: float = DEFAULT_TTL_SECONDS,
    now=time.monotonic,
    cors_origins: list[str] | None = None,
    static_dir: str | None = None,
    log_requests: bool = False,
) -> FastAPI:
    app = FastAPI(title="data-shepherd", docs_url=None, redoc_url=None)
    store = SessionStore(ttl_seconds=ttl_seconds, now=now)
    app.state.store = store
    app.state.tree = tree

    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins if cors_origins is not None else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    if log_requests:

        @app.middleware("http")
        async def _log(request: Request, call_next):
            started = time.monotonic()
            response = await call_next(request)
            elapsed_ms = int((time.monotonic() - started) * 1000)
            logger.info(
                "%s %s %d %dms",
                request.method,
                request.url.path,
                response.status_code,
                elapsed_ms,
            )
            return response

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return _error(400, "E_MALFORMED", "request body is not valid JSON")

    @app.exception_handler(SessionGone)
    async def _gone(request: Request, exc: SessionGone):
        return _error(404, exc.code, exc.message)

    @app.exception_handler(SessionExpired)
    async def _expired(request: Request, exc: SessionExpired):
        return _error(404, exc.code, exc.message)

    def _require_tree() -> DecisionTree:
        if app.state.tree is None:
            raise NoTreeLoaded("no decision tree is loaded")
        return app.state.tree

    @app.exception_handler(NoTreeLoaded)
    async def _no_tree(request: Request, exc: NoTreeLoaded):
        return _error(503, exc.code, exc.message)

    @app.post("/api/sessions", status_code=201)
    def create_session():
        tree = _require_tree()
        record = store.create(start_session(tree, clock=clock))
        return {
            "session_id": record.session_id,
            "prompt": current_prompt(record.session).as_dict(),
        }

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        record = store.fetch(session_id)
        with record.lock:
            return _snapshot(record)

    @app.post("/api/sessions/{session_id}/answer")
    def post_answer(session_id: str, payload: dict = Body(...)):
        answer_id = payload.get("answer_id")
        if not isinstance(answer_id, str):
            return _error(400, "E_MALFORMED", "body must carry a string answer_id")
        record = store.fetch(session_id)
        with record.lock:
            try:
                record.session = apply_answer(record.session, answer_id)
            except AtLeafError as exc:
                return _error(409, exc.code, exc.message)
            except UnknownAnswerError as exc:
                return _error(422, exc.code, exc.message)
            return _snapshot(record)

    @app.post("/api/sessions/{session_id}/undo")
    def post_undo(session_id: str):
        record = store.fetch(session_id)
        with record.lock:
            try:
                record.session = undo(record.session)
            except AtRootError as exc:
                return _error(409, exc.code, exc.message)
            return _snapshot(record)

    @app.put("/api/sessions/{session_id}/fields")
    def put_fields(session_id: str, payload: dict = Body(...)):
        record = store.fetch(session_id)
        with record.lock:
            if not record.session.at_leaf:
                return _error(
                    409,
                    "E_NOT_AT_LEAF",
                    f"session is at question {record.session.current!r}",
                )
            # all-or-nothing: stage every entry, commit only if all pass
            staged = record.session
            failures: list[dict] = []
            for field_id, value in payload.items():
                try:
                    staged = set_field(staged, field_id, value)
                except ShepherdError as exc:
                    failures.append(
                        {"field": field_id, "code": exc.code, "message": exc.message}
                    )
            if failures:
                return _error(
                    422,
                    failures[0]["code"],
                    "one or more fields were rejected",
                    errors=failures,
                )
            record.session = staged
            return {
                "complete": is_complete(record.session),
                "missing": missing_fields(record.session),
            }

    @app.get("/api/sessions/{session_id}/manifest")
    def get_manifest(session_id: str):
        record = store.fetch(session_id)
        with record.lock:
            try:
                manifest = build_manifest(record.session, clock=clock)
            except IncompleteSessionError as exc:
                return _error(409, exc.code, exc.message, missing=exc.missing)
        return Response(
            content=serialize_manifest(manifest), media_type="application/json"
        )

    @app.post("/api/validate")
    async def post_validate(
        request: Request, live: bool = False, checksums: bool = False
    ):
        tree = _require_tree()
        body = await request.body()
        try:
            manifest = parse_manifest(body.decode("utf-8"))
        except (MalformedManifestError, UnicodeDecodeError) as exc:
            position = getattr(exc, "position", "")
            message = exc.message if isinstance(exc, ShepherdError) else str(exc)
            if position:
                message = f"{message} (at {position})"
            return _error(400, "E_MALFORMED", message)
        # checksum verification needs server-side file access; never over HTTP
        report = deep_validate(
            manifest, tree, live=live, checksums=False, max_urls=LIVE_URL_CAP
        )
        return {"clean": report.is_clean, "findings": report.as_dicts()}

    @app.get("/api/tree")
    def get_tree():
        return tree_as_dict(_require_tree())

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
