"""FastAPI application for hosting lineups and collecting evaluations.

State lives in an append-only event log; the in-memory index is rebuilt
from it at startup and kept in step under a single writer lock.  Public
responses never carry the hidden data position, the answer salt, the
seed, or raw data values; full results require the admin bearer token
until a lineup has enough evaluations.
"""

from __future__ import annotations

import hashlib
import os
import threading
import uuid
from datetime import datetime, timezone

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from ..geometry import QQDesign
from ..lineup import LineupSpec, NullHypothesis, assemble_lineup
from ..numeric import DegenerateSampleError, SampleVector
from ..svg import default_grid, render_svg
from ..visual import DEFAULT_ALPHAS, Evaluation, fold_evaluations, visual_p_value
from .schemas import SERVICE_SCHEMA_VERSION, EvaluationIn, LineupSpecIn, SessionIn
from .store import EventStore

DEFAULT_DISCLOSURE_THRESHOLD = 10
DEFAULT_SESSION_LENGTH = 10


class _State:
    """In-memory index over the event log."""

    def __init__(self, store: EventStore):
        self.store = store
        self.lock = threading.RLock()
        self.public: dict[str, dict] = {}
        self.svg: dict[str, str] = {}
        self.private: dict[str, dict] = {}
        self.evaluations: dict[str, list[dict]] = {}
        self.eval_keys: set[tuple[str, str]] = set()
        self.sessions: dict[str, dict] = {}
        self.serve_counts: dict[str, int] = {}
        for rec in store.records():
            self._index(rec)

    def _index(self, rec: dict) -> None:
        kind, body = rec["kind"], rec["body"]
        if kind == "lineup_private":
            self.private[body["lineup_id"]] = body
        elif kind == "lineup_public":
            lid = body["lineup"]["id"]
            self.public[lid] = body["lineup"]
            self.svg[lid] = body["svg"]
            self.evaluations.setdefault(lid, [])
            self.serve_counts.setdefault(lid, 0)
        elif kind == "evaluation":
            self.evaluations.setdefault(body["lineup_id"], []).append(body)
            self.eval_keys.add((body["lineup_id"], body["observer_id"]))
        elif kind == "session":
            self.sessions[body["session_id"]] = body
            for lid in body["lineups"]:
                self.serve_counts[lid] = self.serve_counts.get(lid, 0) + 1

    def append(self, kind: str, body: dict) -> dict:
        rec = self.store.append(kind, body)
        self._index(rec)
        return rec


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    return default if raw is None else int(raw)


def create_app(
    store_path: str | None = None,
    admin_token: str | None = None,
    disclosure_threshold: int | None = None,
    service_seed: int | None = None,
    session_length: int | None = None,
) -> FastAPI:
    """Build the service; arguments fall back to QQLINEUP_* env vars."""
    store_path = store_path or os.environ.get("QQLINEUP_STORE", "qqlineup-store.jsonl")
    admin_token = admin_token or os.environ.get("QQLINEUP_ADMIN_TOKEN")
    if disclosure_threshold is None:
        disclosure_threshold = _env_int(
            "QQLINEUP_DISCLOSURE_THRESHOLD", DEFAULT_DISCLOSURE_THRESHOLD
        )
    if service_seed is None:
        service_seed = _env_int("QQLINEUP_SERVICE_SEED", 0)
    if session_length is None:
        session_length = _env_int("QQLINEUP_SESSION_LENGTH", DEFAULT_SESSION_LENGTH)

    app = FastAPI(title="qqlineup study service")
    state = _State(EventStore(store_path))

    def ok(payload: dict, status_code: int = 200) -> JSONResponse:
        return JSONResponse({"schema_version": SERVICE_SCHEMA_VERSION, **payload}, status_code)

    def fail(status_code: int, detail: str) -> JSONResponse:
        return JSONResponse(
            {"schema_version": SERVICE_SCHEMA_VERSION, "detail": detail}, status_code
        )

    def is_admin(request: Request) -> bool:
        if not admin_token:
            return False
        return request.headers.get("authorization") == f"Bearer {admin_token}"

    @app.exception_handler(RequestValidationError)
    async def _malformed(request: Request, exc: RequestValidationError):
        return fail(400, f"malformed request body: {exc.errors()[:3]}")

    @app.get("/healthz")
    def healthz():
        with state.lock:
            return ok(
                {
                    "status": "ok",
                    "lineups": len(state.public),
                    "evaluations": len(state.eval_keys),
                    "sessions": len(state.sessions),
                }
            )

    @app.post("/lineups")
    def create_lineup(body: LineupSpecIn, request: Request):
        if not is_admin(request):
            return fail(401, "admin bearer token required")
        try:
            spec = LineupSpec(
                data=SampleVector(body.data),
                design=QQDesign(body.design),
                hypothesis=NullHypothesis(body.hypothesis),
                m=body.m,
                seed=body.seed,
                allow_multiple_select=body.allow_multiple_select,
            )
        except DegenerateSampleError as exc:
            return fail(422, f"degenerate data: {exc}")
        except ValueError as exc:
            return fail(400, f"invalid lineup spec: {exc}")
        try:
            lineup = assemble_lineup(spec, lineup_id=uuid.uuid4().hex)
        except DegenerateSampleError as exc:
            return fail(422, f"degenerate data: {exc}")
        svg = render_svg(lineup, *default_grid(spec.m))
        with state.lock:
            state.append(
                "lineup_private",
                {
                    "lineup_id": lineup.id,
                    "data_position": lineup.data_position,
                    "salt": lineup.salt,
                    "seed": spec.seed,
                    "data": [float(v) for v in spec.data.values],
                    "data_digest": lineup.data_digest(),
                },
            )
            state.append("lineup_public", {"lineup": lineup.public_dict(), "svg": svg})
        return ok({"lineup_id": lineup.id, "key_digest": lineup.key_digest}, 201)

    @app.get("/lineups/{lineup_id}")
    def get_lineup(lineup_id: str):
        with state.lock:
            pub = state.public.get(lineup_id)
        if pub is None:
            return fail(404, "unknown lineup id")
        return ok({"lineup": pub, "svg_url": f"/lineups/{lineup_id}/svg"})

    @app.get("/lineups/{lineup_id}/svg")
    def get_svg(lineup_id: str):
        with state.lock:
            svg = state.svg.get(lineup_id)
        if svg is None:
            return fail(404, "unknown lineup id")
        return Response(content=svg, media_type="image/svg+xml")

    @app.post("/lineups/{lineup_id}/evaluations")
    def submit_evaluation(lineup_id: str, body: EvaluationIn):
        with state.lock:
            pub = state.public.get(lineup_id)
            if pub is None:
                return fail(404, "unknown lineup id")
            try:
                evaluation = Evaluation(
                    lineup_id=lineup_id,
                    observer_id=body.observer_id,
                    selected_panels=frozenset(body.selected_panels),
                    reasons=frozenset(body.reasons),
                    free_text=body.free_text,
                    timestamp=datetime.now(timezone.utc).isoformat(),
                )
            except ValueError as exc:
                return fail(400, f"invalid evaluation: {exc}")
            if max(evaluation.selected_panels) > pub["m"]:
                return fail(400, "selected panel index exceeds panel count")
            if not pub["allow_multiple_select"] and len(evaluation.selected_panels) > 1:
                return fail(400, "this lineup allows a single selection")
            if (lineup_id, body.observer_id) in state.eval_keys:
                return fail(409, "observer already evaluated this lineup")
            rec = state.append("evaluation", evaluation.to_dict())
        return ok({"seq": rec["seq"], "lineup_id": lineup_id}, 201)

    def _result(lineup_id: str, pub: dict, private: dict) -> dict:
        evals = [Evaluation.from_dict(d) for d in state.evaluations.get(lineup_id, [])]
        n_obs, y = fold_evaluations(
            evals, lineup_id, pub["m"], private["data_position"], pub["allow_multiple_select"]
        )
        p = visual_p_value(y, n_obs, pub["m"])
        return {
            "lineup_id": lineup_id,
            "N": n_obs,
            "y_weighted": y,
            "m": pub["m"],
            "p_value": p,
            "reject_at": {str(a): p <= a for a in DEFAULT_ALPHAS},
        }

    @app.get("/lineups/{lineup_id}/result")
    def get_result(lineup_id: str, request: Request):
        with state.lock:
            pub = state.public.get(lineup_id)
            private = state.private.get(lineup_id)
            if pub is None or private is None:
                return fail(404, "unknown lineup id")
            result = _result(lineup_id, pub, private)
        if not is_admin(request) and result["N"] < disclosure_threshold:
            return fail(
                403,
                f"results are disclosed once N >= {disclosure_threshold}; "
                f"currently N = {result['N']}. Retry after more evaluations.",
            )
        return ok({"result": result})

    @app.post("/sessions")
    def create_session(body: SessionIn):
        with state.lock:
            if not state.public:
                return fail(409, "no lineups available")
            rank = sorted(
                state.public,
                key=lambda lid: (
                    state.serve_counts.get(lid, 0),
                    hashlib.sha256(f"{service_seed}:{lid}".encode()).hexdigest(),
                ),
            )
            assigned: list[str] = []
            digests_used: set[str] = set()
            for lid in rank:
                if len(assigned) >= session_length:
                    break
                digest = state.private.get(lid, {}).get("data_digest")
                if digest is not None and digest in digests_used:
                    continue
                assigned.append(lid)
                if digest is not None:
                    digests_used.add(digest)
            session_id = hashlib.sha256(
                f"{service_seed}:{body.observer_id}:{state.store.seq}".encode()
            ).hexdigest()[:16]
            session = {
                "session_id": session_id,
                "observer_id": body.observer_id,
                "lineups": assigned,
            }
            state.append("session", session)
            completed = [
                lid for lid in assigned if (lid, body.observer_id) in state.eval_keys
            ]
        return ok({**session, "completed": completed}, 201)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        with state.lock:
            session = state.sessions.get(session_id)
            if session is None:
                return fail(404, "unknown session id")
            completed = [
                lid
                for lid in session["lineups"]
                if (lid, session["observer_id"]) in state.eval_keys
            ]
        return ok({**session, "completed": completed})

    return app
