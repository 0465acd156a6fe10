"""HTTP annotation service.

Endpoints:
  GET  /api/tasks/next?annotator=ID&kind=K  next unanswered task, 204 when done
  POST /api/judgments                      validate + append (repeat overwrites)
  GET  /api/report                          live aggregate report
  GET  /api/progress                        judgment counts

Errors carry ``{"code", "message", "field_errors"}``; malformed bodies are
400, unknown tasks 404, verdict/kind mismatches 422. A shared token guards
all endpoints when configured.
"""

from __future__ import annotations

import logging

from fastapi import Depends, FastAPI, Header, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..skills import Skill
from .aggregate import build_report
from .store import JudgmentStore
from .tasks import TaskKind

log = logging.getLogger(__name__)


class JudgmentIn(BaseModel):
    task_id: str
    annotator_id: str
    verdict: dict


def _error(status: int, code: str, message: str, field_errors=None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "field_errors": field_errors or []},
    )


def validate_verdict(kind: TaskKind, verdict: dict, n_sentences: int | None = None) -> list[dict]:
    """Field-level errors for a verdict against its task kind; empty when valid."""
    errors = []
    if kind is TaskKind.PAIRWISE:
        choice = verdict.get("choice")
        if choice not in ("A", "B", "TIE"):
            errors.append({"field": "choice", "error": "must be one of A, B, TIE"})
        extras = set(verdict) - {"choice"}
        if extras:
            errors.append({"field": ",".join(sorted(extras)), "error": "unexpected field"})
    elif kind is TaskKind.SKILL:
        indices = verdict.get("evidence_sentence_indices")
        if not isinstance(indices, list) or not indices or not all(
            isinstance(i, int) and not isinstance(i, bool) for i in indices
        ):
            errors.append(
                {"field": "evidence_sentence_indices", "error": "must be a non-empty list of integers"}
            )
        elif n_sentences is not None and any(i < 0 or i >= n_sentences for i in indices):
            errors.append(
                {"field": "evidence_sentence_indices", "error": f"indices must lie in [0, {n_sentences - 1}]"}
            )
        skill = verdict.get("skill")
        if not isinstance(skill, str):
            errors.append({"field": "skill", "error": "must be one of the five skill names"})
        else:
            try:
                Skill.from_string(skill)
            except Exception:
                errors.append({"field": "skill", "error": "must be one of the five skill names"})
        extras = set(verdict) - {"evidence_sentence_indices", "skill"}
        if extras:
            errors.append({"field": ",".join(sorted(extras)), "error": "unexpected field"})
    else:
        for name in ("makes_sense", "relevant"):
            if not isinstance(verdict.get(name), bool):
                errors.append({"field": name, "error": "must be a boolean"})
        extras = set(verdict) - {"makes_sense", "relevant"}
        if extras:
            errors.append({"field": ",".join(sorted(extras)), "error": "unexpected field"})
    return errors


def create_app(store: JudgmentStore, token: str | None = None) -> FastAPI:
    app = FastAPI(title="annotation-service")

    async def require_token(x_annotation_token: str | None = Header(default=None)):
        if token and x_annotation_token != token:
            return False
        return True

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        field_errors = [
            {"field": ".".join(str(p) for p in err.get("loc", [])), "error": err.get("msg", "")}
            for err in exc.errors()
        ]
        return _error(400, "malformed_request", "request body failed validation", field_errors)

    @app.get("/api/tasks/next")
    async def next_task(
        annotator: str = Query(...),
        kind: str | None = Query(default=None),
        authed: bool = Depends(require_token),
    ):
        if not authed:
            return _error(401, "unauthorized", "missing or wrong token")
        parsed_kind = None
        if kind is not None:
            try:
                parsed_kind = TaskKind.from_string(kind)
            except ValueError:
                return _error(400, "bad_kind", f"unknown task kind {kind!r}")
        task = store.next_task(annotator, parsed_kind)
        if task is None:
            return Response(status_code=204)
        return JSONResponse(task.public_json())

    @app.post("/api/judgments", status_code=201)
    async def post_judgment(body: JudgmentIn, authed: bool = Depends(require_token)):
        if not authed:
            return _error(401, "unauthorized", "missing or wrong token")
        task = store.tasks.get(body.task_id)
        if task is None:
            return _error(404, "unknown_task", f"no task with id {body.task_id!r}")
        n_sentences = len(task.payload.get("sentences", [])) or None
        field_errors = validate_verdict(task.kind, body.verdict, n_sentences)
        if field_errors:
            return _error(
                422, "verdict_mismatch",
                f"verdict does not fit task kind {task.kind.value!r}", field_errors,
            )
        judgment, overwritten = store.add_judgment(body.task_id, body.annotator_id, body.verdict)
        payload = {"status": "stored", "overwritten": overwritten, "judgment": judgment.to_json()}
        if overwritten:
            payload["warning"] = "previous judgment for this (task, annotator) was replaced"
        return JSONResponse(payload, status_code=201)

    @app.get("/api/report")
    async def report(authed: bool = Depends(require_token)):
        if not authed:
            return _error(401, "unauthorized", "missing or wrong token")
        return JSONResponse(build_report(store).to_json())

    @app.get("/api/progress")
    async def progress(authed: bool = Depends(require_token)):
        if not authed:
            return _error(401, "unauthorized", "missing or wrong token")
        return JSONResponse(store.progress())

    return app
