"""HTTP JSON API over the review queue.

Routes:
  GET  /api/queue/next?reviewer=ID  -> ReviewItem JSON | 204
  POST /api/verdicts                -> 200 | 400 | 404 | 409
  GET  /api/stats                   -> agreement + distribution + progress
  GET  /api/entries/{id}            -> full review item | 404
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .corpus import normalize_label
from .errors import (
    AlreadyResolvedError,
    InvalidVerdictError,
    NotFoundError,
    StaleAssignmentError,
    UnknownLabelError,
)
from .review import (
    Decision,
    ReviewQueue,
    Verdict,
    agreement_report,
    verified_distribution,
)


class VerdictBody(BaseModel):
    entry_id: str
    decision: str
    reviewer_id: str
    override_tag: Optional[str] = None


def create_app(queue: ReviewQueue, ui_dir: str | Path | None = None) -> FastAPI:
    """API over a review queue; optionally serves the built browser UI.

    CORS is wide open: the service binds locally and the reviewer UI may be
    served from another local origin.
    """
    app = FastAPI(title="ironia review service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.get("/api/queue/next")
    def queue_next(reviewer: str):
        item = queue.next_pending(reviewer)
        if item is None:
            return Response(status_code=204)
        return {
            "item": item.to_dict(),
            "server_now": queue.clock(),
            "pending": queue.counts()["pending"],
        }

    @app.post("/api/verdicts")
    def post_verdict(body: VerdictBody):
        try:
            decision = Decision(body.decision)
            override = (
                normalize_label(body.override_tag) if body.override_tag else None
            )
            verdict = Verdict(
                decision=decision,
                reviewer_id=body.reviewer_id,
                decided_at=queue.clock(),
                override_tag=override,
            )
            item = queue.submit_verdict(body.entry_id, verdict)
        except NotFoundError as exc:
            return JSONResponse(status_code=404, content={"error": str(exc)})
        except (AlreadyResolvedError, StaleAssignmentError) as exc:
            return JSONResponse(status_code=409, content={"error": str(exc)})
        except (InvalidVerdictError, UnknownLabelError, ValueError) as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        return {
            "entry_id": item.entry.id,
            "final_tag": item.final_tag.value if item.final_tag else None,
        }

    @app.get("/api/stats")
    def stats():
        agreement = agreement_report(queue, partial=True)
        distribution = verified_distribution(queue)
        return {
            "agreement": agreement.to_dict(),
            "distribution": distribution.to_dict() if distribution else None,
            "progress": queue.counts(),
        }

    @app.get("/api/entries/{entry_id}")
    def get_entry(entry_id: str):
        try:
            item = queue.get(entry_id)
        except NotFoundError as exc:
            return JSONResponse(status_code=404, content={"error": str(exc)})
        return item.to_dict()

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
