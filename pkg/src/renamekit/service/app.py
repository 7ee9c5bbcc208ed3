"""HTTP API for the human verification workflow.

Endpoints:
    GET  /tasks?state=&page=&page_size=     task summaries, stable pagination
    GET  /tasks/{id}                        full task with image references
    GET  /tasks/{id}/image.png              RGB crop around the segment
    GET  /tasks/{id}/overlay.png            crop with the segment highlighted
    POST /tasks/{id}/decision               record a decision
    GET  /progress                          totals and per-source counts
    POST /export                            write verified assignments
"""
from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Header, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from ..errors import DataError, ValidationError
from .rendering import render_crop, render_overlay, to_png_bytes
from .store import ConflictError, TaskState, VerificationStore


class DecisionRequest(BaseModel):
    chosen: str
    source: str
    annotator: str | None = None  # falls back to the X-Annotator header
    replacement_class_id: int | None = None
    expect_pending: bool = False


class ExportRequest(BaseModel):
    path: str | None = None


def _task_summary(task: TaskState) -> dict:
    return {
        "segment_id": task.assignment.segment_id,
        "state": task.state,
        "chosen": task.decision.chosen if task.decision else task.assignment.chosen,
        "top1": task.assignment.ranked[0][0] if task.assignment.ranked else None,
    }


def _task_detail(store: VerificationStore, task: TaskState) -> dict:
    segment_id = task.assignment.segment_id
    return {
        "segment_id": segment_id,
        "image_id": task.segment.image_id,
        "class_id": task.segment.class_id,
        "original_name": store.table[task.segment.class_id].name_string(),
        "state": task.state,
        "top3": [{"name": n, "score": s} for n, s in task.top3],
        "others": store.others(segment_id),
        "image_url": f"/tasks/{segment_id}/image.png",
        "overlay_url": f"/tasks/{segment_id}/overlay.png",
        "decision": task.decision.to_json() if task.decision else None,
    }


def create_app(store: VerificationStore, images_root: str | Path, export_path: str | Path) -> FastAPI:
    app = FastAPI(title="renamekit verification")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    images_root = Path(images_root)
    export_path = Path(export_path)

    def _get_task_or_404(segment_id: int) -> TaskState:
        try:
            return store.get_task(segment_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown segment {segment_id}")

    @app.get("/tasks")
    def list_tasks(state: str = "all", page: int = 0, page_size: int = 50):
        try:
            result = store.list_tasks(state=state, page=page, page_size=page_size)
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        result["tasks"] = [_task_summary(t) for t in result["tasks"]]
        return result

    @app.get("/tasks/{segment_id}")
    def get_task(segment_id: int):
        return _task_detail(store, _get_task_or_404(segment_id))

    @app.get("/tasks/{segment_id}/image.png")
    def get_image(segment_id: int):
        task = _get_task_or_404(segment_id)
        rgb = store.image_for(segment_id, images_root)
        return Response(
            content=to_png_bytes(render_crop(rgb, task.segment.mask)),
            media_type="image/png",
        )

    @app.get("/tasks/{segment_id}/overlay.png")
    def get_overlay(segment_id: int):
        task = _get_task_or_404(segment_id)
        rgb = store.image_for(segment_id, images_root)
        return Response(
            content=to_png_bytes(render_overlay(rgb, task.segment.mask)),
            media_type="image/png",
        )

    @app.post("/tasks/{segment_id}/decision")
    def post_decision(
        segment_id: int,
        request: DecisionRequest,
        x_annotator: str | None = Header(default=None),
    ):
        _get_task_or_404(segment_id)
        try:
            task = store.decide(
                segment_id,
                chosen=request.chosen,
                source=request.source,
                annotator=request.annotator or x_annotator or "anonymous",
                replacement_class_id=request.replacement_class_id,
                expect_pending=request.expect_pending,
            )
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except ValidationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except DataError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return _task_detail(store, task)

    @app.get("/progress")
    def progress():
        return store.progress()

    @app.post("/export")
    def export(request: ExportRequest):
        target = Path(request.path) if request.path else export_path
        try:
            return store.export(target)
        except OSError as exc:
            raise HTTPException(status_code=500, detail=f"export failed: {exc}")

    return app
