"""HTTP front end over a design index: search, partial-design completion,
and design ingestion.  Readers work against an immutable snapshot; writers
swap the snapshot under a lock."""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .drawing import DocumentError
from .index import (
    ConflictError,
    DesignIndex,
    DesignIndexError,
    add_design,
    load,
    persist,
    provenance_payload,
    query_index,
    ranking_payload,
)
from .similarity import NoInformativeFeaturesError, SimilarityError


class OcrModel(BaseModel):
    length: int
    positions: list[dict[str, float]]


class CellModel(BaseModel):
    id: str
    bbox: list[float] = Field(min_length=4, max_length=4)
    text: str | None = None
    ocr: OcrModel | None = None


class LabelEntryModel(BaseModel):
    cell: str
    index: int | None = None


class DocumentModel(BaseModel):
    id: str
    cells: list[CellModel]
    labels: dict[str, list[LabelEntryModel]] = Field(default_factory=dict)
    visual_features: list[float] | None = None

    def as_document(self) -> dict[str, Any]:
        return self.model_dump()


class QueryRequest(BaseModel):
    document: DocumentModel
    alpha: float = 0.5
    k: int = 10


class RankEntryModel(BaseModel):
    id: str
    sim_tabular: float
    sim_visual: float | None
    combined: float
    rank: int


class ProvenanceEntryModel(BaseModel):
    pattern: str
    status: str


class QueryResponse(BaseModel):
    results: list[RankEntryModel]
    provenance: list[ProvenanceEntryModel]


class DesignSummaryModel(BaseModel):
    id: str
    digest: str
    cells: int
    has_visual: bool


class AddDesignResponse(BaseModel):
    id: str
    added: bool
    designs: int


class HealthResponse(BaseModel):
    status: str
    designs: int
    patterns: int


class PatternEntryModel(BaseModel):
    pattern: str
    support: int


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(
    index: DesignIndex,
    index_path: str | Path | None = None,
    frontend_dir: str | Path | None = None,
) -> FastAPI:
    """Service over a loaded index.  When `index_path` is given, successful
    writes persist the new snapshot there."""
    app = FastAPI(title="tdassist design search")
    state = {"index": index}
    write_lock = threading.Lock()

    @app.exception_handler(DocumentError)
    async def _document_error(request: Request, exc: DocumentError):
        return _error(400, "bad_document", str(exc))

    @app.exception_handler(ConflictError)
    async def _conflict(request: Request, exc: ConflictError):
        return _error(409, "conflict", str(exc))

    @app.exception_handler(NoInformativeFeaturesError)
    async def _no_features(request: Request, exc: NoInformativeFeaturesError):
        return _error(422, "no_informative_features", str(exc))

    @app.exception_handler(SimilarityError)
    async def _similarity_error(request: Request, exc: SimilarityError):
        return _error(400, "bad_query", str(exc))

    @app.exception_handler(DesignIndexError)
    async def _index_error(request: Request, exc: DesignIndexError):
        return _error(400, "bad_request", str(exc))

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        idx: DesignIndex = state["index"]
        return HealthResponse(status="ok", designs=len(idx.designs), patterns=len(idx.patterns))

    @app.get("/designs", response_model=list[DesignSummaryModel])
    def list_designs() -> list[DesignSummaryModel]:
        idx: DesignIndex = state["index"]
        return [
            DesignSummaryModel(
                id=d.id,
                digest=d.digest,
                cells=sum(1 for a in d.facts if a.pred == "cell"),
                has_visual=d.visual is not None,
            )
            for d in idx.designs.values()
        ]

    @app.get("/designs/{design_id}")
    def get_design(design_id: str):
        idx: DesignIndex = state["index"]
        design = idx.designs.get(design_id)
        if design is None:
            return _error(404, "not_found", f"no design {design_id!r}")
        return {
            "id": design.id,
            "digest": design.digest,
            "bits": list(design.vector.bits),
            "visual": list(design.visual) if design.visual is not None else None,
            "facts": [str(a) for a in design.facts],
        }

    @app.post("/designs", response_model=AddDesignResponse)
    def post_design(document: DocumentModel) -> AddDesignResponse:
        with write_lock:
            idx: DesignIndex = state["index"]
            updated = add_design(idx, document.as_document())
            added = updated is not idx
            if added and index_path is not None:
                persist(updated, index_path)
            state["index"] = updated
        return AddDesignResponse(
            id=document.id, added=added, designs=len(state["index"].designs)
        )

    def _run_query(request: QueryRequest, require_full: bool) -> QueryResponse:
        idx: DesignIndex = state["index"]
        ranked, tri = query_index(
            idx,
            request.document.as_document(),
            alpha=request.alpha,
            k=request.k,
            require_full=require_full,
        )
        return QueryResponse(
            results=[RankEntryModel(**entry) for entry in ranking_payload(ranked)],
            provenance=[
                ProvenanceEntryModel(**entry)
                for entry in provenance_payload(idx.patterns, tri)
            ],
        )

    @app.post("/query", response_model=QueryResponse)
    def query(request: QueryRequest) -> QueryResponse:
        return _run_query(request, require_full=True)

    @app.post("/query/partial", response_model=QueryResponse)
    def query_partial(request: QueryRequest) -> QueryResponse:
        return _run_query(request, require_full=False)

    @app.get("/patterns", response_model=list[PatternEntryModel])
    def patterns() -> list[PatternEntryModel]:
        idx: DesignIndex = state["index"]
        return [
            PatternEntryModel(pattern=p.key, support=s)
            for p, s in zip(idx.patterns.patterns, idx.patterns.supports)
        ]

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app


def serve(index_path: str | Path, bind: str = "127.0.0.1:8571") -> None:
    """Load an index file and run the HTTP service (blocking)."""
    import uvicorn

    host, _, port_text = bind.partition(":")
    port = int(port_text) if port_text else 8571
    index = load(index_path)
    frontend = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    app = create_app(index, index_path=index_path, frontend_dir=frontend)
    uvicorn.run(app, host=host or "127.0.0.1", port=port, log_level="info")
