"""Read-only HTTP JSON API over an ingested data_dir.

The service never mutates state; re-ingestion requires a restart. Every
response shape has a JSON-schema file shipped under webmap/schemas/.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .errors import NoMatch, NotFound, WebMapError
from .overlay import resolve_query
from .pipeline import EngineState, load_state

DEFAULT_TRACE_DEPTH = 5


def create_app(data_dir: str | Path) -> FastAPI:
    state = load_state(data_dir)
    app = FastAPI(title="webmap", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET"]
    )

    @app.exception_handler(StarletteHTTPException)
    async def http_error(request: Request, exc: StarletteHTTPException):
        detail = exc.detail if isinstance(exc.detail, dict) else {"error": str(exc.detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422, content={"error": str(exc.errors())})

    @app.exception_handler(WebMapError)
    async def webmap_error(request: Request, exc: WebMapError):
        return JSONResponse(status_code=500, content={"error": str(exc)})

    def fail(status: int, message: str, **extra):
        raise StarletteHTTPException(
            status_code=status, detail={"error": message, **extra}
        )

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/map")
    def full_map():
        clusters = []
        links = []
        for cluster in state.overlay.all_clusters():
            clusters.append(
                {
                    "trc": cluster.trc,
                    "peer_id": cluster.peer_id,
                    "doc_count": len(cluster.docs),
                }
            )
            for ref in sorted(cluster.links):
                links.append(
                    {
                        "a": {"trc": cluster.trc, "peer_id": cluster.peer_id},
                        "b": {"trc": ref.trc, "peer_id": ref.peer_id},
                    }
                )
        return {"clusters": clusters, "links": links}

    def _find_cluster(trc: str, peer: str | None):
        hosts = state.overlay.lookup_cluster(trc)
        if not hosts:
            fail(404, f"no cluster file for {trc!r}")
        host = peer if peer else min(hosts)
        if host not in hosts:
            fail(404, f"cluster {trc!r} is not hosted on peer {host!r}")
        return state.overlay.fetch_cluster(host, trc)

    @app.get("/api/cluster/{trc}")
    def cluster_detail(trc: str, peer: str | None = None):
        cluster = _find_cluster(trc, peer)
        return {
            "trc": cluster.trc,
            "peer_id": cluster.peer_id,
            "docs": [
                {
                    "doc_id": d.doc_id,
                    "url": d.url,
                    "title": d.title,
                    "owner_peer": d.owner_peer,
                }
                for d in sorted(cluster.docs)
            ],
            "subclusters": [rec.to_dict() for rec in cluster.subclusters],
            "related_clusters": [
                {"trc": ref.trc, "peer_id": ref.peer_id}
                for ref in sorted(cluster.links)
            ],
        }

    @app.get("/api/doc/{doc_id}/signpost")
    def doc_signpost(doc_id: str):
        signpost = state.signposts.get(doc_id)
        cluster_key = state.doc_cluster.get(doc_id)
        if signpost is None or cluster_key is None:
            fail(404, f"no signpost for document {doc_id!r}")
        peer_id, trc = cluster_key.split("/", 1)
        outgoing = [
            {"from": l.from_doc, "to": l.to_doc, "overlap": l.overlap_score}
            for l in state.doc_links.get(cluster_key, [])
            if l.from_doc == doc_id
        ]
        return {
            "doc_id": doc_id,
            "cluster": {"trc": trc, "peer_id": peer_id},
            "authorities": signpost["authorities"],
            "hubs": signpost["hubs"],
            "links": outgoing,
        }

    @app.get("/api/trace/{doc_id}")
    def trace(doc_id: str, depth: int = Query(default=DEFAULT_TRACE_DEPTH, ge=0, le=1000)):
        try:
            chain = state.trace(doc_id, depth)
        except NotFound as err:
            fail(404, str(err))
        by_pair = {
            (l.from_doc, l.to_doc): l.overlap_score for l in state.all_doc_links()
        }
        hops = [
            {"from": a, "to": b, "overlap": by_pair[(a, b)]}
            for a, b in zip(chain, chain[1:])
        ]
        return {"doc_id": doc_id, "depth": depth, "chain": chain, "hops": hops}

    @app.get("/api/search")
    def search(q: str = Query(min_length=1), peer: str | None = None):
        if peer is not None and peer not in state.overlay.peers:
            fail(404, f"unknown peer {peer!r}")
        try:
            result = resolve_query(
                state.overlay, q, state.provider,
                state.config.selector(), peer_id=peer,
            )
        except NoMatch as err:
            fail(404, str(err), suggestion=err.suggestion)
        return {
            "query": q,
            "trc": result.trc,
            "peer_id": result.peer_id,
            "documents": [
                {
                    "doc_id": entry.doc_id,
                    "url": entry.url,
                    "title": entry.title,
                    "owner_peer": entry.owner_peer,
                    "score": score,
                }
                for entry, score in result.documents
            ],
            "related_clusters": [
                {"trc": ref.trc, "peer_id": ref.peer_id}
                for ref in result.related_clusters
            ],
        }

    return app


def serve(data_dir: str | Path, host: str = "127.0.0.1", port: int = 8337) -> None:
    """Run the API with uvicorn; raises WebMapError when the port is taken."""
    import uvicorn

    app = create_app(data_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    except OSError as err:
        raise WebMapError(f"cannot bind {host}:{port}: {err}") from err


def load_engine_state(data_dir: str | Path) -> EngineState:
    return load_state(data_dir)
