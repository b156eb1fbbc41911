"""HTTP/JSON surface over the curation service.

Thin translation layer: JSON in, service call, JSON out. Terms travel
in SPARQL-results JSON form ({"type": "uri"|"literal", "value": ...,
"datatype"?, "xml:lang"?}); timestamps as UTC ISO strings with
millisecond precision. All service errors map to their HTTP status.
"""

from __future__ import annotations

import urllib.parse
from typing import Optional

from fastapi import Body, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse

from .display import PropertyDisplay
from .history import IntegrityError, VersionError
from .provenance import ProvenanceError, format_timestamp
from .service import (
    CurationService,
    EditRequest,
    ServiceError,
    ValidationFailed,
)
from .shapes import FormField
from .store import term_to_json, _term_from_json
from .terms import RdfError


def _search_hint(
    service: CurationService, f: FormField, class_candidates: tuple[str, ...]
) -> Optional[dict]:
    """Where the UI should send disambiguation queries for this field.

    Nested-entity fields search the target class by its first searchable
    display property; plain fields search their own class when the
    display rule marks the property searchable."""
    if f.widget == "nested_entity" and f.object_class:
        rule = service._rule_for_class(f.object_class)
        if rule is not None:
            for pd in rule.display_properties:
                if pd.supports_search:
                    return {
                        "class": f.object_class,
                        "property": pd.property,
                        "min_chars": pd.min_chars_for_search,
                    }
        return None
    for class_iri in class_candidates:
        rule = service._rule_for_class(class_iri)
        if rule is None:
            continue
        for pd in rule.display_properties:
            if pd.property == f.path and pd.supports_search:
                return {
                    "class": class_iri,
                    "property": f.path,
                    "min_chars": pd.min_chars_for_search,
                }
    return None


def _form_field_json(
    f: FormField,
    service: Optional[CurationService] = None,
    class_candidates: tuple[str, ...] = (),
) -> dict:
    return {
        "path": f.path,
        "label": f.label,
        "widget": f.widget,
        "datatype_options": list(f.datatype_options),
        "min_count": f.min_count,
        "max_count": f.max_count,
        "pattern": f.pattern,
        "required": f.required,
        "repeatable": f.repeatable,
        "object_class": f.object_class,
        "options": [term_to_json(t) for t in f.options],
        "search": _search_hint(service, f, class_candidates) if service else None,
    }


def _ts(value) -> Optional[str]:
    return format_timestamp(value) if value is not None else None


def _parse_field_value(service: CurationService, raw: dict):
    if "nested" in raw:
        nested = raw["nested"]
        return (
            nested["class"],
            [(f["property"], _parse_field_value(service, f["value"]))
             for f in nested.get("fields", [])],
        )
    return _term_from_json(raw)


def create_app(service: CurationService, static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="semantic curation service", docs_url=None, redoc_url=None)

    @app.exception_handler(ServiceError)
    async def service_error(_req: Request, exc: ServiceError):
        payload: dict = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, ValidationFailed):
            payload["violations"] = [
                {"path": v.path, "kind": v.kind, "message": v.message}
                for v in exc.report.violations
            ]
        if hasattr(exc, "entity"):
            payload["entity"] = exc.entity
            payload["vault"] = "/api/vault"
        return JSONResponse(status_code=exc.status, content=payload)

    @app.exception_handler(VersionError)
    async def version_error(_req: Request, exc: VersionError):
        return JSONResponse(status_code=400, content={"error": "VersionError", "detail": str(exc)})

    @app.exception_handler(IntegrityError)
    async def integrity_error(_req: Request, exc: IntegrityError):
        return JSONResponse(status_code=500, content={"error": "IntegrityError", "detail": str(exc)})

    @app.exception_handler(ProvenanceError)
    async def provenance_error(_req: Request, exc: ProvenanceError):
        return JSONResponse(status_code=400, content={"error": "ProvenanceError", "detail": str(exc)})

    @app.exception_handler(RdfError)
    async def rdf_error(_req: Request, exc: RdfError):
        return JSONResponse(status_code=400, content={"error": type(exc).__name__, "detail": str(exc)})

    def agent_from(authorization: Optional[str]) -> str:
        token = None
        if authorization and authorization.lower().startswith("bearer "):
            token = authorization[7:]
        return service.resolve_agent(token)

    @app.get("/api/categories")
    def categories():
        return {
            "categories": [
                {"class": c, "label": label, "count": count}
                for c, label, count in service.list_categories()
            ]
        }

    @app.get("/api/catalog/{class_iri:path}")
    def catalog(
        class_iri: str,
        page: int = Query(1),
        per_page: int = Query(50),
        sort_by: Optional[str] = Query(None),
        sort_dir: str = Query("asc"),
    ):
        result = service.get_page(
            urllib.parse.unquote(class_iri), page, per_page, sort_by, sort_dir
        )
        return {
            "category": result.category,
            "total": result.total,
            "page": result.page,
            "per_page": result.per_page,
            "sort_by": result.sort_by,
            "sort_dir": result.sort_dir,
            "items": [{"iri": e, "display": d} for e, d in result.items],
        }

    @app.get("/api/entity")
    def entity(iri: str):
        detail = service.get_entity(iri)
        candidates = tuple(sorted(detail.types))
        return {
            "iri": detail.entity,
            "types": list(detail.types),
            "display": detail.display,
            "head": detail.head,
            "fields": [
                {
                    "property": f.property,
                    "label": f.label,
                    "values": [{"display": d, "target": t} for d, t in f.values],
                    "raw_values": [term_to_json(t) for t in f.raw_values],
                    "widget": _form_field_json(f.widget, service, candidates) if f.widget else None,
                    "can_add": f.can_add,
                    "can_remove": f.can_remove,
                }
                for f in detail.fields
            ],
            "form": [_form_field_json(f, service, candidates) for f in detail.form],
        }

    @app.post("/api/entity", status_code=201)
    def create(payload: dict = Body(...), authorization: Optional[str] = Header(None)):
        agent = agent_from(authorization)
        fields = [
            (f["property"], _parse_field_value(service, f["value"]))
            for f in payload.get("fields", [])
        ]
        entity_iri, snapshot = service.create_entity(
            payload["class"], fields, agent, payload.get("primary_source")
        )
        return {"iri": entity_iri, "head": snapshot.sequence}

    @app.patch("/api/entity")
    def edit(payload: dict = Body(...), authorization: Optional[str] = Header(None)):
        agent = agent_from(authorization)
        req = EditRequest(
            entity=payload["iri"],
            expected_head=int(payload["expected_head"]),
            additions=tuple(
                (f["property"], _term_from_json(f["value"]))
                for f in payload.get("additions", [])
            ),
            removals=tuple(
                (f["property"], _term_from_json(f["value"]))
                for f in payload.get("removals", [])
            ),
            agent=agent,
            primary_source=payload.get("primary_source"),
            description=payload.get("description", "modified"),
        )
        head = service.apply_edit(req)
        return {"head": head.sequence}

    @app.delete("/api/entity")
    def delete(iri: str, authorization: Optional[str] = Header(None)):
        agent = agent_from(authorization)
        snapshot = service.delete_entity(iri, agent)
        return {"deleted": True, "head": snapshot.sequence}

    @app.get("/api/entity/history")
    def history(iri: str):
        entries = service.get_history(iri)
        return {
            "entity": iri,
            "entries": [
                {
                    "sequence": e.sequence,
                    "agent": e.agent,
                    "primary_source": e.primary_source,
                    "generated_at": _ts(e.generated_at),
                    "invalidated_at": _ts(e.invalidated_at),
                    "description": e.description,
                    "additions": [list(pair) for pair in e.additions],
                    "removals": [list(pair) for pair in e.removals],
                    "is_deletion": e.is_deletion,
                }
                for e in entries
            ],
        }

    @app.post("/api/entity/restore")
    def restore(payload: dict = Body(...), authorization: Optional[str] = Header(None)):
        agent = agent_from(authorization)
        head, cascades = service.restore_version(
            payload["iri"], int(payload["snapshot"]), agent, payload.get("primary_source")
        )
        return {
            "head": head.sequence,
            "cascaded": [{"iri": e, "snapshot": k} for e, k in cascades],
        }

    @app.get("/api/search")
    def search(
        q: str,
        property: str,
        class_iri: str = Query(alias="class"),
    ):
        rule = service._rule_for_class(class_iri)
        pd: Optional[PropertyDisplay] = None
        if rule is not None:
            for candidate in rule.display_properties:
                if candidate.property == property:
                    pd = candidate
                    break
        if pd is None:
            return {"suggestions": []}
        suggestions = service.search_suggestions(q, pd, class_iri)
        return {
            "suggestions": [
                {"entity": s.entity, "display": s.display, "score": s.score}
                for s in suggestions
            ]
        }

    @app.get("/api/vault")
    def vault():
        return {
            "entries": [
                {
                    "entity": entry.entity,
                    "display": display,
                    "deleted_at": _ts(entry.deleted_at),
                    "agent": entry.agent,
                    "last_snapshot": entry.last_live_view.at_snapshot,
                }
                for entry, display in service.vault()
            ]
        }

    @app.get("/api/form-schema")
    def form_schema(class_iri: str = Query(alias="class")):
        return {
            "class": class_iri,
            "fields": [
                _form_field_json(f, service, (class_iri,))
                for f in service.form_schema(class_iri)
            ],
        }

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
