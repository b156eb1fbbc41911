"""Curation service: the orchestration layer behind the HTTP API.

Catalog browsing, entity read/edit/create/delete, disambiguation
search, history and restore — every write goes through the same path:
validate, build a ground delta, commit data and provenance together
(both or neither), under a per-entity lock. Multi-entity operations
(cascading restores) take their locks in sorted IRI order so they can
never deadlock.
"""

from __future__ import annotations

import logging
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Optional

from .delta import Delta, diff, invert, to_update_text
from .display import (
    DisplayRule,
    PropertyDisplay,
    render_property_values,
    render_uri_display,
    resolve_rule,
)
from .history import (
    IntegrityError,
    VaultEntry,
    VersionError,
    cascade_targets,
    list_vault,
    live_quads,
    load_chain,
    materialize,
    restore,
)
from .provenance import (
    ProvenanceChain,
    Snapshot,
    chain_to_quads,
    record_snapshot,
    utc_now,
)
from .shapes import FormField, ShapeSchema, ValidationReport, compile_form, merge_reports, validate
from .store import Store
from .terms import RDF_TYPE, Quad, Term, iri

log = logging.getLogger(__name__)

PER_PAGE_OPTIONS = (20, 50, 100)
DEFAULT_PER_PAGE = 50
MAX_SUGGESTIONS = 5


class ServiceError(Exception):
    status = 500


class NotFoundError(ServiceError):
    status = 404


class DeletedError(ServiceError):
    """The entity exists only in the vault."""

    status = 410

    def __init__(self, entity: str):
        super().__init__(f"{entity} has been deleted; see the vault")
        self.entity = entity


class ConflictError(ServiceError):
    status = 409


class ValidationFailed(ServiceError):
    status = 422

    def __init__(self, report: ValidationReport):
        super().__init__("; ".join(v.message for v in report.violations))
        self.report = report


class BadRequestError(ServiceError):
    status = 400


class AuthError(ServiceError):
    status = 401


class StoreFailure(ServiceError):
    status = 502


# ---------------------------------------------------------------------------
# response documents

@dataclass(frozen=True)
class CatalogPage:
    category: str
    total: int
    page: int
    per_page: int
    sort_by: Optional[str]
    sort_dir: str
    items: tuple[tuple[str, str], ...]  # (entity IRI, display string)


@dataclass(frozen=True)
class EditRequest:
    entity: str
    expected_head: int
    additions: tuple[tuple[str, Term], ...] = ()
    removals: tuple[tuple[str, Term], ...] = ()
    agent: str = ""
    primary_source: Optional[str] = None
    description: str = "modified"

    def __post_init__(self) -> None:
        if not self.additions and not self.removals:
            raise BadRequestError("edit must add or remove at least one value")


@dataclass(frozen=True)
class Suggestion:
    entity: str
    display: str
    score: int

    def __post_init__(self) -> None:
        if not self.display:
            raise ServiceError("suggestion display must be nonempty")


@dataclass(frozen=True)
class EntityField:
    property: str
    label: str
    values: tuple[tuple[str, Optional[str]], ...]  # (display, link target)
    raw_values: tuple[Term, ...]
    widget: Optional[FormField]
    can_add: bool
    can_remove: bool


@dataclass(frozen=True)
class EntityDetail:
    entity: str
    types: tuple[str, ...]
    display: str
    fields: tuple[EntityField, ...]
    head: int
    form: tuple[FormField, ...]


@dataclass(frozen=True)
class HistoryEntry:
    sequence: int
    agent: str
    primary_source: Optional[str]
    generated_at: datetime
    invalidated_at: Optional[datetime]
    description: str
    additions: tuple[tuple[str, str], ...]  # (label, rendered value)
    removals: tuple[tuple[str, str], ...]
    is_deletion: bool


# ---------------------------------------------------------------------------

class CurationService:
    def __init__(
        self,
        data: Store,
        prov: Store,
        rules: Iterable[DisplayRule] = (),
        schemas: Iterable[ShapeSchema] = (),
        base_iri: str = "https://example.org",
        prefixes: Optional[dict[str, str]] = None,
        tokens: Optional[dict[str, str]] = None,
        clock=utc_now,
    ):
        self.data = data
        self.prov = prov
        self.rules = list(rules)
        self.schemas = list(schemas)
        self.base_iri = base_iri.rstrip("/")
        self.prefixes = dict(prefixes or {})
        self.tokens = dict(tokens or {})
        self.clock = clock
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._counters: dict[str, int] = {}
        self._counter_guard = threading.Lock()

    # -- auth stub ----------------------------------------------------------

    def resolve_agent(self, token: Optional[str]) -> str:
        """Map a bearer token to an agent IRI. Without configured tokens
        the service is open and edits are attributed to an anonymous
        agent (single-curator desk deployments)."""
        if not self.tokens:
            return f"{self.base_iri}/agent/anonymous"
        if token is None or token not in self.tokens:
            raise AuthError("unknown or missing token")
        return self.tokens[token]

    # -- locks --------------------------------------------------------------

    def _lock(self, entity: str) -> threading.Lock:
        with self._locks_guard:
            if entity not in self._locks:
                self._locks[entity] = threading.Lock()
            return self._locks[entity]

    class _MultiLock:
        def __init__(self, service: "CurationService", entities: Iterable[str]):
            self.locks = [service._lock(e) for e in sorted(set(entities))]

        def __enter__(self):
            for lock in self.locks:
                lock.acquire()

        def __exit__(self, *exc):
            for lock in reversed(self.locks):
                lock.release()

    # -- catalog ------------------------------------------------------------

    def _rule_for_class(self, class_iri: str) -> Optional[DisplayRule]:
        return resolve_rule({class_iri}, self.rules)

    def _rule_for_types(self, types: set[str]) -> Optional[DisplayRule]:
        return resolve_rule(types, self.rules)

    def list_categories(self) -> list[tuple[str, str, int]]:
        result = self.data.select(
            "SELECT ?class (COUNT(DISTINCT ?s) AS ?n) WHERE { ?s a ?class } GROUP BY ?class"
        )
        rows = []
        for row in result:
            class_iri = row["class"].value
            count = int(row["n"].value)
            rule = self._rule_for_class(class_iri)
            if rule is not None and not rule.should_be_displayed:
                continue
            name = rule.display_name if rule is not None else _local_name(class_iri)
            rows.append((class_iri, name, count))
        rows.sort(key=lambda r: (r[1], r[0]))
        return rows

    def get_page(
        self,
        category: str,
        page: int = 1,
        per_page: int = DEFAULT_PER_PAGE,
        sort_by: Optional[str] = None,
        sort_dir: str = "asc",
    ) -> CatalogPage:
        if per_page not in PER_PAGE_OPTIONS:
            raise BadRequestError(f"per_page must be one of {PER_PAGE_OPTIONS}")
        if page < 1:
            raise BadRequestError("page must be at least 1")
        if sort_dir not in ("asc", "desc"):
            raise BadRequestError("sort_dir must be asc or desc")
        rule = self._rule_for_class(category)
        if rule is not None and not rule.should_be_displayed:
            raise NotFoundError(f"{category} is not a browsable category")
        result = self.data.select(f"SELECT DISTINCT ?s WHERE {{ ?s a <{category}> }}")
        entities = [row["s"].value for row in result]
        total = len(entities)

        if sort_by is not None:
            pd = self._property_display(rule, sort_by)
            if pd.fetch_value_from_query is None:
                # one query for all sort keys instead of one per entity
                keyed = self.data.select(
                    f"SELECT ?s ?v WHERE {{ ?s a <{category}> . ?s <{sort_by}> ?v }} "
                    "ORDER BY ?s ?v"
                )
                key_of: dict[str, str] = {}
                for row in keyed:
                    key_of.setdefault(row["s"].value, row["v"].value)
            else:
                key_of = {
                    e: (render_property_values(e, pd, self.data) or [("", None)])[0][0]
                    for e in entities
                }

            def sort_key(entity: str) -> tuple[str, str]:
                return (key_of.get(entity, "").casefold(), entity)

            entities.sort(key=sort_key, reverse=(sort_dir == "desc"))
        else:
            # stable, cheap default: entity IRI order
            entities.sort(reverse=(sort_dir == "desc"))
        start = (page - 1) * per_page
        window = entities[start:start + per_page]
        items = tuple((e, render_uri_display(e, rule, self.data)) for e in window)
        return CatalogPage(category, total, page, per_page, sort_by, sort_dir, items)

    def _property_display(self, rule: Optional[DisplayRule], prop: str) -> PropertyDisplay:
        if rule is not None:
            for pd in rule.display_properties:
                if pd.property == prop:
                    return pd
        return PropertyDisplay(property=prop, display_name=_local_name(prop))

    # -- entity read --------------------------------------------------------

    def _types_of(self, entity: str) -> set[str]:
        result = self.data.select(f"SELECT ?t WHERE {{ <{entity}> a ?t }}")
        return {row["t"].value for row in result}

    def _schemas_for(self, types: set[str]) -> list[ShapeSchema]:
        return [s for s in self.schemas if s.target_class in types]

    def form_schema(self, class_iri: str) -> list[FormField]:
        rule = self._rule_for_class(class_iri)
        labels = {}
        textareas = set()
        if rule is not None:
            for pd in rule.display_properties:
                if pd.display_name:
                    labels[pd.property] = pd.display_name
                if pd.input_type == "textarea":
                    textareas.add(pd.property)
        fields: list[FormField] = []
        seen: set[str] = set()
        for schema in self._schemas_for({class_iri}):
            for f in compile_form(schema, labels=labels, textarea_paths=textareas):
                if f.path not in seen:
                    seen.add(f.path)
                    fields.append(f)
        return fields

    def get_entity(self, entity: str) -> EntityDetail:
        current = live_quads(self.data, entity)
        if not current:
            chain = load_chain(self.prov, entity)
            if chain and chain.is_deleted:
                raise DeletedError(entity)
            raise NotFoundError(f"unknown entity {entity}")
        types = self._types_of(entity)
        rule = self._rule_for_types(types)
        chain = load_chain(self.prov, entity)
        form = tuple(
            f
            for class_iri in sorted(types)
            for f in self.form_schema(class_iri)
        )
        form_by_path = {f.path: f for f in form}

        by_prop: dict[str, list[Term]] = {}
        for q in sorted(current, key=lambda q: q.sort_key()):
            by_prop.setdefault(q.predicate.value, []).append(q.object)

        ordered_props: list[PropertyDisplay] = []
        if rule is not None:
            ordered_props = [pd for pd in rule.display_properties if pd.should_be_displayed]
            covered = {pd.property for pd in ordered_props}
        else:
            covered = set()
        for prop in sorted(by_prop):
            if prop not in covered:
                ordered_props.append(PropertyDisplay(property=prop, display_name=_local_name(prop)))

        fields = []
        for pd in ordered_props:
            raw = tuple(by_prop.get(pd.property, []))
            values = tuple(render_property_values(entity, pd, self.data))
            widget = form_by_path.get(pd.property)
            count = len(raw)
            max_count = widget.max_count if widget is not None else None
            min_count = widget.min_count if widget is not None else None
            fields.append(
                EntityField(
                    property=pd.property,
                    label=pd.display_name or _local_name(pd.property),
                    values=values,
                    raw_values=raw,
                    widget=widget,
                    can_add=max_count is None or count < max_count,
                    can_remove=count > (min_count or 0),
                )
            )
        return EntityDetail(
            entity=entity,
            types=tuple(sorted(types)),
            display=render_uri_display(entity, rule, self.data),
            fields=tuple(fields),
            head=len(chain),
            form=form,
        )

    # -- validation ---------------------------------------------------------

    def _context_for(self, quads: frozenset[Quad]) -> set[Quad]:
        """Type statements of referenced objects, for sh:class checks."""
        context: set[Quad] = set()
        for q in quads:
            if q.object.is_iri:
                for row in self.data.select(f"SELECT ?t WHERE {{ <{q.object.value}> a ?t }}"):
                    context.add(Quad(q.object, iri(RDF_TYPE), row["t"]))
        return context

    def _validate(self, entity: str, quads: frozenset[Quad],
                  extra_context: Iterable[Quad] = ()) -> None:
        from .terms import EntityGraph

        graph = EntityGraph(iri(entity), quads)
        types = {q.object.value for q in quads if q.predicate.value == RDF_TYPE}
        schemas = self._schemas_for(types)
        if not schemas:
            return
        context = self._context_for(quads) | set(extra_context)
        report = merge_reports(validate(graph, s, context) for s in schemas)
        if not report.conforms:
            raise ValidationFailed(report)

    # -- atomic dual-store commit -------------------------------------------

    def _commit(self, data_delta: Delta, old_chain: ProvenanceChain,
                new_chain: ProvenanceChain) -> None:
        """Apply the data delta and the provenance append together; if the
        provenance write fails the data write is rolled back, so the pair
        of stores is unchanged by a failed call."""
        prov_delta = diff(frozenset(chain_to_quads(old_chain)), frozenset(chain_to_quads(new_chain)))
        applied_data = False
        try:
            if not data_delta.empty:
                self.data.update(to_update_text(data_delta))
                applied_data = True
            if not prov_delta.empty:
                self.prov.update(to_update_text(prov_delta))
        except Exception as exc:
            if applied_data:
                try:
                    self.data.update(to_update_text(invert(data_delta)))
                except Exception:  # noqa: BLE001
                    log.critical("rollback failed for %s; stores diverged", old_chain.entity)
                    raise
            raise StoreFailure(f"store write failed: {exc}") from exc

    # -- writes -------------------------------------------------------------

    def apply_edit(self, req: EditRequest) -> Snapshot:
        with self._lock(req.entity):
            chain = load_chain(self.prov, req.entity)
            if not chain:
                raise NotFoundError(f"unknown entity {req.entity}")
            if chain.is_deleted:
                raise DeletedError(req.entity)
            if req.expected_head != len(chain):
                raise ConflictError(
                    f"expected head {req.expected_head}, but head is {len(chain)}"
                )
            current = live_quads(self.data, req.entity)
            subject = iri(req.entity)
            insertions = {Quad(subject, iri(p), t) for p, t in req.additions}
            deletions = {Quad(subject, iri(p), t) for p, t in req.removals}
            missing = deletions - current
            if missing:
                raise BadRequestError(
                    f"removal of absent value(s): {sorted(q.predicate.value for q in missing)}"
                )
            insertions -= current  # re-adding an existing value is a no-op
            deletions -= insertions
            delta = Delta(insertions=insertions, deletions=deletions)
            if delta.empty:
                raise BadRequestError("edit is a no-op against the current state")
            target = frozenset((current - delta.deletions) | delta.insertions)
            self._validate(req.entity, target)
            new_chain = record_snapshot(
                chain, delta, req.agent, req.primary_source, req.description, self.clock()
            )
            self._commit(delta, chain, new_chain)
            return new_chain.head

    def create_entity(
        self,
        class_iri: str,
        fields: Iterable[tuple[str, object]],
        agent: str,
        source: Optional[str] = None,
        *,
        top_level: bool = True,
    ) -> tuple[str, Snapshot]:
        """Create an entity of ``class_iri``. Field values are Terms, or
        nested ``(class IRI, fields)`` pairs which are created first and
        linked by IRI — one creation snapshot per entity.

        Hidden classes (``shouldBeDisplayed: false``) cannot be created
        top-level, but may still be created nested under another entity
        (satellite records such as agents and identifiers)."""
        rule = self._rule_for_class(class_iri)
        if top_level and rule is not None and not rule.should_be_displayed:
            raise BadRequestError(f"entities of {class_iri} cannot be created")
        resolved: list[tuple[str, Term]] = []
        for prop, value in fields:
            if isinstance(value, Term):
                resolved.append((prop, value))
            elif isinstance(value, tuple) and len(value) == 2:
                nested_class, nested_fields = value
                nested_iri, _ = self.create_entity(
                    nested_class, nested_fields, agent, source, top_level=False
                )
                resolved.append((prop, iri(nested_iri)))
            else:
                raise BadRequestError(f"unsupported value for {prop}: {value!r}")
        entity = self._mint_iri(class_iri)
        subject = iri(entity)
        quads = frozenset(
            {Quad(subject, iri(RDF_TYPE), iri(class_iri))}
            | {Quad(subject, iri(p), t) for p, t in resolved}
        )
        self._validate(entity, quads)
        with self._lock(entity):
            chain = ProvenanceChain(entity)
            new_chain = record_snapshot(
                chain, Delta(insertions=quads), agent, source, "created", self.clock()
            )
            self._commit(Delta(insertions=quads), chain, new_chain)
            return entity, new_chain.head

    def _mint_iri(self, class_iri: str) -> str:
        local = _local_name(class_iri).lower()
        with self._counter_guard:
            if local not in self._counters:
                pattern = re.compile(re.escape(f"{self.base_iri}/{local}/") + r"(\d+)$")
                highest = 0
                result = self.data.select(f"SELECT DISTINCT ?s WHERE {{ ?s a <{class_iri}> }}")
                for row in result:
                    m = pattern.match(row["s"].value)
                    if m:
                        highest = max(highest, int(m.group(1)))
                self._counters[local] = highest
            self._counters[local] += 1
            return f"{self.base_iri}/{local}/{self._counters[local]}"

    def delete_entity(self, entity: str, agent: str, source: Optional[str] = None) -> Snapshot:
        with self._lock(entity):
            chain = load_chain(self.prov, entity)
            if not chain:
                raise NotFoundError(f"unknown entity {entity}")
            if chain.is_deleted:
                raise DeletedError(entity)
            current = live_quads(self.data, entity)
            delta = Delta(deletions=current)
            new_chain = record_snapshot(
                chain, delta, agent, source, "deleted", self.clock(), terminal=True
            )
            self._commit(delta, chain, new_chain)
            return new_chain.head

    # -- search -------------------------------------------------------------

    def search_suggestions(
        self, query: str, pd: PropertyDisplay, class_iri: str
    ) -> list[Suggestion]:
        if not pd.supports_search or len(query) < pd.min_chars_for_search:
            return []
        needle = query.casefold()
        matches: list[tuple[str, str]] = []  # (entity, matched value)
        if pd.fetch_value_from_query is not None:
            result = self.data.select(f"SELECT DISTINCT ?s WHERE {{ ?s a <{class_iri}> }}")
            for row in result:
                entity = row["s"].value
                for display, _target in render_property_values(entity, pd, self.data):
                    if needle in display.casefold():
                        matches.append((entity, display))
                        break
        else:
            result = self.data.select(
                f"SELECT ?s ?v WHERE {{ ?s a <{class_iri}> . ?s <{pd.property}> ?v }}"
            )
            for row in result:
                value = row["v"].value
                if needle in value.casefold():
                    matches.append((row["s"].value, value))
        ranked = sorted(
            matches,
            key=lambda m: (0 if m[1].casefold().startswith(needle) else 1, len(m[1]), m[0]),
        )
        out = []
        for rank, (entity, value) in enumerate(ranked[:MAX_SUGGESTIONS]):
            types = self._types_of(entity)
            rule = self._rule_for_types(types)
            name = render_uri_display(entity, rule, self.data)
            if name == entity:
                name = value
            out.append(Suggestion(entity, f"{name} [{self._compact(entity)}]", rank))
        return out

    def _compact(self, iri_value: str) -> str:
        for prefix, ns in self.prefixes.items():
            if iri_value.startswith(ns):
                return f"{prefix}:{iri_value[len(ns):]}"
        return iri_value

    # -- history / restore / vault ------------------------------------------

    def get_history(self, entity: str) -> list[HistoryEntry]:
        chain = load_chain(self.prov, entity)
        if not chain:
            raise NotFoundError(f"no history for {entity}")
        rule = self._rule_for_types(self._types_of(entity))
        entries = []
        for snapshot in reversed(chain.snapshots):
            entries.append(
                HistoryEntry(
                    sequence=snapshot.sequence,
                    agent=snapshot.agent,
                    primary_source=snapshot.primary_source,
                    generated_at=snapshot.generated_at,
                    invalidated_at=snapshot.invalidated_at,
                    description=snapshot.description,
                    additions=tuple(self._render_change(q, rule) for q in
                                    sorted(snapshot.delta.insertions, key=lambda q: q.sort_key())),
                    removals=tuple(self._render_change(q, rule) for q in
                                   sorted(snapshot.delta.deletions, key=lambda q: q.sort_key())),
                    is_deletion=(snapshot is chain.head and chain.is_deleted),
                )
            )
        return entries

    def _render_change(self, q: Quad, rule: Optional[DisplayRule]) -> tuple[str, str]:
        label = _local_name(q.predicate.value)
        if rule is not None:
            for pd in rule.display_properties:
                if pd.property == q.predicate.value and pd.display_name:
                    label = pd.display_name
                    break
        return (label, q.object.value)

    def restore_version(
        self, entity: str, k: int, agent: str, source: Optional[str] = None
    ) -> tuple[Snapshot, list[tuple[str, int]]]:
        """Restore ``entity`` to snapshot ``k`` and revert directly linked
        entities to their state at that moment. Returns the new head and
        the cascade actions taken as (linked IRI, reverted-to sequence),
        sequence 0 meaning the linked entity was deleted."""
        chain = load_chain(self.prov, entity)
        if not chain:
            raise NotFoundError(f"unknown entity {entity}")
        current = live_quads(self.data, entity)
        target_quads = materialize(chain, current, k).quads
        at_time = chain.snapshots[k - 1].generated_at
        cascades = cascade_targets(entity, target_quads, self.data, self.prov, at_time)
        with self._MultiLock(self, [entity] + [c[0] for c in cascades]):
            # re-read under lock
            chain = load_chain(self.prov, entity)
            current = live_quads(self.data, entity)
            now = self.clock()
            target, new_chain = restore(chain, current, k, agent, now, source)
            self._commit(diff(current, target), chain, new_chain)
            head = new_chain.head
            for other, seq in cascades:
                other_chain = load_chain(self.prov, other)
                other_current = live_quads(self.data, other)
                if seq == 0:
                    delta = Delta(deletions=other_current)
                    other_new = record_snapshot(
                        other_chain, delta, agent, source,
                        f"deleted by restore of {entity}", self.clock(), terminal=True,
                    )
                else:
                    other_target, other_new = restore(
                        other_chain, other_current, seq, agent, self.clock(), source
                    )
                    delta = diff(other_current, other_target)
                self._commit(delta, other_chain, other_new)
        return head, cascades

    def vault(self) -> list[tuple[VaultEntry, str]]:
        """Deleted entities, newest first, with their last-live display."""
        out = []
        for entry in list_vault(self.prov):
            types = {
                q.object.value
                for q in entry.last_live_view.quads
                if q.predicate.value == RDF_TYPE
            }
            rule = self._rule_for_types(types)
            display = entry.entity
            if rule is not None and rule.fetch_uri_display is not None:
                # render against a scratch store holding the last live state
                from .store import MemoryStore

                scratch = MemoryStore()
                scratch.load_quads(entry.last_live_view.quads)
                display = render_uri_display(entry.entity, rule, scratch)
            out.append((entry, display))
        return out


def _local_name(iri_value: str) -> str:
    for sep in ("#", "/"):
        if sep in iri_value:
            tail = iri_value.rsplit(sep, 1)[1]
            if tail:
                return tail
    return iri_value
