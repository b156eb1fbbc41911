"""Uniform store contract over a remote SPARQL endpoint or an embedded
in-memory quad store.

Only ground-data updates (``INSERT DATA``/``DELETE DATA``) are accepted
through :meth:`Store.update`: the provenance model depends on invertible
deltas, and pattern-based updates would break that. Reads are freely
concurrent; writes are serialized per store handle.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, Optional

import httpx

from . import sparql
from .delta import from_update_text
from .terms import Quad, RdfError, Term, iri

DEFAULT_TIMEOUT = 30.0


class StoreError(RdfError):
    pass


@dataclass
class SelectResult:
    variables: list[str]
    rows: list[dict[str, Term]]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def first(self, var: str) -> Optional[Term]:
        for row in self.rows:
            if var in row:
                return row[var]
        return None


class Store:
    """Common surface of the memory and remote backends."""

    def select(self, query: str) -> SelectResult:
        raise NotImplementedError

    def update(self, update_text: str) -> None:
        raise NotImplementedError

    def load_quads(self, quads: Iterable[Quad]) -> None:
        raise NotImplementedError


class _QuadIndex(sparql.Dataset):
    """Per-graph indexed quad sets; match() output is canonically sorted."""

    def __init__(self):
        self.default: set[Quad] = set()
        self.named: dict[Term, set[Quad]] = {}
        self._by_pred: dict[tuple[Optional[Term], Term], set[Quad]] = {}
        self._by_subj: dict[tuple[Optional[Term], Term], set[Quad]] = {}

    def add(self, quad: Quad) -> None:
        target = self.default if quad.graph is None else self.named.setdefault(quad.graph, set())
        if quad in target:
            return
        target.add(quad)
        self._by_pred.setdefault((quad.graph, quad.predicate), set()).add(quad)
        self._by_subj.setdefault((quad.graph, quad.subject), set()).add(quad)

    def discard(self, quad: Quad) -> None:
        target = self.default if quad.graph is None else self.named.get(quad.graph, set())
        if quad not in target:
            return
        target.discard(quad)
        self._by_pred.get((quad.graph, quad.predicate), set()).discard(quad)
        self._by_subj.get((quad.graph, quad.subject), set()).discard(quad)
        if quad.graph is not None and not target:
            self.named.pop(quad.graph, None)

    def all_quads(self) -> set[Quad]:
        out = set(self.default)
        for quads in self.named.values():
            out |= quads
        return out

    # Dataset interface

    def graph_names(self) -> Iterable[Term]:
        return list(self.named)

    def match(self, s, p, o, graph) -> list[Quad]:
        graph_key = None if graph is sparql.DEFAULT_GRAPH else graph
        if graph_key is None:
            pool = self.default
        else:
            pool = self.named.get(graph_key, set())
        if s is not None:
            candidates = self._by_subj.get((graph_key, s), set())
        elif p is not None:
            candidates = self._by_pred.get((graph_key, p), set())
        else:
            candidates = pool
        out = [
            q
            for q in candidates
            if (s is None or q.subject == s)
            and (p is None or q.predicate == p)
            and (o is None or q.object == o)
        ]
        out.sort(key=Quad.sort_key)
        return out


class MemoryStore(Store):
    """Embedded quad store with the practical SPARQL subset.

    A single writer lock serializes updates; the index swap is atomic
    enough for concurrent readers at desk scale.
    """

    def __init__(self):
        self._index = _QuadIndex()
        self._write_lock = threading.RLock()
        self.fail_next_update = False  # test hook for atomicity injection

    def select(self, query: str) -> SelectResult:
        parsed = sparql.parse_query(query)
        variables, rows = sparql.Evaluator(self._index).select(parsed)
        return SelectResult(variables, rows)

    def update(self, update_text: str) -> None:
        delta = from_update_text(update_text)
        with self._write_lock:
            if self.fail_next_update:
                self.fail_next_update = False
                raise StoreError("injected update failure")
            for quad in delta.deletions:
                self._index.discard(quad)
            for quad in delta.insertions:
                self._index.add(quad)

    def load_quads(self, quads: Iterable[Quad]) -> None:
        with self._write_lock:
            for quad in quads:
                self._index.add(quad)

    # direct accessors used by tests and the service layer

    def quads(self) -> set[Quad]:
        return self._index.all_quads()

    def graph_quads(self, graph: Optional[Term]) -> set[Quad]:
        if graph is None:
            return set(self._index.default)
        return set(self._index.named.get(graph, set()))

    def match(self, s=None, p=None, o=None, graph=sparql.DEFAULT_GRAPH) -> list[Quad]:
        return self._index.match(s, p, o, graph)


class RemoteStore(Store):
    """SPARQL 1.1 Protocol client (query + update endpoints, JSON results)."""

    def __init__(self, query_endpoint: str, update_endpoint: str, timeout: float = DEFAULT_TIMEOUT):
        self.query_endpoint = query_endpoint
        self.update_endpoint = update_endpoint
        self._client = httpx.Client(timeout=timeout)
        self._write_lock = threading.RLock()

    def select(self, query: str) -> SelectResult:
        try:
            resp = self._client.post(
                self.query_endpoint,
                data={"query": query},
                headers={"Accept": "application/sparql-results+json"},
            )
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise StoreError(f"query endpoint failure: {exc}") from exc
        return parse_json_results(resp.json())

    def update(self, update_text: str) -> None:
        from_update_text(update_text)  # reject non-data update forms locally
        with self._write_lock:
            try:
                resp = self._client.post(self.update_endpoint, data={"update": update_text})
                resp.raise_for_status()
            except httpx.HTTPError as exc:
                raise StoreError(f"update endpoint failure: {exc}") from exc

    def load_quads(self, quads: Iterable[Quad]) -> None:
        from .delta import Delta, to_update_text

        quads = frozenset(quads)
        if quads:
            self.update(to_update_text(Delta(insertions=quads)))


def parse_json_results(doc: dict) -> SelectResult:
    variables = doc.get("head", {}).get("vars", [])
    rows = []
    for binding in doc.get("results", {}).get("bindings", []):
        row: dict[str, Term] = {}
        for name, cell in binding.items():
            row[name] = _term_from_json(cell)
        rows.append(row)
    return SelectResult(list(variables), rows)


def _term_from_json(cell: dict) -> Term:
    kind = cell.get("type")
    if kind == "uri":
        return iri(cell["value"])
    if kind == "bnode":
        return Term("blank", cell["value"])
    if kind in ("literal", "typed-literal"):
        return Term(
            "literal",
            cell["value"],
            datatype=cell.get("datatype"),
            language=cell.get("xml:lang"),
        )
    raise StoreError(f"unknown binding type {kind!r}")


def term_to_json(term: Term) -> dict:
    if term.is_iri:
        return {"type": "uri", "value": term.value}
    if term.is_blank:
        return {"type": "bnode", "value": term.value}
    out: dict = {"type": "literal", "value": term.value}
    if term.language:
        out["xml:lang"] = term.language
    elif term.datatype and not term.datatype.endswith("#string"):
        out["datatype"] = term.datatype
    return out


@dataclass
class StoreHandle:
    """Descriptor for a backend; ``open()`` yields the live Store."""

    kind: str  # "remote" | "memory"
    query_endpoint: Optional[str] = None
    update_endpoint: Optional[str] = None
    timeout: float = DEFAULT_TIMEOUT
    _store: Optional[Store] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "remote":
            if not (self.query_endpoint and self.update_endpoint):
                raise StoreError("remote handle requires both endpoints")
        elif self.kind == "memory":
            if self.query_endpoint or self.update_endpoint:
                raise StoreError("memory handle takes no endpoints")
        else:
            raise StoreError(f"unknown store kind {self.kind!r}")

    def open(self) -> Store:
        if self._store is None:
            if self.kind == "memory":
                self._store = MemoryStore()
            else:
                self._store = RemoteStore(self.query_endpoint, self.update_endpoint, self.timeout)
        return self._store


def memory_handle() -> StoreHandle:
    return StoreHandle(kind="memory")


def remote_handle(query_endpoint: str, update_endpoint: str, timeout: float = DEFAULT_TIMEOUT) -> StoreHandle:
    return StoreHandle(kind="remote", query_endpoint=query_endpoint, update_endpoint=update_endpoint, timeout=timeout)
