"""RDF value types: terms, quads, and per-entity graphs.

Everything here is an immutable value with component-wise equality, so
instances can be shared freely across threads and used as set members.
Literal lexical forms are never normalized: ``"01"^^xsd:integer`` and
``"1"^^xsd:integer`` are distinct terms. Datatype-aware comparison is the
job of the validation layer, not the data model.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

# Namespaces used throughout.
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
XSD = "http://www.w3.org/2001/XMLSchema#"
SH = "http://www.w3.org/ns/shacl#"
PROV = "http://www.w3.org/ns/prov#"
DCTERMS = "http://purl.org/dc/terms/"
OCO = "https://w3id.org/oc/ontology/"
FOAF = "http://xmlns.com/foaf/0.1/"

XSD_STRING = XSD + "string"
RDF_LANGSTRING = RDF + "langString"
RDF_TYPE = RDF + "type"

_ABSOLUTE_IRI = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")
_LANG_TAG = re.compile(r"^[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*$")


class RdfError(Exception):
    """Base class for data-model violations."""


@dataclass(frozen=True, slots=True)
class Term:
    """An RDF term: IRI, blank node, or literal.

    For literals, at most one of ``datatype``/``language`` is set; a plain
    literal defaults to ``xsd:string``. Language-tagged literals implicitly
    have datatype ``rdf:langString`` and never carry an explicit one.
    """

    kind: str  # "iri" | "blank" | "literal"
    value: str
    datatype: Optional[str] = None
    language: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind == "iri":
            if self.datatype or self.language:
                raise RdfError("IRI term cannot carry datatype/language")
            if not _ABSOLUTE_IRI.match(self.value):
                raise RdfError(f"not an absolute IRI: {self.value!r}")
        elif self.kind == "blank":
            if self.datatype or self.language:
                raise RdfError("blank term cannot carry datatype/language")
            if not self.value:
                raise RdfError("blank node label must be non-empty")
        elif self.kind == "literal":
            if self.datatype and self.language:
                raise RdfError("literal has both datatype and language")
            if self.language is not None and not _LANG_TAG.match(self.language):
                raise RdfError(f"malformed language tag: {self.language!r}")
            if self.language is None and self.datatype is None:
                object.__setattr__(self, "datatype", XSD_STRING)
            if self.datatype == RDF_LANGSTRING and self.language is None:
                raise RdfError("rdf:langString requires a language tag")
        else:
            raise RdfError(f"unknown term kind: {self.kind!r}")

    @property
    def is_iri(self) -> bool:
        return self.kind == "iri"

    @property
    def is_blank(self) -> bool:
        return self.kind == "blank"

    @property
    def is_literal(self) -> bool:
        return self.kind == "literal"

    def n3(self) -> str:
        """Canonical N-Triples serialization of this term."""
        if self.kind == "iri":
            return f"<{self.value}>"
        if self.kind == "blank":
            return f"_:{self.value}"
        body = f'"{escape_literal(self.value)}"'
        if self.language is not None:
            return f"{body}@{self.language}"
        if self.datatype and self.datatype != XSD_STRING:
            return f"{body}^^<{self.datatype}>"
        return body

    def __repr__(self) -> str:  # debugging aid
        return f"Term({self.n3()})"


def iri(value: str) -> Term:
    return Term("iri", value)


def blank(label: str) -> Term:
    return Term("blank", label)


def literal(value: str, datatype: str | None = None, language: str | None = None) -> Term:
    return Term("literal", value, datatype=datatype, language=language)


def typed(value: str, xsd_local: str) -> Term:
    return Term("literal", value, datatype=XSD + xsd_local)


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t", "\b": "\\b", "\f": "\\f"}


def escape_literal(s: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in s)


@dataclass(frozen=True, slots=True)
class Quad:
    """A statement in a named graph; ``graph=None`` means the default graph."""

    subject: Term
    predicate: Term
    object: Term
    graph: Optional[Term] = None

    def __post_init__(self) -> None:
        if self.subject.is_literal:
            raise RdfError("quad subject cannot be a literal")
        if not self.predicate.is_iri:
            raise RdfError("quad predicate must be an IRI")
        if self.graph is not None and not self.graph.is_iri:
            raise RdfError("graph name must be an IRI")

    def sort_key(self) -> tuple[str, str, str, str]:
        g = self.graph.n3() if self.graph else ""
        return (g, self.subject.n3(), self.predicate.n3(), self.object.n3())

    def with_graph(self, graph: Optional[Term]) -> "Quad":
        return Quad(self.subject, self.predicate, self.object, graph)

    def __repr__(self) -> str:
        parts = [self.subject.n3(), self.predicate.n3(), self.object.n3()]
        if self.graph:
            parts.append(self.graph.n3())
        return "Quad(" + " ".join(parts) + ")"


@dataclass(frozen=True)
class EntityGraph:
    """The quads describing one entity, the unit of editing.

    By default every quad's subject is the entity itself; callers that
    merge satellite statements do so explicitly.
    """

    entity: Term
    quads: frozenset[Quad] = field(default_factory=frozenset)
    graph_name: Optional[Term] = None

    def __post_init__(self) -> None:
        if not self.entity.is_iri:
            raise RdfError("entity must be an IRI")
        object.__setattr__(self, "quads", frozenset(self.quads))

    def add(self, quads: Iterable[Quad]) -> "EntityGraph":
        return EntityGraph(self.entity, self.quads | frozenset(quads), self.graph_name)

    def __len__(self) -> int:
        return len(self.quads)
