"""Versioned semantic-data curation engine.

Quad-native RDF model, invertible ground deltas, provenance snapshot
chains, time-travel materialization/restore, SHACL-driven forms, YAML
display rules, and an HTTP curation API.
"""

from .terms import EntityGraph, Quad, Term, blank, iri, literal, typed
from .delta import Delta, apply, diff, invert, from_update_text, to_update_text
from .nquads import parse_nquads, serialize_nquads, skolemize

__all__ = [
    "EntityGraph",
    "Quad",
    "Term",
    "blank",
    "iri",
    "literal",
    "typed",
    "Delta",
    "apply",
    "diff",
    "invert",
    "from_update_text",
    "to_update_text",
    "parse_nquads",
    "serialize_nquads",
    "skolemize",
]
