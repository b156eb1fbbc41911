"""Ground deltas between entity states.

A delta is the pair (insertions, deletions) of quad sets, serializable
to and from the ``INSERT DATA``/``DELETE DATA`` subset of SPARQL 1.1
Update. That text is exactly what gets persisted with each provenance
snapshot, so serialization must round-trip bit-exactly and the parser is
lenient about whitespace and block order.

Deltas are ground by construction: blank nodes cannot be re-identified
across snapshots, so they are rejected here and skolemized upstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .nquads import TermScanner
from .terms import Quad, RdfError, Term


class DeltaError(RdfError):
    pass


def _check_ground(quads: Iterable[Quad], role: str) -> frozenset[Quad]:
    out = frozenset(quads)
    for q in out:
        if q.subject.is_blank or q.object.is_blank:
            raise DeltaError(f"blank node in delta {role}: {q!r}")
    return out


@dataclass(frozen=True)
class Delta:
    insertions: frozenset[Quad] = field(default_factory=frozenset)
    deletions: frozenset[Quad] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "insertions", _check_ground(self.insertions, "insertions"))
        object.__setattr__(self, "deletions", _check_ground(self.deletions, "deletions"))
        overlap = self.insertions & self.deletions
        if overlap:
            raise DeltaError(f"quad both inserted and deleted: {next(iter(overlap))!r}")

    @property
    def empty(self) -> bool:
        return not self.insertions and not self.deletions

    def __bool__(self) -> bool:
        return not self.empty


def diff(before: Iterable[Quad], after: Iterable[Quad]) -> Delta:
    """Delta that transforms ``before`` into ``after`` (set semantics)."""
    b, a = frozenset(before), frozenset(after)
    return Delta(insertions=a - b, deletions=b - a)


def diff_entity(before, after) -> Delta:
    """Like :func:`diff` but over entity graphs, enforcing same entity."""
    if before.entity != after.entity:
        raise DeltaError(f"entity mismatch: {before.entity!r} vs {after.entity!r}")
    return diff(before.quads, after.quads)


def invert(d: Delta) -> Delta:
    return Delta(insertions=d.deletions, deletions=d.insertions)


def apply(d: Delta, quads: Iterable[Quad]) -> frozenset[Quad]:
    """(quads \\ deletions) ∪ insertions. Absent deletions are no-ops,
    matching SPARQL ``DELETE DATA`` semantics."""
    return (frozenset(quads) - d.deletions) | d.insertions


def _format_block(keyword: str, quads: frozenset[Quad]) -> str:
    # Group by graph; default-graph statements first, then GRAPH blocks
    # in graph-IRI order. Statements sorted canonically within a group.
    by_graph: dict[Optional[str], list[Quad]] = {}
    for q in quads:
        by_graph.setdefault(q.graph.value if q.graph else None, []).append(q)
    lines = [f"{keyword} {{"]
    for g in sorted(by_graph, key=lambda v: (v is not None, v or "")):
        stmts = sorted(by_graph[g], key=Quad.sort_key)
        if g is None:
            for q in stmts:
                lines.append(f"  {q.subject.n3()} {q.predicate.n3()} {q.object.n3()} .")
        else:
            lines.append(f"  GRAPH <{g}> {{")
            for q in stmts:
                lines.append(f"    {q.subject.n3()} {q.predicate.n3()} {q.object.n3()} .")
            lines.append("  }")
    lines.append("}")
    return "\n".join(lines)


def to_update_text(d: Delta) -> str:
    """Canonical SPARQL update text: DELETE DATA block, then INSERT DATA."""
    blocks = []
    if d.deletions:
        blocks.append(_format_block("DELETE DATA", d.deletions))
    if d.insertions:
        blocks.append(_format_block("INSERT DATA", d.insertions))
    return " ;\n".join(blocks)


def from_update_text(text: str) -> Delta:
    """Parse ``INSERT DATA``/``DELETE DATA`` operations into one Delta.

    Accepts any number of operations in any order, optional ``GRAPH``
    blocks, and full literal syntax. Any other update form is rejected,
    as is a quad appearing on both sides (one delta is one atomic
    transition).
    """
    sc = TermScanner(text)
    insertions: set[Quad] = set()
    deletions: set[Quad] = set()
    while True:
        sc.skip_ws()
        if sc.at_end():
            break
        if sc.peek() == ";":
            sc.advance()
            continue
        word = _read_keyword(sc)
        if word == "INSERT":
            target = insertions
        elif word == "DELETE":
            target = deletions
        else:
            raise DeltaError(f"unsupported update form starting with {word!r} (line {sc.line})")
        sc.skip_ws()
        kw2 = _read_keyword(sc)
        if kw2 != "DATA":
            raise DeltaError(f"only {word} DATA is supported, found {word} {kw2} (line {sc.line})")
        sc.skip_ws()
        for quad in _parse_data_block(sc):
            target.add(quad)
    try:
        return Delta(insertions=frozenset(insertions), deletions=frozenset(deletions))
    except DeltaError as exc:
        raise DeltaError(f"inconsistent update text: {exc}") from None


def _read_keyword(sc: TermScanner) -> str:
    out = []
    while not sc.at_end() and sc.peek().isalpha():
        out.append(sc.advance())
    if not out:
        raise sc.error("expected a keyword")
    return "".join(out).upper()


def _parse_data_block(sc: TermScanner, graph: Optional[Term] = None):
    sc.expect("{")
    while True:
        sc.skip_ws()
        if sc.at_end():
            raise sc.error("unterminated data block")
        if sc.peek() == "}":
            sc.advance()
            return
        if sc.text[sc.pos : sc.pos + 5].upper() == "GRAPH":
            if graph is not None:
                raise sc.error("nested GRAPH blocks are not allowed")
            sc.advance(5)
            sc.skip_ws()
            g = sc.read_term()
            if not g.is_iri:
                raise sc.error("GRAPH label must be an IRI")
            sc.skip_ws()
            yield from _parse_data_block(sc, graph=g)
            continue
        subject = sc.read_term()
        if subject.is_blank:
            raise DeltaError(f"blank node in delta text (line {sc.line})")
        sc.skip_ws()
        predicate = sc.read_term()
        if not predicate.is_iri:
            raise sc.error("predicate must be an IRI")
        sc.skip_ws()
        obj = sc.read_term()
        if obj.is_blank:
            raise DeltaError(f"blank node in delta text (line {sc.line})")
        sc.skip_ws()
        if sc.peek() == ".":
            sc.advance()
        yield Quad(subject, predicate, obj, graph)
