"""N-Quads 1.1 reading/writing and blank-node skolemization.

The scanner here is deliberately strict and line-oriented; it is also
reused by the SPARQL update-text parser in :mod:`palimpsest.delta`, which
needs the same term grammar inside ``INSERT DATA``/``DELETE DATA`` blocks.
Serialization is canonical: one statement per line, sorted by
(graph, subject, predicate, object), so equal quad sets always produce
byte-identical documents.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .terms import Quad, RdfError, Term, XSD_STRING, iri

GENID_PATH = "/.well-known/genid/"


class ParseError(RdfError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class TermScanner:
    """Cursor-based scanner over N-Triples-level term syntax.

    Tracks line/column for error reporting. Understands IRIs, blank node
    labels, and literals with escapes, datatypes, and language tags.
    """

    def __init__(self, text: str, line: int = 1):
        self.text = text
        self.pos = 0
        self.line = line
        self.col = 1

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.line, self.col)

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self, n: int = 1) -> str:
        chunk = self.text[self.pos : self.pos + n]
        for ch in chunk:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n
        return chunk

    def skip_ws(self, newlines: bool = True, comments: bool = True) -> None:
        while not self.at_end():
            ch = self.peek()
            if ch in " \t" or (newlines and ch in "\r\n"):
                self.advance()
            elif comments and ch == "#":
                while not self.at_end() and self.peek() != "\n":
                    self.advance()
            else:
                break

    def expect(self, token: str) -> None:
        if not self.text.startswith(token, self.pos):
            raise self.error(f"expected {token!r}")
        self.advance(len(token))

    def read_iri(self) -> Term:
        self.expect("<")
        out = []
        while True:
            if self.at_end():
                raise self.error("unterminated IRI")
            ch = self.advance()
            if ch == ">":
                break
            if ch in ' "{}|^`' or ch < " ":
                raise self.error(f"illegal character in IRI: {ch!r}")
            if ch == "\\":
                out.append(self._read_ucharacter())
            else:
                out.append(ch)
        value = "".join(out)
        try:
            return iri(value)
        except RdfError as exc:
            raise self.error(str(exc)) from None

    def read_blank(self) -> Term:
        self.expect("_:")
        out = []
        while not self.at_end() and (self.peek().isalnum() or self.peek() in "_-."):
            out.append(self.advance())
        label = "".join(out).rstrip(".")
        # trailing dots belong to the statement terminator
        self.pos -= len("".join(out)) - len(label)
        self.col -= len("".join(out)) - len(label)
        if not label:
            raise self.error("empty blank node label")
        return Term("blank", label)

    def _read_ucharacter(self) -> str:
        esc = self.advance()
        if esc == "u":
            return chr(int(self.advance(4), 16))
        if esc == "U":
            return chr(int(self.advance(8), 16))
        raise self.error(f"bad IRI escape: \\{esc}")

    def read_literal(self) -> Term:
        self.expect('"')
        out = []
        while True:
            if self.at_end():
                raise self.error("unterminated literal")
            ch = self.advance()
            if ch == '"':
                break
            if ch == "\\":
                out.append(self._read_string_escape())
            else:
                out.append(ch)
        value = "".join(out)
        if self.peek() == "@":
            self.advance()
            tag = []
            while not self.at_end() and (self.peek().isalnum() or self.peek() == "-"):
                tag.append(self.advance())
            try:
                return Term("literal", value, language="".join(tag))
            except RdfError as exc:
                raise self.error(str(exc)) from None
        if self.text.startswith("^^", self.pos):
            self.advance(2)
            dt = self.read_iri()
            return Term("literal", value, datatype=dt.value)
        return Term("literal", value, datatype=XSD_STRING)

    def _read_string_escape(self) -> str:
        esc = self.advance()
        simple = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
        if esc in simple:
            return simple[esc]
        if esc == "u":
            return chr(int(self.advance(4), 16))
        if esc == "U":
            return chr(int(self.advance(8), 16))
        raise self.error(f"bad string escape: \\{esc}")

    def read_term(self) -> Term:
        ch = self.peek()
        if ch == "<":
            return self.read_iri()
        if ch == "_":
            return self.read_blank()
        if ch == '"':
            return self.read_literal()
        raise self.error(f"expected an RDF term, found {ch!r}")


def parse_nquads(text: str) -> set[Quad]:
    """Parse an N-Quads document into a set of quads.

    Blank node labels are preserved document-locally. Comments and blank
    lines are ignored.
    """
    scanner = TermScanner(text)
    quads: set[Quad] = set()
    while True:
        scanner.skip_ws()
        if scanner.at_end():
            break
        subject = scanner.read_term()
        if subject.is_literal:
            raise scanner.error("literal in subject position")
        scanner.skip_ws(newlines=False, comments=False)
        predicate = scanner.read_term()
        if not predicate.is_iri:
            raise scanner.error("predicate must be an IRI")
        scanner.skip_ws(newlines=False, comments=False)
        obj = scanner.read_term()
        scanner.skip_ws(newlines=False, comments=False)
        graph: Optional[Term] = None
        if scanner.peek() not in (".", ""):
            graph = scanner.read_term()
            if not graph.is_iri:
                raise scanner.error("graph label must be an IRI")
            scanner.skip_ws(newlines=False, comments=False)
        scanner.expect(".")
        quads.add(Quad(subject, predicate, obj, graph))
    return quads


def serialize_nquads(quads: Iterable[Quad]) -> str:
    lines = []
    for q in sorted(set(quads), key=Quad.sort_key):
        parts = [q.subject.n3(), q.predicate.n3(), q.object.n3()]
        if q.graph is not None:
            parts.append(q.graph.n3())
        lines.append(" ".join(parts) + " .")
    return "".join(line + "\n" for line in lines)


def skolemize(quads: Iterable[Quad], base: str) -> set[Quad]:
    """Replace blank nodes with stable genid IRIs under ``base``.

    Labels map injectively within one call, and the mapping is the
    identity on inputs that are already skolem IRIs, so skolemization is
    idempotent.
    """
    base = base.rstrip("/")

    def sk(term: Term) -> Term:
        if term.is_blank:
            return iri(base + GENID_PATH + term.value)
        return term

    out = set()
    for q in quads:
        out.add(Quad(sk(q.subject), q.predicate, sk(q.object), q.graph))
    return out
