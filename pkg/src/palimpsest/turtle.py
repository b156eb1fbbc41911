"""Read-only Turtle 1.1 parser (subset).

Covers the constructs that appear in SHACL shapes files and ordinary
data fixtures: prefix/base declarations (both @-style and SPARQL-style),
``a``, predicate-object lists with ``;`` and ``,``, anonymous blank
nodes ``[ ... ]``, RDF collections ``( ... )``, blank node labels,
numeric/boolean shorthand literals, and the full literal syntax.

No Turtle writer lives here: N-Quads is the canonical output format.
"""

from __future__ import annotations

import itertools
import re
from typing import Optional

from .nquads import ParseError, TermScanner
from .terms import RDF, XSD, Quad, Term, iri

RDF_FIRST = iri(RDF + "first")
RDF_REST = iri(RDF + "rest")
RDF_NIL = iri(RDF + "nil")
RDF_TYPE_TERM = iri(RDF + "type")

_PN_LOCAL_ESCAPABLE = set("_~.-!$&'()*+,;=/?#@%")
_INTEGER = re.compile(r"[+-]?[0-9]+$")
_DECIMAL = re.compile(r"[+-]?[0-9]*\.[0-9]+$")
_DOUBLE = re.compile(r"[+-]?(?:[0-9]+\.[0-9]*|\.?[0-9]+)[eE][+-]?[0-9]+$")


class TurtleParser:
    def __init__(self, text: str):
        self.sc = TermScanner(text)
        self.prefixes: dict[str, str] = {}
        self.base: Optional[str] = None
        self.quads: set[Quad] = set()
        self._bnode_ids = itertools.count(1)

    def parse(self) -> set[Quad]:
        sc = self.sc
        while True:
            sc.skip_ws()
            if sc.at_end():
                break
            if sc.peek() == "@":
                self._parse_at_directive()
            elif self._peek_keyword() in ("PREFIX", "BASE"):
                self._parse_sparql_directive()
            else:
                self._parse_triples()
                sc.skip_ws()
                sc.expect(".")
        return self.quads

    # directives

    def _peek_keyword(self) -> str:
        m = re.match(r"[A-Za-z]+", self.sc.text[self.sc.pos :])
        return m.group(0).upper() if m else ""

    def _parse_at_directive(self) -> None:
        sc = self.sc
        sc.expect("@")
        word = self._read_word()
        if word == "prefix":
            self._read_prefix_binding()
            sc.skip_ws()
            sc.expect(".")
        elif word == "base":
            sc.skip_ws()
            self.base = sc.read_iri().value
            sc.skip_ws()
            sc.expect(".")
        else:
            raise sc.error(f"unknown directive @{word}")

    def _parse_sparql_directive(self) -> None:
        word = self._read_word().upper()
        if word == "PREFIX":
            self._read_prefix_binding()
        else:
            self.sc.skip_ws()
            self.base = self.sc.read_iri().value

    def _read_prefix_binding(self) -> None:
        sc = self.sc
        sc.skip_ws()
        label = []
        while not sc.at_end() and sc.peek() != ":":
            label.append(sc.advance())
        sc.expect(":")
        sc.skip_ws()
        self.prefixes["".join(label)] = sc.read_iri().value

    def _read_word(self) -> str:
        out = []
        while not self.sc.at_end() and (self.sc.peek().isalpha()):
            out.append(self.sc.advance())
        return "".join(out)

    # triples

    def _parse_triples(self) -> None:
        subject = self._parse_subject()
        self._parse_predicate_object_list(subject)

    def _parse_subject(self) -> Term:
        sc = self.sc
        ch = sc.peek()
        if ch == "[":
            return self._parse_bnode_property_list()
        if ch == "(":
            return self._parse_collection()
        return self._parse_term()

    def _parse_predicate_object_list(self, subject: Term) -> None:
        sc = self.sc
        while True:
            sc.skip_ws()
            predicate = self._parse_verb()
            while True:
                sc.skip_ws()
                obj = self._parse_object()
                self.quads.add(Quad(subject, predicate, obj))
                sc.skip_ws()
                if sc.peek() == ",":
                    sc.advance()
                    continue
                break
            if sc.peek() == ";":
                sc.advance()
                sc.skip_ws()
                if sc.peek() in (".", "]", ";"):  # trailing semicolon
                    while sc.peek() == ";":
                        sc.advance()
                        sc.skip_ws()
                    return
                continue
            return

    def _parse_verb(self) -> Term:
        sc = self.sc
        if sc.peek() == "a" and not self._is_name_char(sc.text[sc.pos + 1 : sc.pos + 2]):
            sc.advance()
            return RDF_TYPE_TERM
        term = self._parse_term()
        if not term.is_iri:
            raise sc.error("predicate must be an IRI")
        return term

    def _parse_object(self) -> Term:
        ch = self.sc.peek()
        if ch == "[":
            return self._parse_bnode_property_list()
        if ch == "(":
            return self._parse_collection()
        return self._parse_term()

    def _parse_bnode_property_list(self) -> Term:
        sc = self.sc
        sc.expect("[")
        node = Term("blank", f"ttl{next(self._bnode_ids)}")
        sc.skip_ws()
        if sc.peek() != "]":
            self._parse_predicate_object_list(node)
            sc.skip_ws()
        sc.expect("]")
        return node

    def _parse_collection(self) -> Term:
        sc = self.sc
        sc.expect("(")
        items = []
        while True:
            sc.skip_ws()
            if sc.peek() == ")":
                sc.advance()
                break
            items.append(self._parse_object())
        head: Term = RDF_NIL
        for item in reversed(items):
            node = Term("blank", f"ttl{next(self._bnode_ids)}")
            self.quads.add(Quad(node, RDF_FIRST, item))
            self.quads.add(Quad(node, RDF_REST, head))
            head = node
        return head

    # terms

    @staticmethod
    def _is_name_char(ch: str) -> bool:
        return bool(ch) and (ch.isalnum() or ch in "_-.:%\\")

    def _parse_term(self) -> Term:
        sc = self.sc
        ch = sc.peek()
        if ch == "<":
            t = sc.read_iri()
            if self.base and not re.match(r"^[A-Za-z][A-Za-z0-9+.-]*:", t.value):
                return iri(self.base + t.value)
            return t
        if ch == "_" and sc.text.startswith("_:", sc.pos):
            return sc.read_blank()
        if ch in "\"'":
            return self._parse_literal()
        if ch.isdigit() or ch in "+-" or (ch == "." and sc.text[sc.pos + 1 : sc.pos + 2].isdigit()):
            return self._parse_numeric()
        word_match = re.match(r"(true|false)\b", sc.text[sc.pos :])
        if word_match:
            sc.advance(len(word_match.group(1)))
            return Term("literal", word_match.group(1), datatype=XSD + "boolean")
        return self._parse_pname()

    def _parse_literal(self) -> Term:
        sc = self.sc
        if sc.text.startswith('"""', sc.pos) or sc.text.startswith("'''", sc.pos):
            quote = sc.text[sc.pos] * 3
            sc.advance(3)
            out = []
            while not sc.text.startswith(quote, sc.pos):
                if sc.at_end():
                    raise sc.error("unterminated long string")
                ch = sc.advance()
                if ch == "\\":
                    out.append(sc._read_string_escape())
                else:
                    out.append(ch)
            sc.advance(3)
            value = "".join(out)
            return self._finish_literal(value)
        if sc.peek() == "'":
            sc.advance()
            out = []
            while sc.peek() != "'":
                if sc.at_end():
                    raise sc.error("unterminated string")
                ch = sc.advance()
                out.append(sc._read_string_escape() if ch == "\\" else ch)
            sc.advance()
            return self._finish_literal("".join(out))
        term = sc.read_literal()
        # read_literal handles @lang and ^^<iri>; handle ^^pname here
        if sc.text.startswith("^^", sc.pos):
            sc.advance(2)
            dt = self._parse_term()
            return Term("literal", term.value, datatype=dt.value)
        return term

    def _finish_literal(self, value: str) -> Term:
        sc = self.sc
        if sc.peek() == "@":
            sc.advance()
            tag = []
            while not sc.at_end() and (sc.peek().isalnum() or sc.peek() == "-"):
                tag.append(sc.advance())
            return Term("literal", value, language="".join(tag))
        if sc.text.startswith("^^", sc.pos):
            sc.advance(2)
            dt = self._parse_term()
            return Term("literal", value, datatype=dt.value)
        return Term("literal", value)

    def _parse_numeric(self) -> Term:
        sc = self.sc
        out = []
        while not sc.at_end() and (sc.peek().isdigit() or sc.peek() in "+-.eE"):
            # a '.' followed by whitespace/end is the statement terminator
            if sc.peek() == "." and not (
                sc.text[sc.pos + 1 : sc.pos + 2].isdigit()
                or sc.text[sc.pos + 1 : sc.pos + 2] in "eE"
            ):
                break
            out.append(sc.advance())
        lex = "".join(out)
        if _INTEGER.match(lex):
            return Term("literal", lex, datatype=XSD + "integer")
        if _DECIMAL.match(lex):
            return Term("literal", lex, datatype=XSD + "decimal")
        if _DOUBLE.match(lex):
            return Term("literal", lex, datatype=XSD + "double")
        raise sc.error(f"malformed numeric literal: {lex!r}")

    def _parse_pname(self) -> Term:
        sc = self.sc
        prefix = []
        while not sc.at_end() and sc.peek() != ":" and self._is_name_char(sc.peek()):
            prefix.append(sc.advance())
        if sc.peek() != ":":
            raise sc.error(f"expected a prefixed name near {''.join(prefix)!r}")
        sc.advance()
        local = []
        while not sc.at_end() and self._is_name_char(sc.peek()):
            if sc.peek() == "\\":
                sc.advance()
                local.append(sc.advance())
                continue
            if sc.peek() == "." and not self._is_name_char(sc.text[sc.pos + 1 : sc.pos + 2]):
                break
            local.append(sc.advance())
        pfx = "".join(prefix)
        if pfx not in self.prefixes:
            raise sc.error(f"undeclared prefix: {pfx!r}")
        return iri(self.prefixes[pfx] + "".join(local))


def parse_turtle(text: str) -> set[Quad]:
    """Parse a Turtle document into default-graph quads."""
    return TurtleParser(text).parse()
