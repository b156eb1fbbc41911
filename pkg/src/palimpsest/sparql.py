"""Embedded SPARQL 1.1 SELECT engine (practical subset).

This is not a full SPARQL implementation; it covers exactly the query
features the display configuration language and the catalog need:

* basic graph patterns with ``a``, ``;``/``,`` lists, and the ``+``
  property path over a single IRI
* OPTIONAL, BIND, FILTER, GRAPH (IRI or variable), nested SELECT
* expressions: CONCAT, COALESCE, IF, BOUND, STR, STRAFTER, STRSTARTS,
  CONTAINS, LCASE, UCASE, REGEX, comparisons, ``&&``/``||``/``!``
* aggregates COUNT (with DISTINCT) and GROUP_CONCAT (with SEPARATOR),
  GROUP BY, implicit grouping
* DISTINCT, ORDER BY (ASC/DESC), LIMIT, OFFSET
* PREFIX declarations

Evaluation is deterministic: pattern matches and aggregate inputs are
processed in canonical term order, so repeated runs of the same query on
the same data always agree (GROUP_CONCAT included).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

from .terms import Quad, RdfError, Term, XSD, iri

Solution = dict[str, Term]

_NUMERIC_DATATYPES = {
    XSD + n
    for n in (
        "integer", "decimal", "double", "float", "long", "int", "short", "byte",
        "nonNegativeInteger", "positiveInteger", "negativeInteger", "nonPositiveInteger",
        "unsignedLong", "unsignedInt", "unsignedShort", "unsignedByte",
    )
}


class QueryError(RdfError):
    """Malformed query or unsupported construct."""


class _EvalError(Exception):
    """Expression evaluation error; maps to 'unbound' per SPARQL."""


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"""
      (?P<WS>\s+|\#[^\n]*)
    | (?P<IRIREF><[^<>"{}|^`\\\s]*>)
    | (?P<VAR>[?$][A-Za-z_][A-Za-z0-9_]*)
    | (?P<STRING>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
    | (?P<NUMBER>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    | (?P<PNAME>[A-Za-z_][A-Za-z0-9_\-]*)?:(?P<PLOCAL>[A-Za-z0-9_][A-Za-z0-9_\-.]*(?<!\.))?
    | (?P<LANGTAG>@[A-Za-z]+(?:-[A-Za-z0-9]+)*)
    | (?P<NAME>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<PUNCT>&&|\|\||!=|<=|>=|\^\^|[{}()<>=!.,;*+/])
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise QueryError(f"cannot tokenize query at offset {pos}: {text[pos:pos+20]!r}")
        kind = m.lastgroup if m.lastgroup not in ("PLOCAL",) else "PNAME"
        if m.group("PNAME") is not None or (m.group(0).find(":") >= 0 and kind == "PNAME"):
            kind = "PNAME"
        if kind != "WS":
            tokens.append(_Token(kind or "PUNCT", m.group(0), pos))
        pos = m.end()
    tokens.append(_Token("EOF", "", pos))
    return tokens


# ---------------------------------------------------------------------------
# AST

@dataclass
class TriplePattern:
    subject: Union[str, Term]  # str = variable name
    path: "Path"
    object: Union[str, Term]


@dataclass
class Path:
    predicate: Union[str, Term]
    one_or_more: bool = False


@dataclass
class Group:
    elements: list = field(default_factory=list)
    filters: list = field(default_factory=list)


@dataclass
class OptionalPattern:
    group: Group


@dataclass
class BindPattern:
    expr: "Expr"
    var: str


@dataclass
class GraphPattern:
    label: Union[str, Term]
    group: Group


@dataclass
class Projection:
    var: str
    expr: Optional["Expr"] = None  # None = plain variable


@dataclass
class SelectQuery:
    projections: Optional[list[Projection]]  # None = SELECT *
    distinct: bool
    where: Group
    group_by: list[str] = field(default_factory=list)
    order_by: list[tuple["Expr", bool]] = field(default_factory=list)  # (expr, descending)
    limit: Optional[int] = None
    offset: int = 0


# expressions

@dataclass
class VarExpr:
    name: str


@dataclass
class TermExpr:
    term: Term


@dataclass
class FuncExpr:
    name: str
    args: list
    distinct: bool = False
    separator: str = " "


@dataclass
class BinExpr:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass
class NotExpr:
    arg: "Expr"


Expr = Union[VarExpr, TermExpr, FuncExpr, BinExpr, NotExpr]

_AGGREGATES = {"COUNT", "GROUP_CONCAT", "SAMPLE", "MIN", "MAX", "SUM"}
_FUNCTIONS = {
    "STR", "CONCAT", "STRAFTER", "STRBEFORE", "STRSTARTS", "STRENDS", "CONTAINS",
    "LCASE", "UCASE", "STRLEN", "REGEX", "COALESCE", "IF", "BOUND", "LANG", "DATATYPE",
    "ISIRI", "ISURI", "ISLITERAL", "ISBLANK",
}


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.prefixes: dict[str, str] = {}

    # token helpers

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind in ("NAME", "PUNCT") and tok.text.upper() in words

    def expect_keyword(self, word: str) -> None:
        if not self.at_keyword(word):
            raise QueryError(f"expected {word}, found {self.peek().text!r}")
        self.next()

    def expect_punct(self, text: str) -> None:
        tok = self.next()
        if tok.text != text:
            raise QueryError(f"expected {text!r}, found {tok.text!r}")

    # grammar

    def parse_query(self) -> SelectQuery:
        while self.at_keyword("PREFIX", "BASE"):
            word = self.next().text.upper()
            if word == "PREFIX":
                pname = self.next()
                if not pname.text.endswith(":"):
                    # prefix label and colon may tokenize together or apart
                    self.expect_punct(":") if self.peek().text == ":" else None
                label = pname.text.rstrip(":").split(":")[0]
                iriref = self.next()
                self.prefixes[label] = iriref.text[1:-1]
            else:
                self.next()  # base IRI, unused
        query = self.parse_select()
        if self.peek().kind != "EOF":
            raise QueryError(f"trailing content at {self.peek().text!r}")
        return query

    def parse_select(self) -> SelectQuery:
        self.expect_keyword("SELECT")
        distinct = False
        if self.at_keyword("DISTINCT"):
            self.next()
            distinct = True
        elif self.at_keyword("REDUCED"):
            self.next()
        projections: Optional[list[Projection]] = []
        if self.peek().text == "*":
            self.next()
            projections = None
        else:
            while True:
                tok = self.peek()
                if tok.kind == "VAR":
                    self.next()
                    projections.append(Projection(var=tok.text[1:]))
                elif tok.text == "(":
                    self.next()
                    expr = self.parse_expr()
                    self.expect_keyword("AS")
                    var = self.next()
                    if var.kind != "VAR":
                        raise QueryError("expected variable after AS")
                    self.expect_punct(")")
                    projections.append(Projection(var=var.text[1:], expr=expr))
                else:
                    break
            if not projections:
                raise QueryError("empty SELECT clause")
        if self.at_keyword("WHERE"):
            self.next()
        where = self.parse_group()
        query = SelectQuery(projections=projections, distinct=distinct, where=where)
        if self.at_keyword("GROUP"):
            self.next()
            self.expect_keyword("BY")
            while self.peek().kind == "VAR":
                query.group_by.append(self.next().text[1:])
            if not query.group_by:
                raise QueryError("GROUP BY requires at least one variable")
        if self.at_keyword("ORDER"):
            self.next()
            self.expect_keyword("BY")
            while True:
                desc = False
                if self.at_keyword("ASC", "DESC"):
                    desc = self.next().text.upper() == "DESC"
                    self.expect_punct("(")
                    expr = self.parse_expr()
                    self.expect_punct(")")
                elif self.peek().kind == "VAR":
                    expr = VarExpr(self.next().text[1:])
                elif self.peek().text == "(":
                    self.next()
                    expr = self.parse_expr()
                    self.expect_punct(")")
                else:
                    break
                query.order_by.append((expr, desc))
            if not query.order_by:
                raise QueryError("ORDER BY requires at least one key")
        if self.at_keyword("LIMIT"):
            self.next()
            query.limit = int(self.next().text)
        if self.at_keyword("OFFSET"):
            self.next()
            query.offset = int(self.next().text)
        if self.at_keyword("LIMIT"):  # OFFSET before LIMIT is legal too
            self.next()
            query.limit = int(self.next().text)
        return query

    def parse_group(self) -> Group:
        self.expect_punct("{")
        group = Group()
        while True:
            tok = self.peek()
            if tok.text == "}":
                self.next()
                return group
            if tok.kind == "EOF":
                raise QueryError("unterminated group pattern")
            if self.at_keyword("OPTIONAL"):
                self.next()
                group.elements.append(OptionalPattern(self.parse_group()))
            elif self.at_keyword("FILTER"):
                self.next()
                if self.peek().text == "(":
                    self.next()
                    expr = self.parse_expr()
                    self.expect_punct(")")
                else:
                    expr = self.parse_primary()  # e.g. FILTER REGEX(...)
                group.filters.append(expr)
            elif self.at_keyword("BIND"):
                self.next()
                self.expect_punct("(")
                expr = self.parse_expr()
                self.expect_keyword("AS")
                var = self.next()
                self.expect_punct(")")
                group.elements.append(BindPattern(expr, var.text[1:]))
            elif self.at_keyword("GRAPH"):
                self.next()
                label_tok = self.peek()
                if label_tok.kind == "VAR":
                    self.next()
                    label: Union[str, Term] = label_tok.text[1:]
                else:
                    label = self.parse_term()
                group.elements.append(GraphPattern(label, self.parse_group()))
            elif self.at_keyword("SELECT"):
                # sub-select using the enclosing braces as its group
                group.elements.append(self.parse_select())
            elif tok.text == "{":
                # nested group: sub-SELECT or plain group
                if self.tokens[self.i + 1].text.upper() == "SELECT":
                    self.next()
                    sub = self.parse_select()
                    self.expect_punct("}")
                    group.elements.append(sub)
                else:
                    group.elements.append(self.parse_group())
            elif tok.text == ".":
                self.next()
            else:
                self.parse_triples_into(group)
        return group

    def parse_triples_into(self, group: Group) -> None:
        subject = self.parse_var_or_term()
        while True:
            path = self.parse_path()
            while True:
                obj = self.parse_var_or_term()
                group.elements.append(TriplePattern(subject, path, obj))
                if self.peek().text == ",":
                    self.next()
                    continue
                break
            if self.peek().text == ";":
                self.next()
                if self.peek().text in (".", "}", ";"):
                    break
                continue
            break
        if self.peek().text == ".":
            self.next()

    def parse_path(self) -> Path:
        tok = self.peek()
        if tok.text == "a":
            self.next()
            pred: Union[str, Term] = iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")
        elif tok.kind == "VAR":
            self.next()
            pred = tok.text[1:]
        else:
            pred = self.parse_term()
            if not isinstance(pred, Term) or not pred.is_iri:
                raise QueryError("predicate must be an IRI or variable")
        one_or_more = False
        if self.peek().text == "+":
            self.next()
            one_or_more = True
            if isinstance(pred, str):
                raise QueryError("property path over a variable is not supported")
        return Path(pred, one_or_more)

    def parse_var_or_term(self) -> Union[str, Term]:
        tok = self.peek()
        if tok.kind == "VAR":
            self.next()
            return tok.text[1:]
        return self.parse_term()

    def parse_term(self) -> Term:
        tok = self.next()
        if tok.kind == "IRIREF":
            return iri(tok.text[1:-1])
        if tok.kind == "PNAME":
            label, _, local = tok.text.partition(":")
            if label not in self.prefixes:
                raise QueryError(f"undeclared prefix: {label!r}")
            return iri(self.prefixes[label] + local)
        if tok.kind == "STRING":
            value = _unescape_string(tok.text[1:-1])
            nxt = self.peek()
            if nxt.text == "^^":
                self.next()
                dt = self.parse_term()
                return Term("literal", value, datatype=dt.value)
            if nxt.kind == "LANGTAG":
                self.next()
                return Term("literal", value, language=nxt.text[1:])
            return Term("literal", value)
        if tok.kind == "NUMBER":
            if "." in tok.text or "e" in tok.text.lower():
                dt = XSD + ("double" if "e" in tok.text.lower() else "decimal")
            else:
                dt = XSD + "integer"
            return Term("literal", tok.text, datatype=dt)
        if tok.kind == "NAME" and tok.text in ("true", "false"):
            return Term("literal", tok.text, datatype=XSD + "boolean")
        raise QueryError(f"expected an RDF term, found {tok.text!r}")

    # expressions (precedence: || < && < comparison < unary < primary)

    def parse_expr(self) -> Expr:
        left = self.parse_and()
        while self.peek().text == "||":
            self.next()
            left = BinExpr("||", left, self.parse_and())
        return left

    def parse_and(self) -> Expr:
        left = self.parse_relational()
        while self.peek().text == "&&":
            self.next()
            left = BinExpr("&&", left, self.parse_relational())
        return left

    def parse_relational(self) -> Expr:
        left = self.parse_unary()
        if self.peek().text in ("=", "!=", "<", ">", "<=", ">="):
            op = self.next().text
            return BinExpr(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> Expr:
        if self.peek().text == "!":
            self.next()
            return NotExpr(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.text == "(":
            self.next()
            expr = self.parse_expr()
            self.expect_punct(")")
            return expr
        if tok.kind == "VAR":
            self.next()
            return VarExpr(tok.text[1:])
        if tok.kind == "NAME":
            name = tok.text.upper()
            if name in _FUNCTIONS or name in _AGGREGATES:
                self.next()
                return self.parse_call(name)
            if tok.text in ("true", "false"):
                return TermExpr(self.parse_term())
        return TermExpr(self.parse_term())

    def parse_call(self, name: str) -> FuncExpr:
        self.expect_punct("(")
        distinct = False
        separator = " "
        args: list = []
        if name in _AGGREGATES and self.at_keyword("DISTINCT"):
            self.next()
            distinct = True
        if name == "COUNT" and self.peek().text == "*":
            self.next()
            args.append(None)
        else:
            if self.peek().text != ")":
                args.append(self.parse_expr())
                while self.peek().text == ",":
                    self.next()
                    args.append(self.parse_expr())
        if name == "GROUP_CONCAT" and self.peek().text == ";":
            self.next()
            self.expect_keyword("SEPARATOR")
            self.expect_punct("=")
            sep_tok = self.next()
            if sep_tok.kind != "STRING":
                raise QueryError("SEPARATOR expects a string")
            separator = _unescape_string(sep_tok.text[1:-1])
        self.expect_punct(")")
        return FuncExpr(name, args, distinct=distinct, separator=separator)


def _unescape_string(s: str) -> str:
    out = []
    it = iter(range(len(s)))
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "\\" and i + 1 < len(s):
            nxt = s[i + 1]
            mapping = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "'": "'", "\\": "\\", "b": "\b", "f": "\f"}
            if nxt in mapping:
                out.append(mapping[nxt])
                i += 2
                continue
            if nxt == "u":
                out.append(chr(int(s[i + 2 : i + 6], 16)))
                i += 6
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def parse_query(text: str) -> SelectQuery:
    return _Parser(text).parse_query()


# ---------------------------------------------------------------------------
# evaluation

DEFAULT_GRAPH = object()  # sentinel for the default graph


class Dataset:
    """Minimal matching interface the evaluator needs."""

    def match(self, s: Optional[Term], p: Optional[Term], o: Optional[Term],
              graph) -> Iterable[Quad]:
        raise NotImplementedError

    def graph_names(self) -> Iterable[Term]:
        raise NotImplementedError


class Evaluator:
    def __init__(self, dataset: Dataset):
        self.ds = dataset

    def select(self, query: SelectQuery) -> tuple[list[str], list[Solution]]:
        solutions = self.eval_group(query.where, [dict()], DEFAULT_GRAPH)
        grouped = bool(query.group_by) or any(
            p.expr is not None and _has_aggregate(p.expr) for p in (query.projections or [])
        )
        if grouped:
            rows = self._aggregate(query, solutions)
        else:
            rows = []
            for sol in solutions:
                if query.projections is None:
                    rows.append(dict(sol))
                else:
                    row: Solution = {}
                    for proj in query.projections:
                        if proj.expr is None:
                            if proj.var in sol:
                                row[proj.var] = sol[proj.var]
                        else:
                            try:
                                row[proj.var] = self.eval_expr(proj.expr, sol)
                            except _EvalError:
                                pass
                    rows.append(row)
        if query.order_by:
            rows.sort(key=lambda r: tuple(
                _order_key(self._try_eval(expr, r), desc) for expr, desc in query.order_by
            ))
        if query.distinct:
            seen = set()
            unique = []
            for row in rows:
                key = frozenset(row.items())
                if key not in seen:
                    seen.add(key)
                    unique.append(row)
            rows = unique
        if query.offset:
            rows = rows[query.offset :]
        if query.limit is not None:
            rows = rows[: query.limit]
        if query.projections is None:
            variables = sorted({v for row in rows for v in row})
        else:
            variables = [p.var for p in query.projections]
        return variables, rows

    def _try_eval(self, expr: Expr, sol: Solution) -> Optional[Term]:
        try:
            return self.eval_expr(expr, sol)
        except _EvalError:
            return None

    def _aggregate(self, query: SelectQuery, solutions: list[Solution]) -> list[Solution]:
        groups: dict[tuple, list[Solution]] = {}
        for sol in sorted(solutions, key=_solution_sort_key):
            key = tuple(sol.get(v) for v in query.group_by)
            groups.setdefault(key, []).append(sol)
        # No input solutions -> no groups, so an aggregate sub-select inside
        # OPTIONAL fails and leaves its variable unbound (COALESCE/BOUND in
        # the caller then take the fallback branch).
        rows = []
        for key, members in groups.items():
            row: Solution = {}
            for v, term in zip(query.group_by, key):
                if term is not None:
                    row[v] = term
            for proj in query.projections or []:
                if proj.expr is None:
                    if proj.var in row:
                        continue
                    if members and proj.var in members[0]:
                        row[proj.var] = members[0][proj.var]
                else:
                    try:
                        row[proj.var] = self._eval_aggregate_expr(proj.expr, members)
                    except _EvalError:
                        pass
            rows.append(row)
        return rows

    def _eval_aggregate_expr(self, expr: Expr, members: list[Solution]) -> Term:
        if isinstance(expr, FuncExpr) and expr.name in _AGGREGATES:
            return self._eval_aggregate(expr, members)
        if members:
            return self.eval_expr(expr, members[0])
        raise _EvalError()

    def _eval_aggregate(self, expr: FuncExpr, members: list[Solution]) -> Term:
        if expr.name == "COUNT":
            if expr.args and expr.args[0] is not None:
                values = [self._try_eval(expr.args[0], m) for m in members]
                values = [v for v in values if v is not None]
                if expr.distinct:
                    values = list(dict.fromkeys(values))
                return Term("literal", str(len(values)), datatype=XSD + "integer")
            return Term("literal", str(len(members)), datatype=XSD + "integer")
        if expr.name == "GROUP_CONCAT":
            values = [self._try_eval(expr.args[0], m) for m in members]
            strings = [_string_value(v) for v in values if v is not None]
            if expr.distinct:
                strings = list(dict.fromkeys(strings))
            return Term("literal", expr.separator.join(strings))
        if expr.name == "SAMPLE":
            for m in members:
                v = self._try_eval(expr.args[0], m)
                if v is not None:
                    return v
            raise _EvalError()
        if expr.name in ("MIN", "MAX", "SUM"):
            values = [v for m in members if (v := self._try_eval(expr.args[0], m)) is not None]
            if not values:
                raise _EvalError()
            if expr.name == "SUM":
                total = sum(_numeric_value(v) for v in values)
                return Term("literal", _format_number(total), datatype=XSD + "decimal")
            chooser = min if expr.name == "MIN" else max
            return chooser(values, key=lambda t: _order_key(t, False))
        raise QueryError(f"unsupported aggregate {expr.name}")

    # pattern evaluation

    def eval_group(self, group: Group, solutions: list[Solution], graph) -> list[Solution]:
        for element in group.elements:
            if isinstance(element, TriplePattern):
                solutions = self._eval_triple(element, solutions, graph)
            elif isinstance(element, OptionalPattern):
                solutions = self._left_join(element.group, solutions, graph)
            elif isinstance(element, BindPattern):
                out = []
                for sol in solutions:
                    new = dict(sol)
                    try:
                        value = self.eval_expr(element.expr, sol)
                        if element.var in new and new[element.var] != value:
                            continue
                        new[element.var] = value
                    except _EvalError:
                        pass
                    out.append(new)
                solutions = out
            elif isinstance(element, GraphPattern):
                solutions = self._eval_graph(element, solutions, graph)
            elif isinstance(element, Group):
                solutions = self._join(solutions, self.eval_group(element, [dict()], graph))
            elif isinstance(element, SelectQuery):
                variables, rows = self.select(element)
                solutions = self._join(solutions, rows)
            else:
                raise QueryError(f"unsupported pattern element {element!r}")
        for filt in group.filters:
            solutions = [s for s in solutions if self._truth(filt, s)]
        return solutions

    def _truth(self, expr: Expr, sol: Solution) -> bool:
        try:
            return _ebv(self.eval_expr(expr, sol))
        except _EvalError:
            return False

    def _join(self, left: list[Solution], right: list[Solution]) -> list[Solution]:
        out = []
        for a in left:
            for b in right:
                merged = _merge(a, b)
                if merged is not None:
                    out.append(merged)
        return out

    def _left_join(self, group: Group, solutions: list[Solution], graph) -> list[Solution]:
        out = []
        for sol in solutions:
            extended = self.eval_group(group, [sol], graph)
            out.extend(extended if extended else [sol])
        return out

    def _eval_graph(self, element: GraphPattern, solutions: list[Solution], _graph) -> list[Solution]:
        if isinstance(element.label, Term):
            return self.eval_group(element.group, solutions, element.label)
        out = []
        var = element.label
        for name in sorted(self.ds.graph_names(), key=lambda t: t.value):
            for sol in solutions:
                if var in sol and sol[var] != name:
                    continue
                seeded = dict(sol)
                seeded[var] = name
                out.extend(self.eval_group(element.group, [seeded], name))
        return out

    def _eval_triple(self, pattern: TriplePattern, solutions: list[Solution], graph) -> list[Solution]:
        out = []
        for sol in solutions:
            s = _resolve(pattern.subject, sol)
            o = _resolve(pattern.object, sol)
            if pattern.path.one_or_more:
                for s_term, o_term in self._closure(pattern.path.predicate, s, o, graph):
                    merged = _bind(sol, pattern, s_term, None, o_term)
                    if merged is not None:
                        out.append(merged)
            else:
                p = _resolve(pattern.path.predicate, sol)
                for quad in self.ds.match(
                    s if isinstance(s, Term) else None,
                    p if isinstance(p, Term) else None,
                    o if isinstance(o, Term) else None,
                    graph,
                ):
                    merged = _bind(sol, pattern, quad.subject, quad.predicate, quad.object)
                    if merged is not None:
                        out.append(merged)
        return out

    def _closure(self, predicate: Term, s, o, graph):
        """Pairs (x, y) with x predicate+ y in the active graph."""
        def successors(node: Term):
            return [q.object for q in self.ds.match(node, predicate, None, graph)]

        def reachable_from(start: Term):
            seen: list[Term] = []
            stack = successors(start)
            visited = set()
            while stack:
                node = stack.pop()
                if node in visited:
                    continue
                visited.add(node)
                seen.append(node)
                if not node.is_literal:
                    stack.extend(successors(node))
            return seen

        if isinstance(s, Term):
            for target in reachable_from(s):
                if not isinstance(o, Term) or o == target:
                    yield s, target
            return
        starts = {q.subject for q in self.ds.match(None, predicate, None, graph)}
        for start in sorted(starts, key=lambda t: t.n3()):
            for target in reachable_from(start):
                if isinstance(o, Term) and o != target:
                    continue
                yield start, target

    # expression evaluation

    def eval_expr(self, expr: Expr, sol: Solution) -> Term:
        if isinstance(expr, VarExpr):
            if expr.name not in sol:
                raise _EvalError()
            return sol[expr.name]
        if isinstance(expr, TermExpr):
            return expr.term
        if isinstance(expr, NotExpr):
            return _boolean(not _ebv(self.eval_expr(expr.arg, sol)))
        if isinstance(expr, BinExpr):
            return self._eval_binary(expr, sol)
        if isinstance(expr, FuncExpr):
            return self._eval_function(expr, sol)
        raise QueryError(f"unsupported expression {expr!r}")

    def _eval_binary(self, expr: BinExpr, sol: Solution) -> Term:
        if expr.op == "&&":
            return _boolean(self._truth(expr.left, sol) and self._truth(expr.right, sol))
        if expr.op == "||":
            return _boolean(self._truth(expr.left, sol) or self._truth(expr.right, sol))
        left = self.eval_expr(expr.left, sol)
        right = self.eval_expr(expr.right, sol)
        if expr.op == "=":
            return _boolean(_term_equal(left, right))
        if expr.op == "!=":
            return _boolean(not _term_equal(left, right))
        try:
            lv, rv = _numeric_value(left), _numeric_value(right)
        except _EvalError:
            lv, rv = _string_value(left), _string_value(right)
        result = {
            "<": lv < rv, ">": lv > rv, "<=": lv <= rv, ">=": lv >= rv,
        }[expr.op]
        return _boolean(result)

    def _eval_function(self, expr: FuncExpr, sol: Solution) -> Term:
        name = expr.name
        if name == "BOUND":
            arg = expr.args[0]
            if not isinstance(arg, VarExpr):
                raise QueryError("BOUND expects a variable")
            return _boolean(arg.name in sol)
        if name == "COALESCE":
            for arg in expr.args:
                try:
                    return self.eval_expr(arg, sol)
                except _EvalError:
                    continue
            raise _EvalError()
        if name == "IF":
            cond = self._truth(expr.args[0], sol)
            return self.eval_expr(expr.args[1 if cond else 2], sol)
        args = [self.eval_expr(a, sol) for a in expr.args]
        if name == "STR":
            return Term("literal", _string_value(args[0]))
        if name == "CONCAT":
            return Term("literal", "".join(_string_value(a) for a in args))
        if name == "STRAFTER":
            hay, needle = _string_value(args[0]), _string_value(args[1])
            _, found, after = hay.partition(needle)
            return Term("literal", after if found else "")
        if name == "STRBEFORE":
            hay, needle = _string_value(args[0]), _string_value(args[1])
            before, found, _ = hay.partition(needle)
            return Term("literal", before if found else "")
        if name == "STRSTARTS":
            return _boolean(_string_value(args[0]).startswith(_string_value(args[1])))
        if name == "STRENDS":
            return _boolean(_string_value(args[0]).endswith(_string_value(args[1])))
        if name == "CONTAINS":
            return _boolean(_string_value(args[1]) in _string_value(args[0]))
        if name == "LCASE":
            return Term("literal", _string_value(args[0]).lower())
        if name == "UCASE":
            return Term("literal", _string_value(args[0]).upper())
        if name == "STRLEN":
            return Term("literal", str(len(_string_value(args[0]))), datatype=XSD + "integer")
        if name == "REGEX":
            flags = re.IGNORECASE if len(args) > 2 and "i" in _string_value(args[2]) else 0
            return _boolean(bool(re.search(_string_value(args[1]), _string_value(args[0]), flags)))
        if name == "LANG":
            if not args[0].is_literal:
                raise _EvalError()
            return Term("literal", args[0].language or "")
        if name == "DATATYPE":
            if not args[0].is_literal:
                raise _EvalError()
            return iri(args[0].datatype or "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString")
        if name in ("ISIRI", "ISURI"):
            return _boolean(args[0].is_iri)
        if name == "ISLITERAL":
            return _boolean(args[0].is_literal)
        if name == "ISBLANK":
            return _boolean(args[0].is_blank)
        raise QueryError(f"unsupported function {name}")


# helpers

def _resolve(node: Union[str, Term], sol: Solution):
    if isinstance(node, str):
        return sol.get(node, node)
    return node


def _bind(sol: Solution, pattern: TriplePattern, s: Term, p: Optional[Term], o: Term) -> Optional[Solution]:
    new = dict(sol)
    for slot, value in ((pattern.subject, s), (pattern.path.predicate, p), (pattern.object, o)):
        if isinstance(slot, str) and value is not None:
            if slot in new and new[slot] != value:
                return None
            new[slot] = value
    return new


def _merge(a: Solution, b: Solution) -> Optional[Solution]:
    merged = dict(a)
    for k, v in b.items():
        if k in merged and merged[k] != v:
            return None
        merged[k] = v
    return merged


def _has_aggregate(expr: Expr) -> bool:
    if isinstance(expr, FuncExpr):
        if expr.name in _AGGREGATES:
            return True
        return any(a is not None and _has_aggregate(a) for a in expr.args)
    if isinstance(expr, BinExpr):
        return _has_aggregate(expr.left) or _has_aggregate(expr.right)
    if isinstance(expr, NotExpr):
        return _has_aggregate(expr.arg)
    return False


def _boolean(value: bool) -> Term:
    return Term("literal", "true" if value else "false", datatype=XSD + "boolean")


def _ebv(term: Term) -> bool:
    if not term.is_literal:
        raise _EvalError()
    if term.datatype == XSD + "boolean":
        return term.value == "true"
    if term.datatype in _NUMERIC_DATATYPES:
        try:
            return float(term.value) != 0
        except ValueError:
            return False
    return bool(term.value)


def _string_value(term: Term) -> str:
    if term.is_literal or term.is_iri:
        return term.value
    raise _EvalError()


def _numeric_value(term: Term):
    if term.is_literal and term.datatype in _NUMERIC_DATATYPES:
        try:
            if term.datatype == XSD + "integer":
                return int(term.value)
            return float(term.value)
        except ValueError as exc:
            raise _EvalError() from exc
    raise _EvalError()


def _format_number(n) -> str:
    if isinstance(n, int) or (isinstance(n, float) and n.is_integer()):
        return str(int(n))
    return repr(n)


def _order_key(term: Optional[Term], desc: bool):
    key = _term_order(term)
    return _Reversed(key) if desc else key


def _term_order(term: Optional[Term]):
    if term is None:
        return (0, "", 0.0, "")
    if term.is_blank:
        return (1, term.value, 0.0, "")
    if term.is_iri:
        return (2, term.value, 0.0, "")
    try:
        return (3, "", float(_numeric_value(term)), term.value)
    except _EvalError:
        return (4, term.value, 0.0, term.datatype or term.language or "")


class _Reversed:
    __slots__ = ("key",)

    def __init__(self, key):
        self.key = key

    def __lt__(self, other):
        return other.key < self.key

    def __eq__(self, other):
        return other.key == self.key


def _term_equal(a: Term, b: Term) -> bool:
    if a == b:
        return True
    try:
        return _numeric_value(a) == _numeric_value(b)
    except _EvalError:
        return False


def _solution_sort_key(sol: Solution):
    return tuple(sorted((k, v.n3()) for k, v in sol.items()))
