"""SHACL-driven validation and form derivation.

Supported constraint components: targetClass, property, path (single
predicate), datatype, or (over datatype-only alternatives), minCount,
maxCount, pattern, message, class, in. Anything else is skipped with a
warning; the shape still loads, because an unconfigured or partially
configured deployment must keep working.

The same compiled constraints drive two things: validation reports with
per-violation messages, and the widget schema the editing interface
renders from.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Optional

from .terms import RDF, SH, XSD, Quad, RdfError, Term, iri

log = logging.getLogger(__name__)

RDF_TYPE = iri(RDF + "type")
RDF_FIRST = iri(RDF + "first")
RDF_REST = iri(RDF + "rest")
RDF_NIL = RDF + "nil"

_NUMERIC_XSD = {XSD + n for n in ("integer", "decimal", "double", "float", "int", "long", "short", "byte", "nonNegativeInteger", "positiveInteger")}

SUPPORTED_DATATYPES = {
    XSD + name
    for name in ("string", "integer", "decimal", "boolean", "date", "gYearMonth", "gYear", "dateTime", "anyURI")
}


class ShapeError(RdfError):
    pass


@dataclass(frozen=True)
class PropertyConstraint:
    path: str
    datatypes: tuple[str, ...] = ()
    min_count: Optional[int] = None
    max_count: Optional[int] = None
    pattern: Optional[str] = None
    pattern_message: Optional[str] = None
    object_class: Optional[str] = None
    allowed_values: Optional[tuple[Term, ...]] = None

    def __post_init__(self) -> None:
        if self.min_count is not None and self.min_count < 0:
            raise ShapeError("minCount must be non-negative")
        if self.max_count is not None and self.max_count < 1:
            raise ShapeError("maxCount must be positive")
        if self.min_count is not None and self.max_count is not None and self.min_count > self.max_count:
            raise ShapeError("minCount exceeds maxCount")
        if self.datatypes and self.object_class:
            raise ShapeError("datatype and class constraints are mutually exclusive")


@dataclass(frozen=True)
class ShapeSchema:
    target_class: str
    constraints: tuple[PropertyConstraint, ...] = ()


@dataclass(frozen=True)
class Violation:
    entity: str
    path: str
    kind: str  # min_count | max_count | datatype | pattern | class | value
    message: str
    offending_value: Optional[Term] = None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def conforms(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class FormField:
    path: str
    label: str
    widget: str  # text|textarea|date_full|date_year_month|date_year|number|uri_ref|nested_entity|dropdown
    datatype_options: tuple[str, ...] = ()
    min_count: Optional[int] = None
    max_count: Optional[int] = None
    pattern: Optional[str] = None
    required: bool = False
    object_class: Optional[str] = None  # nested_entity target class
    options: tuple[Term, ...] = ()  # dropdown choices from sh:in

    @property
    def repeatable(self) -> bool:
        return self.max_count is None or self.max_count > 1


# ---------------------------------------------------------------------------
# shapes graph parsing

_SUPPORTED_COMPONENTS = {
    SH + name
    for name in ("path", "datatype", "or", "minCount", "maxCount", "pattern", "message", "class", "in", "node", "name", "description", "order")
}


def parse_shapes(shape_quads: Iterable[Quad]) -> list[ShapeSchema]:
    index: dict[Term, dict[str, list[Term]]] = {}
    for q in shape_quads:
        index.setdefault(q.subject, {}).setdefault(q.predicate.value, []).append(q.object)

    def values(node: Term, predicate: str) -> list[Term]:
        return index.get(node, {}).get(predicate, [])

    def rdf_list(node: Term) -> list[Term]:
        items = []
        while node.value != RDF_NIL:
            first = values(node, RDF_FIRST.value)
            rest = values(node, RDF_REST.value)
            if not first or not rest:
                raise ShapeError(f"malformed RDF list at {node!r}")
            items.append(first[0])
            node = rest[0]
        return items

    schemas = []
    for node, props in index.items():
        types = {o.value for o in props.get(RDF + "type", [])}
        if SH + "NodeShape" not in types:
            continue
        targets = props.get(SH + "targetClass", [])
        if not targets:
            raise ShapeError(f"node shape {node!r} has no sh:targetClass")
        constraints = []
        for pshape in props.get(SH + "property", []):
            constraint = _parse_property_shape(
                pshape, index.get(pshape, {}), values, rdf_list
            )
            if constraint is not None:
                constraints.append(constraint)
        for target in targets:
            schemas.append(ShapeSchema(target.value, tuple(constraints)))
    schemas.sort(key=lambda s: s.target_class)
    return schemas


def _parse_property_shape(node: Term, props: dict, values, rdf_list) -> Optional[PropertyConstraint]:
    for predicate in set(props) - _SUPPORTED_COMPONENTS:
        log.warning("skipping unsupported SHACL component %s on %r", predicate, node)
    paths = values(node, SH + "path")
    if not paths or not paths[0].is_iri:
        log.warning("skipping property shape %r: missing or non-IRI sh:path", node)
        return None
    path = paths[0].value

    datatypes: list[str] = []
    for dt in values(node, SH + "datatype"):
        datatypes.append(dt.value)
    for alt_list in values(node, SH + "or"):
        for alt in rdf_list(alt_list):
            alt_dts = values(alt, SH + "datatype")
            if alt_dts:
                datatypes.append(alt_dts[0].value)
            else:
                log.warning("sh:or alternative without sh:datatype skipped on %r", node)

    def int_value(predicate: str) -> Optional[int]:
        vals = values(node, predicate)
        if not vals:
            return None
        try:
            return int(vals[0].value)
        except ValueError as exc:
            raise ShapeError(f"non-integer {predicate} on {node!r}") from exc

    patterns = values(node, SH + "pattern")
    messages = values(node, SH + "message")
    classes = values(node, SH + "class")
    in_lists = values(node, SH + "in")
    allowed = tuple(rdf_list(in_lists[0])) if in_lists else None

    return PropertyConstraint(
        path=path,
        datatypes=tuple(dict.fromkeys(datatypes)),
        min_count=int_value(SH + "minCount"),
        max_count=int_value(SH + "maxCount"),
        pattern=patterns[0].value if patterns else None,
        pattern_message=messages[0].value if messages else None,
        object_class=classes[0].value if classes else None,
        allowed_values=allowed,
    )


# ---------------------------------------------------------------------------
# XSD lexical validation

_TZ = r"(?:Z|[+-](?:0\d|1[0-3]):[0-5]\d|[+-]14:00)"

_LEXICAL_PATTERNS = {
    XSD + "integer": re.compile(r"[+-]?\d+$", re.ASCII),
    XSD + "decimal": re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)$", re.ASCII),
    XSD + "boolean": re.compile(r"(true|false|1|0)$"),
    XSD + "gYear": re.compile(r"-?(\d{4,})" + _TZ + r"?$", re.ASCII),
    XSD + "gYearMonth": re.compile(r"-?(\d{4,})-(0[1-9]|1[0-2])" + _TZ + r"?$", re.ASCII),
    XSD + "date": re.compile(r"(-?\d{4,})-(\d{2})-(\d{2})" + _TZ + r"?$", re.ASCII),
    XSD + "dateTime": re.compile(
        r"(-?\d{4,})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})(\.\d+)?" + _TZ + r"?$", re.ASCII
    ),
}

_DAYS_IN_MONTH = {1: 31, 2: 29, 3: 31, 4: 30, 5: 31, 6: 30, 7: 31, 8: 31, 9: 30, 10: 31, 11: 30, 12: 31}


def _leap(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


def _valid_day(year: int, month: int, day: int) -> bool:
    if not 1 <= month <= 12 or day < 1:
        return False
    limit = _DAYS_IN_MONTH[month]
    if month == 2 and not _leap(year):
        limit = 28
    return day <= limit


def lexical_valid(value: str, datatype: str) -> bool:
    """True iff ``value`` is in the XSD 1.1 lexical space of ``datatype``."""
    if datatype not in SUPPORTED_DATATYPES:
        raise ShapeError(f"unsupported datatype {datatype}")
    if datatype == XSD + "string":
        return True
    if datatype == XSD + "anyURI":
        return not any(ch in value for ch in " \n\t\r<>\"{}|\\^`")
    pattern = _LEXICAL_PATTERNS[datatype]
    m = pattern.match(value)
    if not m:
        return False
    if datatype in (XSD + "gYear", XSD + "gYearMonth", XSD + "date", XSD + "dateTime"):
        # years longer than four digits must not be zero-padded
        year_digits = m.group(1).lstrip("-")
        if len(year_digits) > 4 and year_digits[0] == "0":
            return False
    if datatype == XSD + "date":
        year, month, day = int(m.group(1)), int(m.group(2)), int(m.group(3))
        return _valid_day(year, month, day)
    if datatype == XSD + "dateTime":
        year, month, day = int(m.group(1)), int(m.group(2)), int(m.group(3))
        hh, mm, ss = int(m.group(4)), int(m.group(5)), int(m.group(6))
        if not _valid_day(year, month, day):
            return False
        if hh == 24:
            return mm == 0 and ss == 0 and not m.group(7)
        return hh < 24 and mm < 60 and ss < 60
    return True


# ---------------------------------------------------------------------------
# validation

def validate(entity_graph, schema: ShapeSchema, context: Optional[Iterable[Quad]] = None) -> ValidationReport:
    """Check an entity against one shape. Problems are report entries,
    never exceptions. ``context`` supplies satellite statements for
    ``sh:class`` checks; without it those checks are skipped for objects
    whose type is unknown."""
    entity = entity_graph.entity.value
    by_path: dict[str, list[Term]] = {}
    for q in entity_graph.quads:
        if q.subject == entity_graph.entity:
            by_path.setdefault(q.predicate.value, []).append(q.object)
    types_by_node: dict[Term, set[str]] = {}
    if context is not None:
        for q in context:
            if q.predicate == RDF_TYPE:
                types_by_node.setdefault(q.subject, set()).add(q.object.value)

    violations: list[Violation] = []
    for c in schema.constraints:
        values = by_path.get(c.path, [])
        n = len(values)
        if c.min_count is not None and n < c.min_count:
            violations.append(
                Violation(entity, c.path, "min_count",
                          f"{c.path}: expected at least {c.min_count} value(s), found {n}")
            )
        if c.max_count is not None and n > c.max_count:
            violations.append(
                Violation(entity, c.path, "max_count",
                          f"{c.path}: expected at most {c.max_count} value(s), found {n}")
            )
        for value in values:
            if c.datatypes and value.is_literal:
                if not _matches_any_datatype(value, c.datatypes):
                    violations.append(
                        Violation(entity, c.path, "datatype",
                                  f"{c.path}: expected one of {{{', '.join(c.datatypes)}}}, "
                                  f"found {value.n3()}", value)
                    )
            if c.pattern is not None and value.is_literal:
                if not re.search(c.pattern, value.value):
                    message = c.pattern_message or (
                        f"{c.path}: expected match for /{c.pattern}/, found {value.n3()}"
                    )
                    violations.append(Violation(entity, c.path, "pattern", message, value))
            if c.object_class is not None:
                if value.is_literal:
                    violations.append(
                        Violation(entity, c.path, "class",
                                  f"{c.path}: expected an entity of {c.object_class}, "
                                  f"found literal {value.n3()}", value)
                    )
                elif context is not None:
                    types = types_by_node.get(value, set())
                    if types and c.object_class not in types:
                        violations.append(
                            Violation(entity, c.path, "class",
                                      f"{c.path}: expected {c.object_class}, found types "
                                      f"{{{', '.join(sorted(types))}}}", value)
                        )
            if c.allowed_values is not None and value not in c.allowed_values:
                violations.append(
                    Violation(entity, c.path, "value",
                              f"{c.path}: expected one of the enumerated values, found {value.n3()}",
                              value)
                )
    return ValidationReport(tuple(violations))


def _matches_any_datatype(value: Term, datatypes: tuple[str, ...]) -> bool:
    for dt in datatypes:
        try:
            if lexical_valid(value.value, dt):
                return True
        except ShapeError:
            # unsupported datatype: fall back to declared-datatype equality
            if value.datatype == dt:
                return True
    return False


def merge_reports(reports: Iterable[ValidationReport]) -> ValidationReport:
    out: list[Violation] = []
    for report in reports:
        out.extend(report.violations)
    return ValidationReport(tuple(dict.fromkeys(out)))


# ---------------------------------------------------------------------------
# form compilation

_WIDGET_BY_DATATYPE = {
    XSD + "date": "date_full",
    XSD + "gYearMonth": "date_year_month",
    XSD + "gYear": "date_year",
    XSD + "anyURI": "uri_ref",
}


def compile_form(schema: ShapeSchema, labels: Optional[dict[str, str]] = None,
                 textarea_paths: Optional[set[str]] = None) -> list[FormField]:
    """One widget per constraint; total and deterministic.

    ``labels`` and ``textarea_paths`` come from the display configuration
    and override the derived label / text widget choice.
    """
    labels = labels or {}
    textarea_paths = textarea_paths or set()
    fields = []
    for c in schema.constraints:
        label = labels.get(c.path) or _local_name(c.path)
        if c.allowed_values is not None:
            widget = "dropdown"
        elif c.object_class is not None:
            widget = "nested_entity"
        elif len(c.datatypes) > 1:
            widget = "dropdown"
        elif len(c.datatypes) == 1:
            dt = c.datatypes[0]
            if dt in _WIDGET_BY_DATATYPE:
                widget = _WIDGET_BY_DATATYPE[dt]
            elif dt in _NUMERIC_XSD:
                widget = "number"
            else:
                widget = "textarea" if c.path in textarea_paths else "text"
        else:
            widget = "textarea" if c.path in textarea_paths else "text"
        fields.append(
            FormField(
                path=c.path,
                label=label,
                widget=widget,
                datatype_options=c.datatypes,
                min_count=c.min_count,
                max_count=c.max_count,
                pattern=c.pattern,
                required=(c.min_count or 0) >= 1,
                object_class=c.object_class,
                options=c.allowed_values or (),
            )
        )
    return fields


def _local_name(iri_value: str) -> str:
    for sep in ("#", "/"):
        if sep in iri_value:
            tail = iri_value.rsplit(sep, 1)[1]
            if tail:
                return tail
    return iri_value
