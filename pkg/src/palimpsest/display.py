"""YAML display rules: how entities are named, listed and searched.

A configuration is a list of class rules. Each rule carries a priority
(lower wins when an entity has several types), a catalog visibility
flag, a human label, an optional query template that turns an entity
IRI into a display string, and an ordered list of per-property display
rules. Query templates are plain SELECT queries with two placeholders:
``[[uri]]`` and ``[[subject]]``, both replaced by the entity IRI in
angle brackets. Placeholders inside string literals are left alone.

Everything here degrades instead of failing: a missing rule falls back
to local names and raw IRIs, and a broken query falls back to the raw
value with a logged warning, because browsing must never break on a
configuration mistake.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Optional

import yaml

from .sparql import QueryError, parse_query
from .store import Store
from .terms import Term

log = logging.getLogger(__name__)

_DUMMY_IRI = "urn:x-placeholder:probe"


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class QueryTemplate:
    text: str
    expected_vars: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        probe = substitute(self.text, _DUMMY_IRI)
        try:
            parse_query(probe)
        except QueryError as exc:
            raise ConfigError(f"query template does not parse: {exc}") from exc

    def render(self, entity: str) -> str:
        return substitute(self.text, entity)


_PLACEHOLDER = re.compile(r"\[\[(uri|subject)\]\]")
_STRING_SPANS = re.compile(r'"(?:[^"\\]|\\.)*"' + r"|'(?:[^'\\]|\\.)*'")


def substitute(template: str, entity: str) -> str:
    """Replace ``[[uri]]``/``[[subject]]`` with ``<entity>`` outside of
    string literals."""
    spans = [m.span() for m in _STRING_SPANS.finditer(template)]

    def in_string(pos: int) -> bool:
        return any(a <= pos < b for a, b in spans)

    def repl(m: re.Match) -> str:
        return m.group(0) if in_string(m.start()) else f"<{entity}>"

    return _PLACEHOLDER.sub(repl, template)


@dataclass(frozen=True)
class PropertyDisplay:
    property: str
    display_name: str = ""
    should_be_displayed: bool = True
    supports_search: bool = False
    min_chars_for_search: int = 3
    search_target: str = "self"  # self | parent
    input_type: Optional[str] = None  # textarea | text
    fetch_value_from_query: Optional[QueryTemplate] = None

    def __post_init__(self) -> None:
        if self.min_chars_for_search < 1:
            raise ConfigError("minCharsForSearch must be at least 1")
        if self.search_target not in ("self", "parent"):
            raise ConfigError(f"unknown searchTarget {self.search_target!r}")
        if self.input_type not in (None, "textarea", "text"):
            raise ConfigError(f"unknown inputType {self.input_type!r}")


@dataclass(frozen=True)
class DisplayRule:
    class_iri: str
    priority: int
    should_be_displayed: bool = True
    display_name: str = ""
    fetch_uri_display: Optional[QueryTemplate] = None
    display_properties: tuple[PropertyDisplay, ...] = ()

    def __post_init__(self) -> None:
        if not self.display_name:
            raise ConfigError(f"rule for {self.class_iri} needs a displayName")

    @property
    def sort_keys(self) -> tuple[str, ...]:
        """Displayed properties whose values are plain literals; these
        populate the catalog's sort menu. Object-valued properties are
        recognized by their value query; rdf:type is never sortable."""
        return tuple(
            pd.property
            for pd in self.display_properties
            if pd.should_be_displayed
            and pd.fetch_value_from_query is None
            and pd.property != "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
        )


# ---------------------------------------------------------------------------
# parsing / serialization

_RULE_KEYS = {
    "class", "priority", "shouldBeDisplayed", "displayName",
    "fetchUriDisplay", "displayProperties",
}
_PROPERTY_KEYS = {
    "property", "displayName", "shouldBeDisplayed", "supportsSearch",
    "minCharsForSearch", "searchTarget", "inputType", "fetchValueFromQuery",
}


def parse_config(yaml_text: str) -> list[DisplayRule]:
    doc = yaml.safe_load(yaml_text)
    if doc is None:
        return []
    if not isinstance(doc, list):
        raise ConfigError("display configuration must be a YAML list of rules")
    rules = []
    seen: set[tuple[str, int]] = set()
    best: dict[str, list[int]] = {}
    for i, raw in enumerate(doc):
        if not isinstance(raw, dict):
            raise ConfigError(f"rule {i} is not a mapping")
        for key in set(raw) - _RULE_KEYS:
            log.warning("ignoring unknown key %r in rule %d", key, i)
        try:
            class_iri = str(raw["class"])
        except KeyError:
            raise ConfigError(f"rule {i} has no class") from None
        priority = int(raw.get("priority", 1))
        if (class_iri, priority) in seen:
            raise ConfigError(f"duplicate rule for {class_iri} at priority {priority}")
        seen.add((class_iri, priority))
        best.setdefault(class_iri, []).append(priority)
        fetch = raw.get("fetchUriDisplay")
        properties = []
        for j, p in enumerate(raw.get("displayProperties") or []):
            if not isinstance(p, dict):
                raise ConfigError(f"displayProperties[{j}] of rule {i} is not a mapping")
            for key in set(p) - _PROPERTY_KEYS:
                log.warning("ignoring unknown key %r in rule %d property %d", key, i, j)
            fetch_value = p.get("fetchValueFromQuery")
            properties.append(
                PropertyDisplay(
                    property=str(p["property"]),
                    display_name=str(p.get("displayName", "")),
                    should_be_displayed=bool(p.get("shouldBeDisplayed", True)),
                    supports_search=bool(p.get("supportsSearch", False)),
                    min_chars_for_search=int(p.get("minCharsForSearch", 3)),
                    search_target=str(p.get("searchTarget", "self")),
                    input_type=p.get("inputType"),
                    fetch_value_from_query=(
                        QueryTemplate(str(fetch_value)) if fetch_value else None
                    ),
                )
            )
        rules.append(
            DisplayRule(
                class_iri=class_iri,
                priority=priority,
                should_be_displayed=bool(raw.get("shouldBeDisplayed", True)),
                display_name=str(raw.get("displayName", "")) or _local_name(class_iri),
                fetch_uri_display=QueryTemplate(str(fetch)) if fetch else None,
                display_properties=tuple(properties),
            )
        )
    return rules


def serialize_config(rules: Iterable[DisplayRule]) -> str:
    doc = []
    for rule in rules:
        raw = {
            "class": rule.class_iri,
            "priority": rule.priority,
            "shouldBeDisplayed": rule.should_be_displayed,
            "displayName": rule.display_name,
        }
        if rule.fetch_uri_display is not None:
            raw["fetchUriDisplay"] = rule.fetch_uri_display.text
        if rule.display_properties:
            raw["displayProperties"] = [
                _serialize_property(pd) for pd in rule.display_properties
            ]
        doc.append(raw)
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


def _serialize_property(pd: PropertyDisplay) -> dict:
    raw = {
        "property": pd.property,
        "displayName": pd.display_name,
        "shouldBeDisplayed": pd.should_be_displayed,
        "supportsSearch": pd.supports_search,
        "minCharsForSearch": pd.min_chars_for_search,
        "searchTarget": pd.search_target,
    }
    if pd.input_type is not None:
        raw["inputType"] = pd.input_type
    if pd.fetch_value_from_query is not None:
        raw["fetchValueFromQuery"] = pd.fetch_value_from_query.text
    return raw


def _local_name(iri_value: str) -> str:
    for sep in ("#", "/"):
        if sep in iri_value:
            tail = iri_value.rsplit(sep, 1)[1]
            if tail:
                return tail
    return iri_value


# ---------------------------------------------------------------------------
# resolution and rendering

def resolve_rule(entity_types: set[str], rules: Iterable[DisplayRule]) -> Optional[DisplayRule]:
    matching = [r for r in rules if r.class_iri in entity_types]
    if not matching:
        return None
    lowest = min(r.priority for r in matching)
    winners = [r for r in matching if r.priority == lowest]
    if len(winners) > 1:
        # parse_config forbids duplicate (class, priority); a tie here
        # means two different classes of the entity share a priority —
        # break it deterministically by class IRI
        winners.sort(key=lambda r: r.class_iri)
    return winners[0]


def render_uri_display(entity: str, rule: Optional[DisplayRule], store: Store) -> str:
    if rule is None or rule.fetch_uri_display is None:
        return entity
    try:
        result = store.select(rule.fetch_uri_display.render(entity))
    except Exception as exc:  # noqa: BLE001 - display must never break browsing
        log.warning("fetchUriDisplay failed for %s: %s", entity, exc)
        return entity
    value = result.first("display")
    if value is None:
        return entity
    return value.value


def render_property_values(
    entity: str, pd: PropertyDisplay, store: Store
) -> list[tuple[str, Optional[str]]]:
    """Rendered values for one property: (display string, link target)."""
    if pd.fetch_value_from_query is not None:
        try:
            result = store.select(pd.fetch_value_from_query.render(entity))
        except Exception as exc:  # noqa: BLE001
            log.warning("fetchValueFromQuery failed for %s %s: %s", entity, pd.property, exc)
            return []
        out = []
        for row in result.rows:
            display = row.get(result.variables[0]) if result.variables else None
            target = (
                row.get(result.variables[1])
                if len(result.variables) > 1
                else None
            )
            if display is None:
                continue
            out.append(
                (display.value, target.value if target is not None and target.is_iri else None)
            )
        return out
    try:
        result = store.select(
            f"SELECT ?v WHERE {{ <{entity}> <{pd.property}> ?v }}"
        )
    except Exception as exc:  # noqa: BLE001
        log.warning("value lookup failed for %s %s: %s", entity, pd.property, exc)
        return []
    out = []
    for row in result.rows:
        term: Term = row["v"]
        out.append((term.value, term.value if term.is_iri else None))
    return out
