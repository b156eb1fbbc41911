"""Snapshot metadata chains: who changed what, when, from which source.

Every state transition of an entity appends one snapshot. A snapshot
carries the acting agent, an optional primary source, timestamps, a
human description, and the ground delta serialized as update-query text.
Snapshots link backwards through ``prov:wasDerivedFrom``; a superseded
snapshot records when it stopped being current via
``prov:invalidatedAtTime``. A deleted entity ends in a terminal snapshot
that is invalidated at its own creation instant, so history is never
discarded and the deletion itself is auditable.

Snapshot IRIs are minted as ``{entity}/prov/se/{sequence}`` and the
metadata lives in the named graph ``{entity}/prov``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterable, Optional

from .delta import Delta, from_update_text, to_update_text
from .terms import DCTERMS, PROV, OCO, RDF_TYPE, XSD, Quad, RdfError, Term, iri, literal

PROV_ENTITY = iri(PROV + "Entity")
PROV_SPECIALIZATION_OF = iri(PROV + "specializationOf")
PROV_GENERATED_AT = iri(PROV + "generatedAtTime")
PROV_INVALIDATED_AT = iri(PROV + "invalidatedAtTime")
PROV_ATTRIBUTED_TO = iri(PROV + "wasAttributedTo")
PROV_PRIMARY_SOURCE = iri(PROV + "hasPrimarySource")
PROV_DERIVED_FROM = iri(PROV + "wasDerivedFrom")
OCO_HAS_UPDATE_QUERY = iri(OCO + "hasUpdateQuery")
DC_DESCRIPTION = iri(DCTERMS + "description")
XSD_DATETIME = XSD + "dateTime"


class ProvenanceError(RdfError):
    pass


def utc_now() -> datetime:
    return _truncate_ms(datetime.now(timezone.utc))


def _truncate_ms(ts: datetime) -> datetime:
    return ts.replace(microsecond=(ts.microsecond // 1000) * 1000)


def format_timestamp(ts: datetime) -> str:
    """UTC xsd:dateTime with millisecond precision and trailing Z."""
    ts = ts.astimezone(timezone.utc)
    return ts.strftime("%Y-%m-%dT%H:%M:%S.") + f"{ts.microsecond // 1000:03d}Z"


def parse_timestamp(text: str) -> datetime:
    try:
        ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ProvenanceError(f"malformed timestamp {text!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return _truncate_ms(ts.astimezone(timezone.utc))


def snapshot_iri(entity: str, sequence: int) -> str:
    return f"{entity}/prov/se/{sequence}"


def provenance_graph(entity: str) -> Term:
    return iri(f"{entity}/prov")


@dataclass(frozen=True)
class Snapshot:
    id: str
    entity: str
    sequence: int
    generated_at: datetime
    agent: str
    delta: Delta
    description: str = ""
    invalidated_at: Optional[datetime] = None
    primary_source: Optional[str] = None
    derived_from: Optional[str] = None

    def __post_init__(self) -> None:
        if self.sequence < 1:
            raise ProvenanceError("sequence must be positive")
        if (self.sequence == 1) != (self.derived_from is None):
            raise ProvenanceError("sequence 1 iff no derivation link")
        if self.sequence == 1 and self.delta.deletions:
            raise ProvenanceError("creation snapshot cannot delete statements")
        object.__setattr__(self, "generated_at", _truncate_ms(self.generated_at))
        if self.invalidated_at is not None:
            object.__setattr__(self, "invalidated_at", _truncate_ms(self.invalidated_at))
            if self.invalidated_at < self.generated_at:
                raise ProvenanceError("invalidated before generated")

    @property
    def is_live(self) -> bool:
        return self.invalidated_at is None


@dataclass(frozen=True)
class ProvenanceChain:
    entity: str
    snapshots: tuple[Snapshot, ...] = ()

    def __post_init__(self) -> None:
        snaps = tuple(self.snapshots)
        object.__setattr__(self, "snapshots", snaps)
        previous: Optional[Snapshot] = None
        for k, snap in enumerate(snaps, start=1):
            if snap.entity != self.entity:
                raise ProvenanceError(f"snapshot for foreign entity {snap.entity}")
            if snap.sequence != k:
                raise ProvenanceError(f"non-contiguous sequence at position {k}")
            if previous is not None:
                if snap.derived_from != previous.id:
                    raise ProvenanceError(f"broken derivation link at sequence {k}")
                if snap.generated_at < previous.generated_at:
                    raise ProvenanceError("generation times must be nondecreasing")
            previous = snap
        live = [s for s in snaps if s.is_live]
        if len(live) > 1:
            raise ProvenanceError("more than one live snapshot")
        if live and live[0] is not snaps[-1]:
            raise ProvenanceError("live snapshot must be the chain head")

    def __len__(self) -> int:
        return len(self.snapshots)

    def __bool__(self) -> bool:
        return bool(self.snapshots)

    @property
    def head(self) -> Snapshot:
        if not self.snapshots:
            raise ProvenanceError("empty chain has no head")
        return self.snapshots[-1]

    @property
    def is_deleted(self) -> bool:
        """Deleted entities have no live head; the terminal snapshot is
        invalidated at its own generation instant."""
        return bool(self.snapshots) and not self.head.is_live


def record_snapshot(
    chain: ProvenanceChain,
    delta: Delta,
    agent: str,
    source: Optional[str],
    description: str,
    now: datetime,
    *,
    terminal: bool = False,
    restore_marker: bool = False,
) -> ProvenanceChain:
    """Append one snapshot describing the transition ``delta`` at ``now``.

    The old head is invalidated at the same instant the new snapshot is
    generated. Empty deltas are only legal for restore markers (a restore
    that happened to land on the current state is still an auditable
    event).
    """
    now = _truncate_ms(now)
    if delta.empty and not restore_marker:
        raise ProvenanceError("refusing empty delta on a plain edit")
    snapshots = list(chain.snapshots)
    if snapshots:
        head = snapshots[-1]
        if now < head.generated_at:
            raise ProvenanceError(
                f"clock regression: {format_timestamp(now)} before head "
                f"{format_timestamp(head.generated_at)}"
            )
        if head.is_live:
            snapshots[-1] = replace(head, invalidated_at=now)
        sequence = head.sequence + 1
        derived_from = head.id
    else:
        if delta.deletions:
            raise ProvenanceError("creation snapshot cannot delete statements")
        sequence = 1
        derived_from = None
    snapshot = Snapshot(
        id=snapshot_iri(chain.entity, sequence),
        entity=chain.entity,
        sequence=sequence,
        generated_at=now,
        invalidated_at=now if terminal else None,
        agent=agent,
        primary_source=source,
        description=description,
        delta=delta,
        derived_from=derived_from,
    )
    return ProvenanceChain(chain.entity, tuple(snapshots) + (snapshot,))


def to_prov_quads(snapshot: Snapshot, prov_graph: Term) -> set[Quad]:
    s = iri(snapshot.id)
    g = prov_graph

    def ts_literal(ts: datetime) -> Term:
        return Term("literal", format_timestamp(ts), datatype=XSD_DATETIME)

    quads = {
        Quad(s, iri(RDF_TYPE), PROV_ENTITY, g),
        Quad(s, PROV_SPECIALIZATION_OF, iri(snapshot.entity), g),
        Quad(s, PROV_GENERATED_AT, ts_literal(snapshot.generated_at), g),
        Quad(s, PROV_ATTRIBUTED_TO, iri(snapshot.agent), g),
        Quad(s, DC_DESCRIPTION, literal(snapshot.description), g),
    }
    if snapshot.invalidated_at is not None:
        quads.add(Quad(s, PROV_INVALIDATED_AT, ts_literal(snapshot.invalidated_at), g))
    if snapshot.primary_source is not None:
        quads.add(Quad(s, PROV_PRIMARY_SOURCE, iri(snapshot.primary_source), g))
    if snapshot.derived_from is not None:
        quads.add(Quad(s, PROV_DERIVED_FROM, iri(snapshot.derived_from), g))
    if not snapshot.delta.empty:
        quads.add(Quad(s, OCO_HAS_UPDATE_QUERY, literal(to_update_text(snapshot.delta)), g))
    return quads


def chain_to_quads(chain: ProvenanceChain) -> set[Quad]:
    g = provenance_graph(chain.entity)
    out: set[Quad] = set()
    for snapshot in chain.snapshots:
        out |= to_prov_quads(snapshot, g)
    return out


def from_prov_quads(quads: Iterable[Quad], entity: str) -> ProvenanceChain:
    """Rebuild a chain from its metadata quads, in any order.

    Sequence numbers are recovered from the ``wasDerivedFrom`` topology
    (a single path from the one underived snapshot), tie-broken by
    generation time when ordering parallel claims would otherwise be
    ambiguous. Every chain invariant is re-verified on construction.
    """
    by_subject: dict[str, dict[str, list[Term]]] = {}
    for q in quads:
        if not q.subject.is_iri:
            continue
        by_subject.setdefault(q.subject.value, {}).setdefault(q.predicate.value, []).append(q.object)

    members = {
        sid: props
        for sid, props in by_subject.items()
        if any(o.value == entity for o in props.get(PROV_SPECIALIZATION_OF.value, []))
    }
    if not members:
        return ProvenanceChain(entity)

    def one(props, predicate, required=True) -> Optional[Term]:
        values = props.get(predicate.value, [])
        if len(values) > 1:
            raise ProvenanceError(f"multiple values for {predicate.value}")
        if not values:
            if required:
                raise ProvenanceError(f"missing {predicate.value}")
            return None
        return values[0]

    parsed: dict[str, dict] = {}
    for sid, props in members.items():
        generated = one(props, PROV_GENERATED_AT)
        invalidated = one(props, PROV_INVALIDATED_AT, required=False)
        agent = one(props, PROV_ATTRIBUTED_TO)
        source = one(props, PROV_PRIMARY_SOURCE, required=False)
        derived = one(props, PROV_DERIVED_FROM, required=False)
        description = one(props, DC_DESCRIPTION, required=False)
        update_query = one(props, OCO_HAS_UPDATE_QUERY, required=False)
        parsed[sid] = {
            "generated_at": parse_timestamp(generated.value),
            "invalidated_at": parse_timestamp(invalidated.value) if invalidated else None,
            "agent": agent.value,
            "primary_source": source.value if source else None,
            "derived_from": derived.value if derived else None,
            "description": description.value if description else "",
            "delta": from_update_text(update_query.value) if update_query else Delta(),
        }

    roots = [sid for sid, p in parsed.items() if p["derived_from"] is None]
    if len(roots) != 1:
        raise ProvenanceError(f"expected exactly one creation snapshot, found {len(roots)}")
    successors: dict[str, list[str]] = {}
    for sid, p in parsed.items():
        if p["derived_from"] is not None:
            if p["derived_from"] not in parsed:
                raise ProvenanceError(f"derivation link to unknown snapshot {p['derived_from']}")
            successors.setdefault(p["derived_from"], []).append(sid)

    ordered: list[str] = []
    current: Optional[str] = roots[0]
    visited: set[str] = set()
    while current is not None:
        if current in visited:
            raise ProvenanceError("cycle in derivation links")
        visited.add(current)
        ordered.append(current)
        nexts = sorted(successors.get(current, []), key=lambda sid: parsed[sid]["generated_at"])
        if len(nexts) > 1:
            raise ProvenanceError(f"snapshot {current} derived into multiple successors")
        current = nexts[0] if nexts else None
    if len(ordered) != len(parsed):
        raise ProvenanceError("disconnected snapshots in provenance graph")

    snapshots = tuple(
        Snapshot(id=sid, entity=entity, sequence=k, **parsed[sid])
        for k, sid in enumerate(ordered, start=1)
    )
    return ProvenanceChain(entity, snapshots)
