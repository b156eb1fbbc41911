"""Time travel over snapshot chains.

Historical states are materialized two ways at once: backward from the
live state by reverse-applying deltas, and forward from the empty graph
by replaying them. The two replays must agree; a mismatch means the
recorded history and the live data have drifted apart, and that is
always raised loudly rather than silently picking one answer.

Restores never rewrite history: restoring to snapshot k appends a new
head whose delta is exactly the difference between the current state and
the historical one. Deleted entities keep their full chain, which is
what makes the vault (the catalog of deleted entities) restorable.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Optional

from . import delta as delta_ops
from .delta import Delta, diff
from .provenance import (
    PROV_SPECIALIZATION_OF,
    ProvenanceChain,
    Snapshot,
    from_prov_quads,
    provenance_graph,
    record_snapshot,
)
from .store import Store
from .terms import Quad, RdfError, Term, iri


class IntegrityError(RdfError):
    """Recorded history does not reproduce the live state."""


class VersionError(RdfError):
    pass


@dataclass(frozen=True)
class VersionView:
    entity: str
    at_snapshot: int
    quads: frozenset[Quad]
    snapshot_meta: Snapshot


@dataclass(frozen=True)
class VaultEntry:
    entity: str
    deleted_at: datetime
    agent: str
    last_live_view: VersionView


def forward_replay(chain: ProvenanceChain, k: int) -> frozenset[Quad]:
    state: frozenset[Quad] = frozenset()
    for snapshot in chain.snapshots[:k]:
        state = delta_ops.apply(snapshot.delta, state)
    return state


def materialize(chain: ProvenanceChain, current: frozenset[Quad], k: int) -> VersionView:
    """State of the entity as of snapshot ``k``, cross-validated.

    ``current`` must be the entity's live quads (empty when deleted).
    """
    n = len(chain)
    if not 1 <= k <= n:
        raise VersionError(f"snapshot {k} out of range 1..{n}")
    backward = frozenset(current)
    for snapshot in reversed(chain.snapshots[k:]):
        backward = delta_ops.apply(delta_ops.invert(snapshot.delta), backward)
    forward = forward_replay(chain, k)
    if backward != forward:
        raise IntegrityError(
            f"replay mismatch for {chain.entity} at snapshot {k}: "
            f"backward and forward reconstructions disagree"
        )
    return VersionView(chain.entity, k, forward, chain.snapshots[k - 1])


def restore(
    chain: ProvenanceChain,
    current: frozenset[Quad],
    k: int,
    agent: str,
    now: datetime,
    source: Optional[str] = None,
) -> tuple[frozenset[Quad], ProvenanceChain]:
    """Append a restore snapshot taking the entity back to state ``k``."""
    n = len(chain)
    if not 1 <= k < n:
        raise VersionError(f"restore target {k} out of range 1..{n - 1}")
    target = materialize(chain, current, k).quads
    d = diff(current, target)
    new_chain = record_snapshot(
        chain, d, agent, source, f"restored to snapshot {k}", now, restore_marker=True
    )
    return target, new_chain


# store-backed helpers

def load_chain(prov: Store, entity: str) -> ProvenanceChain:
    graph = provenance_graph(entity)
    result = prov.select(
        f"SELECT ?s ?p ?o WHERE {{ GRAPH <{graph.value}> {{ ?s ?p ?o }} }}"
    )
    quads = {
        Quad(row["s"], row["p"], row["o"], graph)
        for row in result
        if "s" in row and "p" in row and "o" in row
    }
    return from_prov_quads(quads, entity)


def live_quads(data: Store, entity: str) -> frozenset[Quad]:
    result = data.select(f"SELECT ?p ?o WHERE {{ <{entity}> ?p ?o }}")
    subject = iri(entity)
    return frozenset(Quad(subject, row["p"], row["o"]) for row in result)


def cascade_targets(
    entity: str,
    restored_quads: frozenset[Quad],
    data: Store,
    prov: Store,
    at_time: datetime,
) -> list[tuple[str, int]]:
    """Linked entities that must also be reverted for coherence.

    For every IRI referenced by the restored state (distance 1) that has
    its own history: if its live state differs from its state at
    ``at_time``, emit the sequence to revert it to. Entities born after
    ``at_time`` are emitted with sequence 0, meaning delete.
    """
    linked: set[str] = set()
    for q in restored_quads:
        for term in (q.subject, q.object):
            if term.is_iri and term.value != entity:
                linked.add(term.value)
    out: list[tuple[str, int]] = []
    for other in sorted(linked):
        chain = load_chain(prov, other)
        if not chain:
            continue
        past = [s for s in chain.snapshots if s.generated_at <= at_time]
        if not past:
            out.append((other, 0))
            continue
        k = past[-1].sequence
        if forward_replay(chain, k) != live_quads(data, other):
            out.append((other, k))
    return out


def list_vault(prov: Store, data: Optional[Store] = None) -> list[VaultEntry]:
    """Entries for every deleted entity, newest deletions first."""
    result = prov.select(
        "SELECT DISTINCT ?e WHERE { GRAPH ?g { ?s "
        f"<{PROV_SPECIALIZATION_OF.value}> ?e }} }}"
    )
    entries = []
    for row in result:
        entity = row["e"].value
        chain = load_chain(prov, entity)
        if not chain or not chain.is_deleted:
            continue
        n = len(chain)
        if n < 2:
            continue  # created-and-deleted in one snapshot cannot occur; be safe
        last_live = materialize(chain, frozenset(), n - 1)
        terminal = chain.head
        entries.append(
            VaultEntry(
                entity=entity,
                deleted_at=terminal.generated_at,
                agent=terminal.agent,
                last_live_view=last_live,
            )
        )
    entries.sort(key=lambda e: (e.deleted_at, e.entity), reverse=True)
    return entries
