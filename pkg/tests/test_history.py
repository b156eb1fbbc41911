from datetime import timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palimpsest.delta import Delta, diff
from palimpsest.history import (
    IntegrityError,
    VersionError,
    cascade_targets,
    forward_replay,
    list_vault,
    live_quads,
    load_chain,
    materialize,
    restore,
)
from palimpsest.provenance import ProvenanceChain, chain_to_quads, record_snapshot
from palimpsest.store import MemoryStore
from palimpsest.terms import Quad, iri, literal

from test_provenance import AGENT, ENTITY, T0, make_history, quad


class TestMaterialize:
    def test_head_is_current(self):
        chain, states = make_history(5, seed=11)
        view = materialize(chain, states[-1], 5)
        assert view.quads == states[-1]
        assert view.snapshot_meta is chain.snapshots[-1]

    def test_one_inversion(self):
        t1, t2 = quad(1, "t1"), quad(2, "t2")
        chain = record_snapshot(ProvenanceChain(ENTITY), Delta(insertions={t1}), AGENT, None, "c", T0)
        chain = record_snapshot(chain, Delta(insertions={t2}), AGENT, None, "m", T0 + timedelta(seconds=1))
        assert materialize(chain, frozenset({t1, t2}), 1).quads == {t1}

    def test_out_of_range(self):
        chain, states = make_history(3, seed=2)
        with pytest.raises(VersionError):
            materialize(chain, states[-1], 0)
        with pytest.raises(VersionError):
            materialize(chain, states[-1], 4)

    def test_corrupt_current_raises_integrity_error(self):
        chain, states = make_history(4, seed=5)
        tampered = states[-1] | {quad(99, "rogue")}
        with pytest.raises(IntegrityError):
            materialize(chain, tampered, 2)

    def test_pure_repeated_calls_agree(self):
        chain, states = make_history(6, seed=9)
        a = materialize(chain, states[-1], 3)
        b = materialize(chain, states[-1], 3)
        assert a == b

    @given(st.integers(1, 20), st.integers(0, 10_000))
    @settings(max_examples=80)
    def test_dual_replay_equality_at_every_k(self, edits, seed):
        chain, states = make_history(edits, seed=seed)
        current = states[-1]
        for k in range(1, edits + 1):
            view = materialize(chain, current, k)
            assert view.quads == forward_replay(chain, k) == states[k - 1]


class TestRestore:
    def test_restore_reaches_old_state(self):
        chain, states = make_history(4, seed=21)
        restored, chain2 = restore(chain, states[-1], 2, AGENT, T0 + timedelta(days=1))
        assert restored == states[1]
        assert len(chain2) == 5
        assert chain2.head.description == "restored to snapshot 2"
        # after restore, diff(new head state, old snapshot state) is empty
        assert diff(restored, states[1]).empty
        assert materialize(chain2, restored, 5).quads == states[1]

    def test_restore_is_undoable(self):
        chain, states = make_history(4, seed=22)
        pre_restore = states[-1]
        restored, chain2 = restore(chain, pre_restore, 1, AGENT, T0 + timedelta(days=1))
        back, chain3 = restore(chain2, restored, 4, AGENT, T0 + timedelta(days=2))
        assert back == pre_restore

    def test_restore_never_rewrites_history(self):
        chain, states = make_history(3, seed=23)
        _, chain2 = restore(chain, states[-1], 1, AGENT, T0 + timedelta(days=1))
        for old, new in zip(chain.snapshots[:-1], chain2.snapshots):
            assert old == new
        # old head differs only in its invalidation timestamp
        assert chain2.snapshots[2].delta == chain.snapshots[2].delta

    def test_restore_to_head_rejected(self):
        chain, states = make_history(3, seed=24)
        with pytest.raises(VersionError):
            restore(chain, states[-1], 3, AGENT, T0 + timedelta(days=1))


def _persist(chain, data_store, prov_store, state):
    prov_store.load_quads(chain_to_quads(chain))
    data_store.load_quads(state)


class TestVaultAndCascade:
    def test_empty_vault(self):
        assert list_vault(MemoryStore()) == []

    def test_delete_then_vault_entry(self):
        data, prov = MemoryStore(), MemoryStore()
        chain, states = make_history(2, seed=31)
        t_del = T0 + timedelta(days=1)
        chain = record_snapshot(
            chain, Delta(deletions=states[-1]), AGENT, None, "deleted", t_del, terminal=True
        )
        _persist(chain, data, prov, frozenset())
        entries = list_vault(prov)
        assert len(entries) == 1
        entry = entries[0]
        assert entry.entity == ENTITY
        assert entry.agent == AGENT
        assert entry.deleted_at == t_del
        assert entry.last_live_view.quads == states[-1]

    def test_delete_then_restore_empties_vault(self):
        data, prov = MemoryStore(), MemoryStore()
        chain, states = make_history(2, seed=32)
        chain = record_snapshot(
            chain, Delta(deletions=states[-1]), AGENT, None, "deleted",
            T0 + timedelta(days=1), terminal=True,
        )
        restored, chain = restore(chain, frozenset(), 2, AGENT, T0 + timedelta(days=2))
        assert restored == states[-1]
        _persist(chain, data, prov, restored)
        assert list_vault(prov) == []

    def test_load_chain_round_trip_via_store(self):
        prov = MemoryStore()
        chain, _ = make_history(5, seed=33)
        prov.load_quads(chain_to_quads(chain))
        assert load_chain(prov, ENTITY) == chain

    def test_live_quads_reads_subject_statements(self):
        data = MemoryStore()
        qs = {quad(1, "a"), quad(2, "b")}
        data.load_quads(qs | {Quad(iri("urn:other"), iri("urn:p:1"), literal("x"))})
        assert live_quads(data, ENTITY) == qs


class TestCascadeTargets:
    IDENT = "https://example.org/id/9"

    def _setup(self):
        """Article references an identifier; identifier is edited after T1."""
        data, prov = MemoryStore(), MemoryStore()
        ident = iri(self.IDENT)
        ident_q1 = Quad(ident, iri("urn:p:value"), literal("10.1/old"))
        ident_q2 = Quad(ident, iri("urn:p:value"), literal("10.1/new"))
        chain = record_snapshot(
            ProvenanceChain(self.IDENT), Delta(insertions={ident_q1}), AGENT, None, "c", T0
        )
        t_edit = T0 + timedelta(days=2)
        chain = record_snapshot(
            chain, Delta(insertions={ident_q2}, deletions={ident_q1}), AGENT, None, "m", t_edit
        )
        prov.load_quads(chain_to_quads(chain))
        data.load_quads({ident_q2})
        restored = frozenset({Quad(iri(ENTITY), iri("urn:p:hasIdentifier"), ident)})
        return data, prov, restored

    def test_linked_entity_edited_after_target_time(self):
        data, prov, restored = self._setup()
        at_time = T0 + timedelta(days=1)  # before the identifier edit
        targets = cascade_targets(ENTITY, restored, data, prov, at_time)
        assert targets == [(self.IDENT, 1)]

    def test_linked_entity_unchanged_since_target_time(self):
        data, prov, restored = self._setup()
        at_time = T0 + timedelta(days=3)  # after the identifier edit
        assert cascade_targets(ENTITY, restored, data, prov, at_time) == []

    def test_linked_entity_created_after_target_time(self):
        data, prov, restored = self._setup()
        at_time = T0 - timedelta(days=1)  # before the identifier existed
        assert cascade_targets(ENTITY, restored, data, prov, at_time) == [(self.IDENT, 0)]

    def test_entity_without_chain_ignored(self):
        data, prov = MemoryStore(), MemoryStore()
        restored = frozenset({Quad(iri(ENTITY), iri("urn:p:seeAlso"), iri("urn:external:thing"))})
        assert cascade_targets(ENTITY, restored, data, prov, T0) == []
