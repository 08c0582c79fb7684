import hashlib
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_pairs, search_values, two_core_pairs
from iblt import degree_dist as dd
from iblt.errors import CorruptCell, DomainError, FormatError, KeyLengthMismatch, NegativeCount, ValueLengthMismatch
from iblt.table import Iblt, KeyValuePair, export_graph, initialize

X3 = dd.regular(3)
MIXED = dd.validate([(2, 0.5), (3, 0.5)])
GOLDEN = Path(__file__).parent / "data" / "golden_v1.bin"


def fresh(m=20, dist=X3, seed=1, kappa=128):
    return initialize(m, dist, seed, 64, kappa)


class TestInitialize:
    def test_zero_cells(self):
        t = fresh(5)
        assert t.cells() == [(0, 0, bytes(16))] * 5

    def test_empty_recovers(self):
        out = fresh(5).recover()
        assert out.complete and out.recovered == []

    def test_degenerate(self):
        with pytest.raises(DomainError):
            fresh(0)


class TestInsertDelete:
    def test_single_insert(self):
        t = fresh()
        t.insert(KeyValuePair.from_value(b"x" * 16))
        assert sorted(t.counts, reverse=True)[:4] == [1, 1, 1, 0]
        assert sum(t.counts) == 3

    def test_insert_delete_restores(self):
        t = fresh()
        z = KeyValuePair.from_value(b"y" * 16)
        t.insert(z)
        t.delete(z)
        assert t == fresh() and t.is_empty()

    def test_double_insert_cancels_data(self):
        t = fresh()
        z = KeyValuePair.from_value(b"z" * 16)
        t.insert(z)
        t.insert(z)
        touched = [i for i, c in enumerate(t.counts) if c]
        assert len(touched) == 3
        assert all(t.counts[i] == 2 and t.key_sums[i] == 0 and t.value_sums[i] == 0 for i in touched)

    def test_delete_from_empty_goes_negative(self):
        t = fresh()
        t.delete(KeyValuePair.from_value(b"w" * 16))
        assert sorted(t.counts)[:3] == [-1, -1, -1]
        with pytest.raises(NegativeCount):
            t.recover()

    def test_delete_commutes(self):
        a, b = KeyValuePair.from_value(b"a" * 16), KeyValuePair.from_value(b"b" * 16)
        t1, t2 = fresh(), fresh()
        t1.insert(a)
        t1.insert(b)
        t1.delete(a)
        t2.insert(b)
        assert t1 == t2

    def test_length_checks(self):
        t = fresh()
        with pytest.raises(ValueLengthMismatch):
            t.insert(KeyValuePair.from_value(b"short"))
        with pytest.raises(KeyLengthMismatch):
            t.insert(KeyValuePair(1 << 64, bytes(16)))
        odd = initialize(8, X3, 0, 64, 12)
        with pytest.raises(ValueLengthMismatch):
            odd.insert(KeyValuePair.from_value(b"\xff\xff"))
        odd.insert(KeyValuePair.from_value(b"\xff\x0f"))

    @given(st.lists(st.binary(min_size=8, max_size=8), min_size=1, max_size=12, unique=True), st.randoms())
    @settings(max_examples=60, deadline=None)
    def test_involution_and_order(self, values, rnd):
        pairs = [KeyValuePair.from_value(v) for v in values]
        full = initialize(15, MIXED, 4, 64, 64)
        full.insert_all(pairs)
        victim = rnd.choice(pairs)
        reduced = initialize(15, MIXED, 4, 64, 64)
        reduced.insert_all(p for p in pairs if p != victim)
        full.delete(victim)
        assert full == reduced
        shuffled = list(pairs)
        rnd.shuffle(shuffled)
        a, b = initialize(15, MIXED, 4, 64, 64), initialize(15, MIXED, 4, 64, 64)
        a.insert_all(pairs)
        b.insert_all(shuffled)
        assert a == b

    def test_total_count_is_edge_count(self):
        rng = random.Random(5)
        t = fresh(200, MIXED)
        pairs = random_pairs(rng, 50)
        t.insert_all(pairs)
        assert sum(t.counts) == len(export_graph(t, pairs))


class TestRecover:
    def test_fig2_walk(self, fig2):
        table, pairs = fig2
        table.insert_all(pairs.values())
        assert table.counts == [2, 2, 1, 2, 2]
        out = table.recover()
        names = {z.key: name for name, z in pairs.items()}
        assert out.peel_order == [2, 0, 3, 1]
        assert [names[z.key] for z in out.recovered] == ["z2", "z1", "z4", "z3"]
        assert out.complete and out.residual_cells_nonzero == 0

    def test_fig2_graph(self, fig2):
        table, pairs = fig2
        edges = export_graph(table, list(pairs.values()))
        assert len(edges) == 9
        by_pair = {}
        for j, c in edges:
            by_pair.setdefault(j, set()).add(c)
        assert [by_pair[j] for j in range(4)] == [{0, 3}, {0, 2}, {1, 4}, {1, 3, 4}]

    def test_identical_cell_sets_form_core(self):
        table = fresh(6, MIXED, seed=3)
        twins = search_values(table, {"a": {1, 4}, "b": {1, 4}}, tag=b"twin")
        table.insert_all(twins.values())
        out = table.recover()
        assert not out.complete and out.recovered == []
        assert [c for c in table.counts if c] == [2, 2]

    def test_non_destructive(self):
        rng = random.Random(1)
        t = fresh(50)
        t.insert_all(random_pairs(rng, 20))
        before = t.copy()
        out = t.recover(destructive=False)
        assert out.complete and t == before

    def test_recovers_inserted_set(self):
        rng = random.Random(2)
        t = fresh(300)
        pairs = random_pairs(rng, 150)
        t.insert_all(pairs)
        out = t.recover()
        assert out.complete
        assert set(out.recovered) == set(pairs)

    def test_edge_visits_linear(self):
        rng = random.Random(8)
        t = fresh(2000, MIXED)
        pairs = random_pairs(rng, 1400)
        t.insert_all(pairs)
        out = t.recover()
        assert out.complete
        assert out.edge_visits == len(export_graph(t, pairs))
        assert out.edge_visits <= 1.1 * 1400 * dd.avg_degree(MIXED)

    def test_corrupt_cell(self):
        t = fresh()
        t.insert(KeyValuePair(123, bytes(16)))
        with pytest.raises(CorruptCell):
            t.recover()

    def test_confluence(self):
        rng = random.Random(21)
        for trial in range(20):
            t = fresh(30, MIXED, seed=trial)
            t.insert_all(random_pairs(rng, rng.randint(5, 30)))
            ref = t.recover(destructive=False)
            for k in range(20):
                out = t.recover(destructive=False, rng=random.Random(k))
                assert out.complete == ref.complete
                assert set(out.recovered) == set(ref.recovered)

    def test_matches_core_oracle(self):
        rng = random.Random(99)
        for trial in range(300):
            m = rng.randint(3, 30)
            t = fresh(m, MIXED, seed=trial)
            pairs = random_pairs(rng, rng.randint(1, m))
            t.insert_all(pairs)
            core = two_core_pairs(export_graph(t, pairs), len(pairs))
            out = t.recover()
            assert out.complete == (not core)
            assert {z.key for z in out.recovered} == {pairs[j].key for j in range(len(pairs)) if j not in core}


class TestSerialization:
    def golden_table(self):
        t = initialize(8, MIXED, 42, 64, 32)
        for i in range(1, 4):
            t.insert(KeyValuePair.from_value(bytes([i]) * 4))
        return t

    def test_golden_bytes(self):
        blob = self.golden_table().to_bytes()
        assert blob == GOLDEN.read_bytes()
        assert hashlib.sha256(blob).hexdigest() == "2be3571f48b5007480e2a0c196993d08a9a4f85e856d44606ef67a088a16240d"

    def test_layout(self):
        blob = self.golden_table().to_bytes()
        assert blob[:4] == b"IBLT"
        header = 4 + 2 + 8 + 2 + 4 + 8 + 4
        assert len(blob) == header + 2 * 12 + 8 * (8 + 8 + 4)

    def test_round_trip(self, tmp_path):
        rng = random.Random(4)
        t = fresh(40, dd.validate([(2, 0.15), (3, 0.725), (18, 0.125)]), seed=2**63 + 5)
        t.insert_all(random_pairs(rng, 10))
        t.delete(random_pairs(rng, 1)[0])
        path = tmp_path / "t.bin"
        t.save(path)
        assert Iblt.load(path) == t

    @pytest.mark.parametrize("mangle", [lambda b: b"XXXX" + b[4:], lambda b: b[:-1], lambda b: b[:10]])
    def test_rejects_damaged(self, mangle):
        with pytest.raises(FormatError):
            Iblt.from_bytes(mangle(GOLDEN.read_bytes()))
