import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genpip.chunkqc import Chunk
from genpip.dna import kmer_code, revcomp
from genpip.genio import Reference
from genpip.refindex import (
    IndexFileError,
    IndexParams,
    build_index,
    load_index,
    minimizers,
    minimizers_bruteforce,
    save_index,
    seed_chunk,
)


def random_seq(n, seed):
    rng = np.random.default_rng(seed)
    return "".join("ACGT"[b] for b in rng.integers(0, 4, n))


def as_chunk(bases, offset=0, rid="r"):
    return Chunk(read_id=rid, index=0, offset=offset, bases=bases, quals=[10] * len(bases))


class TestMinimizers:
    def test_hand_example(self):
        p = IndexParams(k=3, w=2, canonical=False)
        assert minimizers("ACGGT", p) == [
            (kmer_code("ACG"), 0, "+"),
            (kmer_code("CGG"), 1, "+"),
        ]

    def test_window_of_one_takes_every_kmer(self):
        p = IndexParams(k=4, w=1, canonical=False)
        seq = random_seq(40, 1)
        out = minimizers(seq, p)
        assert [pos for _, pos, _ in out] == list(range(len(seq) - 3))

    def test_too_short_sequence(self):
        p = IndexParams(k=5, w=4)
        assert minimizers("ACGTACG", p) == []

    def test_canonical_uses_smaller_of_both_strands(self):
        p = IndexParams(k=4, w=1, canonical=True)
        seq = "TTTT"
        out = minimizers(seq, p)
        assert out == [(kmer_code("AAAA"), 0, "-")]

    @given(st.integers(0, 10_000))
    @settings(max_examples=120, deadline=None)
    def test_matches_bruteforce_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 200))
        seq = "".join("ACGT"[b] for b in rng.integers(0, 4, n))
        k = int(rng.integers(1, 9))
        w = int(rng.integers(1, 9))
        canonical = bool(rng.integers(0, 2))
        p = IndexParams(k=k, w=w, canonical=canonical)
        assert minimizers(seq, p) == minimizers_bruteforce(seq, p)

    def test_positions_sorted_and_unique(self):
        p = IndexParams(k=5, w=6)
        seq = random_seq(500, 3)
        out = minimizers(seq, p)
        positions = [pos for _, pos, _ in out]
        assert positions == sorted(set(positions))


class TestBuildIndex:
    def test_single_ref_hand_example(self):
        p = IndexParams(k=3, w=2, canonical=False)
        idx = build_index([Reference("r", "ACGGT")], p)
        assert idx.table == {
            kmer_code("ACG"): [(0, 0, "+")],
            kmer_code("CGG"): [(0, 1, "+")],
        }
        assert idx.ref_meta == [("r", 5)]

    def test_repeat_lists_sorted(self):
        p = IndexParams(k=3, w=2, canonical=False)
        idx = build_index([Reference("r", "ACGGTACGGT")], p)
        assert idx.table[kmer_code("ACG")] == [(0, 0, "+"), (0, 5, "+")]

    def test_two_refs_distinct_ids(self):
        p = IndexParams(k=3, w=2, canonical=False)
        idx = build_index(
            [Reference("a", "ACGGT"), Reference("b", "ACGGT")], p
        )
        assert idx.table[kmer_code("ACG")] == [(0, 0, "+"), (1, 0, "+")]

    def test_all_refs_too_short(self):
        p = IndexParams(k=15, w=10)
        with pytest.raises(ValueError, match="shorter than"):
            build_index([Reference("r", "ACGT")], p)

    def test_completeness(self):
        # every emitted minimizer position is findable through the table
        p = IndexParams(k=7, w=5)
        ref = Reference("r", random_seq(2000, 8))
        idx = build_index([ref], p)
        for code, pos, strand in minimizers(ref.bases, p):
            assert (0, pos, strand) in idx.table[code]

    def test_deterministic(self):
        p = IndexParams()
        ref = Reference("r", random_seq(3000, 9))
        assert build_index([ref], p) == build_index([ref], p)


class TestPersistence:
    def test_roundtrip(self, tmp_path):
        p = IndexParams(k=3, w=2, canonical=False)
        idx = build_index([Reference("r", "ACGGT")], p)
        path = tmp_path / "x.idx"
        save_index(idx, path)
        assert load_index(path) == idx

    def test_roundtrip_large(self, tmp_path):
        idx = build_index([Reference("r", random_seq(5000, 2))], IndexParams())
        path = tmp_path / "x.idx"
        save_index(idx, path)
        assert load_index(path) == idx

    def test_rebuild_is_byte_identical(self, tmp_path):
        ref = Reference("r", random_seq(4000, 4))
        a, b = tmp_path / "a.idx", tmp_path / "b.idx"
        save_index(build_index([ref], IndexParams()), a)
        save_index(build_index([ref], IndexParams()), b)
        assert a.read_bytes() == b.read_bytes()

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.idx"
        path.write_bytes(b"NOTANIDX" + b"\0" * 64)
        with pytest.raises(IndexFileError, match="not a genpip index"):
            load_index(path)

    def test_truncation_detected(self, tmp_path):
        idx = build_index([Reference("r", random_seq(500, 2))], IndexParams(k=9, w=4))
        path = tmp_path / "x.idx"
        save_index(idx, path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) // 2])
        with pytest.raises(IndexFileError):
            load_index(path)


class TestSeedChunk:
    def test_exact_substring_anchors_on_one_diagonal(self):
        ref = Reference("r", random_seq(20_000, 7))
        p = IndexParams(k=15, w=10)
        idx = build_index([ref], p)
        start = 4321
        chunk = as_chunk(ref.bases[start : start + 300])
        anchors = seed_chunk(chunk, idx)
        assert anchors
        diag = {a.ref_pos - a.read_pos for a in anchors if a.strand == "+"}
        assert diag == {start}

    def test_offset_added_to_read_positions(self):
        ref = Reference("r", random_seq(20_000, 7))
        idx = build_index([ref], IndexParams())
        start = 600
        plain = seed_chunk(as_chunk(ref.bases[start : start + 300], offset=0), idx)
        shifted = seed_chunk(as_chunk(ref.bases[start : start + 300], offset=300), idx)
        assert [(a.read_pos - 300, a.ref_pos) for a in shifted] == [
            (a.read_pos, a.ref_pos) for a in plain
        ]

    def test_random_chunk_rarely_hits_1mbp_reference(self):
        ref = Reference("r", random_seq(1_000_000, 11))
        idx = build_index([ref], IndexParams(k=15, w=10))
        chunk = as_chunk(random_seq(300, 999))
        assert len(seed_chunk(chunk, idx)) <= 2

    def test_short_chunk_yields_nothing(self):
        ref = Reference("r", random_seq(1000, 1))
        idx = build_index([ref], IndexParams(k=15, w=10))
        assert seed_chunk(as_chunk("ACGTACGT"), idx) == []

    def test_max_occ_drops_repetitive_seeds(self):
        # a perfect tandem repeat: every minimizer occurs many times
        unit = random_seq(40, 3)
        ref = Reference("r", unit * 50)
        idx = build_index([ref], IndexParams(k=9, w=3, canonical=False))
        chunk = as_chunk(unit * 2)
        kept = seed_chunk(chunk, idx, max_occ=10)
        assert kept == []

    def test_revcomp_chunk_maps_with_minus_strand(self):
        ref = Reference("r", random_seq(20_000, 7))
        idx = build_index([ref], IndexParams())
        start = 1000
        fwd = seed_chunk(as_chunk(ref.bases[start : start + 300]), idx)
        rev = seed_chunk(as_chunk(revcomp(ref.bases[start : start + 300])), idx)
        assert {a.strand for a in fwd} == {"+"}
        assert {a.strand for a in rev} == {"-"}
        assert {a.ref_pos for a in fwd} == {a.ref_pos for a in rev}
