from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genpip.chunkqc import (
    Chunk,
    QsrConfig,
    SqsAccumulator,
    chunk_sqs,
    merge_aqs,
    qsr_decide,
    qsr_sample_indices,
    read_aqs,
    split_into_chunks,
)
from genpip.genio import Read


def mk_read(quals, rid="r"):
    return Read(id=rid, bases="A" * len(quals), quals=list(quals))


class TestSplit:
    def test_even_split(self):
        chunks = split_into_chunks(mk_read([7] * 1200), 300)
        assert [len(c) for c in chunks] == [300, 300, 300, 300]
        assert [c.offset for c in chunks] == [0, 300, 600, 900]
        assert [c.index for c in chunks] == [0, 1, 2, 3]

    def test_short_read_single_chunk(self):
        chunks = split_into_chunks(mk_read([7] * 250), 300)
        assert [len(c) for c in chunks] == [250]

    def test_partial_final_chunk(self):
        chunks = split_into_chunks(mk_read([7] * 301), 300)
        assert [len(c) for c in chunks] == [300, 1]

    def test_concatenation_restores_read(self):
        read = mk_read(range(50))
        chunks = split_into_chunks(read, 7)
        assert "".join(c.bases for c in chunks) == read.bases
        assert [q for c in chunks for q in c.quals] == list(read.quals)

    def test_zero_chunk_size_rejected(self):
        with pytest.raises(ValueError):
            split_into_chunks(mk_read([7]), 0)


class TestSqs:
    def test_simple_sum(self):
        assert chunk_sqs(Chunk("r", 0, 0, "AAA", [7, 7, 7])) == 21

    def test_zero_quals(self):
        assert chunk_sqs(Chunk("r", 0, 0, "A" * 300, [0] * 300)) == 0

    def test_merge(self):
        acc = merge_aqs(SqsAccumulator(21, 3), Chunk("r", 1, 3, "AAA", [9, 9, 9]))
        assert (acc.sum_q, acc.n_bases) == (48, 6)
        assert acc.average == 8

    def test_merge_order_independent(self):
        read = mk_read([3, 9, 1, 40, 0, 12, 7])
        chunks = split_into_chunks(read, 2)
        fwd = SqsAccumulator()
        for c in chunks:
            fwd = merge_aqs(fwd, c)
        rev = SqsAccumulator()
        for c in reversed(chunks):
            rev = merge_aqs(rev, c)
        assert fwd == rev

    def test_empty_accumulator_average_undefined(self):
        with pytest.raises(ValueError):
            SqsAccumulator().average


class TestReadAqs:
    def test_two_base_read(self):
        assert read_aqs(mk_read([6, 8])) == 7

    def test_constant_read(self):
        assert read_aqs(mk_read([10] * 137)) == 10

    def test_empty_read_rejected(self):
        with pytest.raises(ValueError):
            read_aqs(Read(id="x", bases="", quals=[]))


@given(
    quals=st.lists(st.integers(0, 93), min_size=1, max_size=400),
    chunk_size=st.integers(1, 401),
)
@settings(max_examples=200, deadline=None)
def test_telescoping_merge_equals_whole_read(quals, chunk_size):
    # folding chunk sums reproduces the whole-read average exactly
    read = mk_read(quals)
    acc = SqsAccumulator()
    for chunk in split_into_chunks(read, chunk_size):
        acc = merge_aqs(acc, chunk)
    assert acc.average == read_aqs(read)


class TestSampleIndices:
    def test_four_chunks_two_samples(self):
        assert qsr_sample_indices(4, 2) == [0, 3]

    def test_ten_chunks_five_samples(self):
        # round(i*9/4) for i=0..4 with half-even rounding
        assert qsr_sample_indices(10, 5) == [0, 2, 4, 7, 9]

    def test_clamps_to_all_chunks(self):
        assert qsr_sample_indices(2, 5) == [0, 1]

    def test_single_sample(self):
        assert qsr_sample_indices(9, 1) == [0]

    @given(num_chunks=st.integers(1, 500), n_qs=st.integers(1, 50))
    @settings(max_examples=300, deadline=None)
    def test_properties(self, num_chunks, n_qs):
        idx = qsr_sample_indices(num_chunks, n_qs)
        assert idx == sorted(set(idx))
        assert idx[0] == 0
        if n_qs >= 2:
            assert idx[-1] == num_chunks - 1
        assert all(0 <= i < num_chunks for i in idx)
        # spaced samples are non-consecutive whenever the read is long enough
        if num_chunks >= 2 * n_qs - 1 and n_qs >= 2:
            assert all(b - a >= 2 for a, b in zip(idx, idx[1:]))


class TestQsrDecide:
    def test_rejects_low_average(self):
        chunks = [
            Chunk("r", 0, 0, "A" * 300, [8] * 300),
            Chunk("r", 1, 300, "A" * 300, [2] * 300),
        ]
        d = qsr_decide(chunks, QsrConfig(n_qs=2, theta_qs=7))
        assert d.reject
        assert d.sampled_avg == 5

    def test_boundary_average_passes(self):
        # strict < at the threshold: exactly 7.0 is kept
        chunks = [Chunk("r", 0, 0, "A" * 10, [7] * 10)]
        d = qsr_decide(chunks, QsrConfig(n_qs=1, theta_qs=7))
        assert not d.reject
        assert d.sampled_avg == 7

    def test_full_sampling_equals_read_average(self):
        read = mk_read([5, 9, 6, 8, 7, 7, 3, 11, 6])
        chunks = split_into_chunks(read, 3)
        cfg = QsrConfig(n_qs=len(chunks), theta_qs=7)
        d = qsr_decide(chunks, cfg)
        assert d.sampled_avg == read_aqs(read)
        assert d.reject == (read_aqs(read) < 7)

    @given(
        quals=st.lists(st.integers(0, 93), min_size=1, max_size=300),
        theta=st.integers(0, 20),
        theta_hi=st.integers(0, 20),
    )
    @settings(max_examples=150, deadline=None)
    def test_threshold_monotonicity(self, quals, theta, theta_hi):
        lo, hi = sorted((theta, theta_hi))
        read = mk_read(quals)
        chunks = split_into_chunks(read, 16)
        samples = [chunks[i] for i in qsr_sample_indices(len(chunks), 3)]
        if qsr_decide(samples, QsrConfig(n_qs=3, theta_qs=lo)).reject:
            assert qsr_decide(samples, QsrConfig(n_qs=3, theta_qs=hi)).reject

    @given(quals=st.lists(st.integers(0, 93), min_size=4, max_size=320))
    @settings(max_examples=150, deadline=None)
    def test_sampled_average_bounded_by_chunk_means(self, quals):
        read = mk_read(quals)
        chunks = split_into_chunks(read, 19)
        samples = [chunks[i] for i in qsr_sample_indices(len(chunks), 2)]
        means = [Fraction(chunk_sqs(c), len(c)) for c in chunks]
        avg = qsr_decide(samples, QsrConfig(n_qs=2, theta_qs=7)).sampled_avg
        assert min(means) <= avg <= max(means)
