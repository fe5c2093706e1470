import io
import json

import pytest

from genpip.dna import revcomp
from genpip.genio import (
    FastaError,
    FastqError,
    JUNK,
    Read,
    Reference,
    SynthParams,
    dataset_stats,
    parse_fasta,
    parse_fasta_single,
    parse_fastq,
    synth_reads,
    write_fastq,
    write_ground_truth,
    write_paf,
)
from genpip.mapdp import MappingResult


@pytest.fixture
def ref1k():
    import numpy as np

    rng = np.random.default_rng(5)
    return Reference("ref", "".join("ACGT"[b] for b in rng.integers(0, 4, 1000)))


class TestFasta:
    def test_concatenates_sequence_lines(self, tmp_path):
        p = tmp_path / "a.fa"
        p.write_text(">r\nACGT\nAC\n")
        ref = parse_fasta_single(p)
        assert ref == Reference("r", "ACGTAC")
        assert ref.length == 6

    def test_lowercase_and_n_replacement(self, tmp_path):
        p = tmp_path / "a.fa"
        p.write_text(">r\nacgn\n")
        ref = parse_fasta_single(p, ambiguity_seed=3)
        assert ref.length == 4
        assert ref.bases[:3] == "ACG"
        assert ref.bases[3] in "ACGT"

    def test_iupac_codes_resolve_within_choice_set(self, tmp_path):
        p = tmp_path / "a.fa"
        p.write_text(">r\nARYT\n")
        ref = parse_fasta_single(p)
        assert ref.bases[1] in "AG"
        assert ref.bases[2] in "CT"

    def test_ambiguity_resolution_is_seeded(self, tmp_path):
        p = tmp_path / "a.fa"
        p.write_text(">r\n" + "N" * 100 + "\n")
        a = parse_fasta_single(p, ambiguity_seed=9).bases
        b = parse_fasta_single(p, ambiguity_seed=9).bases
        assert a == b

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "a.fa"
        p.write_text("")
        with pytest.raises(FastaError, match="empty FASTA"):
            parse_fasta(p)

    def test_bad_character_rejected(self, tmp_path):
        p = tmp_path / "a.fa"
        p.write_text(">r\nAXGT\n")
        with pytest.raises(FastaError, match="invalid base"):
            parse_fasta(p)

    def test_multi_record_yields_distinct_references(self, tmp_path):
        p = tmp_path / "a.fa"
        p.write_text(">one\nACGT\n>two\nGGTT\nAA\n")
        refs = parse_fasta(p)
        assert [r.name for r in refs] == ["one", "two"]
        assert [r.bases for r in refs] == ["ACGT", "GGTTAA"]
        with pytest.raises(FastaError):
            parse_fasta_single(p)


class TestFastq:
    def test_phred33_decoding(self, tmp_path):
        p = tmp_path / "a.fq"
        p.write_text("@a\nACGT\n+\n!!II\n")
        reads = list(parse_fastq(p))
        assert reads == [Read("a", "ACGT", [0, 0, 40, 40])]

    def test_length_mismatch(self, tmp_path):
        p = tmp_path / "a.fq"
        p.write_text("@a\nACGT\n+\n!!I\n")
        with pytest.raises(FastqError, match="length mismatch at record a"):
            list(parse_fastq(p))

    def test_two_records_stream_in_order(self, tmp_path):
        p = tmp_path / "a.fq"
        p.write_text("@a\nAC\n+\nII\n@b\nGT\n+\n##\n")
        ids = [r.id for r in parse_fastq(p)]
        assert ids == ["a", "b"]

    def test_truncated_record(self, tmp_path):
        p = tmp_path / "a.fq"
        p.write_text("@a\nACGT\n+\n")
        with pytest.raises(FastqError, match="truncated"):
            list(parse_fastq(p))

    def test_quality_out_of_range(self, tmp_path):
        p = tmp_path / "a.fq"
        p.write_text("@a\nA\n+\n\t\n")
        with pytest.raises(FastqError, match="out of Phred"):
            list(parse_fastq(p))

    def test_roundtrip_with_writer(self, tmp_path):
        reads = [Read("x", "ACGT", [0, 93, 40, 7]), Read("y", "G", [33])]
        buf = io.StringIO()
        write_fastq(reads, buf)
        p = tmp_path / "rt.fq"
        p.write_text(buf.getvalue())
        assert list(parse_fastq(p)) == reads


class TestStats:
    def test_two_reads(self):
        reads = [
            Read("a", "A" * 4, [10] * 4),
            Read("b", "A" * 8, [20] * 8),
        ]
        s = dataset_stats(reads)
        assert s.num_reads == 2
        assert s.total_bases == 12
        assert s.mean_len == 6
        assert s.median_len == 6
        assert s.mean_q == 15

    def test_single_read_mean_equals_median(self):
        s = dataset_stats([Read("a", "ACG", [1, 2, 3])])
        assert s.mean_len == s.median_len == 3
        assert s.mean_q == s.median_q == 2

    def test_median_of_three(self):
        reads = [Read(str(i), "A" * n, [7] * n) for i, n in enumerate([1, 2, 9])]
        assert dataset_stats(reads).median_len == 2

    def test_copies_match_single(self):
        one = Read("a", "ACGTAC", [4, 9, 2, 30, 7, 7])
        single = dataset_stats([one])
        many = dataset_stats([one] * 5)
        assert (many.mean_len, many.median_len) == (single.mean_len, single.median_len)
        assert (many.mean_q, many.median_q) == (single.mean_q, single.median_q)

    def test_empty_stream_rejected(self):
        with pytest.raises(ValueError):
            dataset_stats([])


class TestSynth:
    def test_all_junk(self, ref1k):
        p = SynthParams(num_reads=5, len_min=50, len_max=80, junk_frac=1.0, rng_seed=3)
        reads, truths = synth_reads(ref1k, p)
        assert len(reads) == 5
        assert all(t.origin == JUNK for t in truths)

    def test_error_free_reads_are_substrings(self, ref1k):
        p = SynthParams(num_reads=20, len_min=40, len_max=90, rng_seed=11)
        reads, truths = synth_reads(ref1k, p)
        for read, t in zip(reads, truths):
            assert t.origin != JUNK
            seq = ref1k.bases[t.origin : t.origin + len(read.bases)]
            expected = seq if t.strand == "+" else revcomp(seq)
            assert read.bases == expected

    def test_determinism_byte_identical(self, ref1k):
        p = SynthParams(
            num_reads=30, len_min=50, len_max=150, sub_rate=0.05, ins_rate=0.02,
            del_rate=0.02, junk_frac=0.2, lowq_frac=0.3, rng_seed=7,
        )
        bufs = []
        for _ in range(2):
            reads, _ = synth_reads(ref1k, p)
            buf = io.StringIO()
            write_fastq(reads, buf)
            bufs.append(buf.getvalue())
        assert bufs[0] == bufs[1]

    def test_composition_counts(self, ref1k):
        p = SynthParams(
            num_reads=200, len_min=50, len_max=100, junk_frac=0.10,
            lowq_frac=0.205, rng_seed=1,
        )
        _, truths = synth_reads(ref1k, p)
        assert sum(t.origin == JUNK for t in truths) == 20
        assert sum(t.is_lowq for t in truths) == 41

    def test_lowq_reads_have_low_mean_quality(self, ref1k):
        p = SynthParams(
            num_reads=60, len_min=200, len_max=300, lowq_frac=0.5,
            qual_high_mean=12, qual_low_mean=3, rng_seed=2,
        )
        reads, truths = synth_reads(ref1k, p)
        for read, t in zip(reads, truths):
            mean = sum(read.quals) / len(read.quals)
            if t.is_lowq:
                assert mean < 7
            else:
                assert mean > 7

    def test_len_max_above_reference_rejected(self, ref1k):
        p = SynthParams(num_reads=1, len_min=1, len_max=2000)
        with pytest.raises(ValueError):
            synth_reads(ref1k, p)

    def test_parameter_validation(self):
        with pytest.raises(ValueError, match="junk_frac \\+ lowq_frac"):
            SynthParams(num_reads=1, len_min=1, len_max=2, junk_frac=0.6, lowq_frac=0.5)
        with pytest.raises(ValueError, match="sub_rate"):
            SynthParams(num_reads=1, len_min=1, len_max=2, sub_rate=1.5)
        with pytest.raises(ValueError, match="len_min"):
            SynthParams(num_reads=1, len_min=5, len_max=2)

    def test_fastq_roundtrip_of_synth_output(self, tmp_path, ref1k):
        p = SynthParams(
            num_reads=25, len_min=40, len_max=120, sub_rate=0.05, ins_rate=0.02,
            del_rate=0.02, junk_frac=0.2, lowq_frac=0.2, rng_seed=8,
        )
        reads, _ = synth_reads(ref1k, p)
        path = tmp_path / "rt.fq"
        with open(path, "w") as fh:
            write_fastq(reads, fh)
        parsed = list(parse_fastq(path))
        assert [(r.bases, list(r.quals)) for r in parsed] == [
            (r.bases, list(r.quals)) for r in reads
        ]

    def test_ground_truth_jsonl_roundtrip(self, tmp_path, ref1k):
        p = SynthParams(num_reads=8, len_min=30, len_max=60, junk_frac=0.25, rng_seed=5)
        _, truths = synth_reads(ref1k, p)
        out = tmp_path / "t.jsonl"
        with open(out, "w") as fh:
            write_ground_truth(truths, fh)
        lines = out.read_text().splitlines()
        assert len(lines) == 8
        assert json.loads(lines[0])["id"] == "r000000"


class TestPaf:
    def test_mapped_line_fields(self):
        r = MappingResult(
            read_id="q1", status="MAPPED", best_chain_score=50.0,
            alignment_score=120, region=(0, 100, 200, "+"), ref_name="ref",
            ref_len=1000, read_span=(2, 98),
        )
        buf = io.StringIO()
        write_paf([r], [100], buf)
        fields = buf.getvalue().strip().split("\t")
        assert fields[0] == "q1"
        assert fields[1] == "100"
        assert fields[4] == "+"
        assert fields[5] == "ref"
        assert fields[6] == "1000"
        assert fields[7:9] == ["100", "200"]
        assert fields[11] == "255"

    def test_rejected_line_has_status_tag(self):
        r = MappingResult(read_id="q2", status="REJ_QSR")
        buf = io.StringIO()
        write_paf([r], [500], buf)
        line = buf.getvalue().strip()
        assert line.endswith("st:Z:REJ_QSR")
        assert "\t*\t" in line

    def test_empty_results_empty_file(self):
        buf = io.StringIO()
        write_paf([], [], buf)
        assert buf.getvalue() == ""
