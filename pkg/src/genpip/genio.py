"""Ingestion and emission of genomic data.

Covers FASTA references, streaming FASTQ reads (Phred+33), PAF-style
mapping output, dataset statistics, and a seeded synthetic read
generator for desk-scale experiments.  Multi-record FASTA files yield
one Reference per record; records are never concatenated.
"""

from __future__ import annotations

import json
import random
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .dna import BASES, IUPAC_CHOICES, revcomp

PHRED_OFFSET = 33
MAX_PHRED = 93

JUNK = "JUNK"


@dataclass(frozen=True)
class Reference:
    """A named reference sequence over {A,C,G,T}."""

    name: str
    bases: str

    @property
    def length(self) -> int:
        return len(self.bases)


@dataclass(frozen=True)
class Read:
    """A basecalled read with one Phred score per base."""

    id: str
    bases: str
    quals: Sequence[int]

    def __post_init__(self) -> None:
        if len(self.bases) != len(self.quals):
            raise ValueError(f"read {self.id}: bases/quals length mismatch")
        if self.quals and not (0 <= min(self.quals) and max(self.quals) <= MAX_PHRED):
            raise ValueError(f"read {self.id}: quality outside [0, {MAX_PHRED}]")


@dataclass(frozen=True)
class DatasetStats:
    num_reads: int
    total_bases: int
    mean_len: float
    median_len: float
    mean_q: float
    median_q: float

    def to_dict(self) -> dict:
        return {
            "num_reads": self.num_reads,
            "total_bases": self.total_bases,
            "mean_len": self.mean_len,
            "median_len": self.median_len,
            "mean_q": self.mean_q,
            "median_q": self.median_q,
        }


@dataclass(frozen=True)
class SynthParams:
    """Knobs for the synthetic read generator.

    junk reads are uniform random sequence (the unmappable analog),
    lowq reads carry qualities around qual_low_mean; the two groups are
    disjoint.  All randomness flows from rng_seed.
    """

    num_reads: int
    len_min: int
    len_max: int
    sub_rate: float = 0.0
    ins_rate: float = 0.0
    del_rate: float = 0.0
    junk_frac: float = 0.0
    lowq_frac: float = 0.0
    qual_high_mean: float = 12.0
    qual_low_mean: float = 3.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        for name in ("sub_rate", "ins_rate", "del_rate", "junk_frac", "lowq_frac"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {v}")
        if self.junk_frac + self.lowq_frac > 1.0:
            raise ValueError("junk_frac + lowq_frac must be <= 1")
        if self.len_min < 1:
            raise ValueError("len_min must be >= 1")
        if self.len_min > self.len_max:
            raise ValueError("len_min must be <= len_max")


@dataclass(frozen=True)
class GroundTruth:
    """Where a synthetic read came from: ref offset or JUNK."""

    id: str
    origin: int | str
    strand: str
    is_lowq: bool

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "origin": self.origin,
            "strand": self.strand,
            "is_lowq": self.is_lowq,
        }


class FastaError(ValueError):
    pass


class FastqError(ValueError):
    pass


def _normalize_record(name: str, raw: str, rng: random.Random) -> Reference:
    """Uppercase a record and resolve IUPAC ambiguity codes.

    Ambiguous codes (including N) are replaced by a seeded-random base
    from the code's allowed set so the downstream alphabet stays closed
    over {A,C,G,T} and loads are reproducible.
    """
    seq = raw.upper().replace("U", "T")
    if not seq:
        raise FastaError(f"empty FASTA record {name!r}")
    out = []
    for ch in seq:
        if ch in "ACGT":
            out.append(ch)
        elif ch in IUPAC_CHOICES:
            out.append(rng.choice(IUPAC_CHOICES[ch]))
        else:
            raise FastaError(f"record {name!r}: invalid base {ch!r}")
    return Reference(name=name, bases="".join(out))


def parse_fasta(path: str | Path, ambiguity_seed: int = 0) -> list[Reference]:
    """Parse a FASTA file into one Reference per record."""
    rng = random.Random(ambiguity_seed)
    refs: list[Reference] = []
    name = None
    parts: list[str] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith(">"):
                if name is not None:
                    refs.append(_normalize_record(name, "".join(parts), rng))
                name = line[1:].split()[0] if len(line) > 1 else ""
                parts = []
            else:
                if name is None:
                    raise FastaError(f"{path}: sequence before first '>' header")
                parts.append(line)
    if name is not None:
        refs.append(_normalize_record(name, "".join(parts), rng))
    if not refs:
        raise FastaError(f"{path}: empty FASTA")
    return refs


def parse_fasta_single(path: str | Path, ambiguity_seed: int = 0) -> Reference:
    """Convenience accessor for single-record FASTA files."""
    refs = parse_fasta(path, ambiguity_seed)
    if len(refs) != 1:
        raise FastaError(f"{path}: expected one record, found {len(refs)}")
    return refs[0]


def parse_fastq(path: str | Path) -> Iterator[Read]:
    """Stream reads from a 4-line-record FASTQ file (Phred+33)."""
    with open(path) as fh:
        while True:
            header = fh.readline()
            if not header:
                return
            header = header.rstrip("\n")
            if not header.startswith("@"):
                raise FastqError(f"{path}: expected '@' header, got {header!r}")
            read_id = header[1:].split()[0] if len(header) > 1 else ""
            seq = fh.readline().rstrip("\n")
            plus = fh.readline()
            qual = fh.readline()
            if not plus or not qual:
                raise FastqError(f"{path}: truncated record {read_id!r}")
            qual = qual.rstrip("\n")
            if len(seq) != len(qual):
                raise FastqError(f"length mismatch at record {read_id}")
            quals = []
            for ch in qual:
                q = ord(ch) - PHRED_OFFSET
                if not 0 <= q <= MAX_PHRED:
                    raise FastqError(
                        f"record {read_id}: quality char {ch!r} out of Phred+33 range"
                    )
                quals.append(q)
            yield Read(id=read_id, bases=seq, quals=quals)


def write_fastq(reads: Iterable[Read], fh: IO[str]) -> None:
    for read in reads:
        fh.write(f"@{read.id}\n{read.bases}\n+\n")
        fh.write("".join(chr(q + PHRED_OFFSET) for q in read.quals))
        fh.write("\n")


def dataset_stats(reads: Iterable[Read]) -> DatasetStats:
    """Counts plus mean/median of per-read lengths and mean qualities."""
    lengths: list[int] = []
    mean_quals: list[float] = []
    for read in reads:
        lengths.append(len(read.bases))
        mean_quals.append(sum(read.quals) / len(read.quals))
    if not lengths:
        raise ValueError("empty read stream")
    return DatasetStats(
        num_reads=len(lengths),
        total_bases=sum(lengths),
        mean_len=sum(lengths) / len(lengths),
        median_len=statistics.median(lengths),
        mean_q=sum(mean_quals) / len(mean_quals),
        median_q=statistics.median(mean_quals),
    )


def _mutate(seq: str, p: SynthParams, rng: np.random.Generator) -> str:
    """Apply substitutions and indels at the configured per-base rates."""
    if p.sub_rate == 0 and p.ins_rate == 0 and p.del_rate == 0:
        return seq
    draws = rng.random(len(seq))
    sub_cut = p.sub_rate
    ins_cut = sub_cut + p.ins_rate
    del_cut = ins_cut + p.del_rate
    out = []
    for i, base in enumerate(seq):
        r = draws[i]
        if r < sub_cut:
            out.append(BASES[(BASES.index(base) + 1 + rng.integers(3)) % 4])
        elif r < ins_cut:
            out.append(base)
            out.append(BASES[rng.integers(4)])
        elif r < del_cut:
            continue
        else:
            out.append(base)
    if not out:
        out.append(seq[0])
    return "".join(out)


def _qualities(n: int, mean: float, rng: np.random.Generator) -> list[int]:
    # clamped discrete Gaussian, sigma=2, so consecutive chunks score alike
    q = np.rint(rng.normal(mean, 2.0, size=n)).astype(int)
    return np.clip(q, 0, MAX_PHRED).tolist()


def synth_reads(
    ref: Reference, p: SynthParams
) -> tuple[list[Read], list[GroundTruth]]:
    """Generate a labelled synthetic dataset from a reference.

    Deterministic under rng_seed.  Non-junk reads are substrings of the
    reference (forward or reverse-complement, 50/50) with errors applied
    at the configured rates; junk reads are uniform random sequence.
    """
    if p.len_max > ref.length:
        raise ValueError("len_max exceeds reference length")
    rng = np.random.default_rng(p.rng_seed)
    n_junk = round(p.junk_frac * p.num_reads)
    n_lowq = round(p.lowq_frac * p.num_reads)
    labels = ["junk"] * n_junk + ["lowq"] * n_lowq
    labels += ["good"] * (p.num_reads - len(labels))
    perm = rng.permutation(p.num_reads)
    labels = [labels[i] for i in perm]

    reads: list[Read] = []
    truths: list[GroundTruth] = []
    for i, label in enumerate(labels):
        read_id = f"r{i:06d}"
        length = int(rng.integers(p.len_min, p.len_max + 1))
        if label == "junk":
            bases = "".join(BASES[b] for b in rng.integers(4, size=length))
            truth = GroundTruth(read_id, JUNK, "+", is_lowq=False)
        else:
            start = int(rng.integers(0, ref.length - length + 1))
            seq = ref.bases[start : start + length]
            strand = "+" if rng.random() < 0.5 else "-"
            if strand == "-":
                seq = revcomp(seq)
            bases = _mutate(seq, p, rng)
            truth = GroundTruth(read_id, start, strand, is_lowq=(label == "lowq"))
        mean = p.qual_low_mean if label == "lowq" else p.qual_high_mean
        quals = _qualities(len(bases), mean, rng)
        reads.append(Read(id=read_id, bases=bases, quals=quals))
        truths.append(truth)
    return reads, truths


def write_ground_truth(truths: Iterable[GroundTruth], fh: IO[str]) -> None:
    for t in truths:
        fh.write(json.dumps(t.to_dict(), sort_keys=True))
        fh.write("\n")


def read_ground_truth(path: str | Path) -> list[GroundTruth]:
    out = []
    with open(path) as fh:
        for line in fh:
            d = json.loads(line)
            out.append(GroundTruth(d["id"], d["origin"], d["strand"], d["is_lowq"]))
    return out


def write_paf(results, read_lengths: Sequence[int], fh: IO[str]) -> None:
    """Write one PAF line per mapping result.

    Mapped reads produce the standard twelve tab-separated columns with a
    mapping-quality placeholder of 255; the residue-match column is a
    score-derived estimate since base-level traceback is out of scope.
    Unmapped and rejected reads emit '*' for the strand/target fields plus
    a trailing st:Z:<status> tag.
    """
    for result, read_len in zip(results, read_lengths):
        if result.status == "MAPPED":
            _, ref_start, ref_end, strand = result.region
            read_start, read_end = result.read_span
            matches = max(0, int(result.alignment_score // 2))
            block = max(ref_end - ref_start, read_end - read_start)
            fields = [
                result.read_id, read_len, read_start, read_end, strand,
                result.ref_name, result.ref_len, ref_start, ref_end,
                matches, block, 255,
            ]
            fh.write("\t".join(str(f) for f in fields))
        else:
            fields = [
                result.read_id, read_len, 0, 0, "*", "*", 0, 0, 0, 0, 0, 255,
                f"st:Z:{result.status}",
            ]
            fh.write("\t".join(str(f) for f in fields))
        fh.write("\n")
