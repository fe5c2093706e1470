"""Chunk decomposition and quality scoring.

Reads are cut into fixed-size chunks; each chunk's quality is summarised
as the plain integer sum of its base qualities (SQS).  Running sums merge
chunk results into the whole-read average (AQS) without ever touching a
float until the final division, so the incremental average is exactly the
whole-read average for any chunk size.

The quality-score rejection check (QSR) samples a few evenly spaced
chunks and compares their per-base average against a Phred threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .genio import Read


@dataclass(slots=True)
class Chunk:
    """A contiguous slice of a read at chunk granularity."""

    read_id: str
    index: int
    offset: int
    bases: str
    quals: Sequence[int]

    def __len__(self) -> int:
        return len(self.bases)


@dataclass(slots=True)
class SqsAccumulator:
    """Running sum of base qualities plus the base count behind it."""

    sum_q: int = 0
    n_bases: int = 0

    @property
    def average(self) -> Fraction:
        if self.n_bases == 0:
            raise ValueError("average undefined for empty accumulator")
        return Fraction(self.sum_q, self.n_bases)


@dataclass(frozen=True)
class QsrConfig:
    """Sampled-chunk count and Phred threshold for early quality rejection."""

    n_qs: int = 2
    theta_qs: float = 7.0

    def __post_init__(self) -> None:
        if self.n_qs < 1:
            raise ValueError("n_qs must be >= 1")
        if self.theta_qs < 0:
            raise ValueError("theta_qs must be >= 0")


def split_into_chunks(read: Read, chunk_size: int) -> list[Chunk]:
    """Cut a read into ceil(N/C) chunks; all but the last have length C."""
    if chunk_size <= 0:
        raise ValueError("chunk size must be >= 1")
    if len(read.bases) == 0:
        raise ValueError(f"read {read.id} is empty")
    chunks = []
    for index, offset in enumerate(range(0, len(read.bases), chunk_size)):
        end = offset + chunk_size
        chunks.append(
            Chunk(
                read_id=read.id,
                index=index,
                offset=offset,
                bases=read.bases[offset:end],
                quals=read.quals[offset:end],
            )
        )
    return chunks


def chunk_sqs(chunk: Chunk) -> int:
    """Sum of the chunk's base quality scores, exact in integers."""
    return sum(chunk.quals)


def merge_aqs(acc: SqsAccumulator, chunk: Chunk) -> SqsAccumulator:
    """Fold one chunk's quality sum into a running accumulator."""
    return SqsAccumulator(acc.sum_q + chunk_sqs(chunk), acc.n_bases + len(chunk))


def read_aqs(read: Read) -> Fraction:
    """Whole-read average quality: one exact integer sum, one division."""
    if len(read.quals) == 0:
        raise ValueError(f"read {read.id} is empty")
    return Fraction(sum(read.quals), len(read.quals))


def _round_half_even(numer: int, denom: int) -> int:
    """Exact round-half-to-even of numer/denom for non-negative ints."""
    q, r = divmod(numer, denom)
    twice = 2 * r
    if twice > denom or (twice == denom and q % 2 == 1):
        return q + 1
    return q


def qsr_sample_indices(num_chunks: int, n_qs: int) -> list[int]:
    """Evenly spaced chunk indices used by the quality-rejection check.

    Always includes chunk 0, and chunk num_chunks-1 whenever n_qs >= 2.
    Requesting at least as many samples as there are chunks returns every
    index.  Spacing uses exact rational rounding so the result does not
    depend on float behaviour.
    """
    if num_chunks < 1:
        raise ValueError("num_chunks must be >= 1")
    if n_qs < 1:
        raise ValueError("n_qs must be >= 1")
    if n_qs == 1:
        return [0]
    if n_qs >= num_chunks:
        return list(range(num_chunks))
    picked = []
    for i in range(n_qs):
        idx = _round_half_even(i * (num_chunks - 1), n_qs - 1)
        if not picked or idx != picked[-1]:
            picked.append(idx)
    return picked


@dataclass(frozen=True)
class QsrDecision:
    reject: bool
    sampled_avg: Fraction


def qsr_decide(sampled_chunks: Sequence[Chunk], cfg: QsrConfig) -> QsrDecision:
    """Average the sampled chunks per base and reject strictly below theta.

    Normalising by sampled bases (rather than chunk count) keeps the
    threshold in Phred-per-base units even when the last, partial chunk
    is among the samples; for equal-length chunks the two normalisations
    coincide.
    """
    if not sampled_chunks:
        raise ValueError("no sampled chunks")
    total = sum(chunk_sqs(c) for c in sampled_chunks)
    n_bases = sum(len(c) for c in sampled_chunks)
    avg = Fraction(total, n_bases)
    return QsrDecision(reject=avg < cfg.theta_qs, sampled_avg=avg)
