"""Shipped synthetic benchmarks.

Desk-scale stand-ins for a real nanopore dataset: a seeded 1 Mbp random
reference plus read sets with a fixed composition of low-quality and
junk (unmappable) reads.  Every recipe is a pure function of its seed.
"""

from __future__ import annotations

import numpy as np

from .genio import GroundTruth, Read, Reference, SynthParams, synth_reads

REFERENCE_LENGTH = 1_000_000
REFERENCE_SEED = 42

# composition mirrors the evaluated small-genome dataset: 20.5% of reads
# low-quality, 10% unmappable
LOWQ_FRAC = 0.205
JUNK_FRAC = 0.10


def synthetic_reference(length: int = REFERENCE_LENGTH, seed: int = REFERENCE_SEED) -> Reference:
    rng = np.random.default_rng(seed)
    bases = rng.integers(0, 4, size=length)
    return Reference(name=f"synth{length}", bases="".join("ACGT"[b] for b in bases))


def benchmark_params(
    num_reads: int = 1000,
    len_min: int = 900,
    len_max: int = 2100,
    seed: int = 1,
) -> SynthParams:
    return SynthParams(
        num_reads=num_reads,
        len_min=len_min,
        len_max=len_max,
        sub_rate=0.03,
        ins_rate=0.015,
        del_rate=0.015,
        junk_frac=JUNK_FRAC,
        lowq_frac=LOWQ_FRAC,
        qual_high_mean=12.0,
        qual_low_mean=3.0,
        rng_seed=seed,
    )


def shipped_benchmark(
    ref: Reference | None = None,
) -> tuple[Reference, list[Read], list[GroundTruth]]:
    """The default 1000-read benchmark (seed 1) used by the mode and
    sensitivity studies."""
    if ref is None:
        ref = synthetic_reference()
    reads, truths = synth_reads(ref, benchmark_params())
    return ref, reads, truths


def long_read_benchmark(
    ref: Reference | None = None,
    num_reads: int = 200,
) -> tuple[Reference, list[Read], list[GroundTruth]]:
    """Long reads (25-35 chunks at the default chunk size) where early
    rejection saves a substantial share of basecalling work."""
    if ref is None:
        ref = synthetic_reference()
    params = benchmark_params(
        num_reads=num_reads, len_min=7500, len_max=10500, seed=7
    )
    reads, truths = synth_reads(ref, params)
    return ref, reads, truths
