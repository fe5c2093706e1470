"""Per-read orchestration of the analysis flow and its timing simulation.

Four execution regimes share one functional core:

  sequential  whole dataset basecalled, then QC, then mapping; no overlap
  decoupled   read-granularity two-machine pipeline with an explicit
              transfer stage between basecalling and mapping
  cp          chunk pipeline: per-chunk basecall/quality/seed/chain jobs
              overlap across stages
  cp-er       cp plus early rejection: quality check on sampled chunks,
              then a chaining check on a larger assembled chunk

The functional outcome of a read is mode-independent for reads that
survive every gate; modes differ in which gates fire, which jobs are
emitted, and how those jobs overlap in time.  The event-driven simulator
treats each stage as a set of identical FIFO servers and is exact and
deterministic in integer nanoseconds.
"""

from __future__ import annotations

import heapq
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

from . import mapdp
from .chunkqc import (
    Chunk,
    QsrConfig,
    chunk_sqs,
    qsr_decide,
    qsr_sample_indices,
    split_into_chunks,
)
from .costmodel import CHUNK_STAGES, CostModel
from .genio import Read, Reference
from .mapdp import (
    AlignmentResult,
    AlignParams,
    Chain,
    ChainParams,
    MappingResult,
    chain,
    cmr_decide,
    merge_chunk_anchors,
    read_gate,
)
from .refindex import Anchor, MinimizerIndex, seed_chunk


class Mode(str, Enum):
    SEQUENTIAL = "sequential"
    DECOUPLED = "decoupled"
    CP = "cp"
    CP_ER = "cp-er"


STAGE_ORDER = {"BC": 0, "CQS": 1, "XFER": 2, "SEED": 3, "CHAIN": 4, "ALIGN": 5}

READ_LEVEL = None  # chunk_index value for read-level jobs

BYTES_PER_BASE = 2  # base + quality


@dataclass(frozen=True)
class ErConfig:
    """Early-rejection knobs: QSR sampling plus the CMR chaining check."""

    qsr: QsrConfig = field(default_factory=QsrConfig)
    n_cm: int = 5
    theta_cm: float = 0.075
    qsr_enabled: bool = True
    cmr_enabled: bool = True
    cmr_strict: bool = False

    def __post_init__(self) -> None:
        if self.cmr_enabled and self.n_cm < 1:
            raise ValueError("n_cm must be >= 1 when CMR is enabled")


@dataclass(frozen=True)
class PipelineConfig:
    chunk_size: int = 300
    er: ErConfig = field(default_factory=ErConfig)
    chain_params: ChainParams = field(default_factory=ChainParams)
    align_params: AlignParams = field(default_factory=AlignParams)
    max_occ: int = 500
    theta_cm_read: float | None = None  # read-level gate; defaults to er.theta_cm
    read_gate_enabled: bool = True

    @property
    def read_gate_theta(self) -> float:
        return self.er.theta_cm if self.theta_cm_read is None else self.theta_cm_read


@dataclass
class WorkCounts:
    chunks_basecalled: int = 0
    chunks_cqs: int = 0
    chunks_seeded: int = 0
    chunks_chained: int = 0
    reads_aligned: int = 0
    bases_aligned: int = 0
    reads_rejected_qsr: int = 0
    reads_rejected_cmr: int = 0
    reads_unmapped: int = 0
    reads_mapped: int = 0
    bytes_transferred: int = 0

    def to_dict(self) -> dict:
        return dict(vars(self))


@dataclass(frozen=True)
class StageJob:
    """One unit of modeled work; service time is priced by the cost model."""

    read_id: str
    read_index: int
    seq: int
    stage: str
    chunk_index: int | None
    amount: int  # bases, or bytes for XFER
    service_ns: int | None = None


@dataclass(frozen=True)
class TimingEvent:
    time: int
    stage: str
    job: StageJob


@dataclass
class TimingResult:
    makespan_ns: int
    stage_busy: dict[str, int]
    stage_units: dict[str, int]
    utilization: dict[str, float]
    trace: list[TimingEvent] | None = None


class ReadAnalysis:
    """Mode-independent functional results for one read.

    Holds the chunk decomposition, quality sums, per-chunk anchors, the
    merged read-level chains, and (lazily) the alignment of the best
    chain.  Execution modes draw on subsets of this; a read accepted by
    every gate yields the same mapping in every mode.
    """

    def __init__(
        self,
        read: Read,
        chunks: list[Chunk],
        sqs: list[int],
        chunk_anchors: list[list[Anchor]],
        chains: list[Chain],
        refs: Sequence[Reference],
        align_params: AlignParams,
    ):
        self.read = read
        self.chunks = chunks
        self.sqs = sqs
        self.aqs = Fraction(sum(sqs), len(read.bases))
        self.chunk_anchors = chunk_anchors
        self.chains = chains
        self._refs = refs
        self._align_params = align_params
        self._alignment: AlignmentResult | None = None
        self._aligned = False

    @property
    def num_chunks(self) -> int:
        return len(self.chunks)

    @property
    def best_chain(self) -> Chain | None:
        return self.chains[0] if self.chains else None

    def alignment(self) -> AlignmentResult | None:
        if not self._aligned:
            self._aligned = True
            best = self.best_chain
            if best is not None:
                self._alignment = mapdp.align(
                    self.read, self._refs[best.ref_id], best, self._align_params
                )
        return self._alignment


def analyze_read(
    read: Read,
    index: MinimizerIndex,
    refs: Sequence[Reference],
    cfg: PipelineConfig,
) -> ReadAnalysis:
    chunks = split_into_chunks(read, cfg.chunk_size)
    sqs = [chunk_sqs(c) for c in chunks]
    anchors = [seed_chunk(c, index, cfg.max_occ) for c in chunks]
    merged = merge_chunk_anchors(
        list(zip(chunks, anchors)), len(read.bases), index.params.k
    )
    chains = chain(merged, cfg.chain_params)
    return ReadAnalysis(read, chunks, sqs, anchors, chains, refs, cfg.align_params)


def analyze_dataset(
    reads: Sequence[Read],
    index: MinimizerIndex,
    refs: Sequence[Reference],
    cfg: PipelineConfig,
    threads: int = 1,
) -> list[ReadAnalysis]:
    _check_index(index, refs)
    if threads <= 1:
        return [analyze_read(r, index, refs, cfg) for r in reads]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda r: analyze_read(r, index, refs, cfg), reads))


def _check_index(index: MinimizerIndex, refs: Sequence[Reference]) -> None:
    meta = [(r.name, r.length) for r in refs]
    if meta != list(index.ref_meta):
        raise ValueError(
            "reference records do not match the index "
            f"(index has {index.ref_meta}, got {meta})"
        )


class _JobEmitter:
    def __init__(self, read: Read, read_index: int):
        self.read = read
        self.read_index = read_index
        self.jobs: list[StageJob] = []

    def emit(self, stage: str, chunk_index: int | None, amount: int) -> None:
        self.jobs.append(
            StageJob(
                read_id=self.read.id,
                read_index=self.read_index,
                seq=len(self.jobs),
                stage=stage,
                chunk_index=chunk_index,
                amount=amount,
            )
        )


def _finish_read(
    read: Read,
    a: ReadAnalysis,
    cfg: PipelineConfig,
    index: MinimizerIndex,
    em: _JobEmitter,
) -> MappingResult:
    """Read-level gate and alignment for a fully basecalled, mapped read."""
    aqs = float(a.aqs)
    best = a.best_chain
    score = best.score if best else 0.0
    if best is None:
        return MappingResult(read.id, mapdp.UNMAPPED, read_aqs=aqs)
    if cfg.read_gate_enabled and not read_gate(
        score, len(read.bases), cfg.read_gate_theta
    ):
        return MappingResult(
            read.id, mapdp.UNMAPPED, best_chain_score=score, read_aqs=aqs
        )
    aln = a.alignment()
    if aln is None or aln.score <= 0:
        return MappingResult(
            read.id, mapdp.UNMAPPED, best_chain_score=score, read_aqs=aqs
        )
    em.emit("ALIGN", READ_LEVEL, len(read.bases))
    read_len = len(read.bases)
    if best.strand == "+":
        read_span = (aln.read_start, aln.read_end)
    else:
        read_span = (read_len - aln.read_end, read_len - aln.read_start)
    ref_name, ref_len = index.ref_meta[best.ref_id]
    return MappingResult(
        read_id=read.id,
        status=mapdp.MAPPED,
        best_chain_score=score,
        alignment_score=aln.score,
        region=(best.ref_id, aln.ref_start, aln.ref_end, best.strand),
        ref_name=ref_name,
        ref_len=ref_len,
        read_span=read_span,
        read_aqs=aqs,
    )


def _qc_fails(a: ReadAnalysis, cfg: PipelineConfig) -> bool:
    return a.aqs < cfg.er.qsr.theta_qs


def _run_read_bulk(
    read: Read,
    a: ReadAnalysis,
    mode: Mode,
    cfg: PipelineConfig,
    index: MinimizerIndex,
    read_index: int,
) -> tuple[MappingResult, list[StageJob]]:
    """sequential / decoupled / cp: every chunk is basecalled.

    In cp the per-chunk seed/chain work happens eagerly before the
    whole-read quality check can fire, so low-quality reads still cost
    mapping work; the serial modes run QC first and skip mapping.
    """
    em = _JobEmitter(read, read_index)
    n = a.num_chunks
    if mode is Mode.CP:
        for c in range(n):
            em.emit("BC", c, len(a.chunks[c]))
            em.emit("CQS", c, len(a.chunks[c]))
            em.emit("SEED", c, len(a.chunks[c]))
            em.emit("CHAIN", c, len(a.chunks[c]))
        if _qc_fails(a, cfg):
            return (
                MappingResult(read.id, mapdp.UNMAPPED, read_aqs=float(a.aqs)),
                em.jobs,
            )
    else:
        for c in range(n):
            em.emit("BC", c, len(a.chunks[c]))
        if mode is Mode.DECOUPLED:
            em.emit("XFER", READ_LEVEL, BYTES_PER_BASE * len(read.bases))
        for c in range(n):
            em.emit("CQS", c, len(a.chunks[c]))
        if _qc_fails(a, cfg):
            return (
                MappingResult(read.id, mapdp.UNMAPPED, read_aqs=float(a.aqs)),
                em.jobs,
            )
        for c in range(n):
            em.emit("SEED", c, len(a.chunks[c]))
        for c in range(n):
            em.emit("CHAIN", c, len(a.chunks[c]))
    return _finish_read(read, a, cfg, index, em), em.jobs


def _run_read_er(
    read: Read,
    a: ReadAnalysis,
    cfg: PipelineConfig,
    index: MinimizerIndex,
    read_index: int,
) -> tuple[MappingResult, list[StageJob]]:
    """cp-er: QSR samples first, then the CMR batch, then the rest."""
    em = _JobEmitter(read, read_index)
    er = cfg.er
    n = a.num_chunks
    processed: list[int] = []
    if er.qsr_enabled:
        samples = qsr_sample_indices(n, er.qsr.n_qs)
        for c in samples:
            em.emit("BC", c, len(a.chunks[c]))
            em.emit("CQS", c, len(a.chunks[c]))
        decision = qsr_decide([a.chunks[c] for c in samples], er.qsr)
        processed = list(samples)
        if decision.reject:
            return MappingResult(read.id, mapdp.REJ_QSR), em.jobs
    if er.cmr_enabled:
        batch = [c for c in range(n) if c not in processed][: er.n_cm]
        for c in batch:
            em.emit("BC", c, len(a.chunks[c]))
            em.emit("CQS", c, len(a.chunks[c]))
        mapped_set = sorted(processed + batch)
        for c in mapped_set:
            em.emit("SEED", c, len(a.chunks[c]))
            em.emit("CHAIN", c, len(a.chunks[c]))
        score_set = batch if (er.cmr_strict and batch) else mapped_set
        sub_anchors = merge_chunk_anchors(
            [(a.chunks[c], a.chunk_anchors[c]) for c in score_set],
            len(read.bases),
            index.params.k,
        )
        sub_chains = chain(sub_anchors, cfg.chain_params)
        sub_score = sub_chains[0].score if sub_chains else 0.0
        bases_examined = sum(len(a.chunks[c]) for c in score_set)
        if cmr_decide(sub_score, bases_examined, er.theta_cm):
            return (
                MappingResult(read.id, mapdp.REJ_CMR, best_chain_score=sub_score),
                em.jobs,
            )
        processed = mapped_set
    else:
        for c in sorted(processed):
            em.emit("SEED", c, len(a.chunks[c]))
            em.emit("CHAIN", c, len(a.chunks[c]))
    done = set(processed)
    for c in range(n):
        if c in done:
            continue
        em.emit("BC", c, len(a.chunks[c]))
        em.emit("CQS", c, len(a.chunks[c]))
        em.emit("SEED", c, len(a.chunks[c]))
        em.emit("CHAIN", c, len(a.chunks[c]))
    if _qc_fails(a, cfg):
        return (
            MappingResult(read.id, mapdp.UNMAPPED, read_aqs=float(a.aqs)),
            em.jobs,
        )
    return _finish_read(read, a, cfg, index, em), em.jobs


def run_read(
    read: Read,
    analysis: ReadAnalysis,
    mode: Mode | str,
    cfg: PipelineConfig,
    index: MinimizerIndex,
    read_index: int = 0,
) -> tuple[MappingResult, list[StageJob]]:
    mode = Mode(mode)
    if mode is Mode.CP_ER:
        return _run_read_er(read, analysis, cfg, index, read_index)
    return _run_read_bulk(read, analysis, mode, cfg, index, read_index)


@dataclass
class DatasetRun:
    mode: Mode
    results: list[MappingResult]
    jobs_by_read: list[list[StageJob]]
    work: WorkCounts


def run_dataset(
    reads: Sequence[Read],
    index: MinimizerIndex,
    refs: Sequence[Reference],
    cfg: PipelineConfig,
    mode: Mode | str,
    *,
    analyses: Sequence[ReadAnalysis] | None = None,
    threads: int = 1,
) -> DatasetRun:
    """Evaluate every read in input order; deterministic for any thread count."""
    mode = Mode(mode)
    if analyses is None:
        analyses = analyze_dataset(reads, index, refs, cfg, threads=threads)
    results = []
    jobs_by_read = []
    for i, (read, a) in enumerate(zip(reads, analyses)):
        result, jobs = run_read(read, a, mode, cfg, index, read_index=i)
        results.append(result)
        jobs_by_read.append(jobs)
    return DatasetRun(mode, results, jobs_by_read, _tally(results, jobs_by_read))


def _tally(results, jobs_by_read) -> WorkCounts:
    w = WorkCounts()
    for jobs in jobs_by_read:
        for job in jobs:
            if job.stage == "BC":
                w.chunks_basecalled += 1
            elif job.stage == "CQS":
                w.chunks_cqs += 1
            elif job.stage == "SEED":
                w.chunks_seeded += 1
            elif job.stage == "CHAIN":
                w.chunks_chained += 1
            elif job.stage == "ALIGN":
                w.reads_aligned += 1
                w.bases_aligned += job.amount
            elif job.stage == "XFER":
                w.bytes_transferred += job.amount
    for r in results:
        if r.status == mapdp.REJ_QSR:
            w.reads_rejected_qsr += 1
        elif r.status == mapdp.REJ_CMR:
            w.reads_rejected_cmr += 1
        elif r.status == mapdp.UNMAPPED:
            w.reads_unmapped += 1
        else:
            w.reads_mapped += 1
    return w


def _service_ns(job: StageJob, cost: CostModel) -> int:
    if job.service_ns is not None:
        return job.service_ns
    if job.stage in CHUNK_STAGES:
        return max(1, cost.stages[job.stage].latency_ns)
    if job.stage == "ALIGN":
        return max(1, round(job.amount * cost.align_ns_per_base))
    if job.stage == "XFER":
        return max(1, round(job.amount * cost.xfer_ns_per_byte))
    raise ValueError(f"unknown stage {job.stage}")


def _resource_of(stage: str, mode: Mode) -> str:
    if mode is Mode.SEQUENTIAL:
        return "cpu"
    if mode is Mode.DECOUPLED:
        if stage == "BC":
            return "bc_machine"
        if stage == "XFER":
            return "xfer_link"
        return "map_machine"
    return stage


def _units_of(resource: str, mode: Mode, cost: CostModel) -> int:
    if mode in (Mode.SEQUENTIAL, Mode.DECOUPLED):
        return 1
    if resource in CHUNK_STAGES:
        return cost.stages[resource].units
    if resource == "ALIGN":
        return cost.align_units
    if resource == "XFER":
        return cost.xfer_units
    return 1


def _build_preds(jobs: Sequence[StageJob]) -> list[list[int]]:
    """Precedence edges within one read's job list (indices into it).

    Chunk DAG: BC -> CQS -> SEED -> CHAIN per chunk; XFER waits on every
    BC job of the read and precedes each chunk's first mapping-side job;
    ALIGN waits on every CHAIN job.
    """
    by_key = {(j.stage, j.chunk_index): i for i, j in enumerate(jobs)}
    bc_ids = [i for i, j in enumerate(jobs) if j.stage == "BC"]
    chain_ids = [i for i, j in enumerate(jobs) if j.stage == "CHAIN"]
    xfer_id = next((i for i, j in enumerate(jobs) if j.stage == "XFER"), None)
    preds: list[list[int]] = []
    for i, job in enumerate(jobs):
        if job.stage == "BC":
            preds.append([])
        elif job.stage == "XFER":
            preds.append(list(bc_ids))
        elif job.stage == "CQS":
            p = [by_key[("BC", job.chunk_index)]]
            if xfer_id is not None:
                p.append(xfer_id)
            preds.append(p)
        elif job.stage == "SEED":
            preds.append([by_key[("CQS", job.chunk_index)]])
        elif job.stage == "CHAIN":
            preds.append([by_key[("SEED", job.chunk_index)]])
        elif job.stage == "ALIGN":
            preds.append(list(chain_ids))
        else:
            raise ValueError(f"unknown stage {job.stage}")
    return preds


def simulate_timing(
    jobs_by_read: Sequence[Sequence[StageJob]],
    cost: CostModel,
    mode: Mode | str,
    *,
    model_buffer_stalls: bool = False,
    read_lens: Sequence[int] | None = None,
    collect_trace: bool = False,
) -> TimingResult:
    """Event-driven simulation of the staged architecture.

    Each stage is a set of identical FIFO servers; a job becomes eligible
    when its predecessors finish, and ties break on (eligibility time,
    read order, emission order) so runs are bit-reproducible.  Buffer
    capacities are checked as hard errors by default; with
    model_buffer_stalls the chunk buffer blocks basecalling instead.
    """
    mode = Mode(mode)
    flat: list[StageJob] = []
    preds_flat: list[list[int]] = []
    read_of: list[int] = []
    for r, jobs in enumerate(jobs_by_read):
        base = len(flat)
        local = _build_preds(jobs)
        for job, local_preds in zip(jobs, local):
            flat.append(job)
            preds_flat.append([base + p for p in local_preds])
            read_of.append(r)

    _check_buffers(jobs_by_read, cost, read_lens)

    n = len(flat)
    service = [_service_ns(j, cost) for j in flat]
    resource = [_resource_of(j.stage, mode) for j in flat]
    succs: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for i, ps in enumerate(preds_flat):
        indeg[i] = len(ps)
        for p in ps:
            succs[p].append(i)

    resources = sorted(set(resource))
    free = {res: _units_of(res, mode, cost) for res in resources}
    ready: dict[str, list] = {res: [] for res in resources}
    stage_busy: dict[str, int] = {}
    events: list[tuple[int, int]] = []  # (completion time, job id)
    trace: list[TimingEvent] | None = [] if collect_trace else None

    # chunk-buffer occupancy bookkeeping for the optional blocking model
    held = 0
    jobs_left = [len(jobs) for jobs in jobs_by_read]
    bc_held = [0] * len(jobs_by_read)

    def push_ready(gid: int, t: int) -> None:
        job = flat[gid]
        heapq.heappush(ready[resource[gid]], (t, job.read_index, job.seq, gid))

    def dispatch(t: int) -> None:
        nonlocal held
        for res in resources:
            queue = ready[res]
            while free[res] > 0 and queue:
                gid = queue[0][3]
                job = flat[gid]
                if model_buffer_stalls and job.stage == "BC":
                    if held + job.amount > cost.chunk_buffer_bases:
                        break  # stage stalls until buffer space frees up
                    held += job.amount
                    bc_held[read_of[gid]] += job.amount
                heapq.heappop(queue)
                free[res] -= 1
                stage_busy[job.stage] = stage_busy.get(job.stage, 0) + service[gid]
                heapq.heappush(events, (t + service[gid], gid))

    for gid in range(n):
        if indeg[gid] == 0:
            push_ready(gid, 0)
    dispatch(0)
    makespan = 0
    while events:
        t = events[0][0]
        while events and events[0][0] == t:
            _, gid = heapq.heappop(events)
            job = flat[gid]
            free[resource[gid]] += 1
            makespan = t
            if trace is not None:
                trace.append(TimingEvent(time=t, stage=job.stage, job=job))
            r = read_of[gid]
            jobs_left[r] -= 1
            if model_buffer_stalls and jobs_left[r] == 0:
                held -= bc_held[r]
            for s in succs[gid]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    push_ready(s, t)
        dispatch(t)

    stages_seen = sorted({j.stage for j in flat}, key=STAGE_ORDER.get)
    stage_units = {
        st: _units_of(_resource_of(st, mode), mode, cost) for st in stages_seen
    }
    utilization = {
        st: (
            stage_busy.get(st, 0) / (makespan * stage_units[st])
            if makespan > 0
            else 0.0
        )
        for st in stages_seen
    }
    return TimingResult(
        makespan_ns=makespan,
        stage_busy={st: stage_busy.get(st, 0) for st in stages_seen},
        stage_units=stage_units,
        utilization=utilization,
        trace=trace,
    )


def _check_buffers(jobs_by_read, cost: CostModel, read_lens) -> None:
    for r, jobs in enumerate(jobs_by_read):
        bc_bases = sum(j.amount for j in jobs if j.stage == "BC")
        length = read_lens[r] if read_lens is not None else bc_bases
        if bc_bases > cost.chunk_buffer_bases:
            raise ValueError(
                f"read {r}: {bc_bases} basecalled bases overflow the "
                f"chunk buffer ({cost.chunk_buffer_bases})"
            )
        signal_bytes = int(BYTES_PER_BASE * length * cost.raw_signal_inflation)
        if signal_bytes > cost.read_queue_bytes:
            raise ValueError(
                f"read {r}: raw signal of {signal_bytes} bytes overflows the "
                f"read queue ({cost.read_queue_bytes})"
            )


def rejection_metrics(
    er_results: Sequence[MappingResult],
    oracle_results: Sequence[MappingResult],
    theta_qs: float,
) -> dict:
    """Rejection ratio plus false-negative ratios against a no-ER oracle.

    A QSR rejection is a false negative when the oracle's whole-read
    average quality is at or above theta; a CMR rejection is a false
    negative when the oracle mapped the read.  Ratios are 0 when their
    denominator is 0.
    """
    if [r.read_id for r in er_results] != [r.read_id for r in oracle_results]:
        raise ValueError("ER and oracle results cover different read sets")
    if any(r.status in (mapdp.REJ_QSR, mapdp.REJ_CMR) for r in oracle_results):
        raise ValueError("oracle results must come from a run without ER")
    n = len(er_results)
    oracle_by_id = {r.read_id: r for r in oracle_results}
    rejected = [r for r in er_results if r.status in (mapdp.REJ_QSR, mapdp.REJ_CMR)]
    qsr = [r for r in rejected if r.status == mapdp.REJ_QSR]
    cmr = [r for r in rejected if r.status == mapdp.REJ_CMR]
    fn_qsr = sum(
        1 for r in qsr if oracle_by_id[r.read_id].read_aqs >= theta_qs
    )
    fn_cmr = sum(
        1 for r in cmr if oracle_by_id[r.read_id].status == mapdp.MAPPED
    )
    return {
        "rejection_ratio": len(rejected) / n if n else 0.0,
        "fn_ratio_qsr": fn_qsr / len(qsr) if qsr else 0.0,
        "fn_ratio_cmr": fn_cmr / len(cmr) if cmr else 0.0,
    }


def build_report(
    run: DatasetRun,
    timing: TimingResult,
    energy_nj: Fraction,
    metrics: dict | None = None,
    *,
    include_reads: bool = False,
) -> dict:
    energy = int(energy_nj) if energy_nj.denominator == 1 else float(energy_nj)
    report = {
        "schema": 1,
        "mode": run.mode.value,
        "num_reads": len(run.results),
        "makespan_ns": timing.makespan_ns,
        "stages": [
            {
                "stage": st,
                "busy_ns": timing.stage_busy[st],
                "units": timing.stage_units[st],
                "utilization": timing.utilization[st],
            }
            for st in timing.stage_busy
        ],
        "work_counts": run.work.to_dict(),
        "energy_nj": energy,
        "metrics": metrics
        or {
            "rejection_ratio": (
                (run.work.reads_rejected_qsr + run.work.reads_rejected_cmr)
                / len(run.results)
                if run.results
                else 0.0
            ),
            "fn_ratio_qsr": None,
            "fn_ratio_cmr": None,
        },
    }
    if include_reads:
        report["reads"] = [
            {
                "id": r.read_id,
                "status": r.status,
                "best_chain_score": r.best_chain_score,
                "alignment_score": r.alignment_score,
                "region": (
                    [r.ref_name, r.region[1], r.region[2], r.region[3]]
                    if r.region
                    else None
                ),
                "read_span": list(r.read_span) if r.read_span else None,
            }
            for r in run.results
        ]
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
