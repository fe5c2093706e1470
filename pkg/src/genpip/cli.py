"""Command-line frontend.

Subcommands: index, run, synth, sweep, stats, compare.  Exit codes:
0 success, 1 runtime/I-O failure, 2 argument validation.  Progress and
human-readable notes go to stderr; machine output goes to files or
stdout only.  All randomness flows from explicit --seed options.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import costmodel as cm
from . import genio
from .chunkqc import QsrConfig
from .genio import parse_fasta, parse_fastq, write_fastq, write_ground_truth, write_paf
from .mapdp import AlignParams, ChainParams
from .pipeline import (
    ErConfig,
    Mode,
    PipelineConfig,
    analyze_dataset,
    build_report,
    rejection_metrics,
    report_json,
    run_dataset,
    simulate_timing,
)
from .refindex import IndexParams, build_index, load_index, save_index

COST_ENV_VAR = "GENPIP_COST_CONFIG"


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load_cost(path: str | None) -> cm.CostModel:
    path = path or os.environ.get(COST_ENV_VAR)
    if path is None:
        return cm.default_cost_model()
    return cm.load_cost_config(path)


@click.group()
@click.version_option()
def main() -> None:
    """Chunk-pipelined read mapping with early rejection, plus a timing
    and energy simulator of the staged architecture."""


@main.command("index")
@click.option("--ref", "ref_path", required=True, type=click.Path(), help="Reference FASTA.")
@click.option("-o", "--output", required=True, type=click.Path(), help="Index file to write.")
@click.option("--k", default=15, show_default=True, help="k-mer length (1-31).")
@click.option("--w", default=10, show_default=True, help="Minimizer window size.")
@click.option(
    "--forward-only", is_flag=True,
    help="Index forward-strand minimizers only (reverse-complement reads will not map).",
)
@click.option("--ambiguity-seed", default=0, show_default=True,
              help="Seed for resolving IUPAC ambiguity codes.")
def cmd_index(ref_path, output, k, w, forward_only, ambiguity_seed) -> None:
    """Build a minimizer index from a reference FASTA (done once)."""
    if not 1 <= k <= 31:
        raise click.BadParameter("k must be in [1, 31]", param_hint="--k")
    if w < 1:
        raise click.BadParameter("w must be >= 1", param_hint="--w")
    try:
        refs = parse_fasta(ref_path, ambiguity_seed)
        params = IndexParams(k=k, w=w, canonical=not forward_only)
        index = build_index(refs, params)
        save_index(index, output)
    except (OSError, ValueError) as exc:
        _fail(str(exc))
    n_keys = len(index.table)
    n_locs = sum(len(v) for v in index.table.values())
    click.echo(
        f"indexed {len(refs)} record(s), {n_keys} distinct minimizers, "
        f"{n_locs} locations ({n_locs / max(1, n_keys):.2f} per key)",
        err=True,
    )


def _mode_choice():
    return click.Choice([m.value for m in Mode])


def _pipeline_options(f):
    opts = [
        click.option("--chunk-size", default=300, show_default=True,
                     help="Chunk size in bases."),
        click.option("--nqs", default=2, show_default=True,
                     help="Sampled chunk count for quality rejection."),
        click.option("--theta-qs", default=7.0, show_default=True,
                     help="Phred threshold for quality rejection and read QC."),
        click.option("--ncm", default=5, show_default=True,
                     help="Consecutive chunks assembled for the chaining check."),
        click.option("--theta-cm", default=None, type=float,
                     help="Per-base chaining threshold [default: 0.005*match-weight]."),
        click.option("--theta-cm-read", default=None, type=float,
                     help="Read-level gate threshold [default: same as --theta-cm]."),
        click.option("--no-qsr", is_flag=True, help="Disable quality-score rejection."),
        click.option("--no-cmr", is_flag=True, help="Disable chunk-mapping rejection."),
        click.option("--cmr-strict-large-chunk", is_flag=True,
                     help="Score only the consecutive chunk batch, not the quality samples."),
        click.option("--no-read-gate", is_flag=True,
                     help="Align every chained read regardless of chaining score."),
        click.option("--match-weight", default=None, type=float,
                     help="Chaining score per anchor [default: k]."),
        click.option("--gap-coef", default=0.1, show_default=True,
                     help="Chaining penalty per base of diagonal deviation."),
        click.option("--max-gap", default=5000, show_default=True,
                     help="Maximum anchor gap in bases."),
        click.option("--min-chain-anchors", default=1, show_default=True),
        click.option("--align-match", default=2, show_default=True),
        click.option("--align-mismatch", default=-4, show_default=True),
        click.option("--align-gap-open", default=-4, show_default=True),
        click.option("--align-gap-extend", default=-2, show_default=True),
        click.option("--band", default=500, show_default=True,
                     help="Alignment band half-width in bases."),
        click.option("--flank", default=100, show_default=True,
                     help="Reference flank around the chain span."),
        click.option("--max-occ", default=500, show_default=True,
                     help="Drop minimizers with more reference hits than this."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _build_config(index_params, **kw) -> PipelineConfig:
    match_weight = kw["match_weight"]
    if match_weight is None:
        match_weight = float(index_params.k)
    theta_cm = kw["theta_cm"]
    if theta_cm is None:
        theta_cm = 0.005 * match_weight
    return PipelineConfig(
        chunk_size=kw["chunk_size"],
        er=ErConfig(
            qsr=QsrConfig(n_qs=kw["nqs"], theta_qs=kw["theta_qs"]),
            n_cm=kw["ncm"],
            theta_cm=theta_cm,
            qsr_enabled=not kw["no_qsr"],
            cmr_enabled=not kw["no_cmr"],
            cmr_strict=kw["cmr_strict_large_chunk"],
        ),
        chain_params=ChainParams(
            match_weight=match_weight,
            gap_coef=kw["gap_coef"],
            max_gap=kw["max_gap"],
            min_chain_anchors=kw["min_chain_anchors"],
            anchor_len=index_params.k,
        ),
        align_params=AlignParams(
            match=kw["align_match"],
            mismatch=kw["align_mismatch"],
            gap_open=kw["align_gap_open"],
            gap_extend=kw["align_gap_extend"],
            band=kw["band"],
            flank=kw["flank"],
        ),
        max_occ=kw["max_occ"],
        theta_cm_read=kw["theta_cm_read"],
        read_gate_enabled=not kw["no_read_gate"],
    )


def _load_inputs(index_path, ref_path, reads_path):
    if not Path(index_path).exists():
        _fail(f"index file not found: {index_path}")
    if not Path(reads_path).exists():
        _fail(f"reads file not found: {reads_path}")
    index = load_index(index_path)
    refs = parse_fasta(ref_path)
    reads = list(parse_fastq(reads_path))
    return index, refs, reads


def _execute(reads, index, refs, cfg, mode, cost, threads, oracle, buffer_stalls):
    threads = threads or os.cpu_count() or 1
    analyses = analyze_dataset(reads, index, refs, cfg, threads=threads)
    run = run_dataset(reads, index, refs, cfg, mode, analyses=analyses)
    timing = simulate_timing(
        run.jobs_by_read,
        cost,
        mode,
        model_buffer_stalls=buffer_stalls,
        read_lens=[len(r.bases) for r in reads],
    )
    energy = cm.energy_total(run.work, cost, mode.value)
    metrics = None
    if oracle:
        oracle_run = run_dataset(reads, index, refs, cfg, Mode.CP, analyses=analyses)
        metrics = rejection_metrics(
            run.results, oracle_run.results, cfg.er.qsr.theta_qs
        )
    return run, timing, energy, metrics


@main.command("run")
@click.option("--index", "index_path", required=True, type=click.Path())
@click.option("--ref", "ref_path", required=True, type=click.Path(),
              help="Reference FASTA (must match the index).")
@click.option("--reads", "reads_path", required=True, type=click.Path())
@click.option("--mode", required=True, type=_mode_choice())
@click.option("-o", "--output", required=True, type=click.Path(), help="Report JSON.")
@click.option("--paf", "paf_path", default=None, type=click.Path(),
              help="Also write mappings in PAF format.")
@click.option("--oracle", is_flag=True,
              help="Run the no-ER chunk pipeline too and report false-negative ratios.")
@click.option("--per-read", is_flag=True, help="Include per-read results in the report.")
@click.option("--cost", "cost_path", default=None, type=click.Path(),
              help=f"Cost config (or ${COST_ENV_VAR}).")
@click.option("--threads", default=None, type=int,
              help="Worker threads [default: available parallelism].")
@click.option("--model-buffer-stalls", is_flag=True,
              help="Block basecalling when the chunk buffer is full instead of erroring.")
@_pipeline_options
def cmd_run(index_path, ref_path, reads_path, mode, output, paf_path, oracle,
            per_read, cost_path, threads, model_buffer_stalls, **kw) -> None:
    """Map a read set and simulate the timing/energy of one mode."""
    try:
        index, refs, reads = _load_inputs(index_path, ref_path, reads_path)
        cost = _load_cost(cost_path)
        cfg = _build_config(index.params, **kw)
        mode = Mode(mode)
        run, timing, energy, metrics = _execute(
            reads, index, refs, cfg, mode, cost, threads, oracle, model_buffer_stalls
        )
        report = build_report(run, timing, energy, metrics, include_reads=per_read)
        with open(output, "w") as fh:
            fh.write(report_json(report))
        if paf_path:
            with open(paf_path, "w") as fh:
                write_paf(run.results, [len(r.bases) for r in reads], fh)
    except (OSError, ValueError) as exc:
        _fail(str(exc))
    click.echo(
        f"{mode.value}: {len(reads)} reads, makespan {timing.makespan_ns} ns, "
        f"{run.work.reads_mapped} mapped", err=True,
    )


@main.command("synth")
@click.option("--ref", "ref_path", required=True, type=click.Path())
@click.option("-o", "--output", required=True, type=click.Path(), help="FASTQ to write.")
@click.option("--truth", "truth_path", default=None, type=click.Path(),
              help="Ground-truth JSONL sidecar.")
@click.option("--num-reads", default=1000, show_default=True)
@click.option("--len-min", default=900, show_default=True)
@click.option("--len-max", default=2100, show_default=True)
@click.option("--sub-rate", default=0.03, show_default=True)
@click.option("--ins-rate", default=0.015, show_default=True)
@click.option("--del-rate", default=0.015, show_default=True)
@click.option("--junk-frac", default=0.0, show_default=True,
              help="Fraction of reads drawn as uniform random sequence.")
@click.option("--lowq-frac", default=0.0, show_default=True,
              help="Fraction of reads with qualities below the QC threshold.")
@click.option("--qual-high-mean", default=12.0, show_default=True)
@click.option("--qual-low-mean", default=3.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
def cmd_synth(ref_path, output, truth_path, num_reads, len_min, len_max, sub_rate,
              ins_rate, del_rate, junk_frac, lowq_frac, qual_high_mean,
              qual_low_mean, seed) -> None:
    """Generate a labelled synthetic read set from a reference."""
    try:
        ref = parse_fasta(ref_path)[0]
        params = genio.SynthParams(
            num_reads=num_reads, len_min=len_min, len_max=len_max,
            sub_rate=sub_rate, ins_rate=ins_rate, del_rate=del_rate,
            junk_frac=junk_frac, lowq_frac=lowq_frac,
            qual_high_mean=qual_high_mean, qual_low_mean=qual_low_mean,
            rng_seed=seed,
        )
        reads, truths = genio.synth_reads(ref, params)
        with open(output, "w") as fh:
            write_fastq(reads, fh)
        if truth_path:
            with open(truth_path, "w") as fh:
                write_ground_truth(truths, fh)
    except (OSError, ValueError) as exc:
        _fail(str(exc))
    click.echo(f"wrote {len(reads)} reads to {output}", err=True)


@main.command("stats")
@click.option("--reads", "reads_path", required=True, type=click.Path())
def cmd_stats(reads_path) -> None:
    """Print dataset statistics (counts, lengths, qualities) as JSON."""
    try:
        stats = genio.dataset_stats(parse_fastq(reads_path))
    except (OSError, ValueError) as exc:
        _fail(str(exc))
    click.echo(json.dumps(stats.to_dict(), sort_keys=True, indent=2))


SWEEPABLE = ("n_qs", "n_cm", "chunk_size", "theta_qs", "theta_cm")


def _apply_sweep_value(kw: dict, param: str, value: float) -> None:
    key = {"n_qs": "nqs", "n_cm": "ncm", "chunk_size": "chunk_size",
           "theta_qs": "theta_qs", "theta_cm": "theta_cm"}[param]
    kw[key] = int(value) if param in ("n_qs", "n_cm", "chunk_size") else value


@main.command("sweep")
@click.option("--index", "index_path", required=True, type=click.Path())
@click.option("--ref", "ref_path", required=True, type=click.Path())
@click.option("--reads", "reads_path", required=True, type=click.Path())
@click.option("--param", required=True, help="One of: " + ", ".join(SWEEPABLE))
@click.option("--values", required=True, help="Comma-separated values, swept in order.")
@click.option("-o", "--output", required=True, type=click.Path(), help="CSV to write.")
@click.option("--cost", "cost_path", default=None, type=click.Path())
@click.option("--threads", default=None, type=int,
              help="Worker threads [default: available parallelism].")
@_pipeline_options
def cmd_sweep(index_path, ref_path, reads_path, param, values, output, cost_path,
              threads, **kw) -> None:
    """Sweep one early-rejection parameter and tabulate the metrics."""
    param_norm = param.replace("-", "_")
    if param_norm in ("nqs", "ncm"):
        param_norm = {"nqs": "n_qs", "ncm": "n_cm"}[param_norm]
    if param_norm not in SWEEPABLE:
        raise click.BadParameter(
            f"unknown parameter {param!r}; choose from {', '.join(SWEEPABLE)}",
            param_hint="--param",
        )
    try:
        value_list = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter("values must be numbers", param_hint="--values")
    if not value_list:
        raise click.BadParameter("need at least one value", param_hint="--values")
    try:
        index, refs, reads = _load_inputs(index_path, ref_path, reads_path)
        cost = _load_cost(cost_path)
        rows = []
        analyses = None
        last_chunk_size = None
        threads = threads or os.cpu_count() or 1
        for value in value_list:
            kw_i = dict(kw)
            _apply_sweep_value(kw_i, param_norm, value)
            cfg = _build_config(index.params, **kw_i)
            if cfg.chunk_size != last_chunk_size:
                analyses = analyze_dataset(reads, index, refs, cfg, threads=threads)
                last_chunk_size = cfg.chunk_size
            run = run_dataset(reads, index, refs, cfg, Mode.CP_ER, analyses=analyses)
            oracle = run_dataset(reads, index, refs, cfg, Mode.CP, analyses=analyses)
            timing = simulate_timing(
                run.jobs_by_read, cost, Mode.CP_ER,
                read_lens=[len(r.bases) for r in reads],
            )
            energy = cm.energy_total(run.work, cost, Mode.CP_ER.value)
            metrics = rejection_metrics(run.results, oracle.results, cfg.er.qsr.theta_qs)
            rows.append(
                {
                    "param": param_norm,
                    "value": value,
                    "rejection_ratio": metrics["rejection_ratio"],
                    "fn_ratio_qsr": metrics["fn_ratio_qsr"],
                    "fn_ratio_cmr": metrics["fn_ratio_cmr"],
                    "chunks_basecalled": run.work.chunks_basecalled,
                    "makespan_ns": timing.makespan_ns,
                    "energy_nj": float(energy),
                }
            )
        with open(output, "w") as fh:
            cols = list(rows[0])
            fh.write(",".join(cols) + "\n")
            for row in rows:
                fh.write(",".join(str(row[c]) for c in cols) + "\n")
    except (OSError, ValueError) as exc:
        _fail(str(exc))
    click.echo(f"wrote {len(rows)} sweep rows to {output}", err=True)


@main.command("compare")
@click.argument("report_a", type=click.Path())
@click.argument("report_b", type=click.Path())
def cmd_compare(report_a, report_b) -> None:
    """Speedup/energy/work ratios of report A over report B."""
    try:
        with open(report_a) as fh:
            a = json.load(fh)
        with open(report_b) as fh:
            b = json.load(fh)
        result = cm.compare(a, b)
    except (OSError, ValueError, KeyError) as exc:
        _fail(str(exc))
    click.echo(json.dumps(result.to_dict(), sort_keys=True, indent=2))
    width = max(len(k) for k in result.to_dict())
    for key, val in result.to_dict().items():
        click.echo(f"{key.ljust(width)}  {val:10.4f}x", err=True)


if __name__ == "__main__":
    main()
