"""Latency/energy/area parameters and derived accounting.

Stage latencies and per-op energies are calibration knobs: the shipped
defaults are round placeholders and nothing downstream depends on their
absolute values, only on structural ratios.  Power/area component values
are report-only and never feed timing.  All rates are carried as exact
rationals (ns, nJ) and component values as decimals so reports are
byte-deterministic across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

COST_SCHEMA = 1

CHUNK_STAGES = ("BC", "CQS", "SEED", "CHAIN")
ALL_STAGES = ("BC", "CQS", "XFER", "SEED", "CHAIN", "ALIGN")

Mode = str  # avoid importing pipeline; modes are plain strings here


class CostConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StageCost:
    latency_ns: int
    energy_nj: Fraction
    units: int = 1

    def __post_init__(self) -> None:
        if self.latency_ns < 0 or self.energy_nj < 0:
            raise CostConfigError("stage latency/energy must be >= 0")
        if self.units < 1:
            raise CostConfigError("unit_count must be >= 1")


@dataclass(frozen=True)
class Component:
    name: str
    module: str
    power_w: Decimal
    area_mm2: Decimal


@dataclass(frozen=True)
class CostModel:
    stages: Mapping[str, StageCost]
    align_ns_per_base: Fraction
    align_nj_per_base: Fraction
    xfer_ns_per_byte: Fraction
    xfer_nj_per_byte: Fraction
    align_units: int = 1
    xfer_units: int = 1
    raw_signal_inflation: Fraction = Fraction(10)
    read_queue_bytes: int = 6_000_000
    chunk_buffer_bases: int = 2_300_000
    components: Sequence[Component] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for name in CHUNK_STAGES:
            if name not in self.stages:
                raise CostConfigError(f"missing stage {name}")
        if min(self.align_ns_per_base, self.align_nj_per_base) < 0:
            raise CostConfigError("ALIGN rates must be >= 0")
        if min(self.xfer_ns_per_byte, self.xfer_nj_per_byte) < 0:
            raise CostConfigError("XFER rates must be >= 0")
        if self.raw_signal_inflation < 1:
            raise CostConfigError("raw_signal_inflation must be >= 1")


@dataclass(frozen=True)
class ComparisonReport:
    speedup: float
    energy_savings: float
    work_reduction: float

    def __post_init__(self) -> None:
        if min(self.speedup, self.energy_savings, self.work_reduction) <= 0:
            raise ValueError("comparison ratios must be > 0")

    def to_dict(self) -> dict:
        return {
            "speedup": self.speedup,
            "energy_savings": self.energy_savings,
            "work_reduction": self.work_reduction,
        }


# Shipped component budget: per-module power (W) and area (mm^2) values
# consumed by the area/power summary (report-only, never fed to timing).
_DEFAULT_COMPONENTS = (
    ("PIM basecaller", "basecalling", "27.1", "49.2"),
    ("Chunk quality summation (PIM-CQS)", "basecalling", "0.307", "0.0256"),
    ("In-memory seeding", "read_mapping", "28.2", "76.68"),
    ("Read mapping controller", "read_mapping", "1.346", "5.472"),
    ("DP units", "read_mapping", "85", "10.9"),
    ("Controller (buffers, AQS, rejection logic)", "controller", "5.3", "21.5"),
)


def default_cost_model() -> CostModel:
    return CostModel(
        stages={
            "BC": StageCost(1000, Fraction(5)),
            "CQS": StageCost(10, Fraction(1)),
            "SEED": StageCost(200, Fraction(2)),
            "CHAIN": StageCost(300, Fraction(3)),
        },
        align_ns_per_base=Fraction(1),
        align_nj_per_base=Fraction(1),
        # transferring a basecalled read between machines must cost more
        # than mapping a single chunk, or the two-machine pipeline would
        # spuriously beat the chunk pipeline on tail reads
        xfer_ns_per_byte=Fraction(1),
        xfer_nj_per_byte=Fraction(1),
        components=tuple(
            Component(n, m, Decimal(p), Decimal(a)) for n, m, p, a in _DEFAULT_COMPONENTS
        ),
    )


def _rational(value, what: str) -> Fraction:
    try:
        if isinstance(value, float):
            value = str(value)
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError):
        raise CostConfigError(f"{what}: cannot parse number {value!r}") from None


_TOP_KEYS = {
    "cost_schema", "stages", "align_ns_per_base", "align_nj_per_base",
    "xfer_ns_per_byte", "xfer_nj_per_byte", "align_units", "xfer_units",
    "raw_signal_inflation", "read_queue_bytes", "chunk_buffer_bases",
    "components",
}


def load_cost_config(path: str | Path, strict: bool = True) -> CostModel:
    """Load and validate a cost config (JSON key-value tree, schema 1).

    Numeric leaves may be ints, floats, or strings; strings are parsed
    exactly.  Unknown keys are rejected in strict mode.
    """
    with open(path) as fh:
        raw = json.load(fh)
    if raw.get("cost_schema") != COST_SCHEMA:
        raise CostConfigError(f"{path}: cost_schema must be {COST_SCHEMA}")
    if strict:
        unknown = set(raw) - _TOP_KEYS
        if unknown:
            raise CostConfigError(f"{path}: unknown keys {sorted(unknown)}")
    stages_raw = raw.get("stages", {})
    stages = {}
    for name in CHUNK_STAGES:
        if name not in stages_raw:
            raise CostConfigError(f"{path}: missing stage {name}")
    for name, spec in stages_raw.items():
        if name not in CHUNK_STAGES:
            raise CostConfigError(f"{path}: unknown stage {name}")
        if strict:
            unknown = set(spec) - {"latency_ns", "energy_nj", "units"}
            if unknown:
                raise CostConfigError(f"{path}: stage {name}: unknown keys {sorted(unknown)}")
        latency = spec.get("latency_ns")
        if latency is None:
            raise CostConfigError(f"{path}: stage {name}: missing latency_ns")
        if int(latency) < 0:
            raise CostConfigError(f"{path}: stage {name}: negative latency")
        stages[name] = StageCost(
            latency_ns=int(latency),
            energy_nj=_rational(spec.get("energy_nj", 0), f"stage {name} energy"),
            units=int(spec.get("units", 1)),
        )
    if "align_ns_per_base" not in raw:
        raise CostConfigError(f"{path}: missing stage ALIGN (align_ns_per_base)")
    components = []
    for entry in raw.get("components", []):
        if "module" not in entry:
            raise CostConfigError(f"{path}: component {entry.get('name')!r} has no module tag")
        components.append(
            Component(
                name=str(entry.get("name", "")),
                module=str(entry["module"]),
                power_w=Decimal(str(entry.get("power_w", "0"))),
                area_mm2=Decimal(str(entry.get("area_mm2", "0"))),
            )
        )
    return CostModel(
        stages=stages,
        align_ns_per_base=_rational(raw["align_ns_per_base"], "align_ns_per_base"),
        align_nj_per_base=_rational(raw.get("align_nj_per_base", 0), "align_nj_per_base"),
        xfer_ns_per_byte=_rational(raw.get("xfer_ns_per_byte", 0), "xfer_ns_per_byte"),
        xfer_nj_per_byte=_rational(raw.get("xfer_nj_per_byte", 0), "xfer_nj_per_byte"),
        align_units=int(raw.get("align_units", 1)),
        xfer_units=int(raw.get("xfer_units", 1)),
        raw_signal_inflation=_rational(raw.get("raw_signal_inflation", 10), "raw_signal_inflation"),
        read_queue_bytes=int(raw.get("read_queue_bytes", 6_000_000)),
        chunk_buffer_bases=int(raw.get("chunk_buffer_bases", 2_300_000)),
        components=tuple(components),
    )


def dump_cost_config(c: CostModel) -> dict:
    """Render a CostModel back to its config-file dictionary form."""
    return {
        "cost_schema": COST_SCHEMA,
        "stages": {
            name: {
                "latency_ns": sc.latency_ns,
                "energy_nj": str(sc.energy_nj),
                "units": sc.units,
            }
            for name, sc in c.stages.items()
        },
        "align_ns_per_base": str(c.align_ns_per_base),
        "align_nj_per_base": str(c.align_nj_per_base),
        "xfer_ns_per_byte": str(c.xfer_ns_per_byte),
        "xfer_nj_per_byte": str(c.xfer_nj_per_byte),
        "align_units": c.align_units,
        "xfer_units": c.xfer_units,
        "raw_signal_inflation": str(c.raw_signal_inflation),
        "read_queue_bytes": c.read_queue_bytes,
        "chunk_buffer_bases": c.chunk_buffer_bases,
        "components": [
            {
                "name": comp.name,
                "module": comp.module,
                "power_w": str(comp.power_w),
                "area_mm2": str(comp.area_mm2),
            }
            for comp in c.components
        ],
    }


def energy_total(work, c: CostModel, mode: str) -> Fraction:
    """Total energy in nJ: per-op counts times per-op energies.

    The transfer term applies only in the decoupled two-machine mode.
    Exact rational arithmetic keeps the total linear in every count.
    """
    total = (
        work.chunks_basecalled * c.stages["BC"].energy_nj
        + work.chunks_cqs * c.stages["CQS"].energy_nj
        + work.chunks_seeded * c.stages["SEED"].energy_nj
        + work.chunks_chained * c.stages["CHAIN"].energy_nj
        + work.bases_aligned * c.align_nj_per_base
    )
    if mode == "decoupled":
        total += work.bytes_transferred * c.xfer_nj_per_byte
    return total


def compare(report_a: Mapping, report_b: Mapping) -> ComparisonReport:
    """Ratios of makespan, energy, and basecalled-chunk work (a over b)."""
    if report_a["num_reads"] != report_b["num_reads"]:
        raise ValueError(
            "reports cover different datasets "
            f"({report_a['num_reads']} vs {report_b['num_reads']} reads)"
        )
    return ComparisonReport(
        speedup=report_a["makespan_ns"] / report_b["makespan_ns"],
        energy_savings=report_a["energy_nj"] / report_b["energy_nj"],
        work_reduction=report_a["work_counts"]["chunks_basecalled"]
        / report_b["work_counts"]["chunks_basecalled"],
    )


_TENTH = Decimal("0.1")


def area_power_summary(c: CostModel) -> dict:
    """Per-module power/area subtotals and the grand total.

    Module subtotals are quantized to 0.1 (the budget table's display
    precision, half-up); the grand total is the exact sum of the
    quantized subtotals, matching the table's own arithmetic.
    """
    if not c.components:
        raise ValueError("cost model has no components")
    order: list[str] = []
    by_module: dict[str, list[Component]] = {}
    for comp in c.components:
        if not comp.module:
            raise ValueError(f"component {comp.name!r} has no module tag")
        if comp.module not in by_module:
            order.append(comp.module)
            by_module[comp.module] = []
        by_module[comp.module].append(comp)
    modules = []
    total_power = Decimal(0)
    total_area = Decimal(0)
    for module in order:
        comps = by_module[module]
        power = sum((x.power_w for x in comps), Decimal(0))
        area = sum((x.area_mm2 for x in comps), Decimal(0))
        power_q = power.quantize(_TENTH, rounding=ROUND_HALF_UP)
        area_q = area.quantize(_TENTH, rounding=ROUND_HALF_UP)
        total_power += power_q
        total_area += area_q
        modules.append(
            {
                "module": module,
                "components": [
                    {
                        "name": x.name,
                        "power_w": str(x.power_w),
                        "area_mm2": str(x.area_mm2),
                    }
                    for x in comps
                ],
                "power_w": str(power_q),
                "area_mm2": str(area_q),
            }
        )
    return {
        "modules": modules,
        "total": {"power_w": str(total_power), "area_mm2": str(total_area)},
    }
