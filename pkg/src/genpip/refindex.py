"""Minimizer extraction, reference index, and per-chunk seeding.

The index is a plain hash table from 2-bit packed k-mer codes to sorted
location lists, built once per reference set.  Seeding scans a chunk's
minimizers against the table and emits anchors in read coordinates.
"""

from __future__ import annotations

import hashlib
import io
import struct
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .dna import encode_bases
from .genio import Reference

MAGIC = b"GPIDX1"
FORMAT_VERSION = 1


class IndexFileError(ValueError):
    """Raised for malformed or mismatched index files."""


@dataclass(frozen=True)
class IndexParams:
    k: int = 15
    w: int = 10
    canonical: bool = True

    def __post_init__(self) -> None:
        if not 1 <= self.k <= 31:
            raise ValueError("k must be in [1, 31]")
        if self.w < 1:
            raise ValueError("w must be >= 1")


@dataclass(frozen=True)
class Anchor:
    """A minimizer match: read offset vs reference location."""

    read_pos: int
    ref_id: int
    ref_pos: int
    strand: str


@dataclass
class MinimizerIndex:
    params: IndexParams
    table: dict[int, list[tuple[int, int, str]]]
    ref_meta: list[tuple[str, int]] = field(default_factory=list)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MinimizerIndex)
            and self.params == other.params
            and self.table == other.table
            and self.ref_meta == other.ref_meta
        )


def minimizers(seq: str, p: IndexParams) -> list[tuple[int, int, str]]:
    """(code, pos, strand) of the smallest k-mer in each w-window.

    Canonical mode keys each position by min(forward, reverse-complement)
    code; ties inside a window break to the leftmost position, and
    consecutive windows picking the same position are deduplicated.
    Sequences shorter than k + w - 1 yield no minimizers.
    """
    k, w = p.k, p.w
    n = len(seq)
    if n < k + w - 1:
        return []
    codes = encode_bases(seq)
    mask = (1 << (2 * k)) - 1
    rc_shift = 2 * (k - 1)
    fwd = 0
    rc = 0
    # per k-mer end position: (key, strand)
    out: list[tuple[int, int, str]] = []
    window: deque[tuple[int, int, str]] = deque()  # (key, pos, strand)
    last_pos = -1
    for i in range(n):
        c = codes[i]
        fwd = ((fwd << 2) | c) & mask
        rc = (rc >> 2) | ((3 - c) << rc_shift)
        if i < k - 1:
            continue
        pos = i - k + 1
        if p.canonical and rc < fwd:
            key, strand = rc, "-"
        else:
            key, strand = fwd, "+"
        # monotonic queue; keep equal keys so the front stays leftmost
        while window and window[-1][0] > key:
            window.pop()
        window.append((key, pos, strand))
        if window[0][1] <= pos - w:
            window.popleft()
        if pos >= w - 1:
            best = window[0]
            if best[1] != last_pos:
                out.append((best[0], best[1], best[2]))
                last_pos = best[1]
    return out


def minimizers_bruteforce(seq: str, p: IndexParams) -> list[tuple[int, int, str]]:
    """Direct O(n*w) re-scan of every window; test oracle for minimizers()."""
    k, w = p.k, p.w
    n = len(seq)
    if n < k + w - 1:
        return []
    codes = encode_bases(seq)
    per_pos = []
    mask = (1 << (2 * k)) - 1
    for pos in range(n - k + 1):
        fwd = 0
        rc = 0
        for j in range(k):
            fwd = (fwd << 2) | codes[pos + j]
            rc = (rc << 2) | (3 - codes[pos + k - 1 - j])
        fwd &= mask
        rc &= mask
        if p.canonical and rc < fwd:
            per_pos.append((rc, "-"))
        else:
            per_pos.append((fwd, "+"))
    out: list[tuple[int, int, str]] = []
    for start in range(len(per_pos) - w + 1):
        best_pos = start
        for j in range(start + 1, start + w):
            if per_pos[j][0] < per_pos[best_pos][0]:
                best_pos = j
        key, strand = per_pos[best_pos]
        if not out or out[-1][1] != best_pos:
            out.append((key, best_pos, strand))
    return out


def build_index(refs: Sequence[Reference], p: IndexParams) -> MinimizerIndex:
    """Index every reference record; locations are (ref_id, pos, strand)."""
    table: dict[int, list[tuple[int, int, str]]] = {}
    ref_meta = []
    indexed_any = False
    for ref_id, ref in enumerate(refs):
        ref_meta.append((ref.name, ref.length))
        mins = minimizers(ref.bases, p)
        if mins:
            indexed_any = True
        for code, pos, strand in mins:
            table.setdefault(code, []).append((ref_id, pos, strand))
    if not indexed_any:
        raise ValueError("all references shorter than k + w - 1")
    for locs in table.values():
        locs.sort(key=lambda loc: (loc[0], loc[1]))
    return MinimizerIndex(params=p, table=table, ref_meta=ref_meta)


def save_index(idx: MinimizerIndex, path: str | Path) -> None:
    """Serialize an index; layout documented in the README, checksummed."""
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(
        struct.pack(
            "<HBBBI",
            FORMAT_VERSION,
            idx.params.k,
            idx.params.w,
            1 if idx.params.canonical else 0,
            len(idx.ref_meta),
        )
    )
    for name, length in idx.ref_meta:
        raw = name.encode("utf-8")
        buf.write(struct.pack("<H", len(raw)))
        buf.write(raw)
        buf.write(struct.pack("<Q", length))
    buf.write(struct.pack("<Q", len(idx.table)))
    for code in sorted(idx.table):
        locs = idx.table[code]
        buf.write(struct.pack("<QI", code, len(locs)))
        for ref_id, pos, strand in locs:
            buf.write(struct.pack("<IIB", ref_id, pos, 1 if strand == "-" else 0))
    payload = buf.getvalue()
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    with open(path, "wb") as fh:
        fh.write(payload)
        fh.write(digest)


def load_index(path: str | Path) -> MinimizerIndex:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(MAGIC) + 8 or raw[: len(MAGIC)] != MAGIC:
        raise IndexFileError(f"{path}: not a genpip index")
    payload, digest = raw[:-8], raw[-8:]
    if hashlib.blake2b(payload, digest_size=8).digest() != digest:
        raise IndexFileError(f"{path}: checksum mismatch (truncated or corrupt)")
    off = len(MAGIC)
    version, k, w, canonical, n_refs = struct.unpack_from("<HBBBI", payload, off)
    off += struct.calcsize("<HBBBI")
    if version != FORMAT_VERSION:
        raise IndexFileError(f"{path}: index format version {version} unsupported")
    ref_meta = []
    for _ in range(n_refs):
        (name_len,) = struct.unpack_from("<H", payload, off)
        off += 2
        name = payload[off : off + name_len].decode("utf-8")
        off += name_len
        (length,) = struct.unpack_from("<Q", payload, off)
        off += 8
        ref_meta.append((name, length))
    (n_keys,) = struct.unpack_from("<Q", payload, off)
    off += 8
    table: dict[int, list[tuple[int, int, str]]] = {}
    for _ in range(n_keys):
        code, count = struct.unpack_from("<QI", payload, off)
        off += struct.calcsize("<QI")
        locs = []
        for _ in range(count):
            ref_id, pos, strand = struct.unpack_from("<IIB", payload, off)
            off += struct.calcsize("<IIB")
            locs.append((ref_id, pos, "-" if strand else "+"))
        table[code] = locs
    return MinimizerIndex(
        params=IndexParams(k=k, w=w, canonical=bool(canonical)),
        table=table,
        ref_meta=ref_meta,
    )


def seed_chunk(chunk, index: MinimizerIndex, max_occ: int = 500) -> list[Anchor]:
    """Look up a chunk's minimizers and emit anchors in read coordinates.

    Minimizers whose hit list exceeds max_occ are dropped as repetitive.
    Anchor strand is '+' when read and reference minimizer strands agree.
    """
    anchors: list[Anchor] = []
    for code, pos, read_strand in minimizers(chunk.bases, index.params):
        locs = index.table.get(code)
        if locs is None or len(locs) > max_occ:
            continue
        read_pos = chunk.offset + pos
        for ref_id, ref_pos, ref_strand in locs:
            strand = "+" if read_strand == ref_strand else "-"
            anchors.append(Anchor(read_pos, ref_id, ref_pos, strand))
    anchors.sort(key=lambda a: (a.strand, a.ref_id, a.ref_pos, a.read_pos))
    return anchors
