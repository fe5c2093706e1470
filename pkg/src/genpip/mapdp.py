"""Anchor chaining, mapping gates, and banded local alignment.

Chaining maximizes, over increasing anchor subsequences within one
(strand, reference) group:

    f(i) = max(mw, max over valid j<i of
               f(j) + min(mw, dread, dref) - lam * |dref - dread|)

where both coordinate gaps must be in (0, G].  The recurrence is simple
enough to check exactly against full enumeration (chain_bruteforce).

Alignment is local Smith-Waterman with affine gaps (a gap of length L
costs gap_open + L * gap_extend), banded around the chain diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chunkqc import Chunk
from .dna import encode_bases, revcomp
from .genio import Reference
from .refindex import Anchor

REJ_QSR = "REJ_QSR"
REJ_CMR = "REJ_CMR"
UNMAPPED = "UNMAPPED"
MAPPED = "MAPPED"
STATUSES = (REJ_QSR, REJ_CMR, UNMAPPED, MAPPED)

_NEG = -(1 << 40)


@dataclass(frozen=True)
class ChainParams:
    match_weight: float = 15.0
    gap_coef: float = 0.1
    max_gap: int = 5000
    min_chain_anchors: int = 1
    anchor_len: int = 15  # bases covered by one anchor; sets chain spans

    def __post_init__(self) -> None:
        if self.match_weight <= 0:
            raise ValueError("match_weight must be > 0")
        if self.gap_coef < 0:
            raise ValueError("gap_coef must be >= 0")
        if self.max_gap < 1:
            raise ValueError("max_gap must be >= 1")


@dataclass(frozen=True)
class Chain:
    anchors: tuple[Anchor, ...]
    score: float
    strand: str
    ref_id: int
    ref_span: tuple[int, int]
    read_span: tuple[int, int]


@dataclass(frozen=True)
class AlignParams:
    match: int = 2
    mismatch: int = -4
    gap_open: int = -4
    gap_extend: int = -2
    band: int = 500
    flank: int = 100

    def __post_init__(self) -> None:
        if self.match <= 0:
            raise ValueError("match must be > 0")
        if self.mismatch > 0 or self.gap_open > 0 or self.gap_extend > 0:
            raise ValueError("penalties must be <= 0")
        if self.band < 1:
            raise ValueError("band must be >= 1")


@dataclass(frozen=True)
class AlignmentResult:
    """Best local alignment score and extents.

    read_start/read_end are in the orientation that was aligned, i.e. in
    reverse-complement coordinates for '-' strand chains.
    """

    score: int
    read_start: int = 0
    read_end: int = 0
    ref_start: int = 0
    ref_end: int = 0


@dataclass(frozen=True)
class MappingResult:
    """Terminal per-read outcome."""

    read_id: str
    status: str
    best_chain_score: float = 0.0
    alignment_score: int | None = None
    region: tuple[int, int, int, str] | None = None  # (ref_id, start, end, strand)
    ref_name: str | None = None
    ref_len: int | None = None
    read_span: tuple[int, int] | None = None  # forward read coordinates
    read_aqs: float | None = None

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status}")
        if (self.alignment_score is not None) != (self.status == MAPPED):
            raise ValueError("alignment_score present iff status is MAPPED")
        if self.status in (REJ_QSR, REJ_CMR) and self.region is not None:
            raise ValueError("rejected reads carry no region")


def _pair_score(
    dread: int, dref: int, mw: float, lam: float
) -> float:
    return min(mw, dread, dref) - lam * abs(dref - dread)


def chain(anchors: Sequence[Anchor], p: ChainParams) -> list[Chain]:
    """DP-chain sorted anchors; returns chains best-first.

    Input must be sorted by (strand, ref_id, ref_pos, read_pos).
    Backtracking is greedy without anchor reuse: candidate chain ends are
    visited in score order and a candidate is skipped outright if its
    path touches an already-used anchor.  Chains with fewer than
    min_chain_anchors anchors are discarded.
    """
    if not anchors:
        return []
    mw = p.match_weight
    lam = p.gap_coef
    gap = p.max_gap
    n = len(anchors)
    f = [mw] * n
    pred = [-1] * n
    start = 0
    while start < n:
        group_key = (anchors[start].strand, anchors[start].ref_id)
        end = start
        while end < n and (anchors[end].strand, anchors[end].ref_id) == group_key:
            end += 1
        for i in range(start + 1, end):
            ai = anchors[i]
            best = mw
            best_j = -1
            for j in range(i - 1, start - 1, -1):
                aj = anchors[j]
                dref = ai.ref_pos - aj.ref_pos
                if dref > gap:
                    break
                if dref <= 0:
                    continue
                dread = ai.read_pos - aj.read_pos
                if dread <= 0 or dread > gap:
                    continue
                s = f[j] + _pair_score(dread, dref, mw, lam)
                if s > best:
                    best = s
                    best_j = j
            f[i] = best
            pred[i] = best_j
        start = end

    order = sorted(
        range(n),
        key=lambda i: (
            -f[i],
            anchors[i].ref_id,
            anchors[i].ref_pos,
            anchors[i].read_pos,
            anchors[i].strand,
        ),
    )
    used = [False] * n
    chains: list[Chain] = []
    for endpoint in order:
        if used[endpoint]:
            continue
        path = []
        i = endpoint
        blocked = False
        while i != -1:
            if used[i]:
                blocked = True
                break
            path.append(i)
            i = pred[i]
        if blocked:
            continue
        for i in path:
            used[i] = True
        if len(path) < p.min_chain_anchors:
            continue
        path.reverse()
        members = tuple(anchors[i] for i in path)
        chains.append(
            Chain(
                anchors=members,
                score=f[endpoint],
                strand=members[0].strand,
                ref_id=members[0].ref_id,
                ref_span=(members[0].ref_pos, members[-1].ref_pos + p.anchor_len),
                read_span=(members[0].read_pos, members[-1].read_pos + p.anchor_len),
            )
        )
    chains.sort(key=lambda c: (-c.score, c.ref_id, c.ref_span[0], c.read_span[0]))
    return chains


def chain_bruteforce(anchors: Sequence[Anchor], p: ChainParams) -> float:
    """Best chain score by enumerating every valid increasing subsequence.

    Accumulates scores left-to-right along each chain so the arithmetic
    matches chain() operation for operation; equality is exact.
    """
    if len(anchors) > 14:
        raise ValueError("brute force limited to 14 anchors")
    if not anchors:
        return 0.0
    mw = p.match_weight
    lam = p.gap_coef
    gap = p.max_gap
    best = 0.0
    groups: dict[tuple[str, int], list[Anchor]] = {}
    for a in anchors:
        groups.setdefault((a.strand, a.ref_id), []).append(a)
    for group in groups.values():
        group.sort(key=lambda a: (a.ref_pos, a.read_pos))

        def extend(last: Anchor, score: float) -> None:
            nonlocal best
            if score > best:
                best = score
            for nxt in group:
                dref = nxt.ref_pos - last.ref_pos
                dread = nxt.read_pos - last.read_pos
                if 0 < dref <= gap and 0 < dread <= gap:
                    extend(nxt, score + _pair_score(dread, dref, mw, lam))

        for a in group:
            extend(a, mw)
    return best


def merge_chunk_anchors(
    chunk_anchors: Sequence[tuple[Chunk, Sequence[Anchor]]],
    read_len: int,
    anchor_len: int,
) -> list[Anchor]:
    """Combine per-chunk anchors into one read-level sorted anchor list.

    Reverse-strand anchors are re-expressed in reverse-complement read
    coordinates (read_len - anchor_len - read_pos) so that a true
    reverse match is increasing in both coordinates and chains normally.
    """
    read_ids = {c.read_id for c, _ in chunk_anchors}
    if len(read_ids) > 1:
        raise ValueError(f"anchors from multiple reads: {sorted(read_ids)}")
    merged: list[Anchor] = []
    for _, anchors in chunk_anchors:
        for a in anchors:
            if a.strand == "-":
                merged.append(
                    Anchor(read_len - anchor_len - a.read_pos, a.ref_id, a.ref_pos, "-")
                )
            else:
                merged.append(a)
    merged.sort(key=lambda a: (a.strand, a.ref_id, a.ref_pos, a.read_pos))
    return merged


def cmr_decide(chain_score: float, bases_examined: int, theta_cm: float) -> bool:
    """True when the per-base chaining score falls strictly below theta."""
    if bases_examined <= 0:
        raise ValueError("bases_examined must be > 0")
    return chain_score / bases_examined < theta_cm


def read_gate(chain_score: float, read_len: int, theta_cm: float) -> bool:
    """True when the read may proceed to alignment (strict < rejects)."""
    if read_len <= 0:
        raise ValueError("read_len must be > 0")
    return not (chain_score / read_len < theta_cm)


def _banded_sw(
    q: np.ndarray, t: np.ndarray, p: AlignParams, d0: int
) -> tuple[int, int, int]:
    """Forward banded local DP; returns (best score, end i, end j).

    The band admits cells with |j - i - d0| <= band.  Horizontal-gap
    scores within a row are resolved with a running prefix maximum,
    which is exact because a gap leaving a gap-entered cell is always
    dominated by extending the earlier gap.
    """
    n, m = len(q), len(t)
    band = p.band
    width = 2 * band + 1
    match, mismatch = p.match, p.mismatch
    open_ext = p.gap_open + p.gap_extend
    ext = p.gap_extend
    slots = np.arange(width, dtype=np.int64)
    # E[s] = ext*s + max over s'<s of (H[s'] + open - ext*s'): a gap of
    # length L costs open + L*ext, the ext*s term covering every column
    g_base = p.gap_open - ext * slots
    e_base = ext * slots
    h_prev = np.zeros(width, dtype=np.int64)
    f_prev = np.full(width, _NEG, dtype=np.int64)
    tpad = np.full(m + 2 * width + 2, 4, dtype=np.int64)
    tpad[width + 1 : width + 1 + m] = t
    best_score = 0
    best_i = -1
    best_j = -1
    up_h = np.empty(width, dtype=np.int64)
    up_f = np.empty(width, dtype=np.int64)
    for i in range(n):
        w0 = i + d0 - band  # target position of slot 0
        s_neg = -1 - w0  # slot of the virtual target column j == -1
        lo = max(0, -w0)
        hi = min(width, m - w0)
        if hi <= lo:
            h_prev = np.full(width, _NEG, dtype=np.int64)
            f_prev = np.full(width, _NEG, dtype=np.int64)
            if 0 <= s_neg < width:
                h_prev[s_neg] = 0
            continue
        tw = tpad[width + 1 + w0 : width + 1 + w0 + width]
        sub = np.where(tw == q[i], match, mismatch)
        diag = h_prev + sub
        up_h[:-1] = h_prev[1:]
        up_h[-1] = _NEG
        up_f[:-1] = f_prev[1:]
        up_f[-1] = _NEG
        f_cur = np.maximum(up_h + open_ext, up_f + ext)
        h_tmp = np.maximum(diag, f_cur)
        np.maximum(h_tmp, 0, out=h_tmp)
        if lo > 0:
            h_tmp[:lo] = _NEG
            f_cur[:lo] = _NEG
        if hi < width:
            h_tmp[hi:] = _NEG
            f_cur[hi:] = _NEG
        prefix = np.maximum.accumulate(h_tmp + g_base)
        e_cur = e_base.copy()
        e_cur[0] = _NEG
        e_cur[1:] += prefix[:-1]
        h_cur = np.maximum(h_tmp, e_cur)
        if lo > 0:
            h_cur[:lo] = _NEG
        if hi < width:
            h_cur[hi:] = _NEG
        row_best = int(h_cur.max())
        if row_best > best_score:
            best_score = row_best
            best_i = i
            best_j = w0 + int(np.argmax(h_cur))
        # local alignments may start fresh at target column 0 in any row
        if 0 <= s_neg < width:
            h_cur[s_neg] = 0
        h_prev = h_cur
        f_prev = f_cur
    return best_score, best_i, best_j


def align(
    read, ref: Reference, best_chain: Chain, p: AlignParams
) -> AlignmentResult:
    """Banded local alignment of a read against its chain's region.

    The region is the chain's reference span extended by flank bases and
    clipped to the reference.  For '-' strand chains the read is
    reverse-complemented first; the returned read extents stay in that
    aligned orientation.  A score of 0 means no positive-scoring cell.
    """
    region_start = max(0, best_chain.ref_span[0] - p.flank)
    region_end = min(ref.length, best_chain.ref_span[1] + p.flank)
    if region_end <= region_start:
        raise ValueError("empty reference region after clipping")
    region = ref.bases[region_start:region_end]
    query = read.bases if best_chain.strand == "+" else revcomp(read.bases)
    q = np.frombuffer(encode_bases(query), dtype=np.uint8).astype(np.int64)
    t = np.frombuffer(encode_bases(region), dtype=np.uint8).astype(np.int64)
    d0 = (best_chain.ref_span[0] - region_start) - best_chain.read_span[0]
    score, end_i, end_j = _banded_sw(q, t, p, d0)
    if score <= 0:
        return AlignmentResult(score=0)
    rq = q[: end_i + 1][::-1].copy()
    rt = t[: end_j + 1][::-1].copy()
    rev_score, rev_i, rev_j = _banded_sw(rq, rt, p, (end_j - end_i) - d0)
    assert rev_score == score, "reverse-pass score mismatch"
    read_start = end_i - rev_i
    ref_start = end_j - rev_j
    return AlignmentResult(
        score=score,
        read_start=read_start,
        read_end=end_i + 1,
        ref_start=region_start + ref_start,
        ref_end=region_start + end_j + 1,
    )
