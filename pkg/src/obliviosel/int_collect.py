"""Oblivious enumeration and sampling of intersections by index.

Intersections inside a boundary range are assigned implicit consecutive
indices by the same bottom-up merge schedule that counts them.  Requested
indices travel as tokens: per layer the lines are labeled with index
ranges, tokens are merged among the lines to find their inducing 0-line,
re-sorted to find the inducing 1-line, and matched pairs are compacted
and appended to the output, all with probe patterns that depend only on
the sizes involved.

Fractional token ranks (index + 0.5) are kept in doubled integer units so
every key stays integral.
"""

from __future__ import annotations

import numpy as np

from . import networks
from .engine import (
    CMP_INT,
    CMP_LINE_LE,
    Memory,
    Table,
    boundary_params,
    intersection_from_cols,
    orient_pairs,
)
from .exact_arith import Boundary, Intersection, compare_boundary
from .inversion_counting import _as_line_table, int_count, sort_lines

X_COLS = {
    "ISK": 0,
    "M": 1,
    "B": 2,
    "PID": 3,
    "HALF": 4,
    "BLK": 5,
    "IDX0D": 6,
    "IDX1D": 7,
    "L0M": 8,
    "L0B": 9,
    "L0PID": 10,
    "L1M": 11,
    "L1B": 12,
    "L1PID": 13,
}

KP_COLS = {
    "VALID": 0,
    "UM": 1,
    "UB": 2,
    "UPID": 3,
    "DM": 4,
    "DB": 5,
    "DPID": 6,
    "KEY": 7,
}

_LINE_FIELDS = ["M", "B", "PID", "HALF", "BLK", "IDX0D", "IDX1D"]


def determine_line_indices(
    tab: Table, inv_count: int, layer: int, b: Boundary
) -> tuple[int, int]:
    """Merge one layer under the upper-boundary order and label the lines.

    Every line gets the running intersection count as its 0-index; 0-lines
    additionally record how many intersections they induce (1-index), and
    1-lines their offset among the layer's 1-lines.  Indices are stored
    doubled.  Returns (updated count, this layer's inversions).
    """
    n = tab.rows
    w = 1 << layer
    pos = np.arange(n, dtype=np.int64)
    tab.scan_rw()
    tab.set_col("HALF", (pos // w) % 2)
    tab.set_col("BLK", pos // (2 * w))
    tab.layer_merge(
        layer,
        CMP_LINE_LE,
        (tab.cols["M"], tab.cols["B"], tab.cols["PID"]),
        boundary_params(b),
    )
    tab.scan_rw()
    half = tab.col("HALF").copy()
    ones_before = np.cumsum(half) - half
    pair_start = (pos // (2 * w)) * (2 * w)
    local_c = ones_before - ones_before[pair_start]
    inc = np.where(half == 0, local_c, 0)
    idx0 = inv_count + (np.cumsum(inc) - inc)
    idx1 = np.where(half == 0, local_c, ones_before)
    tab.set_col("IDX0D", 2 * idx0)
    tab.set_col("IDX1D", 2 * idx1)
    layer_inv = int(inc.sum())
    return inv_count + layer_inv, layer_inv


def match_against_lines(
    tab: Table, ktab: Table, layer: int, memory: Memory
) -> Table:
    """Pair each in-range token with its inducing 0-line and 1-line.

    Merges tokens among the labeled lines by 0-index, scans forward to
    attach the last inducing 0-line and compute the target 1-line offset,
    then sorts by 1-index and scans again for the 1-line.  Probe pattern
    is a function of (lines, tokens) sizes only.
    """
    n, k = tab.rows, ktab.rows
    w = 1 << layer
    x = Table(memory, n + k, dict(X_COLS))
    x.copy_rows_from(tab, _LINE_FIELDS, _LINE_FIELDS)
    x.data[:n, x.cols["L0PID"]] = -1
    x.data[:n, x.cols["L1PID"]] = -1
    x.copy_rows_from(ktab, list(X_COLS), list(X_COLS), dst_lo=n)
    x.merge_rows(n, CMP_INT, (x.cols["IDX0D"],))

    # forward scan: last 0-line with a positive induced count
    x.scan_rw()
    isk = x.col("ISK").copy()
    half = x.col("HALF").copy()
    idx0d = x.col("IDX0D").copy()
    idx1d = x.col("IDX1D").copy()
    pos = np.arange(n + k, dtype=np.int64)
    qual = (isk == 0) & (half == 0) & (idx1d > 0)
    last = np.maximum.accumulate(np.where(qual, pos, -1))
    safe = np.maximum(last, 0)
    l0_idx0d = np.where(last >= 0, idx0d[safe], 0)
    l0_idx1d = np.where(last >= 0, idx1d[safe], 0)
    matched = (isk == 1) & (idx0d < l0_idx0d + l0_idx1d)
    for field, col in (("M", "L0M"), ("B", "L0B"), ("PID", "L0PID")):
        vals = x.col(field)[safe]
        x.set_col(col, np.where(matched, vals, x.col(col)))
    new_idx1d = x.col("BLK")[safe] * (2 * w) + idx0d - l0_idx0d
    x.set_col("IDX1D", np.where(matched, new_idx1d, idx1d))

    x.sort_rows(CMP_INT, (x.cols["IDX1D"],))

    # forward scan: previous 1-line carries the matching offset
    x.scan_rw()
    isk = x.col("ISK").copy()
    half = x.col("HALF").copy()
    idx1d = x.col("IDX1D").copy()
    is_one = (isk == 0) & (half == 1)
    last = np.maximum.accumulate(np.where(is_one, pos, -1))
    safe = np.maximum(last, 0)
    l1_idx1d = np.where(last >= 0, idx1d[safe], -4)
    matched2 = (isk == 1) & (idx1d >= 0) & (idx1d == l1_idx1d + 1)
    for field, col in (("M", "L1M"), ("B", "L1B"), ("PID", "L1PID")):
        vals = x.col(field)[safe]
        x.set_col(col, np.where(matched2, vals, x.col(col)))
    return x


def store_intersections(x: Table, kp: Table, kprime: int, memory: Memory) -> int:
    """Compact this layer's matched pairs and append them to the output.

    The number appended stays in private memory; probes depend only on
    the two table sizes.
    """
    nx = x.rows
    nk = kp.rows
    big = nx + nk

    # stable filter: matched tokens to the front (position-encoded keys)
    x.scan_rw()
    pos = np.arange(nx, dtype=np.int64)
    matched = (x.col("ISK") == 1) & (x.col("L0PID") >= 0)
    k_delta = int(matched.sum())
    x.set_col("BLK", np.where(matched, pos, nx + pos))  # BLK reused as sort key
    x.sort_rows(CMP_INT, (x.cols["BLK"],))

    if kprime + k_delta > nk:
        raise RuntimeError("output capacity exceeded: collection inconsistency")

    kp.scan_rw()
    kp_pos = np.arange(nk, dtype=np.int64)
    kp.set_col("KEY", np.where(kp_pos < kprime, kp_pos, big + kp_pos))

    scratch = Table(memory, nk + nx, dict(KP_COLS))
    scratch.copy_rows_from(kp, list(KP_COLS), list(KP_COLS))
    # transform-copy the filtered tokens: orientation + validity + merge key
    log = memory.log
    _emit_copy(log, x, scratch, nx, dst_lo=nk)
    um, ub, up, dm, db, dp = orient_pairs(
        x.col("L0M"), x.col("L0B"), x.col("L0PID"),
        x.col("L1M"), x.col("L1B"), x.col("L1PID"),
    )
    row_valid = (x.col("ISK") == 1) & (x.col("L0PID") >= 0)
    xpos = np.arange(nx, dtype=np.int64)
    key = np.where(xpos < k_delta, kprime + xpos, big + nk + xpos)
    sl = slice(nk, nk + nx)
    scratch.data[sl, scratch.cols["VALID"]] = row_valid
    scratch.data[sl, scratch.cols["UM"]] = um
    scratch.data[sl, scratch.cols["UB"]] = ub
    scratch.data[sl, scratch.cols["UPID"]] = up
    scratch.data[sl, scratch.cols["DM"]] = dm
    scratch.data[sl, scratch.cols["DB"]] = db
    scratch.data[sl, scratch.cols["DPID"]] = dp
    scratch.data[sl, scratch.cols["KEY"]] = key

    scratch.merge_rows(nk, CMP_INT, (scratch.cols["KEY"],))
    kp.copy_rows_from(scratch, list(KP_COLS), list(KP_COLS), count=nk)
    return kprime + k_delta


def _emit_copy(log, src: Table, dst: Table, count: int, dst_lo: int) -> None:
    """Probe pattern of a traced row copy (data handled by the caller)."""
    from .traced_memory import READ, WRITE, TraceLevel

    if not log.enabled or count == 0:
        return
    if log.level is TraceLevel.COUNT:
        log.probe_count += 2 * count
        return
    idx = np.arange(count, dtype=np.uint64)
    ops = np.tile(np.array([READ, WRITE], dtype=np.uint8), count)
    locs = np.empty(2 * count, dtype=np.uint64)
    locs[0::2] = idx + np.uint64(src._base)
    locs[1::2] = idx + np.uint64(dst_lo) + np.uint64(dst._base)
    log.emit_bulk(ops, locs)


def _token_table(memory: Memory, targets: np.ndarray) -> Table:
    """Token rows for the requested indices (written, never read back)."""
    k = len(targets)
    ktab = Table(memory, k, dict(X_COLS))
    ktab.scan_w()
    ktab.set_col("ISK", np.ones(k, dtype=np.int64))
    ktab.set_col("IDX0D", 2 * np.asarray(targets, dtype=np.int64) + 1)
    ktab.set_col("IDX1D", np.full(k, -1, dtype=np.int64))
    ktab.set_col("L0PID", np.full(k, -1, dtype=np.int64))
    ktab.set_col("L1PID", np.full(k, -1, dtype=np.int64))
    return ktab


def collect_tokens(
    tab: Table, b: Boundary, ktab: Table, memory: Memory
) -> tuple[Table, int, int]:
    """Layer loop shared by collection entry points.

    `tab` must already be sorted by the lower boundary; `ktab` must be
    sorted by target.  Returns (output table, matched count, range count).
    """
    kp = Table(memory, ktab.rows, dict(KP_COLS))
    inv = 0
    kprime = 0
    for layer in range(networks.num_layers(tab.rows)):
        inv, _ = determine_line_indices(tab, inv, layer, b)
        x = match_against_lines(tab, ktab, layer, memory)
        kprime = store_intersections(x, kp, kprime, memory)
    return kp, kprime, inv


def _extract(kp: Table, count: int) -> list[Intersection]:
    kp.scan_r()
    out = []
    base = kp.cols["UM"]
    for t in range(count):
        out.append(intersection_from_cols(kp.data[t], base))
    return out


def int_collect(lines, a: Boundary, b: Boundary, indices, memory: Memory | None = None):
    """Materialize the intersections at the given ascending indices.

    Index i refers to the i-th intersection of the range [a, b) in the
    implicit merge-order enumeration (arbitrary but fixed).  Repeated
    indices yield repeated intersections.  Leaks (line count, index count).
    """
    targets = np.asarray(list(indices), dtype=np.int64)
    if len(targets) == 0:
        raise ValueError("no indices requested")
    if np.any(targets[1:] < targets[:-1]):
        raise ValueError("indices must be ascending")
    if targets[0] < 0:
        raise ValueError("negative index")
    if compare_boundary(a, b) >= 0:
        raise ValueError("range is empty")
    tab, memory = _as_line_table(lines, memory)
    sort_lines(tab, a)
    ktab = _token_table(memory, targets)
    kp, matched, total = collect_tokens(tab, b, ktab, memory)
    if targets[-1] >= total:
        raise ValueError(f"index {targets[-1]} out of range [0, {total})")
    if matched != len(targets):
        raise RuntimeError("collection failed to match every index")
    return _extract(kp, matched)


def int_sample(lines, a: Boundary, b: Boundary, count: int, rng, memory: Memory | None = None):
    """Draw `count` intersections uniformly with replacement from [a, b).

    Counts the range, draws indices privately, sorts them obliviously,
    and collects.  Leaks (line count, count).
    """
    if count <= 0:
        raise ValueError("count must be positive")
    tab, memory = _as_line_table(lines, memory)
    total = int_count(tab, a, b, memory)
    if total == 0:
        raise ValueError("cannot sample from an empty range")
    targets = rng.randranges(total, count)
    sort_lines(tab, a)
    ktab = _token_table(memory, targets)
    ktab.sort_rows(CMP_INT, (ktab.cols["IDX0D"],))
    kp, matched, total2 = collect_tokens(tab, b, ktab, memory)
    assert total2 == total and matched == count
    return _extract(kp, matched)


def int_enumeration(lines, a: Boundary, b: Boundary, memory: Memory | None = None):
    """All intersections in [a, b); leaks (line count, range count)."""
    tab, memory = _as_line_table(lines, memory)
    total = int_count(tab, a, b, memory)
    if total == 0:
        return []
    sort_lines(tab, a)
    ktab = _token_table(memory, np.arange(total, dtype=np.int64))
    kp, matched, total2 = collect_tokens(tab, b, ktab, memory)
    assert total2 == total and matched == total
    return _extract(kp, matched)
