"""Merge-based oblivious inversion counting and intersection counting.

Counting works bottom-up: at layer l, adjacent sorted blocks of size 2**l
are merged while a labeled scan accumulates the cross inversions.  The
split schedule is shared with the intersection-collection machinery so
both assign identical implicit indices.

int_count orders lines relative to a lower boundary, then counts
inversions relative to the upper boundary; the count equals the number of
intersections inside the half-open boundary range.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import networks
from .engine import (
    CMP_LINE_LE,
    Table,
    boundary_params,
    line_table,
    load_lines,
)
from .exact_arith import Boundary, Line, compare_boundary
from .traced_memory import Memory, TracedArray

Less = Callable[[object, object], bool]


# ---------------------------------------------------------------------------
# generic path (traced arrays of arbitrary elements)
# ---------------------------------------------------------------------------


def _run(arr: TracedArray, schedule, less: Less) -> None:
    for ii, jj in schedule:
        for i, j in zip(ii.tolist(), jj.tolist()):
            x = arr.get(i)
            y = arr.get(j)
            if less(y, x):
                x, y = y, x
            arr.put(i, x)
            arr.put(j, y)


def bi_inversions(
    a_lo: TracedArray, a_hi: TracedArray, less: Less
) -> tuple[TracedArray, int]:
    """Merge two sorted halves; count cross pairs out of order.

    Returns the merged array and the number of pairs (x in lo, y in hi)
    with y strictly before x under the comparator.
    """
    mem = a_lo.memory
    na, nb = len(a_lo), len(a_hi)
    out = mem.alloc(na + nb)
    for t in range(na):
        out.put(t, (0, a_lo.get(t)))
    for t in range(nb):
        out.put(na + t, (1, a_hi.get(t)))
    _run(
        out,
        networks.merge_schedule(na, nb),
        lambda x, y: less(x[1], y[1]),
    )
    inversions_found = 0
    ones = 0
    for t in range(na + nb):
        half, _ = out.get(t)
        if half == 0:
            inversions_found += ones
        else:
            ones += 1
    for t in range(na + nb):
        out.put(t, out.get(t)[1])
    return out, inversions_found


def inversions(arr: TracedArray, less: Less) -> int:
    """Inversion count of the array; sorts it as a side effect.

    Bottom-up layers over ragged power-of-two blocks; probe pattern is a
    function of the length alone.
    """
    n = len(arr)
    total = 0
    for layer in range(networks.num_layers(n)):
        w = 1 << layer
        for t in range(n):
            v = arr.get(t)
            elem = v[1] if layer > 0 else v
            arr.put(t, ((t // w) % 2, elem))
        _run(
            arr,
            networks.layer_merge_schedule(n, layer),
            lambda x, y: less(x[1], y[1]),
        )
        ones = 0
        prev_pair = 0
        for t in range(n):
            pair = t // (2 * w)
            if pair != prev_pair:
                ones = 0
                prev_pair = pair
            half, _ = arr.get(t)
            if half == 0:
                total += ones
            else:
                ones += 1
    if networks.num_layers(n) > 0:
        for t in range(n):
            arr.put(t, arr.get(t)[1])
    return total


# ---------------------------------------------------------------------------
# engine path (line tables)
# ---------------------------------------------------------------------------


def sort_lines(tab: Table, p: Boundary) -> None:
    """Network-sort a line table under the boundary order."""
    cols = (tab.cols["M"], tab.cols["B"], tab.cols["PID"])
    tab.sort_rows(CMP_LINE_LE, cols, boundary_params(p))


def _layer_count(half: np.ndarray, layer: int) -> int:
    """Cross inversions implied by the labels of one merged layer."""
    n = len(half)
    w = 1 << layer
    cum = np.cumsum(half)
    before = cum - half
    pair_start = (np.arange(n, dtype=np.int64) // (2 * w)) * (2 * w)
    local_ones_before = before - before[pair_start]
    return int(np.sum(np.where(half == 0, local_ones_before, 0)))


def inversions_table(tab: Table, kind: int, keycols, params=None) -> int:
    """Layered inversion counting on a table under an engine comparator.

    Sorts the table as a side effect.  The table must carry a HALF label
    column.  Probe pattern is a function of the row count alone.
    """
    n = tab.rows
    half_col = tab.cols["HALF"]
    total = 0
    for layer in range(networks.num_layers(n)):
        w = 1 << layer
        tab.scan_rw()
        tab.data[:, half_col] = (np.arange(n, dtype=np.int64) // w) % 2
        tab.layer_merge(layer, kind, keycols, params)
        tab.scan_r()
        total += _layer_count(tab.data[:, half_col], layer)
    if networks.num_layers(n) > 0:
        tab.scan_rw()
        tab.data[:, half_col] = 0
    return total


def _as_line_table(lines, memory: Memory | None) -> tuple[Table, Memory]:
    """Copy the input lines into a fresh engine table (traced when possible)."""
    if isinstance(lines, Table):
        if memory is None:
            memory = lines.memory
        tab = line_table(memory, lines.rows)
        tab.copy_rows_from(lines, ["M", "B", "PID"], ["M", "B", "PID"])
        return tab, memory
    if isinstance(lines, TracedArray):
        if memory is None:
            memory = lines.memory
        snapshot = lines.unsafe_snapshot()
        tab = line_table(memory, len(snapshot))
        load_lines(tab, snapshot, traced_src=lines)
        return tab, memory
    lines = list(lines)
    if memory is None:
        memory = Memory()
    tab = line_table(memory, len(lines))
    load_lines(tab, lines)
    return tab, memory


def int_count(lines, a: Boundary, b: Boundary, memory: Memory | None = None) -> int:
    """Number of intersections p with a <= p < b under the boundary order.

    Leaks only the line count; the boundaries enter through private-memory
    comparator evaluations.
    """
    if compare_boundary(a, b) > 0:
        raise ValueError("boundaries out of order")
    tab, _ = _as_line_table(lines, memory)
    sort_lines(tab, a)
    return inversions_table(tab, b)
