"""Oblivious building blocks over traced arrays: merge, sort, select, filter, append.

Every operation follows a compare-exchange schedule and scan choreography
that is a fixed function of the input lengths, so its probe sequence leaks
nothing beyond those lengths (plus the requested rank, for select).

Comparators are strict less-than predicates evaluated in private memory.
Compare-exchanges are branchless at the trace level: both cells are read
and both are written on every comparison.
"""

from __future__ import annotations

from typing import Callable

from . import networks
from .traced_memory import Memory, TracedArray

Less = Callable[[object, object], bool]


def _run_network(arr: TracedArray, schedule, less: Less) -> None:
    for ii, jj in schedule:
        for i, j in zip(ii.tolist(), jj.tolist()):
            x = arr.get(i)
            y = arr.get(j)
            if less(y, x):
                x, y = y, x
            arr.put(i, x)
            arr.put(j, y)


def sort(arr: TracedArray, less: Less) -> None:
    """Sort in place; probe pattern depends only on len(arr)."""
    _run_network(arr, networks.sort_schedule(len(arr)), less)


def merge(a: TracedArray, b: TracedArray, less: Less) -> TracedArray:
    """Merge two individually sorted arrays into a fresh sorted array."""
    mem = a.memory
    out = mem.alloc(len(a) + len(b))
    for t in range(len(a)):
        out.put(t, a.get(t))
    for t in range(len(b)):
        out.put(len(a) + t, b.get(t))
    _run_network(out, networks.merge_schedule(len(a), len(b)), less)
    return out


def select(arr: TracedArray, k: int, less: Less):
    """Element of rank k (0-based ascending). Leaks (len, k).

    Sorts a scratch copy, then reads one cell; the caller's array is
    untouched.
    """
    if not 0 <= k < len(arr):
        raise IndexError(f"rank {k} out of range [0, {len(arr)})")
    mem = arr.memory
    scratch = mem.alloc(len(arr))
    for t in range(len(arr)):
        scratch.put(t, arr.get(t))
    _run_network(scratch, networks.sort_schedule(len(scratch)), less)
    return scratch.get(k)


def select_scan(arr: TracedArray, k: int, less: Less):
    """Rank-k element via a full read pass after sorting: leaks len only.

    Used internally where even the rank must stay out of the trace.
    """
    if not 0 <= k < len(arr):
        raise IndexError(f"rank {k} out of range [0, {len(arr)})")
    mem = arr.memory
    scratch = mem.alloc(len(arr))
    for t in range(len(arr)):
        scratch.put(t, arr.get(t))
    _run_network(scratch, networks.sort_schedule(len(scratch)), less)
    picked = None
    for t in range(len(scratch)):
        v = scratch.get(t)
        if t == k:  # private-memory mux; the read happens either way
            picked = v
    return picked


def filter(arr: TracedArray, pred: Callable[[object], bool]) -> int:
    """Stable-compact pred-true elements to the front; return their count.

    The count lives in private memory and does not influence the probe
    pattern; remaining positions hold the pred-false elements.
    """
    n = len(arr)
    count = 0
    for t in range(n):
        v = arr.get(t)
        keep = bool(pred(v))
        count += keep
        key = t if keep else n + t
        arr.put(t, (key, v))
    _run_network(arr, networks.sort_schedule(n), lambda x, y: x[0] < y[0])
    for t in range(n):
        arr.put(t, arr.get(t)[1])
    return count


def append(a: TracedArray, b: TracedArray, i: int, k: int) -> None:
    """Overwrite a[0:i+k] with a[0:i] followed by b[0:k].

    i and k stay in private memory: the probe pattern depends only on the
    two lengths.  Remaining positions of `a` are unspecified.
    """
    if not (0 <= i <= len(a) and 0 <= k <= len(b) and i + k <= len(a)):
        raise ValueError("append precondition violated")
    mem = a.memory
    big = len(a) + len(b)
    scratch = mem.alloc(len(a) + len(b))
    for t in range(len(a)):
        v = a.get(t)
        scratch.put(t, (t if t < i else big + t, v))
    for t in range(len(b)):
        v = b.get(t)
        scratch.put(len(a) + t, (i + t if t < k else big + len(a) + t, v))
    # both runs carry ascending keys, so a merge suffices
    _run_network(
        scratch,
        networks.merge_schedule(len(a), len(b)),
        lambda x, y: x[0] < y[0],
    )
    for t in range(len(a)):
        a.put(t, scratch.get(t)[1])
