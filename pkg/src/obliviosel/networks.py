"""Compare-exchange schedules for oblivious sorting and merging.

Batcher odd-even mergesort / odd-even merge, generated as fixed sequences
of (i, j) index pairs grouped into rounds of disjoint comparators.  The
schedule is a pure function of the input sizes, which is what makes every
routine built on top of it probe-oblivious.

Non-power-of-two sizes are handled by clipping: comparators touching a
virtual +inf tail (or -inf head, for merges) can never move data, so they
are dropped from the schedule.  The probe pattern stays a function of the
real sizes only.

Reference for the classic formulation: https://hwlang.de/algorithmen/sortieren/networks/oemen.htm
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

Round = tuple[np.ndarray, np.ndarray]
Schedule = tuple[Round, ...]


def _ceil_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


@lru_cache(maxsize=None)
def sort_schedule(n: int) -> Schedule:
    """In-place sort network for n cells: rounds of disjoint (i, j), i < j."""
    if n < 2:
        return ()
    npad = _ceil_pow2(n)
    rounds = []
    p = 1
    while p < npad:
        k = p
        while k >= 1:
            j_starts = np.arange(k % p, npad - k, 2 * k, dtype=np.int64)
            if len(j_starts):
                offs = np.arange(k, dtype=np.int64)
                x = (j_starts[:, None] + offs[None, :]).ravel()
                keep = (x // (2 * p)) == ((x + k) // (2 * p))
                keep &= (x + k) < n  # clip the +inf tail
                x = x[keep]
                if len(x):
                    rounds.append((x, x + k))
            k //= 2
        p *= 2
    return tuple(rounds)


@lru_cache(maxsize=None)
def merge_schedule(a: int, b: int) -> Schedule:
    """Merge network for two sorted runs laid out contiguously.

    Run one occupies [0, a), run two [a, a+b) of the same array.  Built
    from the power-of-two odd-even merge of two m-halves with run one
    aligned to the end of the first half (virtual -inf head) and run two
    to the start of the second (virtual +inf tail).
    """
    if a == 0 or b == 0:
        return ()
    m = _ceil_pow2(max(a, b))
    g = m - a  # virtual head length
    hi_end = m + b
    rounds = []
    k = m
    while k >= 1:
        if k == m:
            x = np.arange(0, m, dtype=np.int64)
        else:
            starts = np.arange(k, 2 * m - k, 2 * k, dtype=np.int64)
            offs = np.arange(k, dtype=np.int64)
            x = (starts[:, None] + offs[None, :]).ravel()
        keep = (x >= g) & ((x + k) < hi_end)
        x = x[keep]
        if len(x):
            i = np.where(x < m, x - g, x - m + a)
            j = np.where(x + k < m, x + k - g, x + k - m + a)
            rounds.append((i, j))
        k //= 2
    return tuple(rounds)


@lru_cache(maxsize=None)
def layer_merge_schedule(n: int, layer: int) -> Schedule:
    """Merge rounds for one bottom-up layer over an n-cell array.

    At layer l, adjacent blocks of size 2**l are pairwise merged; the
    final pair may be ragged.  Per-pair merges are fused round-by-round so
    comparators across pairs run together.
    """
    w = 1 << layer
    per_round: dict[int, list[Round]] = {}
    base = 0
    while base + w < n:
        la = w
        lb = min(w, n - base - w)
        for r, (i, j) in enumerate(merge_schedule(la, lb)):
            per_round.setdefault(r, []).append((i + base, j + base))
        base += 2 * w
    rounds = []
    for r in sorted(per_round):
        parts = per_round[r]
        rounds.append(
            (
                np.concatenate([p[0] for p in parts]),
                np.concatenate([p[1] for p in parts]),
            )
        )
    return tuple(rounds)


def num_layers(n: int) -> int:
    """Bottom-up layer count: ceil(log2 n); singleton blocks merge at layer 0."""
    if n <= 1:
        return 0
    return (n - 1).bit_length()


def flatten(schedule: Schedule) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate rounds into flat (i, j) arrays in canonical order."""
    if not schedule:
        e = np.empty(0, dtype=np.int64)
        return e, e
    return (
        np.concatenate([r[0] for r in schedule]),
        np.concatenate([r[1] for r in schedule]),
    )


def comparator_count(schedule: Schedule) -> int:
    return sum(len(r[0]) for r in schedule)
