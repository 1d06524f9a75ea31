"""Columnar traced tables and vectorized network execution.

A Table is a traced array whose cells are fixed-width rows of int64
fields (the row encoding is invisible to the trace: one cell, one probe).
Compare-exchange networks and linear scans run over whole tables with
bulk probe emission, with numba-jitted comparators where available and a
pure-Python fallback producing bit-identical results.

All comparisons are exact: cross products that can exceed 64 bits are
compared through an explicit 128-bit path.
"""

from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

from . import networks
from .exact_arith import (
    NEG_INF_KIND,
    POINT_KIND,
    POS_INF_KIND,
    Boundary,
    EpsRational,
    Intersection,
    Line,
    sign_for_rank,
)
from .traced_memory import READ, WRITE, Memory, TraceLevel

_USE_NUMBA = os.environ.get("OBLIVIOSEL_NO_NUMBA", "") == ""
if _USE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        _USE_NUMBA = False

# comparator kinds
CMP_INT = 0
CMP_LEX3 = 1
CMP_LINE_LE = 2
CMP_ISECT = 3


def boundary_params(p: Boundary) -> np.ndarray:
    """Pack a boundary for the comparator kernels.

    Layout: [kind, n0, n1, d0, d1, up_m, up_f, down_m, down_f].
    """
    out = np.zeros(9, dtype=np.int64)
    out[0] = p.kind
    if p.kind == POINT_KIND:
        q = EpsRational.of_intersection(p.point)
        up, dn = p.point.up, p.point.down
        out[1:] = (
            q.n0,
            q.n1,
            q.d0,
            q.d1,
            up.m,
            up.signed_rank,
            dn.m,
            dn.signed_rank,
        )
    return out


# ---------------------------------------------------------------------------
# pure-Python comparator reference (also the no-numba fallback)
# ---------------------------------------------------------------------------


def _py_f_of(pid: int) -> int:
    return pid if pid % 2 == 0 else -pid


def _py_cmp_slope(m1, f1, m2, f2) -> int:
    if m1 != m2:
        return -1 if m1 < m2 else 1
    if f1 != f2:
        return -1 if f1 < f2 else 1
    return 0


def _py_cmp_x_coeffs(an0, an1, ad0, ad1, bn0, bn1, bd0, bd1) -> int:
    for lhs, rhs in (
        (an0 * bd0, bn0 * ad0),
        (an1 * bd0, bn1 * ad0),
        (an0 * bd1, bn0 * ad1),
        (an1 * bd1, bn1 * ad1),
    ):
        if lhs != rhs:
            return -1 if lhs < rhs else 1
    return 0


def _py_line_lt(par, m1, b1, pid1, m2, b2, pid2) -> bool:
    f1 = _py_f_of(pid1)
    f2 = _py_f_of(pid2)
    c = _py_cmp_slope(m1, f1, m2, f2)
    if c == 0:
        return False
    pkind = par[0]
    if pkind < 0:
        return c > 0
    if pkind > 0:
        return c < 0
    if c > 0:
        um, ub, uf, upid = m1, b1, f1, pid1
        dm, db, df, dpid = m2, b2, f2, pid2
    else:
        um, ub, uf, upid = m2, b2, f2, pid2
        dm, db, df, dpid = m1, b1, f1, pid1
    cb = _py_cmp_x_coeffs(
        par[1], par[2], par[3], par[4], db - ub, dpid - upid, um - dm, uf - df
    )
    if cb == 0:
        cb = _py_cmp_slope(par[5], par[6], um, uf)
        if cb == 0:
            cb = _py_cmp_slope(par[7], par[8], dm, df)
    return cb <= 0 if c > 0 else cb > 0


def _py_isect_cmp(r1c, r2c) -> int:
    um1, ub1, up1, dm1, db1, dp1 = r1c
    um2, ub2, up2, dm2, db2, dp2 = r2c
    uf1, df1 = _py_f_of(up1), _py_f_of(dp1)
    uf2, df2 = _py_f_of(up2), _py_f_of(dp2)
    c = _py_cmp_x_coeffs(
        db1 - ub1,
        dp1 - up1,
        um1 - dm1,
        uf1 - df1,
        db2 - ub2,
        dp2 - up2,
        um2 - dm2,
        uf2 - df2,
    )
    if c == 0:
        c = _py_cmp_slope(um1, uf1, um2, uf2)
        if c == 0:
            c = _py_cmp_slope(dm1, df1, dm2, df2)
    return c


def _py_run(data, ii, jj, kind, params, cols):
    ncol = data.shape[1]
    for t in range(len(ii)):
        i = int(ii[t])
        j = int(jj[t])
        ri = [int(x) for x in data[i]]
        rj = [int(x) for x in data[j]]
        if kind == CMP_INT:
            c0 = cols[0]
            swap = rj[c0] < ri[c0]
        elif kind == CMP_LEX3:
            a = (ri[cols[0]], ri[cols[1]], ri[cols[2]])
            b = (rj[cols[0]], rj[cols[1]], rj[cols[2]])
            swap = b < a
        elif kind == CMP_LINE_LE:
            mc, bc, pc = cols[0], cols[1], cols[2]
            swap = _py_line_lt(
                params, rj[mc], rj[bc], rj[pc], ri[mc], ri[bc], ri[pc]
            )
        else:  # CMP_ISECT: valid rows first, then the boundary order
            vc = cols[0]
            sel = cols[1:7]
            vi, vj = ri[vc], rj[vc]
            if vi != vj:
                swap = vj > vi
            elif vi == 0:
                swap = False
            else:
                swap = _py_isect_cmp([rj[c] for c in sel], [ri[c] for c in sel]) < 0
        if swap:
            for c in range(ncol):
                data[i, c], data[j, c] = data[j, c], data[i, c]


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

if _USE_NUMBA:

    @_njit(inline="always")
    def _f_of(pid):
        if pid % 2 == 0:
            return pid
        return -pid

    @_njit(inline="always")
    def _sgn(x):
        if x > 0:
            return 1
        if x < 0:
            return -1
        return 0

    @_njit(inline="always")
    def _umul128(a, b):
        mask = np.uint64(0xFFFFFFFF)
        a0 = a & mask
        a1 = a >> np.uint64(32)
        b0 = b & mask
        b1 = b >> np.uint64(32)
        p00 = a0 * b0
        p01 = a0 * b1
        p10 = a1 * b0
        p11 = a1 * b1
        mid = (p00 >> np.uint64(32)) + (p01 & mask) + (p10 & mask)
        lo = (p00 & mask) | ((mid & mask) << np.uint64(32))
        hi = p11 + (p01 >> np.uint64(32)) + (p10 >> np.uint64(32)) + (
            mid >> np.uint64(32)
        )
        return hi, lo

    @_njit(inline="always")
    def _cmp_prod(a, b, c, d):
        # exact sign of a*b - c*d for |inputs| < 2**63
        s1 = _sgn(a) * _sgn(b)
        s2 = _sgn(c) * _sgn(d)
        if s1 != s2:
            return 1 if s1 > s2 else -1
        if s1 == 0:
            return 0
        h1, l1 = _umul128(np.uint64(abs(a)), np.uint64(abs(b)))
        h2, l2 = _umul128(np.uint64(abs(c)), np.uint64(abs(d)))
        if h1 != h2:
            mag = 1 if h1 > h2 else -1
        elif l1 != l2:
            mag = 1 if l1 > l2 else -1
        else:
            mag = 0
        return mag * s1

    @_njit(inline="always")
    def _cmp_slope(m1, f1, m2, f2):
        if m1 != m2:
            return -1 if m1 < m2 else 1
        if f1 != f2:
            return -1 if f1 < f2 else 1
        return 0

    @_njit(inline="always")
    def _cmp_x_coeffs(an0, an1, ad0, ad1, bn0, bn1, bd0, bd1):
        c = _cmp_prod(an0, bd0, bn0, ad0)
        if c != 0:
            return c
        c = _cmp_prod(an1, bd0, bn1, ad0)
        if c != 0:
            return c
        c = _cmp_prod(an0, bd1, bn0, ad1)
        if c != 0:
            return c
        return _cmp_prod(an1, bd1, bn1, ad1)

    @_njit(inline="always")
    def _line_lt(par, m1, b1, pid1, m2, b2, pid2):
        f1 = _f_of(pid1)
        f2 = _f_of(pid2)
        c = _cmp_slope(m1, f1, m2, f2)
        if c == 0:
            return False
        if par[0] < 0:
            return c > 0
        if par[0] > 0:
            return c < 0
        if c > 0:
            um, ub, uf, upid = m1, b1, f1, pid1
            dm, db, df, dpid = m2, b2, f2, pid2
        else:
            um, ub, uf, upid = m2, b2, f2, pid2
            dm, db, df, dpid = m1, b1, f1, pid1
        cb = _cmp_x_coeffs(
            par[1], par[2], par[3], par[4], db - ub, dpid - upid, um - dm, uf - df
        )
        if cb == 0:
            cb = _cmp_slope(par[5], par[6], um, uf)
            if cb == 0:
                cb = _cmp_slope(par[7], par[8], dm, df)
        if c > 0:
            return cb <= 0
        return cb > 0

    @_njit(inline="always")
    def _swap_rows(data, i, j):
        for c in range(data.shape[1]):
            tmp = data[i, c]
            data[i, c] = data[j, c]
            data[j, c] = tmp

    @_njit("void(int64[:, ::1], int64[::1], int64[::1], int64)", cache=True, nogil=True)
    def _nb_run_int(data, ii, jj, keycol):
        for t in range(ii.shape[0]):
            i = ii[t]
            j = jj[t]
            if data[j, keycol] < data[i, keycol]:
                _swap_rows(data, i, j)

    @_njit(
        "void(int64[:, ::1], int64[::1], int64[::1], int64, int64, int64)",
        cache=True,
        nogil=True,
    )
    def _nb_run_lex3(data, ii, jj, c0, c1, c2):
        for t in range(ii.shape[0]):
            i = ii[t]
            j = jj[t]
            swap = False
            if data[j, c0] != data[i, c0]:
                swap = data[j, c0] < data[i, c0]
            elif data[j, c1] != data[i, c1]:
                swap = data[j, c1] < data[i, c1]
            elif data[j, c2] != data[i, c2]:
                swap = data[j, c2] < data[i, c2]
            if swap:
                _swap_rows(data, i, j)

    @_njit(
        "void(int64[:, ::1], int64[::1], int64[::1], int64, int64, int64, int64[::1])",
        cache=True,
        nogil=True,
    )
    def _nb_run_line_le(data, ii, jj, mc, bc, pc, par):
        for t in range(ii.shape[0]):
            i = ii[t]
            j = jj[t]
            if _line_lt(
                par,
                data[j, mc],
                data[j, bc],
                data[j, pc],
                data[i, mc],
                data[i, bc],
                data[i, pc],
            ):
                _swap_rows(data, i, j)

    @_njit(inline="always")
    def _isect_cmp6(
        um1, ub1, up1, dm1, db1, dp1, um2, ub2, up2, dm2, db2, dp2
    ):
        uf1 = _f_of(up1)
        df1 = _f_of(dp1)
        uf2 = _f_of(up2)
        df2 = _f_of(dp2)
        c = _cmp_x_coeffs(
            db1 - ub1,
            dp1 - up1,
            um1 - dm1,
            uf1 - df1,
            db2 - ub2,
            dp2 - up2,
            um2 - dm2,
            uf2 - df2,
        )
        if c == 0:
            c = _cmp_slope(um1, uf1, um2, uf2)
            if c == 0:
                c = _cmp_slope(dm1, df1, dm2, df2)
        return c

    @_njit(
        "void(int64[:, ::1], int64[::1], int64[::1], int64[::1])",
        cache=True,
        nogil=True,
    )
    def _nb_run_isect(data, ii, jj, cols):
        vc = cols[0]
        c0, c1, c2, c3, c4, c5 = cols[1], cols[2], cols[3], cols[4], cols[5], cols[6]
        for t in range(ii.shape[0]):
            i = ii[t]
            j = jj[t]
            vi = data[i, vc]
            vj = data[j, vc]
            if vi != vj:
                swap = vj > vi
            elif vi == 0:
                swap = False
            else:
                swap = (
                    _isect_cmp6(
                        data[j, c0],
                        data[j, c1],
                        data[j, c2],
                        data[j, c3],
                        data[j, c4],
                        data[j, c5],
                        data[i, c0],
                        data[i, c1],
                        data[i, c2],
                        data[i, c3],
                        data[i, c4],
                        data[i, c5],
                    )
                    < 0
                )
            if swap:
                _swap_rows(data, i, j)


@lru_cache(maxsize=None)
def _flat_sort(n: int):
    return networks.flatten(networks.sort_schedule(n))


@lru_cache(maxsize=None)
def _flat_merge(a: int, b: int):
    return networks.flatten(networks.merge_schedule(a, b))


@lru_cache(maxsize=None)
def _flat_layer(n: int, layer: int):
    return networks.flatten(networks.layer_merge_schedule(n, layer))


class Table:
    """A traced array of struct rows backed by an int64 matrix."""

    def __init__(self, memory: Memory, rows: int, cols: dict[str, int]):
        self.memory = memory
        self.id = memory._register(rows)
        self.rows = rows
        self.cols = cols
        self.data = np.zeros((rows, len(cols)), dtype=np.int64)
        self._base = self.id << 48

    def col(self, name: str) -> np.ndarray:
        return self.data[:, self.cols[name]]

    def set_col(self, name: str, values) -> None:
        self.data[:, self.cols[name]] = values

    # -- probe emission ----------------------------------------------------

    def _emit(self, ops_pattern, idx: np.ndarray) -> None:
        """Emit probes: for each index, the ops in ops_pattern at that cell."""
        log = self.memory.log
        if not log.enabled or len(idx) == 0:
            return
        k = len(idx)
        w = len(ops_pattern)
        if log.level is TraceLevel.COUNT:
            log.probe_count += k * w
            return
        ops = np.tile(np.array(ops_pattern, dtype=np.uint8), k)
        locs = np.repeat(idx.astype(np.uint64) + np.uint64(self._base), w)
        log.emit_bulk(ops, locs)

    def _emit_ce(self, ii: np.ndarray, jj: np.ndarray) -> None:
        """Compare-exchange probes: R i, R j, W i, W j per pair."""
        log = self.memory.log
        if not log.enabled or len(ii) == 0:
            return
        k = len(ii)
        if log.level is TraceLevel.COUNT:
            log.probe_count += 4 * k
            return
        ops = np.tile(np.array([READ, READ, WRITE, WRITE], dtype=np.uint8), k)
        locs = np.empty(4 * k, dtype=np.uint64)
        bi = ii.astype(np.uint64) + np.uint64(self._base)
        bj = jj.astype(np.uint64) + np.uint64(self._base)
        locs[0::4] = bi
        locs[1::4] = bj
        locs[2::4] = bi
        locs[3::4] = bj
        log.emit_bulk(ops, locs)

    def scan_rw(self, lo: int = 0, hi: int | None = None) -> None:
        """Declare a read-modify-write pass over rows [lo, hi)."""
        hi = self.rows if hi is None else hi
        self._emit((READ, WRITE), np.arange(lo, hi, dtype=np.int64))

    def scan_r(self, lo: int = 0, hi: int | None = None) -> None:
        """Declare a read-only pass over rows [lo, hi)."""
        hi = self.rows if hi is None else hi
        self._emit((READ,), np.arange(lo, hi, dtype=np.int64))

    def scan_w(self, lo: int = 0, hi: int | None = None) -> None:
        """Declare a write-only pass over rows [lo, hi)."""
        hi = self.rows if hi is None else hi
        self._emit((WRITE,), np.arange(lo, hi, dtype=np.int64))

    def copy_rows_from(
        self, src: "Table", src_cols: list[str], dst_cols: list[str],
        dst_lo: int = 0, src_lo: int = 0, count: int | None = None,
    ) -> None:
        """Traced row copy src -> self (R src, W self per element)."""
        count = src.rows - src_lo if count is None else count
        idx_s = np.arange(src_lo, src_lo + count, dtype=np.int64)
        idx_d = np.arange(dst_lo, dst_lo + count, dtype=np.int64)
        log = self.memory.log
        if log.enabled and count:
            if log.level is TraceLevel.COUNT:
                log.probe_count += 2 * count
            else:
                ops = np.tile(np.array([READ, WRITE], dtype=np.uint8), count)
                locs = np.empty(2 * count, dtype=np.uint64)
                locs[0::2] = idx_s.astype(np.uint64) + np.uint64(src._base)
                locs[1::2] = idx_d.astype(np.uint64) + np.uint64(self._base)
                log.emit_bulk(ops, locs)
        for cs, cd in zip(src_cols, dst_cols):
            self.data[dst_lo : dst_lo + count, self.cols[cd]] = src.data[
                src_lo : src_lo + count, src.cols[cs]
            ]

    # -- network execution ---------------------------------------------------

    def run_network(self, flat, kind, keycols, params=None) -> None:
        ii, jj = flat
        if len(ii) == 0:
            return
        self._emit_ce(ii, jj)
        cols = np.asarray(keycols, dtype=np.int64)
        if params is None:
            params = np.zeros(9, dtype=np.int64)
        if _USE_NUMBA:
            if kind == CMP_INT:
                _nb_run_int(self.data, ii, jj, cols[0])
            elif kind == CMP_LEX3:
                _nb_run_lex3(self.data, ii, jj, cols[0], cols[1], cols[2])
            elif kind == CMP_LINE_LE:
                _nb_run_line_le(self.data, ii, jj, cols[0], cols[1], cols[2], params)
            elif kind == CMP_ISECT:
                _nb_run_isect(self.data, ii, jj, cols)
            else:
                raise ValueError(f"unknown comparator kind {kind}")
        else:
            _py_run(self.data, ii, jj, kind, params, list(cols))

    def sort_rows(self, kind, keycols, params=None) -> None:
        self.run_network(_flat_sort(self.rows), kind, keycols, params)

    def merge_rows(self, split: int, kind, keycols, params=None) -> None:
        """Merge the sorted runs [0, split) and [split, rows)."""
        self.run_network(
            _flat_merge(split, self.rows - split), kind, keycols, params
        )

    def layer_merge(self, layer: int, kind, keycols, params=None) -> None:
        self.run_network(_flat_layer(self.rows, layer), kind, keycols, params)


LINE_COLS = {"M": 0, "B": 1, "PID": 2, "HALF": 3, "BLK": 4, "IDX0D": 5, "IDX1D": 6}


def line_table(memory: Memory, n: int) -> Table:
    return Table(memory, n, dict(LINE_COLS))


def load_lines(tab: Table, lines: list[Line], traced_src=None) -> None:
    """Fill a line table. If the source is a traced array, reads are probed."""
    n = len(lines)
    if traced_src is not None:
        log = tab.memory.log
        if log.enabled and n:
            if log.level is TraceLevel.COUNT:
                log.probe_count += 2 * n
            else:
                idx = np.arange(n, dtype=np.uint64)
                ops = np.tile(np.array([READ, WRITE], dtype=np.uint8), n)
                locs = np.empty(2 * n, dtype=np.uint64)
                locs[0::2] = idx + np.uint64(traced_src._base)
                locs[1::2] = idx + np.uint64(tab._base)
                log.emit_bulk(ops, locs)
    else:
        tab.scan_w()
    tab.set_col("M", [ln.m for ln in lines])
    tab.set_col("B", [ln.b for ln in lines])
    tab.set_col("PID", [ln.idx if ln.idx is not None else -1 for ln in lines])


def line_from_row(m: int, b: int, pid: int) -> Line:
    return Line(int(m), int(b), int(pid), sign_for_rank(int(pid)))


def intersection_from_cols(row: np.ndarray, base: int) -> Intersection:
    up = line_from_row(row[base], row[base + 1], row[base + 2])
    dn = line_from_row(row[base + 3], row[base + 4], row[base + 5])
    return Intersection(up, dn)


def orient_pairs(
    l0m: np.ndarray, l0b: np.ndarray, l0p: np.ndarray,
    l1m: np.ndarray, l1b: np.ndarray, l1p: np.ndarray,
):
    """Vectorized up/down orientation by perturbed slope (up strictly larger)."""
    f0 = np.where(l0p % 2 == 0, l0p, -l0p)
    f1 = np.where(l1p % 2 == 0, l1p, -l1p)
    up0 = (l0m > l1m) | ((l0m == l1m) & (f0 > f1))
    um = np.where(up0, l0m, l1m)
    ub = np.where(up0, l0b, l1b)
    up = np.where(up0, l0p, l1p)
    dm = np.where(up0, l1m, l0m)
    db = np.where(up0, l1b, l0b)
    dp = np.where(up0, l1p, l0p)
    return um, ub, up, dm, db, dp
