"""Instrumented memory: traced arrays, probe logs, and trace fingerprints.

All bulk storage used by the oblivious algorithms goes through a Memory
bundle.  Every element access emits a probe (operation, location) into the
ambient trace log; probe sequences can be fingerprinted and compared across
runs to audit that the access pattern depends only on declared leakage.

Constant-size locals ("private memory") are never traced.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterator, TextIO

import numpy as np

try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

READ = 0
WRITE = 1

# location = array_id * 2**48 + index
_ID_SHIFT = 48
_INDEX_LIMIT = 1 << _ID_SHIFT
_ID_LIMIT = 1 << 16

FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


class TraceLevel(enum.Enum):
    """How much of the probe stream a log retains."""

    OFF = 0      # nothing recorded at all
    COUNT = 1    # probe count only
    FULL = 2     # probe count + encoded probe bytes (fingerprintable)


class Probe:
    """One observable memory event: (op, location)."""

    __slots__ = ("op", "location")

    def __init__(self, op: int, location: int):
        self.op = op
        self.location = location

    def __repr__(self):
        return f"Probe({'R' if self.op == READ else 'W'}, {self.location})"

    def __eq__(self, other):
        return (
            isinstance(other, Probe)
            and self.op == other.op
            and self.location == other.location
        )

    def __hash__(self):
        return hash((self.op, self.location))


@dataclass(frozen=True)
class TraceFingerprint:
    """FNV-1a-64 digest of a probe sequence plus its length.

    Equal probe sequences produce equal fingerprints; the converse holds up
    to hash collision.  The byte encoding (1 op byte, 8 little-endian
    location bytes per probe) is fixed so digests are stable across runs
    and platforms.
    """

    digest: int
    probe_count: int

    def __str__(self):
        return f"{self.digest:016x}/{self.probe_count}"


def _fnv1a_py(data, state: int) -> int:
    h = state
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


if _HAVE_NUMBA:

    @_njit("uint64(uint8[::1], uint64)", cache=True, nogil=True)
    def _fnv1a_nb(data, state):  # pragma: no cover - exercised via wrapper
        h = state
        for i in range(data.shape[0]):
            h = ((h ^ np.uint64(data[i])) * np.uint64(0x100000001B3)) & np.uint64(
                0xFFFFFFFFFFFFFFFF
            )
        return h

    def _fnv1a(data: np.ndarray, state: int) -> int:
        return int(_fnv1a_nb(data, np.uint64(state)))

else:  # pragma: no cover

    def _fnv1a(data: np.ndarray, state: int) -> int:
        return _fnv1a_py(data.tobytes(), state)


def encode_probes(ops: np.ndarray, locations: np.ndarray) -> np.ndarray:
    """Encode probes as the canonical byte stream (uint8 array)."""
    k = len(ops)
    out = np.empty((k, 9), dtype=np.uint8)
    out[:, 0] = ops
    loc = locations.astype(np.uint64, copy=False)
    for byte in range(8):
        out[:, 1 + byte] = (loc >> np.uint64(8 * byte)).astype(np.uint8)
    return out.reshape(-1)


class TraceLog:
    """Append-only probe log.

    In FULL mode the encoded probe bytes are retained in chunks; in COUNT
    mode only the running probe count is kept.  ``enabled`` gates appends
    entirely.
    """

    def __init__(self, level: TraceLevel = TraceLevel.FULL):
        self.level = level
        self.enabled = level is not TraceLevel.OFF
        self.probe_count = 0
        self._chunks: list[np.ndarray] = []

    def clear(self) -> None:
        self.probe_count = 0
        self._chunks = []

    def emit(self, op: int, location: int) -> None:
        if not self.enabled:
            return
        self.probe_count += 1
        if self.level is TraceLevel.FULL:
            self._chunks.append(
                encode_probes(
                    np.array([op], dtype=np.uint8),
                    np.array([location], dtype=np.uint64),
                )
            )

    def emit_bulk(self, ops: np.ndarray, locations: np.ndarray) -> None:
        if not self.enabled or len(ops) == 0:
            return
        self.probe_count += len(ops)
        if self.level is TraceLevel.FULL:
            self._chunks.append(encode_probes(ops, locations))

    def to_bytes(self) -> np.ndarray:
        if not self._chunks:
            return np.empty(0, dtype=np.uint8)
        if len(self._chunks) > 1:
            self._chunks = [np.concatenate(self._chunks)]
        return self._chunks[0]

    def iter_probes(self) -> Iterator[Probe]:
        data = self.to_bytes().reshape(-1, 9)
        for row in data:
            loc = int(row[1:].view(np.uint64)[0])
            yield Probe(int(row[0]), loc)

    @property
    def probes(self) -> list[Probe]:
        return list(self.iter_probes())

    def dump(self, out: TextIO) -> None:
        """Write the debug dump format: one probe per line, `R <loc>`/`W <loc>`."""
        for p in self.iter_probes():
            out.write(f"{'R' if p.op == READ else 'W'} {p.location}\n")


def fingerprint(log: TraceLog) -> TraceFingerprint:
    """Fingerprint a log: FNV-1a-64 over the probe byte stream."""
    if log.level is not TraceLevel.FULL and log.probe_count > 0:
        raise ValueError("log was not recorded at FULL level; no bytes to hash")
    digest = _fnv1a(log.to_bytes(), FNV_OFFSET_BASIS)
    return TraceFingerprint(digest, log.probe_count)


class CapacityError(Exception):
    """Allocation would exceed the configured memory bound."""


class Memory:
    """An allocation authority plus a stack of trace logs.

    One Memory per independent run; single-threaded.  Arrays emit probes to
    the top-of-stack log, so `scoped` can audit a sub-computation in
    isolation (inner probes do not appear in the outer log).
    """

    def __init__(self, capacity: int = 1 << 34, level: TraceLevel = TraceLevel.FULL):
        self.capacity = capacity
        self.level = level
        self._logs = [TraceLog(level)]
        self._next_id = 0
        self.cells_allocated = 0

    @property
    def log(self) -> TraceLog:
        return self._logs[-1]

    def _register(self, length: int) -> int:
        if length < 0:
            raise ValueError("negative allocation")
        if length >= _INDEX_LIMIT:
            raise CapacityError("array longer than the index space")
        if self.cells_allocated + length > self.capacity:
            raise CapacityError(
                f"allocating {length} cells would exceed bound {self.capacity}"
            )
        if self._next_id >= _ID_LIMIT:
            raise CapacityError("array id space exhausted")
        aid = self._next_id
        self._next_id += 1
        self.cells_allocated += length
        return aid

    def alloc(self, length: int) -> "TracedArray":
        """Allocate a fresh traced array. Allocation emits no probes."""
        return TracedArray(self, self._register(length), length)

    def scoped(self, action: Callable[[], object]):
        """Run `action` under a fresh log; return (result, fingerprint of it)."""
        inner = TraceLog(TraceLevel.FULL)
        self._logs.append(inner)
        try:
            result = action()
        finally:
            self._logs.pop()
        return result, fingerprint(inner)

    def fingerprint(self) -> TraceFingerprint:
        return fingerprint(self.log)


def scoped_trace(memory: Memory, action: Callable[[], object]):
    """Module-level alias for Memory.scoped."""
    return memory.scoped(action)


class TracedArray:
    """Fixed-length cell array; every get/put emits a probe first.

    A cell holds one logical element; the element's encoding is the
    caller's concern and is invisible to the trace.
    """

    __slots__ = ("memory", "id", "length", "_cells", "_base")

    def __init__(self, memory: Memory, array_id: int, length: int):
        self.memory = memory
        self.id = array_id
        self.length = length
        self._cells = [None] * length
        self._base = array_id << _ID_SHIFT

    def __len__(self):
        return self.length

    def _check(self, index: int) -> None:
        if not 0 <= index < self.length:
            raise IndexError(f"index {index} out of range [0, {self.length})")

    def get(self, index: int):
        self._check(index)
        self.memory.log.emit(READ, self._base + index)
        return self._cells[index]

    def put(self, index: int, value) -> None:
        self._check(index)
        self.memory.log.emit(WRITE, self._base + index)
        self._cells[index] = value

    def location(self, index: int) -> int:
        return self._base + index

    # Untraced accessors for test setup and result extraction only; the
    # algorithms themselves never use these.
    def unsafe_snapshot(self) -> list:
        return list(self._cells)

    def unsafe_load(self, values) -> None:
        values = list(values)
        if len(values) != self.length:
            raise ValueError("length mismatch")
        self._cells = values
