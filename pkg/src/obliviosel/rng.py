"""Counter-based pseudo-random generator (SplitMix64).

Held entirely in private memory: drawing random values emits no probes.
The same seed always yields the same stream, which is what the fixed-seed
trace-equality audits rely on.  Bounded draws use rejection sampling, so
they are exactly uniform.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class Rng:
    """SplitMix64 stream: output i is mix(seed + (i+1)*gamma)."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._counter = 0

    def next_u64(self) -> int:
        self._counter += 1
        return _mix((self.seed + self._counter * _GAMMA) & _MASK64)

    def split(self) -> "Rng":
        """Derive an independent child stream."""
        return Rng(self.next_u64())

    def randrange(self, bound: int) -> int:
        """Uniform integer in [0, bound) via rejection (unbiased)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 64) - ((1 << 64) % bound)
        while True:
            v = self.next_u64()
            if v < threshold:
                return v % bound

    def randranges(self, bound: int, count: int) -> np.ndarray:
        """Vectorized uniform draws in [0, bound).

        Accepted values come from the counter stream in order (rejects
        skipped), but batching may advance the counter past the last value
        used, so bulk and scalar call sequences are not interchangeable.
        """
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 64) - ((1 << 64) % bound)
        out = np.empty(count, dtype=np.uint64)
        filled = 0
        while filled < count:
            need = count - filled
            batch = max(need + (need >> 3) + 4, 16)
            ctr = np.arange(self._counter + 1, self._counter + batch + 1, dtype=np.uint64)
            self._counter += batch
            z = (np.uint64(self.seed) + ctr * np.uint64(_GAMMA)) & np.uint64(_MASK64)
            z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9))
            z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB))
            z = z ^ (z >> np.uint64(31))
            z = z[z < np.uint64(threshold)]
            take = min(len(z), need)
            out[filled : filled + take] = z[:take] % np.uint64(bound)
            filled += take
        return out.astype(np.int64)
