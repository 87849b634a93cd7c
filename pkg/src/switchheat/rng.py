"""Counter-based random streams (Philox4x32-10).

Every draw is a pure function of ``(seed, stream_id, position)``, so a Monte
Carlo sample keyed by its index produces the same numbers whether it is
generated alone, in a batch, or on another worker.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint32(0x9E3779B9)
_W1 = np.uint32(0xBB67AE85)
_MASK32 = 0xFFFFFFFF
_TWO_M53 = 2.0**-53


def philox4x32(counter, key, rounds: int = 10):
    """Philox4x32 block function, vectorized over broadcastable uint32 words.

    ``counter`` is a 4-tuple of arrays, ``key`` a 2-tuple. Returns four uint32
    arrays.
    """
    words = np.broadcast_arrays(
        *(np.asarray(c, dtype=np.uint32) for c in counter),
        *(np.asarray(k, dtype=np.uint32) for k in key),
    )
    c0, c1, c2, c3, k0, k1 = (w.copy() for w in words)
    with np.errstate(over="ignore"):
        for _ in range(rounds):
            p0 = _M0 * c0.astype(np.uint64)
            p1 = _M1 * c2.astype(np.uint64)
            hi0 = (p0 >> np.uint64(32)).astype(np.uint32)
            hi1 = (p1 >> np.uint64(32)).astype(np.uint32)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, p1.astype(np.uint32), hi0 ^ c3 ^ k1, p0.astype(np.uint32)
            k0 = k0 + _W0
            k1 = k1 + _W1
    return c0, c1, c2, c3


def _splitmix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def derive_stream(parent, *tags: int) -> np.ndarray:
    """Child stream id(s) obtained by hashing ``tags`` into ``parent``.

    ``parent`` may be an array of ids; the result has the same shape.
    """
    out = np.asarray(parent, dtype=np.uint64)
    for tag in tags:
        with np.errstate(over="ignore"):
            out = _splitmix64(out ^ _splitmix64(np.uint64(tag & 0xFFFFFFFFFFFFFFFF)))
    return out


def _to_unit(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    # 53 random bits, shifted by half an ulp so the result lies in (0, 1).
    a = (hi >> np.uint32(5)).astype(np.float64)
    b = (lo >> np.uint32(6)).astype(np.float64)
    return (a * 67108864.0 + b + 0.5) * _TWO_M53


def uniform_pairs(seed: int, stream_ids, positions) -> np.ndarray:
    """Two uniforms in (0, 1) per ``(stream, position)``; shape ``broadcast + (2,)``."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    ids = np.asarray(stream_ids, dtype=np.uint64)
    pos = np.asarray(positions, dtype=np.uint64)
    ids, pos = np.broadcast_arrays(ids, pos)
    ctr = (
        (pos & np.uint64(_MASK32)).astype(np.uint32),
        (pos >> np.uint64(32)).astype(np.uint32),
        (ids & np.uint64(_MASK32)).astype(np.uint32),
        (ids >> np.uint64(32)).astype(np.uint32),
    )
    key = (np.uint32(seed & _MASK32), np.uint32(seed >> 32))
    x0, x1, x2, x3 = philox4x32(ctr, key)
    return np.stack([_to_unit(x0, x1), _to_unit(x2, x3)], axis=-1)


class CounterStream:
    """Sequential view of one Philox stream.

    Quacks like the subset of ``numpy.random.Generator`` used in this package
    (``random``). ``child`` gives an independent stream without consuming
    anything from this one.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = np.uint64(int(stream_id) & 0xFFFFFFFFFFFFFFFF)
        self._position = 0
        self._spare: float | None = None

    def child(self, *tags: int) -> "CounterStream":
        return CounterStream(self.seed, int(derive_stream(self.stream_id, *tags)))

    def random(self, size=None):
        n = 1 if size is None else int(np.prod(size))
        out = np.empty(n)
        filled = 0
        if self._spare is not None and n > 0:
            out[0] = self._spare
            self._spare = None
            filled = 1
        need = n - filled
        if need > 0:
            blocks = (need + 1) // 2
            pos = np.arange(self._position, self._position + blocks, dtype=np.uint64)
            u = uniform_pairs(self.seed, self.stream_id, pos).reshape(-1)
            self._position += blocks
            out[filled:] = u[:need]
            if u.size > need:
                self._spare = float(u[need])
        if size is None:
            return float(out[0])
        return out.reshape(size)

    def __repr__(self) -> str:
        return f"CounterStream(seed={self.seed}, stream_id={int(self.stream_id)})"
