"""Bit-level access to raw stream outputs.

Each raw output contributes its stream-width bits most-significant-first;
successive outputs are concatenated in draw order.  Wider values read
through a BitReader are therefore big-endian concatenations of fields,
e.g. two 4-bit fields 0xA then 0x5 read as one byte give 0xA5.
"""

from __future__ import annotations

import numpy as np

from .base import RandomStream


class BitReader:
    """Serves the bit expansion of a stream's raw outputs."""

    def __init__(self, stream: RandomStream):
        self._stream = stream
        self._width = stream.bit_width
        self._pending = np.empty(0, dtype=np.uint8)

    def read(self, n_bits: int) -> np.ndarray:
        """Return exactly n_bits bits as a uint8 array of 0s and 1s."""
        have = self._pending.size
        if have >= n_bits:
            out = self._pending[:n_bits]
            self._pending = self._pending[n_bits:]
            return out
        w = self._width
        n_raw = (n_bits - have + w - 1) // w
        raw = self._stream.next_block(n_raw)
        shifts = np.arange(w - 1, -1, -1, dtype=np.uint64)
        bits = ((raw[:, None] >> shifts) & np.uint64(1)).astype(np.uint8).ravel()
        if have:
            bits = np.concatenate([self._pending, bits])
        out = bits[:n_bits]
        self._pending = bits[n_bits:]
        return out

    def read_values(self, count: int, value_bits: int) -> np.ndarray:
        """Return `count` integers of `value_bits` bits each (big-endian)."""
        bits = self.read(count * value_bits).reshape(count, value_bits)
        weights = (1 << np.arange(value_bits - 1, -1, -1)).astype(np.int64)
        return bits.astype(np.int64) @ weights
