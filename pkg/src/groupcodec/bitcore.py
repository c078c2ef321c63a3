"""Bit-level primitives shared by all codecs.

Everything here works on quadruples: four consecutive integers that share one
width decision and are spread over the four 32-bit components of a 128-bit
vector (lane ``k`` always lives in component ``k``).

Vectors are represented as ``(V, 4)`` ``uint32`` arrays; on the wire they are
16 bytes each, four little-endian words, component 0 first.

Packing rules:

* inside a component, bits are consumed from the least significant end;
* all four lanes share one running bit offset;
* when only ``r < bw`` bits remain in the current component, the high ``r``
  bits of the value go to the top of the current component and the low
  ``bw - r`` bits go to the bottom of the same component of the next vector.
"""

from __future__ import annotations

import sys
from array import array
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DeltaOverflowError,
    NotStrictlyIncreasingError,
    PreconditionError,
    TruncatedBlockError,
)

UINT32_MAX = 0xFFFFFFFF
LANES = 4
VECTOR_BYTES = 16


def as_uint32_array(data: Iterable[int] | np.ndarray, name: str = "data") -> np.ndarray:
    """Validate ``data`` and return it as a contiguous 1-D ``uint32`` array.

    Wider integer sources are accepted as long as every value fits in 32 bits.
    """
    if isinstance(data, np.ndarray):
        arr = data
    else:
        if not isinstance(data, (list, tuple)):
            data = list(data)
        try:
            arr = np.asarray(data)
        except OverflowError as exc:
            raise PreconditionError(f"{name} holds values outside 0..2**32-1") from exc
    if arr.size == 0:
        return np.zeros(0, dtype=np.uint32)
    if arr.ndim != 1:
        raise PreconditionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.dtype == np.uint32:
        return np.ascontiguousarray(arr)
    if arr.dtype.kind == "O":
        try:
            arr = np.array(arr.tolist(), dtype=np.int64)
        except (TypeError, OverflowError) as exc:
            raise PreconditionError(f"{name} holds values outside 0..2**32-1") from exc
    if arr.dtype.kind not in "iu":
        raise PreconditionError(f"{name} must contain integers, got dtype {arr.dtype}")
    if arr.dtype.kind == "i" and int(arr.min()) < 0:
        raise PreconditionError(f"{name} holds negative values")
    if int(arr.max()) > UINT32_MAX:
        raise PreconditionError(f"{name} holds values wider than 32 bits")
    return arr.astype(np.uint32)


def effective_bit_width(x: int) -> int:
    """Number of bits needed to write ``x`` in binary; zero counts as one bit."""
    x = int(x)
    if x < 0 or x > UINT32_MAX:
        raise PreconditionError(f"{x} is not a 32-bit unsigned integer")
    return x.bit_length() or 1


def bit_widths(values: np.ndarray) -> np.ndarray:
    """Vectorized :func:`effective_bit_width` over a ``uint32`` array (int64 result)."""
    values = np.asarray(values)
    # frexp is exact here: every uint32 is representable in a float64.
    _, exp = np.frexp(values.astype(np.float64))
    return np.maximum(exp, 1).astype(np.int64)


def _check_quad_aligned(values: np.ndarray) -> None:
    if values.size % LANES:
        raise PreconditionError(
            f"length {values.size} is not a multiple of {LANES}; pad with zeros first"
        )


def pad_to_quadruples(values: np.ndarray, multiple: int = LANES) -> np.ndarray:
    """Zero-pad ``values`` up to a multiple of ``multiple`` integers."""
    rem = values.size % multiple
    if rem == 0:
        return values
    return np.concatenate([values, np.zeros(multiple - rem, dtype=values.dtype)])


def quad_max_array(values: Sequence[int] | np.ndarray) -> np.ndarray:
    """Per-quadruple maxima."""
    arr = as_uint32_array(values, "input")
    _check_quad_aligned(arr)
    if arr.size == 0:
        return np.zeros(0, dtype=np.uint32)
    return arr.reshape(-1, LANES).max(axis=1)


def pseudo_quad_max_array(values: Sequence[int] | np.ndarray) -> np.ndarray:
    """Per-quadruple bitwise OR: same effective width as the true maximum, no compares."""
    arr = as_uint32_array(values, "input")
    _check_quad_aligned(arr)
    if arr.size == 0:
        return np.zeros(0, dtype=np.uint32)
    return np.bitwise_or.reduce(arr.reshape(-1, LANES), axis=1)


def delta_encode(docids: Sequence[int] | np.ndarray) -> np.ndarray:
    """Replace each id by its gap to the previous one (the first id is kept)."""
    arr = as_uint32_array(docids, "docids")
    if arr.size < 2:
        return arr.copy()
    gaps = np.diff(arr.astype(np.int64))
    bad = np.flatnonzero(gaps <= 0)
    if bad.size:
        i = int(bad[0]) + 1
        raise NotStrictlyIncreasingError(i, int(arr[i - 1]), int(arr[i]))
    out = np.empty_like(arr)
    out[0] = arr[0]
    out[1:] = gaps
    return out


def delta_decode(gaps: Sequence[int] | np.ndarray) -> np.ndarray:
    """Prefix sums of ``gaps``; the exact inverse of :func:`delta_encode`."""
    arr = as_uint32_array(gaps, "gaps")
    if arr.size == 0:
        return arr.copy()
    sums = np.cumsum(arr, dtype=np.uint64)
    over = np.flatnonzero(sums > UINT32_MAX)
    if over.size:
        raise DeltaOverflowError(int(over[0]))
    return sums.astype(np.uint32)


# -- wire conversion -------------------------------------------------------

def vectors_to_bytes(vectors: np.ndarray) -> bytes:
    return np.ascontiguousarray(vectors, dtype="<u4").tobytes()


def bytes_to_vectors(data: bytes | memoryview, count: int | None = None) -> np.ndarray:
    """View ``data`` as ``(V, 4)`` vectors; ``count`` vectors are required when given."""
    available = len(data) // VECTOR_BYTES
    if count is None:
        count = available
    if available < count:
        raise TruncatedBlockError(
            f"data area holds {available} vectors, {count} required",
            required=count,
            available=available,
        )
    arr = np.frombuffer(data, dtype="<u4", count=count * LANES)
    return arr.reshape(count, LANES).astype(np.uint32, copy=False)


def bytes_to_words(data: bytes | memoryview) -> list[int]:
    """Little-endian 32-bit words as a Python list (scalar kernels)."""
    words = array("I")
    if words.itemsize != 4:  # pragma: no cover - exotic platforms
        return np.frombuffer(data, dtype="<u4").tolist()
    words.frombytes(bytes(data[: len(data) - len(data) % 4]))
    if sys.byteorder == "big":  # pragma: no cover
        words.byteswap()
    return words.tolist()


def words_to_bytes(words: list[int]) -> bytes:
    out = array("I", words)
    if out.itemsize != 4:  # pragma: no cover
        return np.asarray(words, dtype="<u4").tobytes()
    if sys.byteorder == "big":  # pragma: no cover
        out.byteswap()
    return out.tobytes()


# -- scalar vertical packing -----------------------------------------------

class VerticalWriter:
    """Word-at-a-time writer for the 4-way vertical layout.

    ``words`` is the flat component stream: vector ``v`` component ``k`` is
    ``words[4 * v + k]``.
    """

    __slots__ = ("words", "vec", "bit")

    def __init__(self) -> None:
        self.words: list[int] = []
        self.vec = 0
        self.bit = 0

    def write(self, a: int, b: int, c: int, d: int, bw: int) -> None:
        words = self.words
        base = self.vec * 4
        if len(words) < base + 8:
            words.extend([0] * (base + 8 - len(words)))
        bit = self.bit
        end = bit + bw
        if end <= 32:
            words[base] |= a << bit
            words[base + 1] |= b << bit
            words[base + 2] |= c << bit
            words[base + 3] |= d << bit
            if end == 32:
                self.vec += 1
                self.bit = 0
            else:
                self.bit = end
        else:
            low = end - 32
            m = (1 << low) - 1
            words[base] |= (a >> low) << bit
            words[base + 1] |= (b >> low) << bit
            words[base + 2] |= (c >> low) << bit
            words[base + 3] |= (d >> low) << bit
            words[base + 4] |= a & m
            words[base + 5] |= b & m
            words[base + 6] |= c & m
            words[base + 7] |= d & m
            self.vec += 1
            self.bit = low

    def align(self) -> None:
        """Move to the start of the next vector unless already there."""
        if self.bit:
            self.vec += 1
            self.bit = 0

    @property
    def n_vectors(self) -> int:
        return self.vec + (1 if self.bit else 0)

    def getvalue(self) -> list[int]:
        return self.words[: self.n_vectors * 4]


class VerticalReader:
    """Inverse of :class:`VerticalWriter` over a flat word list."""

    __slots__ = ("words", "vec", "bit")

    def __init__(self, words: list[int]) -> None:
        self.words = words
        self.vec = 0
        self.bit = 0

    def read(self, bw: int) -> tuple[int, int, int, int]:
        words = self.words
        base = self.vec * 4
        bit = self.bit
        end = bit + bw
        if end <= 32:
            m = (1 << bw) - 1
            out = (
                (words[base] >> bit) & m,
                (words[base + 1] >> bit) & m,
                (words[base + 2] >> bit) & m,
                (words[base + 3] >> bit) & m,
            )
            if end == 32:
                self.vec += 1
                self.bit = 0
            else:
                self.bit = end
            return out
        low = end - 32
        m = (1 << low) - 1
        out = (
            ((words[base] >> bit) << low) | (words[base + 4] & m),
            ((words[base + 1] >> bit) << low) | (words[base + 5] & m),
            ((words[base + 2] >> bit) << low) | (words[base + 6] & m),
            ((words[base + 3] >> bit) << low) | (words[base + 7] & m),
        )
        self.vec += 1
        self.bit = low
        return out

    def align(self) -> None:
        if self.bit:
            self.vec += 1
            self.bit = 0


# -- vectorized vertical packing -------------------------------------------

def scatter_vertical(
    quads: np.ndarray, widths: np.ndarray, offsets: np.ndarray, n_vectors: int
) -> np.ndarray:
    """Pack quadruples at per-quadruple ``widths`` and absolute bit ``offsets``.

    ``offsets`` are positions in the per-component bit stream and must be
    nondecreasing with non-overlapping ranges. Returns ``(n_vectors, 4)`` uint32.
    """
    out = np.zeros((n_vectors, LANES), dtype=np.uint64)
    if len(quads) == 0:
        return out.astype(np.uint32)
    q = np.asarray(quads, dtype=np.uint64).reshape(-1, LANES)
    widths = np.asarray(widths, dtype=np.uint64)
    offsets = np.asarray(offsets, dtype=np.uint64)
    word = (offsets >> np.uint64(5)).astype(np.int64)
    shift = offsets & np.uint64(31)
    end = shift + widths
    split = end > np.uint64(32)
    low = np.where(split, end - np.uint64(32), np.uint64(0))
    cur = (q >> low[:, None]) << shift[:, None]
    # word indices are nondecreasing, so segments of equal word can be OR-reduced
    starts = np.flatnonzero(np.r_[True, word[1:] != word[:-1]])
    out[word[starts]] = np.bitwise_or.reduceat(cur, starts, axis=0)
    if split.any():
        s = np.flatnonzero(split)
        lmask = (np.uint64(1) << low[s]) - np.uint64(1)
        out[word[s] + 1] |= q[s] & lmask[:, None]
    return out.astype(np.uint32)


def gather_vertical(vectors: np.ndarray, widths: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Inverse of :func:`scatter_vertical`; returns ``(Q, 4)`` uint32."""
    if len(widths) == 0:
        return np.zeros((0, LANES), dtype=np.uint32)
    words = np.asarray(vectors, dtype=np.uint32).astype(np.uint64)
    widths = np.asarray(widths, dtype=np.uint64)
    offsets = np.asarray(offsets, dtype=np.uint64)
    word = (offsets >> np.uint64(5)).astype(np.int64)
    shift = offsets & np.uint64(31)
    end = shift + widths
    split = end > np.uint64(32)
    cur = words[word] >> shift[:, None]
    mask = (np.uint64(1) << widths) - np.uint64(1)
    res = cur & mask[:, None]
    if split.any():
        s = np.flatnonzero(split)
        low = end[s] - np.uint64(32)
        lmask = (np.uint64(1) << low) - np.uint64(1)
        res[s] = (cur[s] << low[:, None]) | (words[word[s] + 1] & lmask[:, None])
    return res.astype(np.uint32)


def pack_vertical(quads: Sequence[Sequence[int]] | np.ndarray, bw: int) -> np.ndarray:
    """Pack quadruples at a fixed width ``bw`` starting at a vector boundary.

    Uses exactly ``ceil(len(quads) * bw / 32)`` vectors.
    """
    if not 1 <= bw <= 32:
        raise PreconditionError(f"bit width {bw} outside 1..32")
    q = np.asarray(quads, dtype=np.uint64).reshape(-1, LANES)
    if q.size and int(q.max()) >= (1 << bw):
        raise PreconditionError(f"lane value {int(q.max())} does not fit in {bw} bits")
    count = len(q)
    n_vectors = -(-count * bw // 32)
    offsets = np.arange(count, dtype=np.uint64) * np.uint64(bw)
    return scatter_vertical(q, np.full(count, bw, dtype=np.uint64), offsets, n_vectors)


def unpack_vertical(vectors: np.ndarray | bytes, bw: int, count: int) -> np.ndarray:
    """Read ``count`` quadruples of width ``bw`` from the start of ``vectors``."""
    if not 1 <= bw <= 32:
        raise PreconditionError(f"bit width {bw} outside 1..32")
    required = -(-count * bw // 32)
    if isinstance(vectors, (bytes, bytearray, memoryview)):
        vectors = bytes_to_vectors(vectors, required)
    vectors = np.asarray(vectors).reshape(-1, LANES)
    if len(vectors) < required:
        raise TruncatedBlockError(
            f"stream holds {len(vectors)} vectors, {required} required",
            required=required,
            available=len(vectors),
        )
    if count == 0:
        return np.zeros((0, LANES), dtype=np.uint32)
    offsets = np.arange(count, dtype=np.uint64) * np.uint64(bw)
    return gather_vertical(vectors, np.full(count, bw, dtype=np.uint64), offsets)
