"""Frame-based codecs: Group-AFOR and Group-PFD.

A frame is a run of quadruples packed at one shared width; every frame starts
on a vector boundary.

Group-AFOR chooses variable frame lengths of 8, 16 or 32 quadruples by dynamic
programming over the quad max array. Control area: one byte per frame,
bits 0-1 the length code (0, 1, 2 for 8, 16, 32 quadruples), bits 2-6 the
width minus one, bit 7 zero. The last frame may extend past the input; the
extra quadruples are zero.

Group-PFD uses fixed frames of 32 quadruples (128 integers). The frame width
``b`` is the smallest one leaving at most a ``zeta`` fraction of quadruples
too wide; integers that still do not fit are exceptions. Every slot keeps its
low ``b`` bits and the exceptions are stored in full in the frame's control
record::

    u8 b | u8 w-code (0 none, 1 u8, 2 u16, 3 u32) | u16 count |
    count x u8 position | count x value at w bits (little-endian)

The final frame may hold fewer than 32 quadruples.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .bitcore import (
    LANES,
    VerticalWriter,
    as_uint32_array,
    bit_widths,
    bytes_to_vectors,
    bytes_to_words,
    gather_vertical,
    pad_to_quadruples,
    pseudo_quad_max_array,
    scatter_vertical,
    vectors_to_bytes,
    words_to_bytes,
)
from .codec import Codec, CodecId, check_control_tail, check_data_length
from .errors import MalformedBlockError, PreconditionError
from .kernels import Kernel

FRAME_QUADS = (8, 16, 32)
_LENGTH_CODES = {8: 0, 16: 1, 32: 2}
HEADER_BITS = 8


def _vectors_for(quads: int, bw: int) -> int:
    return -(-quads * bw // 32)


def frame_cost(quads: int, bw: int) -> int:
    """Bits used by one AFOR frame: header byte plus whole data vectors."""
    return HEADER_BITS + 128 * _vectors_for(quads, bw)


@dataclass(frozen=True)
class Frame:
    start: int
    length: int
    bw: int


@dataclass(frozen=True)
class FramePlan:
    frames: tuple[Frame, ...]
    total_cost_bits: int

    @property
    def n_quads(self) -> int:
        return sum(f.length for f in self.frames)

    @property
    def n_vectors(self) -> int:
        return sum(_vectors_for(f.length, f.bw) for f in self.frames)


def afor_partition(max_arr) -> FramePlan:
    """Cheapest tiling of the quad max array into 8/16/32-quadruple frames.

    The last frame may run past the end of the array; the overhang is zero
    padding and only costs data bits.
    """
    m = as_uint32_array(max_arr, "max_arr")
    if m.size == 0:
        return FramePlan((), 0)
    widths = np.ones(-(-m.size // 8) * 8, dtype=np.int64)
    widths[: m.size] = bit_widths(m)
    block_max = widths.reshape(-1, 8).max(axis=1).tolist()
    blocks = len(block_max)
    cost = [0] * (blocks + 1)
    pick = [0] * (blocks + 1)
    for b in range(blocks - 1, -1, -1):
        best = None
        # shorter frames first: on a tie, decode less padding
        for span in (1, 2, 4):
            end = min(b + span, blocks)
            c = frame_cost(8 * span, max(block_max[b:end])) + cost[end]
            if best is None or c < best:
                best = c
                pick[b] = span
        cost[b] = best
    frames = []
    b = 0
    while b < blocks:
        span = pick[b]
        frames.append(Frame(8 * b, 8 * span, int(max(block_max[b:b + span]))))
        b += span
    return FramePlan(tuple(frames), cost[0])


class GroupAforCodec(Codec):
    codec_id = CodecId.GROUP_AFOR
    name = "group-afor"

    def encode_payload(self, values, kernel):
        if values.size == 0:
            return b"", b""
        quad_count = -(-values.size // LANES)
        if kernel is Kernel.SCALAR:
            flat = values.tolist()
            flat += [0] * (4 * quad_count - len(flat))
            maxes = [a | b | c | d for a, b, c, d in zip(*[iter(flat)] * 4)]
            plan = afor_partition(maxes)
            flat += [0] * (4 * plan.n_quads - len(flat))
            writer = VerticalWriter()
            for fr in plan.frames:
                for q in range(fr.start, fr.start + fr.length):
                    i = 4 * q
                    writer.write(flat[i], flat[i + 1], flat[i + 2], flat[i + 3], fr.bw)
                writer.align()
            data = words_to_bytes(writer.getvalue())
        else:
            plan = afor_partition(pseudo_quad_max_array(pad_to_quadruples(values)))
            padded = np.zeros(4 * plan.n_quads, dtype=np.uint32)
            padded[: values.size] = values
            widths, offsets = self._layout(plan)
            vectors = scatter_vertical(padded.reshape(-1, LANES), widths, offsets, plan.n_vectors)
            data = vectors_to_bytes(vectors)
        control = bytes(_LENGTH_CODES[f.length] | ((f.bw - 1) << 2) for f in plan.frames)
        return control, data

    @staticmethod
    def _layout(plan: FramePlan) -> tuple[np.ndarray, np.ndarray]:
        lengths = np.asarray([f.length for f in plan.frames], dtype=np.int64)
        bws = np.asarray([f.bw for f in plan.frames], dtype=np.int64)
        vecs = -(-lengths * bws // 32)
        vec_start = np.cumsum(vecs) - vecs
        widths = np.repeat(bws, lengths)
        frame_start = np.repeat(np.cumsum(lengths) - lengths, lengths)
        slot = np.arange(widths.size) - frame_start
        offsets = np.repeat(vec_start * 32, lengths) + slot * widths
        return widths, offsets

    def _read_frames(self, control, quads: int) -> tuple[FramePlan, int]:
        frames = []
        covered = 0
        pos = 0
        raw = bytes(control)
        while covered < quads:
            if pos >= len(raw):
                raise MalformedBlockError(f"frame headers describe {covered} of {quads} quadruples")
            header = raw[pos]
            code = header & 3
            if code == 3 or header & 0x80:
                raise MalformedBlockError(f"bad frame header 0x{header:02x} at control byte {pos}")
            length = FRAME_QUADS[code]
            frames.append(Frame(covered, length, ((header >> 2) & 31) + 1))
            covered += length
            pos += 1
        return FramePlan(tuple(frames), 0), pos

    def decode_payload(self, control, data, n, kernel):
        quads = -(-n // LANES)
        plan, used = self._read_frames(control, quads)
        check_control_tail(control, used)
        check_data_length(data, 16 * plan.n_vectors)
        if quads == 0:
            return np.zeros(0, dtype=np.uint32)
        if kernel is Kernel.SCALAR:
            words = bytes_to_words(data)
            out: list[int] = []
            base = 0
            for fr in plan.frames:
                _read_frame_scalar(words, base, fr.length, fr.bw, out)
                base += 4 * _vectors_for(fr.length, fr.bw)
                if len(out) >= n:
                    break
            del out[n:]
            return np.asarray(out, dtype=np.uint32)
        widths, offsets = self._layout(plan)
        vectors = bytes_to_vectors(data, plan.n_vectors)
        return gather_vertical(vectors, widths, offsets).reshape(-1)[:n]


def _read_frame_scalar(words: list[int], base: int, quads: int, bw: int, out: list[int]) -> None:
    """Append ``quads`` quadruples of width ``bw`` starting at word ``base``."""
    extend = out.extend
    bit = 0
    m = (1 << bw) - 1
    for _ in range(quads):
        end = bit + bw
        if end <= 32:
            extend(((words[base] >> bit) & m, (words[base + 1] >> bit) & m,
                    (words[base + 2] >> bit) & m, (words[base + 3] >> bit) & m))
            if end == 32:
                base += 4
                bit = 0
            else:
                bit = end
        else:
            low = end - 32
            lm = (1 << low) - 1
            extend((((words[base] >> bit) << low) | (words[base + 4] & lm),
                    ((words[base + 1] >> bit) << low) | (words[base + 5] & lm),
                    ((words[base + 2] >> bit) << low) | (words[base + 6] & lm),
                    ((words[base + 3] >> bit) << low) | (words[base + 7] & lm)))
            base += 4
            bit = low


# -- Group-PFD -------------------------------------------------------------

PFD_FRAME_QUADS = 32
_W_CODES = {8: 1, 16: 2, 32: 3}
_W_BY_CODE = {1: 8, 2: 16, 3: 32}
_W_FORMATS = {8: "B", 16: "H", 32: "I"}


@dataclass(frozen=True)
class PfdParams:
    zeta: float = 0.1
    frame_len: int = 128

    def __post_init__(self):
        if not 0 < self.zeta < 1:
            raise PreconditionError(f"exception threshold zeta={self.zeta} must lie in (0, 1)")
        if self.frame_len != 128:
            raise PreconditionError("Group-PFD frames hold exactly 128 integers")


@dataclass(frozen=True)
class ExceptionSet:
    b: int
    positions: tuple[int, ...]
    values: tuple[int, ...]
    w: int | None

    @classmethod
    def build(cls, b: int, positions, values) -> "ExceptionSet":
        positions = tuple(int(p) for p in positions)
        values = tuple(int(v) for v in values)
        return cls(b, positions, values, exception_width(values))

    def record(self) -> bytes:
        w = self.w
        head = struct.pack("<BBH", self.b, _W_CODES[w] if w else 0, len(self.positions))
        if not self.positions:
            return head
        return (head + bytes(self.positions)
                + struct.pack(f"<{len(self.values)}{_W_FORMATS[w]}", *self.values))


def exception_width(values) -> int | None:
    """Smallest of 8, 16, 32 bits holding every value (``None`` when empty)."""
    if len(values) == 0:
        return None
    top = max(values)
    return 8 if top < 1 << 8 else 16 if top < 1 << 16 else 32


def _allowed_exceptions(m: int, zeta: float) -> int:
    """Largest count ``e`` with ``e / m <= zeta``."""
    k = int(zeta * m)
    while k < m and (k + 1) / m <= zeta:
        k += 1
    while k > 0 and k / m > zeta:
        k -= 1
    return k


def pfd_choose_width(frame_maxes, zeta: float = 0.1) -> tuple[int, np.ndarray]:
    """Smallest width ``b`` whose exception ratio over ``frame_maxes`` is at most ``zeta``.

    Returns ``b`` and the indices of the entries wider than ``b``.
    """
    if not 0 < zeta < 1:
        raise PreconditionError(f"exception threshold zeta={zeta} must lie in (0, 1)")
    widths = bit_widths(as_uint32_array(frame_maxes, "frame_maxes"))
    if widths.size == 0:
        return 1, np.zeros(0, dtype=np.int64)
    k = _allowed_exceptions(widths.size, zeta)
    b = int(np.sort(widths)[::-1][k])
    return b, np.flatnonzero(widths > b)


class GroupPfdCodec(Codec):
    codec_id = CodecId.GROUP_PFD
    name = "group-pfd"

    def __init__(self, zeta: float = 0.1):
        self.params = PfdParams(zeta)

    def __repr__(self) -> str:
        return f"GroupPfdCodec(zeta={self.params.zeta})"

    # encode ---------------------------------------------------------------

    def encode_payload(self, values, kernel):
        if values.size == 0:
            return b"", b""
        if kernel is Kernel.SCALAR:
            return self._encode_scalar(values.tolist())
        return self._encode_vector(values)

    def _encode_scalar(self, values: list[int]) -> tuple[bytes, bytes]:
        zeta = self.params.zeta
        if len(values) % LANES:
            values = values + [0] * (LANES - len(values) % LANES)
        control = bytearray()
        writer = VerticalWriter()
        frame_ints = 4 * PFD_FRAME_QUADS
        for start in range(0, len(values), frame_ints):
            frame = values[start:start + frame_ints]
            qwidths = [
                (a | b | c | d).bit_length() or 1
                for a, b, c, d in zip(*[iter(frame)] * 4)
            ]
            k = _allowed_exceptions(len(qwidths), zeta)
            b = sorted(qwidths, reverse=True)[k]
            mask = (1 << b) - 1
            positions = []
            for q, qw in enumerate(qwidths):
                if qw > b:
                    positions.extend(i for i in range(4 * q, 4 * q + 4) if frame[i] > mask)
            exc = ExceptionSet.build(b, positions, [frame[i] for i in positions])
            control += exc.record()
            for i in range(0, len(frame), 4):
                writer.write(frame[i] & mask, frame[i + 1] & mask,
                             frame[i + 2] & mask, frame[i + 3] & mask, b)
            writer.align()
        return bytes(control), words_to_bytes(writer.getvalue())

    def _encode_vector(self, values: np.ndarray) -> tuple[bytes, bytes]:
        zeta = self.params.zeta
        padded = pad_to_quadruples(values)
        quads = padded.reshape(-1, LANES)
        qwidths = bit_widths(pseudo_quad_max_array(padded))
        n_quads = qwidths.size
        n_frames = -(-n_quads // PFD_FRAME_QUADS)
        full = n_quads // PFD_FRAME_QUADS
        bs = np.empty(n_frames, dtype=np.int64)
        if full:
            k = _allowed_exceptions(PFD_FRAME_QUADS, zeta)
            rows = np.sort(qwidths[: full * PFD_FRAME_QUADS].reshape(full, -1), axis=1)[:, ::-1]
            bs[:full] = rows[:, k]
        if full < n_frames:
            bs[full], _ = pfd_choose_width(
                pseudo_quad_max_array(padded[4 * full * PFD_FRAME_QUADS:]), zeta)
        frame_of_quad = np.arange(n_quads) // PFD_FRAME_QUADS
        quad_b = bs[frame_of_quad]
        masks = ((np.int64(1) << quad_b) - 1).astype(np.uint64)
        low = (quads.astype(np.uint64) & masks[:, None]).astype(np.uint32)
        frame_quads = np.minimum(PFD_FRAME_QUADS, n_quads - np.arange(n_frames) * PFD_FRAME_QUADS)
        vecs = -(-frame_quads * bs // 32)
        vec_start = np.cumsum(vecs) - vecs
        slot = np.arange(n_quads) % PFD_FRAME_QUADS
        offsets = vec_start[frame_of_quad] * 32 + slot * quad_b
        vectors = scatter_vertical(low, quad_b, offsets, int(vecs.sum()))
        exc_flat = np.flatnonzero(padded.astype(np.uint64) > np.repeat(masks, LANES))
        exc_frame = exc_flat // (4 * PFD_FRAME_QUADS)
        cuts = np.searchsorted(exc_frame, np.arange(n_frames + 1))
        exc_pos = (exc_flat % (4 * PFD_FRAME_QUADS)).tolist()
        exc_val = padded[exc_flat].tolist()
        bs_l = bs.tolist()
        control = bytearray()
        for f in range(n_frames):
            lo, hi = cuts[f], cuts[f + 1]
            control += ExceptionSet.build(bs_l[f], exc_pos[lo:hi], exc_val[lo:hi]).record()
        return bytes(control), vectors_to_bytes(vectors)

    # decode ---------------------------------------------------------------

    @staticmethod
    def _read_records(control, quads: int) -> tuple[list[ExceptionSet], int]:
        raw = bytes(control)
        records = []
        pos = 0
        for f in range(-(-quads // PFD_FRAME_QUADS)):
            slots = 4 * min(PFD_FRAME_QUADS, quads - f * PFD_FRAME_QUADS)
            if pos + 4 > len(raw):
                raise MalformedBlockError(f"control area ends inside the header of frame {f}")
            b, wcode, count = struct.unpack_from("<BBH", raw, pos)
            pos += 4
            if not 1 <= b <= 32:
                raise MalformedBlockError(f"frame {f}: bit width {b} outside 1..32")
            if wcode > 3 or (wcode == 0) != (count == 0):
                raise MalformedBlockError(f"frame {f}: w-code {wcode} inconsistent with {count} exceptions")
            if count > slots:
                raise MalformedBlockError(f"frame {f}: {count} exceptions in {slots} slots")
            w = _W_BY_CODE.get(wcode)
            size = count + (count * w // 8 if w else 0)
            if pos + size > len(raw):
                raise MalformedBlockError(f"control area ends inside the exceptions of frame {f}")
            positions = tuple(raw[pos:pos + count])
            if any(p >= slots for p in positions) or any(
                    a >= b_ for a, b_ in zip(positions, positions[1:])):
                raise MalformedBlockError(f"frame {f}: exception positions out of order or range")
            pos += count
            values = struct.unpack_from(f"<{count}{_W_FORMATS[w]}", raw, pos) if count else ()
            pos += size - count
            records.append(ExceptionSet(b, positions, values, w))
        return records, pos

    def decode_payload(self, control, data, n, kernel):
        quads = -(-n // LANES)
        records, used = self._read_records(control, quads)
        check_control_tail(control, used)
        frame_quads = [min(PFD_FRAME_QUADS, quads - f * PFD_FRAME_QUADS) for f in range(len(records))]
        n_vectors = sum(_vectors_for(fq, r.b) for fq, r in zip(frame_quads, records))
        check_data_length(data, 16 * n_vectors)
        if quads == 0:
            return np.zeros(0, dtype=np.uint32)
        if kernel is Kernel.SCALAR:
            words = bytes_to_words(data)
            out: list[int] = []
            base = 0
            for fq, rec in zip(frame_quads, records):
                start = len(out)
                _read_frame_scalar(words, base, fq, rec.b, out)
                for p, v in zip(rec.positions, rec.values):
                    out[start + p] = v
                base += 4 * _vectors_for(fq, rec.b)
            del out[n:]
            return np.asarray(out, dtype=np.uint32)
        fq = np.asarray(frame_quads, dtype=np.int64)
        bs = np.asarray([r.b for r in records], dtype=np.int64)
        vecs = -(-fq * bs // 32)
        vec_start = np.cumsum(vecs) - vecs
        frame_of_quad = np.repeat(np.arange(fq.size), fq)
        widths = bs[frame_of_quad]
        slot = np.arange(quads) - frame_of_quad * PFD_FRAME_QUADS
        offsets = vec_start[frame_of_quad] * 32 + slot * widths
        out = gather_vertical(bytes_to_vectors(data, n_vectors), widths, offsets).reshape(-1)
        counts = [len(r.positions) for r in records]
        if sum(counts):
            pos = np.concatenate([np.asarray(r.positions, dtype=np.int64) for r in records])
            vals = np.concatenate([np.asarray(r.values, dtype=np.uint32) for r in records])
            pos += np.repeat(np.arange(len(records)) * 4 * PFD_FRAME_QUADS, counts)
            out[pos] = vals
        return out[:n]
