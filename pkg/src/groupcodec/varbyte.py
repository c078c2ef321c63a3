"""Variable Byte: the classic byte-aligned baseline.

Each integer is written as 7-bit groups, least significant group first. The
high bit of a byte is set on the *last* byte of an integer and clear on
continuation bytes. Used both as a standalone codec and for short posting
lists, where the 128-bit granularity of the group codecs does not pay off.
"""

from __future__ import annotations

import numpy as np

from .bitcore import UINT32_MAX, as_uint32_array, bit_widths
from .codec import Codec, CodecId, check_data_length
from .errors import MalformedBlockError, TruncatedBlockError
from .kernels import Kernel, select_kernel

MAX_BYTES = 5


def _encode_scalar(values: list[int]) -> bytes:
    out = bytearray()
    append = out.append
    for v in values:
        while v >= 0x80:
            append(v & 0x7F)
            v >>= 7
        append(v | 0x80)
    return bytes(out)


def _encode_vector(values: np.ndarray) -> bytes:
    if values.size == 0:
        return b""
    nbytes = (bit_widths(values) + 6) // 7
    starts = np.cumsum(nbytes) - nbytes
    out = np.empty(int(nbytes.sum()), dtype=np.uint8)
    v = values.astype(np.uint64)
    for t in range(MAX_BYTES):
        sel = np.flatnonzero(nbytes > t)
        if sel.size == 0:
            break
        chunk = (v[sel] >> np.uint64(7 * t)) & np.uint64(0x7F)
        chunk |= np.where(nbytes[sel] == t + 1, np.uint64(0x80), np.uint64(0))
        out[starts[sel] + t] = chunk
    return out.tobytes()


def _decode_scalar(data: bytes | memoryview, n: int) -> tuple[list[int], int]:
    buf = bytes(data)
    size = len(buf)
    out: list[int] = []
    pos = 0
    for i in range(n):
        value = 0
        shift = 0
        while True:
            if shift == 7 * MAX_BYTES:
                raise MalformedBlockError(f"integer {i} runs past {MAX_BYTES} bytes")
            if pos >= size:
                raise TruncatedBlockError(f"stream ends inside integer {i} of {n}")
            byte = buf[pos]
            pos += 1
            value |= (byte & 0x7F) << shift
            shift += 7
            if byte & 0x80:
                break
        if value > UINT32_MAX:
            raise MalformedBlockError(f"integer {i} does not fit in 32 bits")
        out.append(value)
    return out, pos


def _decode_vector(data: bytes | memoryview, n: int) -> tuple[np.ndarray, int]:
    if n == 0:
        return np.zeros(0, dtype=np.uint32), 0
    buf = np.frombuffer(data, dtype=np.uint8)
    ends = np.flatnonzero(buf & 0x80)[:n]
    starts = np.empty_like(ends)
    if ends.size:
        starts[0] = 0
        starts[1:] = ends[:-1] + 1
    lens = ends - starts + 1
    overlong = np.flatnonzero(lens > MAX_BYTES)
    if overlong.size:
        raise MalformedBlockError(f"integer {int(overlong[0])} runs past {MAX_BYTES} bytes")
    if ends.size < n:
        tail_start = int(ends[-1]) + 1 if ends.size else 0
        if buf.size - tail_start >= MAX_BYTES:
            raise MalformedBlockError(f"integer {ends.size} runs past {MAX_BYTES} bytes")
        raise TruncatedBlockError(f"stream ends inside integer {ends.size} of {n}")
    values = np.zeros(n, dtype=np.uint64)
    for t in range(MAX_BYTES):
        sel = np.flatnonzero(lens > t)
        if sel.size == 0:
            break
        values[sel] |= (buf[starts[sel] + t].astype(np.uint64) & np.uint64(0x7F)) << np.uint64(7 * t)
    wide = np.flatnonzero(values > UINT32_MAX)
    if wide.size:
        raise MalformedBlockError(f"integer {int(wide[0])} does not fit in 32 bits")
    return values.astype(np.uint32), int(ends[-1]) + 1


def varbyte_encode(data, kernel: Kernel | str = Kernel.AUTO) -> bytes:
    values = as_uint32_array(data)
    if select_kernel(kernel) is Kernel.SCALAR:
        return _encode_scalar(values.tolist())
    return _encode_vector(values)


def varbyte_decode(data: bytes | memoryview, n: int, kernel: Kernel | str = Kernel.AUTO) -> np.ndarray:
    """Decode the first ``n`` integers of ``data``; bytes after them are ignored."""
    if select_kernel(kernel) is Kernel.SCALAR:
        values, _ = _decode_scalar(data, n)
        return np.asarray(values, dtype=np.uint32)
    return _decode_vector(data, n)[0]


class VarByteCodec(Codec):
    codec_id = CodecId.VARBYTE
    name = "varbyte"

    def encode_payload(self, values, kernel):
        if kernel is Kernel.SCALAR:
            return b"", _encode_scalar(values.tolist())
        return b"", _encode_vector(values)

    def decode_payload(self, control, data, n, kernel):
        if kernel is Kernel.SCALAR:
            values, used = _decode_scalar(data, n)
            values = np.asarray(values, dtype=np.uint32)
        else:
            values, used = _decode_vector(data, n)
        check_data_length(data, used)
        return values
