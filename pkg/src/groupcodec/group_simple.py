"""Group-Simple: Simple-9 style selectors, one 4-bit selector per 128-bit vector.

A selector picks ``(NUM, BW)``: each 32-bit component of the vector holds
``NUM`` integers of ``BW`` bits, so one vector carries ``NUM`` quadruples.
Selectors are chosen greedily on the per-quadruple maxima, which means only a
quarter of the input is inspected during pattern selection.

Layout inside the block:

* control area: selectors packed two per byte, earlier selector in the low
  nibble; an odd count leaves the final high nibble zero;
* data area: one vector per selector, slot ``t`` of a component at bits
  ``[t*BW, (t+1)*BW)``; unused high bits are zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitcore import (
    LANES,
    as_uint32_array,
    bytes_to_vectors,
    bytes_to_words,
    pad_to_quadruples,
    pseudo_quad_max_array,
    scatter_vertical,
    vectors_to_bytes,
    words_to_bytes,
)
from .codec import Codec, CodecId, check_control_tail, check_data_length
from .errors import MalformedBlockError, PreconditionError
from .kernels import Kernel


@dataclass(frozen=True)
class SelectorEntry:
    sel: int
    num: int
    bw: int


NUMS = (32, 16, 10, 8, 6, 5, 4, 3, 2, 1)
WIDTHS = (1, 2, 3, 4, 5, 6, 8, 10, 16, 32)
SELECTORS = tuple(SelectorEntry(i, n, b) for i, (n, b) in enumerate(zip(NUMS, WIDTHS)))
_MASKS = tuple((1 << b) - 1 for b in WIDTHS)


def selector_lookup(sel: int) -> tuple[int, int]:
    """``(NUM, BW)`` for selector ``sel``."""
    if not 0 <= sel <= 9:
        raise PreconditionError(f"selector {sel} outside 0..9")
    entry = SELECTORS[sel]
    return entry.num, entry.bw


# -- pattern selection -----------------------------------------------------

def select_patterns(max_arr) -> np.ndarray:
    """Greedy selector choice over the quad max array.

    For each run the smallest selector whose first ``min(NUM, remaining)``
    entries all fit in ``BW`` bits wins; the run then consumes that many
    entries. Computed here for every start position at once, then walked.
    """
    m = as_uint32_array(max_arr, "max_arr")
    total = m.size
    if total == 0:
        return np.zeros(0, dtype=np.uint8)
    idx = np.arange(total, dtype=np.int64)
    remaining = total - idx
    chosen = np.full(total, 9, dtype=np.int64)
    open_ = np.ones(total, dtype=bool)
    for sel in range(9):
        bad = np.where(m > _MASKS[sel], idx, total)
        next_bad = np.minimum.accumulate(bad[::-1])[::-1]
        fits = (next_bad - idx) >= np.minimum(NUMS[sel], remaining)
        chosen[fits & open_] = sel
        open_ &= ~fits
        if not open_.any():
            break
    step = np.minimum(np.asarray(NUMS, dtype=np.int64)[chosen], remaining)
    chosen_l = chosen.tolist()
    step_l = step.tolist()
    out = []
    j = 0
    while j < total:
        out.append(chosen_l[j])
        j += step_l[j]
    return np.asarray(out, dtype=np.uint8)


def _select_patterns_scalar(maxes: list[int]) -> list[int]:
    out = []
    j = 0
    left = len(maxes)
    while left > 0:
        for sel in range(10):
            limit = min(NUMS[sel], left)
            mask = _MASKS[sel]
            pos = 0
            while pos < limit and maxes[j + pos] <= mask:
                pos += 1
            if pos == limit:
                break
        out.append(sel)
        j += pos
        left -= pos
    return out


# -- unrolled per-selector routines (scalar kernel) ------------------------

def _decoder_source(sel: int) -> str:
    num, bw = NUMS[sel], WIDTHS[sel]
    mask = (1 << bw) - 1
    terms = []
    for t in range(num):
        shift = t * bw
        for k in range(LANES):
            expr = f"(w{k} >> {shift})" if shift else f"w{k}"
            if shift + bw < 32:
                expr = f"{expr} & {mask}"
            terms.append(expr)
    return f"def decode_sel{sel}(w0, w1, w2, w3):\n    return ({', '.join(terms)},)\n"


def _encoder_source(sel: int) -> str:
    num, bw = NUMS[sel], WIDTHS[sel]
    words = []
    for k in range(LANES):
        parts = [f"v[{4 * t + k}] << {t * bw}" if t else f"v[{k}]" for t in range(num)]
        words.append(" | ".join(parts))
    return f"def encode_sel{sel}(v):\n    return ({', '.join(words)},)\n"


def _build_unrolled():
    namespace: dict = {}
    for sel in range(10):
        exec(_decoder_source(sel), namespace)
        exec(_encoder_source(sel), namespace)
    decoders = tuple(namespace[f"decode_sel{sel}"] for sel in range(10))
    encoders = tuple(namespace[f"encode_sel{sel}"] for sel in range(10))
    return decoders, encoders


_DECODERS, _ENCODERS = _build_unrolled()


# -- codec -----------------------------------------------------------------

def _pack_selectors(selectors: np.ndarray) -> bytes:
    sel = np.asarray(selectors, dtype=np.uint8)
    if sel.size % 2:
        sel = np.concatenate([sel, np.zeros(1, dtype=np.uint8)])
    return (sel[0::2] | (sel[1::2] << 4)).tobytes()


def _read_selectors_scalar(control, quads: int) -> list[int]:
    out = []
    covered = 0
    for byte in bytes(control):
        for sel in (byte & 0x0F, byte >> 4):
            if covered >= quads:
                break
            if sel > 9:
                raise MalformedBlockError(f"selector {sel} at position {len(out)} outside 0..9")
            out.append(sel)
            covered += NUMS[sel]
        if covered >= quads:
            return out
    if covered < quads:
        raise MalformedBlockError(f"control area describes {covered} of {quads} quadruples")
    return out


def _read_selectors_vector(control, quads: int) -> np.ndarray:
    if quads == 0:
        return np.zeros(0, dtype=np.uint8)
    raw = np.frombuffer(control, dtype=np.uint8)
    nib = np.empty(raw.size * 2, dtype=np.uint8)
    nib[0::2] = raw & 0x0F
    nib[1::2] = raw >> 4
    counts = np.asarray(NUMS + (0,) * 6, dtype=np.int64)[nib]
    covered = np.cumsum(counts)
    total = int(np.searchsorted(covered, quads)) + 1
    bad = np.flatnonzero(nib > 9)
    if bad.size and bad[0] < min(total, nib.size):
        raise MalformedBlockError(f"selector {int(nib[bad[0]])} at position {int(bad[0])} outside 0..9")
    if total > nib.size:
        described = int(covered[-1]) if covered.size else 0
        raise MalformedBlockError(f"control area describes {described} of {quads} quadruples")
    return nib[:total]


class GroupSimpleCodec(Codec):
    codec_id = CodecId.GROUP_SIMPLE
    name = "group-simple"

    # encode ---------------------------------------------------------------

    def encode_payload(self, values, kernel):
        if values.size == 0:
            return b"", b""
        if kernel is Kernel.SCALAR:
            return self._encode_scalar(values.tolist())
        return self._encode_vector(values)

    def _encode_scalar(self, values: list[int]) -> tuple[bytes, bytes]:
        if len(values) % LANES:
            values = values + [0] * (LANES - len(values) % LANES)
        maxes = [a | b | c | d for a, b, c, d in zip(*[iter(values)] * 4)]
        selectors = _select_patterns_scalar(maxes)
        words: list[int] = []
        pos = 0
        total = len(values)
        for sel in selectors:
            span = 4 * NUMS[sel]
            chunk = values[pos:pos + span]
            if len(chunk) < span:
                chunk = chunk + [0] * (span - len(chunk))
            words.extend(_ENCODERS[sel](chunk))
            pos = min(pos + span, total)
        return _pack_selectors(np.asarray(selectors, dtype=np.uint8)), words_to_bytes(words)

    def _encode_vector(self, values: np.ndarray) -> tuple[bytes, bytes]:
        padded = pad_to_quadruples(values)
        selectors = select_patterns(pseudo_quad_max_array(padded))
        quads = padded.reshape(-1, LANES)
        nums = np.asarray(NUMS, dtype=np.int64)[selectors]
        bws = np.asarray(WIDTHS, dtype=np.int64)[selectors]
        covered = np.minimum(nums, len(quads) - (np.cumsum(nums) - nums))
        starts = np.cumsum(covered) - covered
        slot = np.arange(len(quads)) - np.repeat(starts, covered)
        widths = np.repeat(bws, covered)
        offsets = np.repeat(np.arange(selectors.size, dtype=np.int64) * 32, covered) + slot * widths
        vectors = scatter_vertical(quads, widths, offsets, selectors.size)
        return _pack_selectors(selectors), vectors_to_bytes(vectors)

    # decode ---------------------------------------------------------------

    def decode_payload(self, control, data, n, kernel):
        quads = -(-n // LANES)
        if kernel is Kernel.SCALAR:
            selectors = _read_selectors_scalar(control, quads)
        else:
            selectors = _read_selectors_vector(control, quads)
        count = len(selectors)
        check_control_tail(control, -(-count // 2))
        check_data_length(data, 16 * count)
        if count == 0:
            return np.zeros(0, dtype=np.uint32)
        if kernel is Kernel.SCALAR:
            return self._decode_scalar(selectors, data, n)
        return self._decode_vector(selectors, data, n)

    def _decode_scalar(self, selectors: list[int], data, n: int) -> np.ndarray:
        words = bytes_to_words(data)
        decoders = _DECODERS
        out: list[int] = []
        extend = out.extend
        base = 0
        for sel in selectors:
            extend(decoders[sel](words[base], words[base + 1], words[base + 2], words[base + 3]))
            base += 4
        del out[n:]
        return np.asarray(out, dtype=np.uint32)

    def _decode_vector(self, selectors: np.ndarray, data, n: int) -> np.ndarray:
        vectors = bytes_to_vectors(data, selectors.size)
        nums = np.asarray(NUMS, dtype=np.int64)[selectors]
        starts = np.cumsum(nums) - nums
        out = np.zeros((int(starts[-1] + nums[-1]), LANES), dtype=np.uint32)
        for sel in np.unique(selectors).tolist():
            num, bw = NUMS[sel], WIDTHS[sel]
            rows = np.flatnonzero(selectors == sel)
            shifts = (np.arange(num, dtype=np.uint32) * np.uint32(bw))[None, :, None]
            block = (vectors[rows][:, None, :] >> shifts) & np.uint32(_MASKS[sel])
            targets = starts[rows][:, None] + np.arange(num)
            out[targets] = block
        return out.reshape(-1)[:n]
