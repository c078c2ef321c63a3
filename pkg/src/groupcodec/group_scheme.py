"""Group-Scheme: one length descriptor (LD) per quadruple.

A quadruple is stored at ``BW = CG * units`` bits where ``units`` is the number
of compression-granularity (CG) chunks its maximum needs. The LD that records
``units`` lives in the control area, coded one of three ways:

``BINARY``
    ``units - 1`` in a fixed ``5 - log2(CG)``-bit field. Fields are packed
    LSB-first into aligned units: three 5-bit fields per little-endian 16-bit
    word (CG=1), two 4-bit fields per byte (CG=2), two 3-bit fields per byte
    (CG=4, top two bits zero) or four 2-bit fields per byte (CG=8).
``COMPLETE_UNARY`` (CU)
    ``units - 1`` one bits followed by a zero, read MSB-first, codes running
    freely across byte boundaries.
``INCOMPLETE_UNARY`` (IU)
    The same code, but a code never straddles two bytes; the unused low bits
    of a byte are filled with ones. Only defined for CG 4 and 8.

The data area is a single stream of vectors shared by all quadruples, each
packed at its own width with cross-vector splits as in :mod:`groupcodec.bitcore`.
Decoding reads the control area a byte (or 16-bit word) at a time through
precomputed lookup tables.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .bitcore import (
    LANES,
    VerticalWriter,
    as_uint32_array,
    bit_widths,
    bytes_to_vectors,
    bytes_to_words,
    effective_bit_width,
    gather_vertical,
    pad_to_quadruples,
    pseudo_quad_max_array,
    scatter_vertical,
    vectors_to_bytes,
    words_to_bytes,
)
from .codec import Codec, CodecId, check_control_tail, check_data_length
from .errors import MalformedBlockError, PreconditionError, UnknownVariantError
from .kernels import Kernel, select_kernel


class LdKind(enum.IntEnum):
    BINARY = 0
    COMPLETE_UNARY = 1
    INCOMPLETE_UNARY = 2


_KIND_LABELS = {LdKind.BINARY: "B", LdKind.COMPLETE_UNARY: "CU", LdKind.INCOMPLETE_UNARY: "IU"}
_LOG2 = {1: 0, 2: 1, 4: 2, 8: 3}
# (bytes per alignment unit, fields per unit) for binary LDs
_BINARY_UNITS = {1: (2, 3), 2: (1, 2), 4: (1, 2), 8: (1, 4)}


@dataclass(frozen=True)
class SchemeConfig:
    cg: int
    kind: LdKind

    def __post_init__(self):
        if self.cg not in _LOG2:
            raise PreconditionError(f"compression granularity {self.cg} not in 1, 2, 4, 8")
        object.__setattr__(self, "kind", LdKind(self.kind))
        if self.kind is LdKind.INCOMPLETE_UNARY and self.cg < 4:
            raise PreconditionError("incomplete unary needs a compression granularity of 4 or 8")

    @property
    def is_unary(self) -> bool:
        return self.kind is not LdKind.BINARY

    @property
    def max_units(self) -> int:
        return 32 // self.cg

    @property
    def field_bits(self) -> int:
        """Width of a binary LD field."""
        return 5 - _LOG2[self.cg]

    @property
    def code(self) -> int:
        """Variant byte: bits 0-1 log2(CG), bits 2-3 LD kind."""
        return _LOG2[self.cg] | (int(self.kind) << 2)

    @property
    def label(self) -> str:
        return f"{self.cg}-{_KIND_LABELS[self.kind]}"

    @classmethod
    def from_code(cls, code: int) -> "SchemeConfig":
        cg = 1 << (code & 3)
        kind = (code >> 2) & 3
        if code >> 4 or kind > 2 or (kind == 2 and cg < 4):
            raise UnknownVariantError(f"unknown Group-Scheme variant byte 0x{code:02x}")
        return cls(cg, LdKind(kind))

    @classmethod
    def parse(cls, text: "str | SchemeConfig") -> "SchemeConfig":
        if isinstance(text, SchemeConfig):
            return text
        try:
            cg, kind = str(text).strip().upper().split("-")
            kinds = {v: k for k, v in _KIND_LABELS.items()}
            kinds["BIN"] = LdKind.BINARY
            return cls(int(cg), kinds[kind])
        except (ValueError, KeyError):
            raise UnknownVariantError(f"unknown Group-Scheme variant {text!r}; try 1-CU or 8-IU") from None


ALL_CONFIGS = tuple(
    SchemeConfig(cg, kind)
    for kind in (LdKind.BINARY, LdKind.COMPLETE_UNARY, LdKind.INCOMPLETE_UNARY)
    for cg in (1, 2, 4, 8)
    if not (kind is LdKind.INCOMPLETE_UNARY and cg < 4)
)


def ld_value(quadmax: int, cfg: SchemeConfig) -> int:
    units = -(-effective_bit_width(quadmax) // cfg.cg)
    return units if cfg.is_unary else units - 1


def bw_from_ld(ld: int, cfg: SchemeConfig) -> int:
    units = ld if cfg.is_unary else ld + 1
    if not 1 <= units <= cfg.max_units:
        raise MalformedBlockError(f"length descriptor {ld} out of range for {cfg.label}")
    return cfg.cg * units


def _ld_values(quadmax: np.ndarray, cfg: SchemeConfig) -> np.ndarray:
    units = (bit_widths(quadmax) + cfg.cg - 1) >> _LOG2[cfg.cg]
    return units if cfg.is_unary else units - 1


# -- control area encoding -------------------------------------------------

def _encode_binary(lds: np.ndarray, cfg: SchemeConfig) -> bytes:
    unit_bytes, per_unit = _BINARY_UNITS[cfg.cg]
    lds = np.asarray(lds, dtype=np.uint16)
    pad = -lds.size % per_unit
    if pad:
        lds = np.concatenate([lds, np.zeros(pad, dtype=np.uint16)])
    fields = lds.reshape(-1, per_unit)
    shifts = (np.arange(per_unit, dtype=np.uint16) * cfg.field_bits)
    units = np.bitwise_or.reduce(fields << shifts, axis=1)
    return units.astype("<u2" if unit_bytes == 2 else np.uint8).tobytes()


def _encode_cu_vector(lds: np.ndarray) -> bytes:
    ends = np.cumsum(lds)
    bits = np.ones(int(ends[-1]), dtype=np.uint8)
    bits[ends - 1] = 0
    return np.packbits(bits).tobytes()


def _encode_iu_vector(lds: np.ndarray) -> bytes:
    lds = lds.astype(np.int64)
    ends = np.cumsum(lds)
    begins = ends - lds
    # a byte opened at code i holds codes i..nxt[i]-1
    nxt = np.searchsorted(ends, begins + 8, side="right").tolist()
    opens = []
    i = 0
    total = lds.size
    while i < total:
        opens.append(i)
        i = nxt[i]
    opens = np.asarray(opens, dtype=np.int64)
    byte_of = np.zeros(total, dtype=np.int64)
    byte_of[opens[1:]] = 1
    byte_of = np.cumsum(byte_of)
    offset = begins - begins[opens][byte_of]
    codes = ((np.int64(1) << lds) - 2) << (8 - offset - lds)
    packed = np.bitwise_or.reduceat(codes, opens)
    used = np.r_[begins[opens[1:]], ends[-1]] - begins[opens]
    packed |= (np.int64(1) << (8 - used)) - 1
    return packed.astype(np.uint8).tobytes()


def _encode_unary_scalar(lds: list[int], complete: bool) -> bytes:
    out = bytearray()
    if complete:
        acc = 0
        nbits = 0
        for ld in lds:
            acc = (acc << ld) | ((1 << ld) - 2)
            nbits += ld
            while nbits >= 8:
                nbits -= 8
                out.append((acc >> nbits) & 0xFF)
            acc &= (1 << nbits) - 1
        if nbits:
            out.append((acc << (8 - nbits)) & 0xFF)
        return bytes(out)
    cur = 0
    used = 0
    for ld in lds:
        if used + ld > 8:
            out.append(cur | ((1 << (8 - used)) - 1))
            cur = 0
            used = 0
        cur |= ((1 << ld) - 2) << (8 - used - ld)
        used += ld
        if used == 8:
            out.append(cur)
            cur = 0
            used = 0
    if used:
        out.append(cur | ((1 << (8 - used)) - 1))
    return bytes(out)


def encode_control(lds, cfg: SchemeConfig, kernel: Kernel | str = Kernel.AUTO) -> bytes:
    """Serialize length descriptors into the control-area bit layout of ``cfg``."""
    lds_arr = np.asarray(lds, dtype=np.int64).reshape(-1)
    if lds_arr.size == 0:
        return b""
    low, high = (1, cfg.max_units) if cfg.is_unary else (0, cfg.max_units - 1)
    if lds_arr.min() < low or lds_arr.max() > high:
        raise PreconditionError(f"length descriptors must lie in {low}..{high} for {cfg.label}")
    if cfg.kind is LdKind.BINARY:
        return _encode_binary(lds_arr, cfg)
    complete = cfg.kind is LdKind.COMPLETE_UNARY
    if select_kernel(kernel) is Kernel.SCALAR:
        return _encode_unary_scalar(lds_arr.tolist(), complete)
    return _encode_cu_vector(lds_arr) if complete else _encode_iu_vector(lds_arr)


# -- lookup tables ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LdLookupTable:
    """Packed-decoding table for one configuration.

    Unary tables are keyed by a control byte and give, for the LDs completed
    inside that byte (read MSB-first): their count, their values, their data
    widths, the trailing run of ones that is still open (the carry), and the
    data bits consumed. Binary tables are keyed by one alignment unit (a byte,
    or 15 bits for CG=1) and additionally flag keys whose padding bits are set.
    """

    cfg: SchemeConfig
    counts: np.ndarray
    lds: np.ndarray
    widths: np.ndarray
    carry: np.ndarray
    control_bits: np.ndarray
    data_bits: np.ndarray
    valid: np.ndarray
    rows: tuple = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.counts)


def _unary_entry(byte: int) -> tuple[list[int], int]:
    lds = []
    run = 0
    for bit in range(7, -1, -1):
        if byte >> bit & 1:
            run += 1
        else:
            lds.append(run + 1)
            run = 0
    return lds, run


@lru_cache(maxsize=None)
def build_lookup_table(cfg: SchemeConfig) -> LdLookupTable:
    if cfg.is_unary:
        size, width = 256, 8
    else:
        unit_bytes, width = _BINARY_UNITS[cfg.cg]
        size = 1 << 15 if cfg.cg == 1 else 256
    counts = np.zeros(size, dtype=np.int64)
    lds = np.zeros((size, width), dtype=np.int64)
    carry = np.zeros(size, dtype=np.int64)
    control_bits = np.zeros(size, dtype=np.int64)
    valid = np.ones(size, dtype=bool)
    rows = []
    fb = cfg.field_bits
    for key in range(size):
        if cfg.is_unary:
            row, tail = _unary_entry(key)
            carry[key] = tail if cfg.kind is LdKind.COMPLETE_UNARY else 0
            control_bits[key] = 8 - tail
        else:
            row = [(key >> (t * fb)) & ((1 << fb) - 1) for t in range(width)]
            tail = 0
            valid[key] = (key >> (width * fb)) == 0
            control_bits[key] = width * fb
        counts[key] = len(row)
        lds[key, : len(row)] = row
        rows.append(tuple(row))
    units = lds if cfg.is_unary else lds + 1
    widths = np.where(np.arange(lds.shape[1]) < counts[:, None], units * cfg.cg, 0)
    return LdLookupTable(
        cfg=cfg,
        counts=counts,
        lds=lds,
        widths=widths,
        carry=carry,
        control_bits=control_bits,
        data_bits=widths.sum(axis=1),
        valid=valid,
        rows=tuple(rows),
    )


# -- control area decoding -------------------------------------------------

def _decode_unary_scalar(control, expected: int, table: LdLookupTable) -> tuple[list[int], int]:
    complete = table.cfg.kind is LdKind.COMPLETE_UNARY
    rows = table.rows
    tails = table.carry.tolist()
    out: list[int] = []
    carry = 0
    used = 0
    for pos, byte in enumerate(bytes(control)):
        if len(out) >= expected:
            break
        row = rows[byte]
        if not row:
            if not complete:
                raise MalformedBlockError(f"control byte {pos} holds no length descriptor")
            carry += 8
            continue
        if carry:
            out.append(row[0] + carry)
            out.extend(row[1:])
        else:
            out.extend(row)
        carry = tails[byte]
        used = pos + 1
    if len(out) < expected:
        raise MalformedBlockError(f"control area holds {len(out)} of {expected} length descriptors")
    del out[expected:]
    limit = table.cfg.max_units
    if expected and max(out) > limit:
        raise MalformedBlockError(f"unary length descriptor exceeds {limit}")
    return out, used


def _decode_unary_vector(control, expected: int, table: LdLookupTable) -> tuple[np.ndarray, int]:
    raw = np.frombuffer(control, dtype=np.uint8)
    counts = table.counts[raw]
    reached = np.cumsum(counts)
    last = int(np.searchsorted(reached, expected))
    if last >= raw.size:
        have = int(reached[-1]) if raw.size else 0
        raise MalformedBlockError(f"control area holds {have} of {expected} length descriptors")
    raw = raw[: last + 1]
    counts = counts[: last + 1]
    has = counts > 0
    lds = table.lds[raw]
    if table.cfg.kind is LdKind.COMPLETE_UNARY:
        idx = np.arange(raw.size)
        prev = np.r_[-1, np.maximum.accumulate(np.where(has, idx, -1))[:-1]]
        carry_in = np.where(prev >= 0, table.carry[raw[prev]] + 8 * (idx - 1 - prev), 8 * idx)
        lds[has, 0] += carry_in[has]
    elif not has.all():
        raise MalformedBlockError(f"control byte {int(np.argmin(has))} holds no length descriptor")
    flat = lds[np.arange(lds.shape[1]) < counts[:, None]][:expected]
    if flat.max() > table.cfg.max_units:
        raise MalformedBlockError(f"unary length descriptor exceeds {table.cfg.max_units}")
    return flat, last + 1


def _decode_binary(control, expected: int, table: LdLookupTable, kernel: Kernel) -> tuple[np.ndarray | list[int], int]:
    unit_bytes, per_unit = _BINARY_UNITS[table.cfg.cg]
    n_units = -(-expected // per_unit)
    used = n_units * unit_bytes
    if len(control) < used:
        raise MalformedBlockError(
            f"control area holds {len(control) // unit_bytes * per_unit} of {expected} length descriptors"
        )
    units = np.frombuffer(control, dtype="<u2" if unit_bytes == 2 else np.uint8, count=n_units)
    if kernel is Kernel.SCALAR:
        rows = table.rows
        out: list[int] = []
        for pos, unit in enumerate(units.tolist()):
            if unit >= table.size or not table.valid[unit]:
                raise MalformedBlockError(f"binary control unit {pos} has padding bits set")
            out.extend(rows[unit])
        del out[expected:]
        return out, used
    units = units.astype(np.int64)
    bad = np.flatnonzero((units >= table.size) | ~table.valid[np.minimum(units, table.size - 1)])
    if bad.size:
        raise MalformedBlockError(f"binary control unit {int(bad[0])} has padding bits set")
    return table.lds[units].reshape(-1)[:expected], used


def _decode_control(control, expected: int, cfg: SchemeConfig, kernel: Kernel):
    table = build_lookup_table(cfg)
    if expected == 0:
        return [], 0
    if not cfg.is_unary:
        return _decode_binary(control, expected, table, kernel)
    if kernel is Kernel.SCALAR:
        return _decode_unary_scalar(control, expected, table)
    return _decode_unary_vector(control, expected, table)


def decode_control_packed(control: bytes, expected: int, cfg: SchemeConfig,
                          kernel: Kernel | str = Kernel.AUTO) -> np.ndarray:
    """Decode ``expected`` length descriptors from ``control`` via lookup tables."""
    lds, _ = _decode_control(memoryview(bytes(control)), expected, cfg, select_kernel(kernel))
    return np.asarray(lds, dtype=np.int64)


def decode_unary_chunk(byte: int, carry: int, table: LdLookupTable) -> tuple[list[int], int]:
    """One packed-decoding step: LDs completed in ``byte`` given ``carry`` open ones.

    Returns the completed LDs and the carry handed to the next byte.
    """
    row = list(table.rows[byte])
    if not row:
        return [], carry + 8 if table.cfg.kind is LdKind.COMPLETE_UNARY else 0
    row[0] += carry
    return row, int(table.carry[byte])


# -- codec -----------------------------------------------------------------

class GroupSchemeCodec(Codec):
    codec_id = CodecId.GROUP_SCHEME

    def __init__(self, config: SchemeConfig | str = "8-IU"):
        self.config = SchemeConfig.parse(config)
        self.table = build_lookup_table(self.config)

    @property
    def name(self) -> str:
        return f"gsc-{self.config.label.lower()}"

    @property
    def variant(self) -> int:
        return self.config.code

    def __repr__(self) -> str:
        return f"GroupSchemeCodec({self.config.label!r})"

    # encode ---------------------------------------------------------------

    def encode_payload(self, values, kernel):
        if values.size == 0:
            return b"", b""
        if kernel is Kernel.SCALAR:
            return self._encode_scalar(values.tolist())
        return self._encode_vector(values)

    def _encode_scalar(self, values: list[int]) -> tuple[bytes, bytes]:
        cfg = self.config
        cg = cfg.cg
        unary = cfg.is_unary
        if len(values) % LANES:
            values = values + [0] * (LANES - len(values) % LANES)
        lds = []
        bws = []
        for i in range(0, len(values), 4):
            width = (values[i] | values[i + 1] | values[i + 2] | values[i + 3]).bit_length() or 1
            units = -(-width // cg)
            lds.append(units if unary else units - 1)
            bws.append(units * cg)
        writer = VerticalWriter()
        write = writer.write
        for q, bw in enumerate(bws):
            i = 4 * q
            write(values[i], values[i + 1], values[i + 2], values[i + 3], bw)
        if cfg.kind is LdKind.BINARY:
            control = _encode_binary(np.asarray(lds), cfg)
        else:
            control = _encode_unary_scalar(lds, cfg.kind is LdKind.COMPLETE_UNARY)
        return control, words_to_bytes(writer.getvalue())

    def _encode_vector(self, values: np.ndarray) -> tuple[bytes, bytes]:
        cfg = self.config
        padded = pad_to_quadruples(values)
        lds = _ld_values(pseudo_quad_max_array(padded), cfg)
        widths = (lds if cfg.is_unary else lds + 1) * cfg.cg
        ends = np.cumsum(widths)
        n_vectors = -(-int(ends[-1]) // 32)
        vectors = scatter_vertical(padded.reshape(-1, LANES), widths, ends - widths, n_vectors)
        if cfg.kind is LdKind.BINARY:
            control = _encode_binary(lds, cfg)
        elif cfg.kind is LdKind.COMPLETE_UNARY:
            control = _encode_cu_vector(lds)
        else:
            control = _encode_iu_vector(lds)
        return control, vectors_to_bytes(vectors)

    # decode ---------------------------------------------------------------

    def decode_payload(self, control, data, n, kernel):
        cfg = self.config
        quads = -(-n // LANES)
        lds, used = _decode_control(control, quads, cfg, kernel)
        check_control_tail(control, used)
        if quads == 0:
            check_data_length(data, 0)
            return np.zeros(0, dtype=np.uint32)
        if kernel is Kernel.SCALAR:
            return self._decode_scalar(lds, data, n)
        widths = (lds if cfg.is_unary else lds + 1) * cfg.cg
        ends = np.cumsum(widths)
        n_vectors = -(-int(ends[-1]) // 32)
        check_data_length(data, 16 * n_vectors)
        vectors = bytes_to_vectors(data, n_vectors)
        return gather_vertical(vectors, widths, ends - widths).reshape(-1)[:n]

    def _decode_scalar(self, lds: list[int], data, n: int) -> np.ndarray:
        cg = self.config.cg
        shift_units = 0 if self.config.is_unary else 1
        bws = [(ld + shift_units) * cg for ld in lds]
        n_vectors = -(-sum(bws) // 32)
        check_data_length(data, 16 * n_vectors)
        words = bytes_to_words(data)
        out: list[int] = []
        extend = out.extend
        base = 0
        bit = 0
        for bw in bws:
            end = bit + bw
            if end < 32:
                m = (1 << bw) - 1
                extend(((words[base] >> bit) & m, (words[base + 1] >> bit) & m,
                        (words[base + 2] >> bit) & m, (words[base + 3] >> bit) & m))
                bit = end
            elif end == 32:
                extend((words[base] >> bit, words[base + 1] >> bit,
                        words[base + 2] >> bit, words[base + 3] >> bit))
                base += 4
                bit = 0
            else:
                low = end - 32
                m = (1 << low) - 1
                extend((((words[base] >> bit) << low) | (words[base + 4] & m),
                        ((words[base + 1] >> bit) << low) | (words[base + 5] & m),
                        ((words[base + 2] >> bit) << low) | (words[base + 6] & m),
                        ((words[base + 3] >> bit) << low) | (words[base + 7] & m)))
                base += 4
                bit = low
        del out[n:]
        return np.asarray(out, dtype=np.uint32)
