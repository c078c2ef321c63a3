"""Self-describing encoded blocks and the codec registry.

Block layout (all integers little-endian)::

    0   4  magic  b"GCM1"
    4   1  version (1)
    5   1  codec id
    6   1  flags   bit 0: values were delta-encoded before packing
    7   1  variant (Group-Scheme config code, else 0)
    8   4  n, logical integer count
    12  4  data_offset, multiple of 16 and >= 16
    16  .. control area, zero-padded up to data_offset
    data_offset .. data area (whole 16-byte vectors; VarByte: raw bytes)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .bitcore import VECTOR_BYTES, as_uint32_array, delta_decode, delta_encode
from .codec import Codec, CodecId
from .errors import (
    BadMagicError,
    DeltaOverflowError,
    MalformedBlockError,
    TruncatedBlockError,
    UnknownCodecError,
    UnknownVariantError,
    UnsupportedVersionError,
)
from .group_frame import GroupAforCodec, GroupPfdCodec
from .group_scheme import ALL_CONFIGS, GroupSchemeCodec, SchemeConfig
from .group_simple import GroupSimpleCodec
from .kernels import Kernel, select_kernel
from .varbyte import VarByteCodec

MAGIC = b"GCM1"
VERSION = 1
HEADER_SIZE = 16
FLAG_DELTA = 0x01
_HEADER = struct.Struct("<4sBBBBII")


@dataclass(frozen=True)
class BlockHeader:
    codec_id: int
    flags: int
    variant: int
    n: int
    data_offset: int
    version: int = VERSION

    @property
    def delta(self) -> bool:
        return bool(self.flags & FLAG_DELTA)

    def pack(self) -> bytes:
        return _HEADER.pack(MAGIC, self.version, self.codec_id, self.flags, self.variant,
                            self.n, self.data_offset)

    @classmethod
    def parse(cls, buf: bytes | memoryview) -> "BlockHeader":
        if len(buf) < 4 or bytes(buf[:4]) != MAGIC:
            if len(buf) < 4 and MAGIC.startswith(bytes(buf)):
                raise TruncatedBlockError(f"block of {len(buf)} bytes has no header",
                                          required=HEADER_SIZE, available=len(buf))
            raise BadMagicError(f"bad magic {bytes(buf[:4])!r}")
        if len(buf) < HEADER_SIZE:
            raise TruncatedBlockError(f"header needs {HEADER_SIZE} bytes, got {len(buf)}",
                                      required=HEADER_SIZE, available=len(buf))
        _, version, codec_id, flags, variant, n, data_offset = _HEADER.unpack_from(buf)
        if version != VERSION:
            raise UnsupportedVersionError(f"format version {version} (supported: {VERSION})")
        if flags & ~FLAG_DELTA:
            raise MalformedBlockError(f"unknown flag bits 0x{flags:02x}")
        if data_offset < HEADER_SIZE or data_offset % VECTOR_BYTES:
            raise MalformedBlockError(f"data offset {data_offset} is not a multiple of 16 past the header")
        return cls(codec_id, flags, variant, n, data_offset, version)


# -- registry --------------------------------------------------------------

_PLAIN = {
    CodecId.VARBYTE: VarByteCodec(),
    CodecId.GROUP_SIMPLE: GroupSimpleCodec(),
    CodecId.GROUP_AFOR: GroupAforCodec(),
    CodecId.GROUP_PFD: GroupPfdCodec(),
}
_SCHEME = {cfg.code: GroupSchemeCodec(cfg) for cfg in ALL_CONFIGS}

#: Every codec variant, keyed by its short name (``gsc-8-iu`` and so on).
REGISTRY: dict[str, Codec] = {
    c.name: c
    for c in [_PLAIN[CodecId.VARBYTE], _PLAIN[CodecId.GROUP_SIMPLE], *_SCHEME.values(),
              _PLAIN[CodecId.GROUP_AFOR], _PLAIN[CodecId.GROUP_PFD]]
}
_ALIASES = {
    "vb": "varbyte", "variable-byte": "varbyte",
    "g-sim": "group-simple", "gsim": "group-simple",
    "g-afor": "group-afor", "afor": "group-afor",
    "g-pfd": "group-pfd", "pfd": "group-pfd",
}


def all_codecs() -> list[Codec]:
    return list(REGISTRY.values())


def codec_for(codec_id: int, variant: int = 0) -> Codec:
    """Codec registered for a header's ``(codec_id, variant)`` pair."""
    try:
        cid = CodecId(codec_id)
    except ValueError:
        raise UnknownCodecError(f"unknown codec id {codec_id}") from None
    if cid is CodecId.GROUP_SCHEME:
        if variant not in _SCHEME:
            raise UnknownVariantError(f"unknown Group-Scheme variant 0x{variant:02x}")
        return _SCHEME[variant]
    if variant != 0:
        raise UnknownVariantError(f"{_PLAIN[cid].name} has no variant {variant}")
    return _PLAIN[cid]


def resolve_codec(codec: "Codec | CodecId | int | str", variant=None) -> Codec:
    """Resolve a codec given as an instance, id or name, plus an optional variant.

    Names are the registry keys (``group-simple``, ``gsc-4-cu``, ...) or
    ``group-scheme`` together with a variant such as ``"8-IU"`` or its code.
    """
    if isinstance(codec, Codec):
        if variant not in (None, codec.variant):
            raise UnknownVariantError(f"{codec.name} does not have variant {variant!r}")
        return codec
    if isinstance(codec, str):
        key = codec.strip().lower()
        key = _ALIASES.get(key, key)
        if key in ("group-scheme", "gsc", "g-scheme"):
            return codec_for(CodecId.GROUP_SCHEME, _scheme_code(variant if variant is not None else "8-IU"))
        if key not in REGISTRY:
            raise UnknownCodecError(f"unknown codec name {codec!r}")
        return resolve_codec(REGISTRY[key], _normalize_variant(REGISTRY[key], variant))
    cid = int(codec)
    if cid == CodecId.GROUP_SCHEME:
        return codec_for(cid, _scheme_code(variant if variant is not None else "8-IU"))
    return codec_for(cid, 0 if variant is None else _plain_variant(variant))


def _scheme_code(variant) -> int:
    if isinstance(variant, SchemeConfig):
        return variant.code
    if isinstance(variant, str) and not variant.strip().isdigit():
        return SchemeConfig.parse(variant).code
    return int(variant)


def _plain_variant(variant) -> int:
    try:
        return int(variant)
    except (TypeError, ValueError):
        raise UnknownVariantError(f"variant {variant!r} is not valid here") from None


def _normalize_variant(codec: Codec, variant):
    if variant is None:
        return None
    if codec.codec_id == CodecId.GROUP_SCHEME:
        return _scheme_code(variant)
    return _plain_variant(variant)


# -- blocks ----------------------------------------------------------------

def encode_block(codec, variant=None, kernel: Kernel | str = Kernel.AUTO,
                 apply_delta: bool = False, data=()) -> bytes:
    """Encode ``data`` into a self-describing block.

    With ``apply_delta`` the input must be strictly increasing; it is replaced
    by its gaps before packing and restored by :func:`decode_block`.
    """
    impl = resolve_codec(codec, variant)
    k = select_kernel(kernel)
    values = as_uint32_array(data)
    n = values.size
    if n and apply_delta:
        values = delta_encode(values)
    if n:
        control, payload = impl.encode_payload(values, k)
    else:
        control, payload = b"", b""
    data_offset = HEADER_SIZE + -(-len(control) // VECTOR_BYTES) * VECTOR_BYTES
    header = BlockHeader(int(impl.codec_id), FLAG_DELTA if apply_delta else 0, impl.variant,
                         n, data_offset)
    pad = data_offset - HEADER_SIZE - len(control)
    return b"".join((header.pack(), control, b"\x00" * pad, payload))


def read_header(buf: bytes | memoryview) -> BlockHeader:
    return BlockHeader.parse(memoryview(buf))


def decode_block(buf: bytes | memoryview, kernel: Kernel | str = Kernel.AUTO) -> np.ndarray:
    """Decode a block produced by :func:`encode_block` into a ``uint32`` array."""
    view = memoryview(buf).cast("B")
    header = BlockHeader.parse(view)
    impl = codec_for(header.codec_id, header.variant)
    k = select_kernel(kernel)
    if len(view) < header.data_offset:
        raise TruncatedBlockError(
            f"block of {len(view)} bytes ends before its data area at {header.data_offset}",
            required=header.data_offset, available=len(view))
    control = view[HEADER_SIZE:header.data_offset]
    data = view[header.data_offset:]
    if header.n == 0:
        if bytes(control).strip(b"\x00") or len(data):
            raise MalformedBlockError("empty block carries payload bytes")
        return np.zeros(0, dtype=np.uint32)
    values = impl.decode_payload(control, data, header.n, k)
    if header.delta:
        if values.size > 1 and not values[1:].all():
            raise MalformedBlockError("zero gap in a delta-encoded block")
        try:
            values = delta_decode(values)
        except DeltaOverflowError:
            raise MalformedBlockError("delta-encoded values overflow 32 bits") from None
    return values
