"""Integer compression codecs that pack quadruples of 32-bit integers into 128-bit vectors."""

from .bitcore import (
    delta_decode,
    delta_encode,
    effective_bit_width,
    pack_vertical,
    pseudo_quad_max_array,
    quad_max_array,
    unpack_vertical,
)
from .codec import Codec, CodecId
from .container import (
    REGISTRY,
    BlockHeader,
    all_codecs,
    codec_for,
    decode_block,
    encode_block,
    read_header,
    resolve_codec,
)
from .errors import (
    BadMagicError,
    CodecError,
    DeltaOverflowError,
    FormatError,
    KernelUnavailableError,
    MalformedBlockError,
    NotStrictlyIncreasingError,
    PreconditionError,
    TruncatedBlockError,
    UnknownCodecError,
    UnknownVariantError,
    UnsupportedVersionError,
)
from .group_frame import GroupAforCodec, GroupPfdCodec, afor_partition, pfd_choose_width
from .group_scheme import ALL_CONFIGS, GroupSchemeCodec, LdKind, SchemeConfig
from .group_simple import GroupSimpleCodec, select_patterns, selector_lookup
from .kernels import Kernel, select_kernel
from .varbyte import VarByteCodec, varbyte_decode, varbyte_encode

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
