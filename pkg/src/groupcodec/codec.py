"""Common codec interface.

A codec turns a ``uint32`` array into a pair ``(control, data)`` of byte
strings and back. The container (:mod:`groupcodec.container`) adds the header,
pads the control area and keeps track of the logical count ``n``; codecs only
ever see quad-padded (or frame-padded) data and must emit exactly ``n``
integers on decode.
"""

from __future__ import annotations

import abc
import enum

import numpy as np

from .errors import MalformedBlockError, TruncatedBlockError
from .kernels import Kernel


class CodecId(enum.IntEnum):
    VARBYTE = 1
    GROUP_SIMPLE = 2
    GROUP_SCHEME = 3
    GROUP_AFOR = 4
    GROUP_PFD = 5


class Codec(abc.ABC):
    """Immutable codec object; lookup tables are built in ``__init__``."""

    codec_id: CodecId
    name: str

    @property
    def variant(self) -> int:
        """Codec-specific variant byte stored in the block header."""
        return 0

    @property
    def label(self) -> str:
        return self.name

    @abc.abstractmethod
    def encode_payload(self, values: np.ndarray, kernel: Kernel) -> tuple[bytes, bytes]:
        """Return ``(control, data)`` for ``values`` (a ``uint32`` array)."""

    @abc.abstractmethod
    def decode_payload(self, control: memoryview, data: memoryview, n: int,
                       kernel: Kernel) -> np.ndarray:
        """Return the ``n`` integers described by ``control`` and ``data``.

        ``control`` may carry zero padding after the logical control bytes;
        ``data`` must be exactly as long as the control area implies.
        """

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


def check_control_tail(control: memoryview | bytes, used: int) -> None:
    """Bytes of the control area past the logical control data must be zero."""
    tail = bytes(control[used:])
    if tail.strip(b"\x00"):
        raise MalformedBlockError(f"nonzero padding after {used} control bytes")


def check_data_length(data: memoryview | bytes, required: int) -> None:
    if len(data) < required:
        raise TruncatedBlockError(
            f"data area holds {len(data)} bytes, {required} required",
            required=required,
            available=len(data),
        )
    if len(data) > required:
        raise MalformedBlockError(f"{len(data) - required} trailing bytes after the data area")
