"""Exception hierarchy shared by every codec and the container format."""

from __future__ import annotations


class CodecError(Exception):
    """Base class for everything this package raises on purpose."""


class PreconditionError(CodecError, ValueError):
    """An input violated a documented precondition."""


class NotStrictlyIncreasingError(PreconditionError):
    """Raised by delta encoding when the input is not strictly increasing."""

    def __init__(self, index: int, previous: int, value: int):
        self.index = index
        self.previous = previous
        self.value = value
        super().__init__(
            f"input not strictly increasing at index {index}: {previous} followed by {value}"
        )


class DeltaOverflowError(PreconditionError, OverflowError):
    """A prefix sum of d-gaps does not fit in 32 bits."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"prefix sum overflows 32 bits at index {index}")


class FormatError(CodecError, ValueError):
    """Base class for problems found while decoding a byte stream."""


class BadMagicError(FormatError):
    pass


class UnsupportedVersionError(FormatError):
    pass


class UnknownCodecError(FormatError):
    pass


class UnknownVariantError(FormatError):
    pass


class TruncatedBlockError(FormatError):
    """The stream ends before the data it announces."""

    def __init__(self, message: str, required: int | None = None, available: int | None = None):
        self.required = required
        self.available = available
        super().__init__(message)


class MalformedBlockError(FormatError):
    """The stream is long enough but its contents are inconsistent."""


class KernelUnavailableError(CodecError, RuntimeError):
    """The requested kernel cannot run on this host."""
