"""Kernel selection.

Every codec ships two execution paths with identical observable behaviour:

* ``SCALAR`` works one 32-bit word at a time in plain Python;
* ``VECTORIZED`` processes the four lanes of every vector (and many vectors at
  once) with numpy array operations, which numpy lowers to the host's SIMD
  instructions.
"""

from __future__ import annotations

import enum
from typing import Mapping

from .errors import KernelUnavailableError

# Any one of these means numpy's integer loops run on 128-bit (or wider) registers.
SIMD_FEATURES = ("SSE2", "ASIMD", "NEON", "VSX", "VX")


class Kernel(enum.Enum):
    SCALAR = "scalar"
    VECTORIZED = "vector"
    AUTO = "auto"

    @classmethod
    def parse(cls, value: "Kernel | str") -> "Kernel":
        if isinstance(value, Kernel):
            return value
        key = str(value).strip().lower()
        aliases = {"vectorized": "vector", "simd": "vector"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown kernel {value!r}; expected scalar, vector or auto") from None


def cpu_features() -> Mapping[str, bool]:
    """Runtime CPU feature flags as detected by numpy's dispatcher."""
    try:
        from numpy._core._multiarray_umath import __cpu_features__
    except ImportError:  # pragma: no cover - numpy < 2
        try:
            from numpy.core._multiarray_umath import __cpu_features__
        except ImportError:
            return {}
    return dict(__cpu_features__)


def simd_capable(features: Mapping[str, bool] | None = None) -> bool:
    if features is None:
        features = cpu_features()
    return any(features.get(name, False) for name in SIMD_FEATURES)


def select_kernel(preference: Kernel | str = Kernel.AUTO,
                  features: Mapping[str, bool] | None = None) -> Kernel:
    """Resolve ``preference`` to a concrete kernel for this host.

    ``features`` overrides runtime detection (used by tests).
    """
    preference = Kernel.parse(preference)
    if preference is Kernel.SCALAR:
        return Kernel.SCALAR
    capable = simd_capable(features)
    if preference is Kernel.VECTORIZED and not capable:
        raise KernelUnavailableError("vectorized kernel requested but no 128-bit SIMD support detected")
    return Kernel.VECTORIZED if capable else Kernel.SCALAR
