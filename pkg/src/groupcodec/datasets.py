"""Synthetic generators and posting-list corpus files.

Corpus formats:

* text: one list per line, non-negative decimals separated by whitespace;
  blank lines are empty lists.
* binary: records of ``[u32 count][count x u32]``, little-endian.
"""

from __future__ import annotations

import enum
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bitcore import UINT32_MAX
from .errors import PreconditionError


class DatasetKind(enum.Enum):
    DOCID_GAPS = "docid-gaps"
    TF = "tf"
    RAW = "raw"


class CorpusFormat(enum.Enum):
    TEXT = "text"
    BINARY = "binary"

    @classmethod
    def parse(cls, value: "CorpusFormat | str") -> "CorpusFormat":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise PreconditionError(f"unknown corpus format {value!r} (text or binary)") from None


class CorpusError(ValueError):
    """A corpus file that does not parse; ``location`` is a line or byte offset."""

    def __init__(self, message: str, location: str):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass
class Dataset:
    name: str
    lists: list[np.ndarray]
    kind: DatasetKind = DatasetKind.RAW
    seed: int | None = None
    params: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(int(x.size) for x in self.lists)


def gen_uniform(n: int, max_bits: int, seed: int) -> np.ndarray:
    """``n`` integers uniform on ``[0, 2**max_bits)``."""
    if not 1 <= max_bits <= 32:
        raise PreconditionError(f"max_bits={max_bits} outside 1..32")
    if n < 0:
        raise PreconditionError(f"negative length {n}")
    rng = np.random.default_rng(seed)
    return rng.integers(0, 1 << max_bits, size=n, dtype=np.uint64).astype(np.uint32)


def gen_docid_gaps(n: int, density: float, seed: int) -> np.ndarray:
    """Gaps between docids sampled with probability ``density``: geometric, all >= 1."""
    if not 0 < density < 1:
        raise PreconditionError(f"density={density} must lie strictly between 0 and 1")
    if n < 0:
        raise PreconditionError(f"negative length {n}")
    rng = np.random.default_rng(seed)
    gaps = rng.geometric(density, size=n)
    return np.minimum(gaps, UINT32_MAX).astype(np.uint32)


_GEN_RE = re.compile(r"^(?P<kind>[a-z]+)(?::(?P<args>.*))?$")


def parse_generator(spec: str) -> tuple[str, dict[str, float]]:
    """Split ``"uniform:bits=8"`` into ``("uniform", {"bits": 8})``."""
    m = _GEN_RE.match(spec.strip().lower())
    if not m:
        raise PreconditionError(f"bad generator spec {spec!r}")
    kind, args = m["kind"], {}
    for part in filter(None, (m["args"] or "").split(",")):
        key, sep, value = part.partition("=")
        if not sep:
            raise PreconditionError(f"generator argument {part!r} is not key=value")
        try:
            args[key.strip()] = float(value)
        except ValueError:
            raise PreconditionError(f"generator argument {part!r} is not numeric") from None
    if kind == "uniform":
        bits = args.get("bits", 8)
        if bits != int(bits):
            raise PreconditionError(f"bits={bits} must be an integer")
        return kind, {"bits": int(bits)}
    if kind == "gaps":
        return kind, {"density": args.get("density", 0.05)}
    raise PreconditionError(f"unknown generator {kind!r} (uniform or gaps)")


def generate(spec: str, n: int, seed: int) -> Dataset:
    """A one-list dataset built from a generator spec string."""
    kind, args = parse_generator(spec)
    if kind == "uniform":
        values = gen_uniform(n, args["bits"], seed)
        return Dataset(f"uniform-{args['bits']}b", [values], DatasetKind.RAW, seed, args)
    values = gen_docid_gaps(n, args["density"], seed)
    return Dataset(f"gaps-{args['density']:g}", [values], DatasetKind.DOCID_GAPS, seed, args)


def load_corpus(path: str | Path, fmt: CorpusFormat | str = CorpusFormat.TEXT) -> Dataset:
    fmt = CorpusFormat.parse(fmt)
    path = Path(path)
    raw = path.read_bytes()
    lists = _parse_text(raw) if fmt is CorpusFormat.TEXT else _parse_binary(raw)
    return Dataset(path.name, lists, DatasetKind.RAW)


def _parse_text(raw: bytes) -> list[np.ndarray]:
    lists = []
    for lineno, line in enumerate(raw.decode("ascii", errors="replace").splitlines(), 1):
        values = []
        for token in line.split():
            if not token.isdigit():
                raise CorpusError(f"not a non-negative integer: {token!r}", f"line {lineno}")
            v = int(token)
            if v > UINT32_MAX:
                raise CorpusError(f"{v} does not fit in 32 bits", f"line {lineno}")
            values.append(v)
        lists.append(np.asarray(values, dtype=np.uint32))
    return lists


def _parse_binary(raw: bytes) -> list[np.ndarray]:
    lists = []
    pos = 0
    while pos < len(raw):
        if pos + 4 > len(raw):
            raise CorpusError("record count cut short", f"offset {pos}")
        (count,) = struct.unpack_from("<I", raw, pos)
        end = pos + 4 + 4 * count
        if end > len(raw):
            raise CorpusError(f"record of {count} values overruns the file", f"offset {pos}")
        lists.append(np.frombuffer(raw, dtype="<u4", count=count, offset=pos + 4).astype(np.uint32))
        pos = end
    return lists


def dump_corpus(lists, fmt: CorpusFormat | str = CorpusFormat.TEXT) -> bytes:
    fmt = CorpusFormat.parse(fmt)
    if fmt is CorpusFormat.TEXT:
        return "".join(" ".join(map(str, np.asarray(x).tolist())) + "\n" for x in lists).encode()
    parts = []
    for x in lists:
        arr = np.asarray(x, dtype="<u4")
        parts.append(struct.pack("<I", arr.size))
        parts.append(arr.tobytes())
    return b"".join(parts)


def write_corpus(path: str | Path, lists, fmt: CorpusFormat | str = CorpusFormat.TEXT) -> None:
    Path(path).write_bytes(dump_corpus(lists, fmt))
