"""Measurement and verification harness: throughput, sizes, round-trip checks."""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np

from .bitcore import UINT32_MAX, as_uint32_array
from .codec import Codec, CodecId
from .container import all_codecs, decode_block, encode_block, read_header, resolve_codec
from .datasets import Dataset
from .errors import CodecError, PreconditionError
from .group_scheme import GroupSchemeCodec
from .kernels import Kernel, select_kernel

SHORT_LIST_THRESHOLD = 64
CSV_COLUMNS = ("codec", "variant", "kernel", "dataset", "n", "encoded_bytes",
               "bits_per_int", "encode_mis", "decode_mis", "runs")


class VerificationError(CodecError):
    """Decoded output differed from the input during a measurement."""


def variant_label(codec: Codec) -> str:
    if isinstance(codec, GroupSchemeCodec):
        return codec.config.label
    return "-"


# -- posting store ---------------------------------------------------------

class PostingStore:
    """Posting lists encoded one block per list.

    Lists shorter than ``short_threshold`` always go through VarByte, since a
    128-bit vector format cannot amortize its padding on them.
    """

    def __init__(self, codec: Codec | str = "group-simple", kernel: Kernel | str = Kernel.AUTO,
                 delta: bool = False, short_threshold: int = SHORT_LIST_THRESHOLD):
        if short_threshold < 0:
            raise PreconditionError(f"negative short-list threshold {short_threshold}")
        self.codec = resolve_codec(codec)
        self.short_codec = resolve_codec(CodecId.VARBYTE)
        self.kernel = select_kernel(kernel)
        self.delta = delta
        self.short_threshold = short_threshold
        self.blocks: list[bytes] = []

    def codec_for_length(self, n: int) -> Codec:
        return self.short_codec if n < self.short_threshold else self.codec

    def add(self, values) -> int:
        arr = as_uint32_array(values)
        codec = self.codec_for_length(arr.size)
        self.blocks.append(encode_block(codec, None, self.kernel, self.delta, arr))
        return len(self.blocks) - 1

    def extend(self, lists: Iterable) -> None:
        for values in lists:
            self.add(values)

    def get(self, index: int) -> np.ndarray:
        return decode_block(self.blocks[index], self.kernel)

    def codec_id_of(self, index: int) -> CodecId:
        return CodecId(read_header(self.blocks[index]).codec_id)

    @property
    def total_bytes(self) -> int:
        return sum(map(len, self.blocks))

    def __len__(self) -> int:
        return len(self.blocks)


# -- benchmark -------------------------------------------------------------

@dataclass
class BenchRow:
    codec: str
    variant: str
    kernel: str
    dataset: str
    n: int
    encoded_bytes: int
    bits_per_int: float
    encode_mis: float
    decode_mis: float
    runs: int
    encode_median_s: float = 0.0
    decode_median_s: float = 0.0
    encode_mean_s: float = 0.0
    decode_mean_s: float = 0.0

    def csv_record(self) -> dict:
        return {k: getattr(self, k) for k in CSV_COLUMNS}


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    timer_resolution: float = field(default_factory=lambda: time.get_clock_info("perf_counter").resolution)

    @property
    def note(self) -> str:
        runs = sorted({r.runs for r in self.rows})
        return (f"mis = 10^6 integers per second from the median of {'/'.join(map(str, runs)) or '-'} "
                f"warm runs; timer resolution {self.timer_resolution:.3g} s")


def bits_per_int(encoded_bytes: int, n: int) -> float:
    return 8 * encoded_bytes / n


def _mis(n: int, seconds: float) -> float:
    return n / seconds / 1e6 if seconds > 0 else math.inf


def time_decode(blocks: Sequence[bytes], kernel: Kernel | str, runs: int,
                expected: Sequence[np.ndarray] | None = None) -> list[float]:
    """Wall time of decoding all ``blocks`` once, for each of ``runs`` runs.

    Every run's output is compared with ``expected`` when given.
    """
    k = select_kernel(kernel)
    times = []
    for _ in range(runs):
        start = time.perf_counter()
        outs = [decode_block(b, k) for b in blocks]
        times.append(time.perf_counter() - start)
        if expected is not None:
            for i, (got, want) in enumerate(zip(outs, expected)):
                if not np.array_equal(got, want):
                    raise VerificationError(f"list {i}: decoded output differs from the input")
    return times


def run_benchmark(codecs: Iterable[Codec | str] | None, dataset: Dataset, runs: int = 3,
                  kernel: Kernel | str = Kernel.AUTO,
                  short_threshold: int = SHORT_LIST_THRESHOLD) -> BenchReport:
    """Encode ``dataset`` once per codec for its size, then time warm encode/decode runs."""
    if runs < 3:
        raise PreconditionError(f"runs={runs}; at least 3 are needed for a median")
    if dataset.total == 0:
        raise PreconditionError("dataset holds no integers")
    k = select_kernel(kernel)
    report = BenchReport()
    for codec in codecs if codecs is not None else all_codecs():
        codec = resolve_codec(codec)
        store = PostingStore(codec, k, short_threshold=short_threshold)
        enc_times = []
        for _ in range(runs):
            store.blocks.clear()
            start = time.perf_counter()
            store.extend(dataset.lists)
            enc_times.append(time.perf_counter() - start)
        dec_times = time_decode(store.blocks, k, runs, dataset.lists)
        n = dataset.total
        size = store.total_bytes
        enc_med = statistics.median(enc_times)
        dec_med = statistics.median(dec_times)
        report.rows.append(BenchRow(
            codec=codec.name, variant=variant_label(codec), kernel=k.value,
            dataset=dataset.name, n=n, encoded_bytes=size, bits_per_int=bits_per_int(size, n),
            encode_mis=_mis(n, enc_med), decode_mis=_mis(n, dec_med), runs=runs,
            encode_median_s=enc_med, decode_median_s=dec_med,
            encode_mean_s=statistics.fmean(enc_times), decode_mean_s=statistics.fmean(dec_times),
        ))
    return report


def render_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in report.rows:
        writer.writerow(row.csv_record())
    return buf.getvalue()


def render_markdown(report: BenchReport) -> str:
    lines = ["| " + " | ".join(CSV_COLUMNS) + " |", "|" + "---|" * len(CSV_COLUMNS)]
    for row in report.rows:
        cells = []
        for key in CSV_COLUMNS:
            v = getattr(row, key)
            cells.append(f"{v:.3f}" if isinstance(v, float) else str(v))
        lines.append("| " + " | ".join(cells) + " |")
    lines += ["", report.note]
    if report.rows:
        lines.append("")
        lines.append("Mean seconds (encode / decode): " + "; ".join(
            f"{r.codec} {r.encode_mean_s:.4g} / {r.decode_mean_s:.4g}" for r in report.rows))
    return "\n".join(lines) + "\n"


def parse_csv_report(text: str) -> list[dict]:
    """Rows of a CSV report with numeric columns converted back."""
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        for key in ("n", "encoded_bytes", "runs"):
            rec[key] = int(rec[key])
        for key in ("bits_per_int", "encode_mis", "decode_mis"):
            rec[key] = float(rec[key])
        rows.append(rec)
    return rows


def emit_report(report: BenchReport, fmt: str = "csv", out: str | Path | TextIO | None = None) -> str:
    """Render ``report`` as ``csv`` or ``md`` and write it to ``out`` (a path or stream)."""
    fmt = fmt.lower()
    if fmt == "csv":
        text = render_csv(report)
    elif fmt in ("md", "markdown"):
        text = render_markdown(report)
    else:
        raise PreconditionError(f"unknown report format {fmt!r} (csv or md)")
    if isinstance(out, (str, Path)):
        Path(out).write_text(text)
    elif out is not None:
        out.write(text)
    return text


# -- round-trip verification ----------------------------------------------

CASE_KINDS = ("uniform", "geometric", "zeros", "max", "spike")
EDGE_LENGTHS = (0, 1, 2, 3, 4, 5, 63, 64, 127, 128, 129, 10000)
MAX_CASE_LENGTH = 10000
_KIND_WEIGHTS = (0.4, 0.3, 0.1, 0.1, 0.1)


@dataclass(frozen=True)
class Case:
    seed: int
    index: int
    kind: str
    values: np.ndarray = field(repr=False, compare=False)

    @property
    def length(self) -> int:
        return int(self.values.size)


def make_case(seed: int, index: int) -> Case:
    """Test case ``index`` of the suite seeded with ``seed``; independent of other cases.

    The first cases pair every edge length with every kind; later lengths are
    log-uniform on ``[1, 10000]`` so short and long inputs are equally common
    per decade.
    """
    rng = np.random.default_rng([seed, index])
    edges = len(EDGE_LENGTHS) * len(CASE_KINDS)
    if index < edges:
        length = EDGE_LENGTHS[index % len(EDGE_LENGTHS)]
        kind = CASE_KINDS[index // len(EDGE_LENGTHS)]
    else:
        length = min(MAX_CASE_LENGTH, int(math.exp(rng.uniform(0, math.log(MAX_CASE_LENGTH + 1)))))
        kind = CASE_KINDS[int(rng.choice(len(CASE_KINDS), p=_KIND_WEIGHTS))]
    if kind == "uniform":
        bits = int(rng.integers(1, 33))
        values = rng.integers(0, 1 << bits, size=length, dtype=np.uint64)
    elif kind == "geometric":
        p = 10 ** rng.uniform(-4, -0.1)
        values = np.minimum(rng.geometric(p, size=length), UINT32_MAX)
    elif kind == "zeros":
        values = np.zeros(length)
    elif kind == "max":
        values = np.full(length, UINT32_MAX)
    else:
        background = int(rng.integers(0, 5))
        values = rng.integers(0, 1 << background, size=length) if background else np.zeros(length)
        if length:
            values[int(rng.integers(length))] = rng.integers(1 << 16, UINT32_MAX, endpoint=True)
    return Case(seed, index, kind, np.asarray(values, dtype=np.uint64).astype(np.uint32))


@dataclass(frozen=True)
class Failure:
    codec: str
    kernel: str
    seed: int
    case: int
    length: int
    kind: str
    reason: str

    def __str__(self) -> str:
        return (f"{self.codec} kernel={self.kernel} seed={self.seed} case={self.case} "
                f"length={self.length} kind={self.kind}: {self.reason}")


@dataclass
class VerifyReport:
    checks: int = 0
    failures: list[Failure] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        state = "PASS" if self.ok else "FAIL"
        return f"{state}: {self.checks} checks, {len(self.failures)} failures, {self.seconds:.1f} s"


def verify_roundtrip(codecs: Iterable[Codec | str] | None = None, cases: int = 1000, seed: int = 0,
                     kernels: Sequence[Kernel | str] = (Kernel.SCALAR, Kernel.VECTORIZED),
                     progress: Callable[[int], None] | None = None) -> VerifyReport:
    """Round-trip and kernel-equivalence check of every codec on generated cases.

    Per case and codec: each kernel encodes, the encodings must be identical,
    and every kernel must decode every encoding back to the input.
    """
    if cases < 0:
        raise PreconditionError(f"negative case count {cases}")
    impls = [resolve_codec(c) for c in (codecs if codecs is not None else all_codecs())]
    ks = [select_kernel(k) for k in kernels]
    report = VerifyReport()
    start = time.perf_counter()
    for index in range(cases):
        case = make_case(seed, index)
        for codec in impls:
            _check_case(codec, ks, case, report)
        if progress is not None:
            progress(index)
    report.seconds = time.perf_counter() - start
    return report


def _check_case(codec: Codec, kernels: list[Kernel], case: Case, report: VerifyReport) -> None:
    def fail(kernel: Kernel, reason: str) -> None:
        report.failures.append(Failure(codec.name, kernel.value, case.seed, case.index,
                                       case.length, case.kind, reason))

    blocks = {}
    for k in kernels:
        report.checks += 1
        try:
            blocks[k] = encode_block(codec, None, k, False, case.values)
        except Exception as exc:  # noqa: BLE001 - any crash is a finding
            fail(k, f"encode raised {type(exc).__name__}: {exc}")
    distinct = {}
    for k, block in blocks.items():
        distinct.setdefault(block, k)
    if len(distinct) > 1:
        report.checks += 1
        fail(kernels[-1], "kernels produced different encodings")
    for block, producer in distinct.items():
        for k in kernels:
            report.checks += 1
            try:
                out = decode_block(block, k)
            except Exception as exc:  # noqa: BLE001
                fail(k, f"decode of {producer.value} block raised {type(exc).__name__}: {exc}")
                continue
            if out.dtype != np.uint32 or not np.array_equal(out, case.values):
                fail(k, f"decode of {producer.value} block differs from input")
