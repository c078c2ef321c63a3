import io
import math

import numpy as np
import pytest

from groupcodec import CodecId, REGISTRY
from groupcodec.bench import (
    CSV_COLUMNS,
    BenchReport,
    BenchRow,
    PostingStore,
    VerificationError,
    bits_per_int,
    emit_report,
    make_case,
    parse_csv_report,
    run_benchmark,
    verify_roundtrip,
)
from groupcodec.datasets import Dataset, gen_docid_gaps, generate
from groupcodec.errors import PreconditionError
from groupcodec.group_simple import GroupSimpleCodec


def test_bits_per_int_definition():
    assert bits_per_int(750, 1000) == 6.0


def test_posting_store_short_list_rule():
    rng = np.random.default_rng(0)
    store = PostingStore("gsc-8-iu")
    lists = [rng.integers(0, 1000, size=n).astype(np.uint32) for n in (0, 1, 63, 64, 65, 500)]
    store.extend(lists)
    ids = [store.codec_id_of(i) for i in range(len(store))]
    assert ids == [CodecId.VARBYTE] * 3 + [CodecId.GROUP_SCHEME] * 3
    for i, values in enumerate(lists):
        assert np.array_equal(store.get(i), values)
    assert store.total_bytes == sum(map(len, store.blocks))
    none = PostingStore("group-pfd", short_threshold=0)
    none.add([1, 2, 3])
    assert none.codec_id_of(0) is CodecId.GROUP_PFD
    with pytest.raises(PreconditionError):
        PostingStore(short_threshold=-1)


def test_posting_store_delta():
    store = PostingStore("group-afor", delta=True)
    ids = np.cumsum(gen_docid_gaps(1000, 0.1, 3)).astype(np.uint32)
    store.add(ids)
    store.add(ids[:10])
    assert np.array_equal(store.get(0), ids) and np.array_equal(store.get(1), ids[:10])


def test_run_benchmark_rows():
    ds = generate("uniform:bits=8", 5000, 1)
    report = run_benchmark(["group-simple", "gsc-8-iu"], ds, runs=3, kernel="vector")
    assert [r.codec for r in report.rows] == ["group-simple", "gsc-8-iu"]
    assert [r.variant for r in report.rows] == ["-", "8-IU"]
    for row in report.rows:
        assert row.n == 5000 and row.runs == 3 and row.kernel == "vector"
        assert row.bits_per_int == 8 * row.encoded_bytes / row.n
        assert row.decode_mis == pytest.approx(row.n / row.decode_median_s / 1e6)
        assert row.encode_mis > 0 and row.decode_mean_s > 0
    with pytest.raises(PreconditionError):
        run_benchmark(None, ds, runs=2)
    with pytest.raises(PreconditionError):
        run_benchmark(None, Dataset("empty", [np.zeros(0, dtype=np.uint32)]), runs=3)


def test_run_benchmark_detects_wrong_output(monkeypatch):
    codec = REGISTRY["group-simple"]
    original = GroupSimpleCodec.decode_payload

    def broken(self, control, data, n, kernel):
        out = original(self, control, data, n, kernel).copy()
        out[-1] ^= 1
        return out

    monkeypatch.setattr(GroupSimpleCodec, "decode_payload", broken)
    with pytest.raises(VerificationError):
        run_benchmark([codec], generate("uniform:bits=4", 1000, 0), runs=3)


def _row(**kw):
    base = dict(codec="group-pfd", variant="-", kernel="vector", dataset="uniform-8b", n=1000,
                encoded_bytes=750, bits_per_int=6.0, encode_mis=12.345678901234, decode_mis=math.pi,
                runs=3)
    base.update(kw)
    return BenchRow(**base)


def test_emit_csv():
    empty = emit_report(BenchReport(), "csv")
    assert empty == ",".join(CSV_COLUMNS) + "\n"
    one = emit_report(BenchReport([_row()]), "csv")
    assert len(one.splitlines()) == 2
    rows = [_row(), _row(codec="gsc-4-cu", variant="4-CU", bits_per_int=8 * 1001 / 3000,
                         encoded_bytes=1001, n=3000)]
    text = emit_report(BenchReport(rows), "csv")
    back = parse_csv_report(text)
    assert back == [r.csv_record() for r in rows]


def test_emit_markdown_and_destinations(tmp_path):
    report = BenchReport([_row(), _row(codec="varbyte")])
    md = emit_report(report, "md")
    lines = md.splitlines()
    assert lines[0].startswith("| codec | variant")
    assert sum(1 for line in lines if line.startswith("| group-pfd") or line.startswith("| varbyte")) == 2
    assert "timer resolution" in md and "Mean seconds" in md
    path = tmp_path / "r.csv"
    emit_report(report, "csv", path)
    assert path.read_text() == emit_report(report, "csv")
    buf = io.StringIO()
    emit_report(report, "md", buf)
    assert buf.getvalue() == md
    with pytest.raises(PreconditionError):
        emit_report(report, "json")
    with pytest.raises(OSError):
        emit_report(report, "csv", tmp_path / "missing" / "r.csv")


def test_cases_are_deterministic_and_cover_edges():
    a = make_case(5, 123)
    b = make_case(5, 123)
    assert a.kind == b.kind and np.array_equal(a.values, b.values)
    lengths = {make_case(0, i).length for i in range(60)}
    assert {0, 1, 4, 5, 63, 64, 127, 128, 129, 10000} <= lengths
    kinds = {make_case(0, i).kind for i in range(200)}
    assert kinds == {"uniform", "geometric", "zeros", "max", "spike"}
    assert all(0 <= make_case(1, i).length <= 10000 for i in range(300))


def test_verify_roundtrip_passes_small():
    report = verify_roundtrip(cases=70, seed=2)
    assert report.ok, [str(f) for f in report.failures[:3]]
    assert report.checks == 70 * 14 * 4


def test_verify_detects_decoder_mutation(monkeypatch):
    original = GroupSimpleCodec.decode_payload

    def mutated(self, control, data, n, kernel):
        out = original(self, control, data, n, kernel)
        if n > 3 and kernel.value == "scalar":
            out = out.copy()
            out[n // 2] += 1
        return out

    monkeypatch.setattr(GroupSimpleCodec, "decode_payload", mutated)
    report = verify_roundtrip(["group-simple", "varbyte"], cases=30, seed=0)
    assert not report.ok
    assert {f.codec for f in report.failures} == {"group-simple"}
    first = report.failures[0]
    assert first.kernel == "scalar" and "seed=0" in str(first) and f"length={first.length}" in str(first)
    assert np.array_equal(make_case(first.seed, first.case).values.size, first.length)


def test_verify_detects_encoder_divergence(monkeypatch):
    original = GroupSimpleCodec.encode_payload

    def diverging(self, values, kernel):
        control, data = original(self, values, kernel)
        if kernel.value == "vector" and data:
            data = data[:-1] + bytes([data[-1] ^ 0x80])
        return control, data

    monkeypatch.setattr(GroupSimpleCodec, "encode_payload", diverging)
    report = verify_roundtrip(["group-simple"], cases=10, seed=0)
    assert any("different encodings" in f.reason for f in report.failures)
