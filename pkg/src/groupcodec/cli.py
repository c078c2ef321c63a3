"""``groupcodec`` command line: bench, verify, encode, decode, codecs.

Exit status: 0 success, 1 verification failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import struct
import sys
from pathlib import Path

from .bench import (
    SHORT_LIST_THRESHOLD,
    PostingStore,
    VerificationError,
    emit_report,
    run_benchmark,
    variant_label,
    verify_roundtrip,
)
from .codec import CodecId
from .container import all_codecs, decode_block, read_header, resolve_codec
from .datasets import CorpusError, dump_corpus, generate, load_corpus
from .errors import CodecError
from .kernels import Kernel

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _kernel(text: str) -> Kernel:
    try:
        return Kernel.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="groupcodec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="measure size and throughput")
    p.add_argument("--codec", default="all", help="codec name, or 'all' (default)")
    p.add_argument("--variant", default=None, help="Group-Scheme config such as 8-IU")
    p.add_argument("--kernel", type=_kernel, default=Kernel.AUTO)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--gen", default="uniform:bits=8",
                     help="uniform:bits=B or gaps:density=D (default uniform:bits=8)")
    src.add_argument("--corpus", type=Path, help="posting-list corpus file instead of --gen")
    p.add_argument("--input-format", choices=("text", "binary"), default="text")
    p.add_argument("--n", type=int, default=1 << 20)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--short-threshold", type=int, default=SHORT_LIST_THRESHOLD)
    p.add_argument("--format", choices=("csv", "md"), default="csv")
    p.add_argument("--out", type=Path, default=None, help="output file (default stdout)")

    p = sub.add_parser("verify", help="round-trip every codec on generated cases")
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--codec", default="all")
    p.add_argument("--variant", default=None)

    p = sub.add_parser("encode", help="encode a corpus into a block file")
    p.add_argument("--codec", required=True)
    p.add_argument("--variant", default=None)
    p.add_argument("--in", dest="inp", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--input-format", choices=("text", "binary"), default="text")
    p.add_argument("--kernel", type=_kernel, default=Kernel.AUTO)
    p.add_argument("--delta", action="store_true", help="store d-gaps of increasing lists")
    p.add_argument("--short-threshold", type=int, default=SHORT_LIST_THRESHOLD)

    p = sub.add_parser("decode", help="decode a block file back into a corpus")
    p.add_argument("--codec", default=None, help="expected codec; short lists may be varbyte")
    p.add_argument("--variant", default=None)
    p.add_argument("--in", dest="inp", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--output-format", "--input-format", dest="output_format",
                   choices=("text", "binary"), default="text")
    p.add_argument("--kernel", type=_kernel, default=Kernel.AUTO)

    sub.add_parser("codecs", help="list codec names, ids and variants")
    return parser


def _codecs(name: str, variant):
    if name.lower() == "all":
        if variant is not None:
            raise UsageError("--variant needs a single --codec")
        return all_codecs()
    return [resolve_codec(name, variant)]


def _cmd_bench(args) -> int:
    codecs = _codecs(args.codec, args.variant)
    if args.corpus is not None:
        dataset = load_corpus(args.corpus, args.input_format)
    else:
        if args.n < 1:
            raise UsageError("--n must be positive")
        dataset = generate(args.gen, args.n, args.seed)
    report = run_benchmark(codecs, dataset, args.runs, args.kernel, args.short_threshold)
    text = emit_report(report, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_verify(args) -> int:
    codecs = _codecs(args.codec, args.variant)
    report = verify_roundtrip(codecs, args.cases, args.seed)
    for failure in report.failures[:50]:
        print(failure)
    if len(report.failures) > 50:
        print(f"... {len(report.failures) - 50} more")
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_VERIFY


def _cmd_encode(args) -> int:
    dataset = load_corpus(args.inp, args.input_format)
    store = PostingStore(resolve_codec(args.codec, args.variant), args.kernel, args.delta,
                         args.short_threshold)
    store.extend(dataset.lists)
    args.out.write_bytes(b"".join(struct.pack("<I", len(b)) + b for b in store.blocks))
    return EXIT_OK


def read_block_file(raw: bytes) -> list[bytes]:
    blocks = []
    pos = 0
    while pos < len(raw):
        if pos + 4 > len(raw):
            raise CorpusError("block length cut short", f"offset {pos}")
        (size,) = struct.unpack_from("<I", raw, pos)
        if pos + 4 + size > len(raw):
            raise CorpusError(f"block of {size} bytes overruns the file", f"offset {pos}")
        blocks.append(raw[pos + 4:pos + 4 + size])
        pos += 4 + size
    return blocks


def _cmd_decode(args) -> int:
    blocks = read_block_file(args.inp.read_bytes())
    expected = resolve_codec(args.codec, args.variant) if args.codec else None
    lists = []
    for i, block in enumerate(blocks):
        if expected is not None:
            header = read_header(block)
            found = (header.codec_id, header.variant)
            if found not in ((int(expected.codec_id), expected.variant), (int(CodecId.VARBYTE), 0)):
                raise UsageError(f"block {i} was written by codec {found[0]} variant {found[1]}, "
                                 f"not {expected.name}")
        lists.append(decode_block(block, args.kernel))
    args.out.write_bytes(dump_corpus(lists, args.output_format))
    return EXIT_OK


def _cmd_codecs(args) -> int:
    for codec in all_codecs():
        print(f"{codec.name:12s} id={int(codec.codec_id)} variant=0x{codec.variant:02x} "
              f"({variant_label(codec)})")
    return EXIT_OK


_COMMANDS = {"bench": _cmd_bench, "verify": _cmd_verify, "encode": _cmd_encode,
             "decode": _cmd_decode, "codecs": _cmd_codecs}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (UsageError, CodecError, CorpusError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
