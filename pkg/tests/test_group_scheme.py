import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from groupcodec import decode_block, encode_block, read_header
from groupcodec.bitcore import bit_widths, pseudo_quad_max_array
from groupcodec.errors import MalformedBlockError, PreconditionError, UnknownVariantError
from groupcodec.group_scheme import (
    ALL_CONFIGS,
    LdKind,
    SchemeConfig,
    build_lookup_table,
    bw_from_ld,
    decode_control_packed,
    decode_unary_chunk,
    encode_control,
    ld_value,
)

KERNELS = ["scalar", "vector"]
B, CU, IU = LdKind.BINARY, LdKind.COMPLETE_UNARY, LdKind.INCOMPLETE_UNARY
CONFIG_IDS = [c.label for c in ALL_CONFIGS]


def test_config_space():
    assert len(ALL_CONFIGS) == 10
    assert {c.label for c in ALL_CONFIGS} == {
        "1-B", "2-B", "4-B", "8-B", "1-CU", "2-CU", "4-CU", "8-CU", "4-IU", "8-IU"}
    with pytest.raises(PreconditionError):
        SchemeConfig(2, IU)
    with pytest.raises(PreconditionError):
        SchemeConfig(3, B)
    assert [SchemeConfig(cg, B).field_bits for cg in (1, 2, 4, 8)] == [5, 4, 3, 2]
    assert [SchemeConfig(cg, CU).max_units for cg in (1, 2, 4, 8)] == [32, 16, 8, 4]


def test_variant_codes():
    for cfg in ALL_CONFIGS:
        code = cfg.code
        assert 1 << (code & 3) == cfg.cg
        assert code >> 2 == int(cfg.kind)
        assert SchemeConfig.from_code(code) == cfg
        assert SchemeConfig.parse(cfg.label) == cfg
    with pytest.raises(UnknownVariantError):
        SchemeConfig.from_code(0x09)  # 2-IU does not exist
    with pytest.raises(UnknownVariantError):
        SchemeConfig.from_code(0x0C)


def test_ld_value_and_bw_examples():
    assert ld_value(458, SchemeConfig(2, CU)) == 5
    assert ld_value(458, SchemeConfig(2, B)) == 4
    assert ld_value(0, SchemeConfig(8, IU)) == 1
    assert bw_from_ld(5, SchemeConfig(2, CU)) == 10
    assert bw_from_ld(4, SchemeConfig(2, B)) == 10
    assert bw_from_ld(1, SchemeConfig(8, CU)) == 8
    for bad, cfg in [(0, SchemeConfig(8, CU)), (5, SchemeConfig(8, CU)), (4, SchemeConfig(8, B)),
                     (-1, SchemeConfig(1, B)), (33, SchemeConfig(1, CU))]:
        with pytest.raises(MalformedBlockError):
            bw_from_ld(bad, cfg)


@pytest.mark.parametrize("cfg", ALL_CONFIGS, ids=CONFIG_IDS)
def test_ld_roundtrip_every_width(cfg):
    for w in range(1, 33):
        x = (1 << w) - 1
        bw = bw_from_ld(ld_value(x, cfg), cfg)
        assert bw >= w and bw % cfg.cg == 0 and bw - w < cfg.cg


@pytest.mark.parametrize("kernel", KERNELS)
def test_control_encoding_examples(kernel):
    cu = encode_control([2, 3, 1, 3], SchemeConfig(1, CU), kernel)
    assert cu[0] == 0b10110011
    assert encode_control([0, 1, 2, 3], SchemeConfig(8, B), kernel) == bytes([0b11100100])
    assert encode_control([4, 4], SchemeConfig(8, IU), kernel) == bytes([0b11101110])
    # an IU code that does not fit moves to a fresh byte, the rest filled with ones
    assert encode_control([3, 4, 3], SchemeConfig(4, IU), kernel) == bytes([0b11011101, 0b11011111])


def test_unary_chunk_worked_examples():
    table = build_lookup_table(SchemeConfig(1, CU))
    assert decode_unary_chunk(0b10110011, 0, table) == ([2, 3, 1], 2)
    lds, carry = decode_unary_chunk(0b01111110, 2, table)
    assert (lds, carry) == oracles.naive_unary_byte(0b01111110, 2) == ([3, 7], 0)


@pytest.mark.parametrize("cg", [1, 2, 4, 8])
def test_unary_tables_exhaustive(cg):
    table = build_lookup_table(SchemeConfig(cg, CU))
    for byte in range(256):
        for carry in range(32):
            assert decode_unary_chunk(byte, carry, table) == oracles.naive_unary_byte(byte, carry)
        lds, tail = oracles.naive_unary_byte(byte, 0)
        assert table.control_bits[byte] == 8 - tail
        assert table.data_bits[byte] == cg * sum(lds)


@pytest.mark.parametrize("cg", [4, 8])
def test_incomplete_unary_tables_exhaustive(cg):
    table = build_lookup_table(SchemeConfig(cg, IU))
    for byte in range(256):
        lds, _ = oracles.naive_unary_byte(byte, 0)
        assert decode_unary_chunk(byte, 0, table) == (lds, 0)


@pytest.mark.parametrize("cg", [1, 2, 4, 8])
def test_binary_tables_exhaustive(cg):
    cfg = SchemeConfig(cg, B)
    table = build_lookup_table(cfg)
    for key in range(table.size):
        fields, ok = oracles.naive_binary_decode_unit(key, cg)
        assert list(table.rows[key]) == fields
        assert bool(table.valid[key]) == ok
        if ok:
            assert table.data_bits[key] == sum(cg * (f + 1) for f in fields)


@settings(max_examples=200)
@given(st.sampled_from(ALL_CONFIGS), st.data())
def test_control_matches_naive_codes(cfg, data):
    lds = data.draw(st.lists(st.integers(1 if cfg.is_unary else 0, cfg.max_units - (not cfg.is_unary)),
                             max_size=60))
    if cfg.kind is CU:
        expected = oracles.naive_cu_encode(lds)
    elif cfg.kind is IU:
        expected = oracles.naive_iu_encode(lds)
    else:
        expected = oracles.naive_binary_encode(lds, cfg.cg)
    for kernel in KERNELS:
        assert encode_control(lds, cfg, kernel) == expected
        assert decode_control_packed(expected, len(lds), cfg, kernel).tolist() == lds


@pytest.mark.parametrize("kernel", KERNELS)
def test_iu_byte_without_ld_is_malformed(kernel):
    cfg = SchemeConfig(8, IU)
    with pytest.raises(MalformedBlockError):
        decode_control_packed(bytes([0b11101110, 0xFF, 0b01111111]), 3, cfg, kernel)


@pytest.mark.parametrize("kernel", KERNELS)
def test_unary_ld_too_long_is_malformed(kernel):
    cfg = SchemeConfig(8, CU)
    with pytest.raises(MalformedBlockError):
        decode_control_packed(bytes([0b11110111, 0xFF]), 2, cfg, kernel)
    with pytest.raises(MalformedBlockError):
        decode_control_packed(bytes([0b11111111]), 1, cfg, kernel)


@pytest.mark.parametrize("kernel", KERNELS)
def test_binary_padding_bits_are_malformed(kernel):
    with pytest.raises(MalformedBlockError):
        decode_control_packed(bytes([0b01000000]), 2, SchemeConfig(4, B), kernel)
    with pytest.raises(MalformedBlockError):
        decode_control_packed(bytes([0x00, 0x80]), 3, SchemeConfig(1, B), kernel)


@pytest.mark.parametrize("kernel", KERNELS)
def test_cu_cg1_packs_at_exact_width(kernel):
    rng = np.random.default_rng(2)
    values = (rng.integers(0, 2**32, size=400, dtype=np.uint64) >> rng.integers(0, 32, size=400).astype(np.uint64)).astype(np.uint32)
    block = encode_block("gsc-1-cu", None, kernel, False, values)
    widths = bit_widths(pseudo_quad_max_array(values)).tolist()
    h = read_header(block)
    control = block[16:h.data_offset]
    assert decode_control_packed(control, len(widths), SchemeConfig(1, CU)).tolist() == widths
    assert len(block) - h.data_offset == 16 * -(-sum(widths) // 32)


@pytest.mark.parametrize("cfg", ALL_CONFIGS, ids=CONFIG_IDS)
@pytest.mark.parametrize("kernel", KERNELS)
def test_size_invariants(cfg, kernel):
    rng = np.random.default_rng(cfg.code)
    n = 4 * 301
    values = rng.geometric(0.02, size=n).astype(np.uint32)
    values[::97] = rng.integers(0, 2**32, size=len(values[::97]), dtype=np.uint64)
    block = encode_block(f"gsc-{cfg.label.lower()}", None, kernel, False, values)
    h = read_header(block)
    assert h.variant == cfg.code and h.data_offset % 16 == 0
    lds = [ld_value(m, cfg) for m in pseudo_quad_max_array(values).tolist()]
    bws = [bw_from_ld(v, cfg) for v in lds]
    control = block[16:h.data_offset]
    if cfg.kind is B:
        unit_bits = 16 if cfg.cg == 1 else 8
        per_unit = unit_bits // cfg.field_bits
        logical = -(-len(lds) // per_unit) * unit_bits // 8
    elif cfg.kind is CU:
        logical = -(-sum(lds) // 8)
    else:
        logical = len(oracles.naive_iu_encode(lds))
    assert control[:logical] == encode_control(lds, cfg, "scalar")
    assert not any(control[logical:])
    assert len(block) - h.data_offset == 16 * -(-sum(bws) // 32)
    assert decode_block(block, kernel).tolist() == values.tolist()


@pytest.mark.parametrize("label", ["8-CU", "8-IU", "4-CU"])
def test_all_zero_input(label):
    cfg = SchemeConfig.parse(label)
    block = encode_block("group-scheme", label, "vector", False, [0] * 64)
    assert len(block) - read_header(block).data_offset == 16 * -(-16 * cfg.cg // 32)
    assert decode_block(block).tolist() == [0] * 64


@pytest.mark.parametrize("cfg", ALL_CONFIGS, ids=CONFIG_IDS)
def test_empty_and_tiny(cfg):
    name = f"gsc-{cfg.label.lower()}"
    for values in ([], [0], [2**32 - 1], [1, 2, 3], [5] * 5):
        a = encode_block(name, None, "scalar", False, values)
        assert a == encode_block(name, None, "vector", False, values)
        for k in KERNELS:
            assert decode_block(a, k).tolist() == values
