import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from groupcodec import decode_block, encode_block, read_header
from groupcodec.bitcore import effective_bit_width, pseudo_quad_max_array, quad_max_array
from groupcodec.errors import MalformedBlockError, PreconditionError, TruncatedBlockError
from groupcodec.group_simple import NUMS, SELECTORS, WIDTHS, select_patterns, selector_lookup

KERNELS = ["scalar", "vector"]


def test_selector_table():
    assert list(NUMS) == [32, 16, 10, 8, 6, 5, 4, 3, 2, 1]
    assert list(WIDTHS) == [1, 2, 3, 4, 5, 6, 8, 10, 16, 32]
    assert selector_lookup(5) == (5, 6)
    assert selector_lookup(0) == (32, 1)
    assert selector_lookup(9) == (1, 32)
    assert all(e.num * e.bw <= 32 for e in SELECTORS)
    for bad in (-1, 10, 15):
        with pytest.raises(PreconditionError):
            selector_lookup(bad)


@pytest.mark.parametrize("maxes, expected", [
    ([1] * 32, [0]),
    ([63] * 5, [5]),
    ([1, 1, 1, 70], [6]),
    ([], []),
])
def test_select_patterns_worked_examples(maxes, expected):
    assert select_patterns(maxes).tolist() == expected
    assert oracles.greedy_selectors_reference(maxes) == expected


def _random_maxes(rng, size):
    bits = rng.integers(1, 33, size=size)
    return (rng.integers(0, 2**32, size=size, dtype=np.uint64) >> (32 - bits).astype(np.uint64)).astype(np.uint32)


def test_select_patterns_matches_transcription():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        arr = _random_maxes(rng, int(rng.integers(1, 80)))
        assert select_patterns(arr).tolist() == oracles.greedy_selectors_reference(arr.tolist())


@settings(max_examples=300)
@given(st.lists(st.integers(0, 2**32 - 1), max_size=120))
def test_coverage_soundness(maxes):
    sels = select_patterns(maxes).tolist()
    j = 0
    for sel in sels:
        num, bw = selector_lookup(sel)
        covered = maxes[j:j + num]
        assert all(effective_bit_width(m) <= bw for m in covered)
        j += len(covered)
    assert j == len(maxes)


@pytest.mark.parametrize("kernel", KERNELS)
def test_twenty_integers_single_vector(kernel):
    values = [63, 1, 2, 3, 5, 63, 7, 8, 9, 10, 63, 12, 13, 14, 15, 63, 63, 0, 0, 0]
    block = encode_block("group-simple", None, kernel, False, values)
    h = read_header(block)
    assert block[16] == 5  # one selector, value 5, low nibble
    assert h.data_offset == 32 and len(block) == 48
    data = np.frombuffer(block[32:], dtype="<u4")
    lane0 = [values[4 * t] for t in range(5)]
    assert int(data[0]) == sum(v << (6 * t) for t, v in enumerate(lane0))
    assert decode_block(block, kernel).tolist() == values


@pytest.mark.parametrize("kernel", KERNELS)
def test_128_ones(kernel):
    # 32 quadruples of ones fit one selector-0 vector (32 per component)
    block = encode_block("group-simple", None, kernel, False, [1] * 128)
    assert block[16:32] == bytes(16)
    assert len(block) == 32 + 16
    assert decode_block(block, kernel).tolist() == [1] * 128


@pytest.mark.parametrize("kernel", KERNELS)
def test_odd_selector_count_high_nibble_zero(kernel):
    values = [1] * 256 + [2**20]
    block = encode_block("group-simple", None, kernel, False, values)
    assert block[16:19] == bytes([0x00, 0x09, 0x00])
    assert decode_block(block, kernel).tolist() == values


@pytest.mark.parametrize("kernel", KERNELS)
def test_bad_selector_nibble(kernel):
    block = bytearray(encode_block("group-simple", None, "vector", False, [3] * 40))
    block[16] = 0x0F
    with pytest.raises(MalformedBlockError):
        decode_block(bytes(block), kernel)


@pytest.mark.parametrize("kernel", KERNELS)
def test_short_data_area(kernel):
    block = encode_block("group-simple", None, "vector", False, list(range(100)))
    with pytest.raises(TruncatedBlockError):
        decode_block(block[:-16], kernel)


@pytest.mark.parametrize("kernel", KERNELS)
def test_size_formula(kernel):
    rng = np.random.default_rng(3)
    for n in (1, 7, 64, 333, 1000):
        values = _random_maxes(rng, n)
        block = encode_block("group-simple", None, kernel, False, values)
        padded = np.concatenate([values, np.zeros(-n % 4, dtype=np.uint32)])
        modes = len(oracles.greedy_selectors_reference(pseudo_quad_max_array(padded).tolist()))
        control = -(-modes // 2)
        assert len(block) == 16 + -(-control // 16) * 16 + 16 * modes


def test_pseudo_and_true_maxima_select_the_same():
    rng = np.random.default_rng(5)
    for _ in range(500):
        values = _random_maxes(rng, 4 * int(rng.integers(1, 40)))
        assert select_patterns(quad_max_array(values)).tolist() == \
            select_patterns(pseudo_quad_max_array(values)).tolist()
