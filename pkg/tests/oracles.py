"""Slow, independent reference implementations used as test oracles.

Nothing here imports the package's packing or decoding code; each oracle works
bit by bit from the format definition.
"""

from __future__ import annotations

import struct

TABLE_NUM = [32, 16, 10, 8, 6, 5, 4, 3, 2, 1]
TABLE_BW = [1, 2, 3, 4, 5, 6, 8, 10, 16, 32]


def width(x: int) -> int:
    w = 0
    while x:
        w += 1
        x >>= 1
    return max(w, 1)


def greedy_selectors_reference(max_arr):
    """Greedy selector choice, transcribed statement for statement."""
    mode_arr = []
    total_mode_num = 0
    l = len(max_arr)
    j = 0
    k = 0
    while l > 0:
        for i in range(0, 10):
            n, b = TABLE_NUM[i], TABLE_BW[i]
            mask = 2 ** b - 1
            pos = 0
            while pos < min(n, l) and max_arr[j + pos] <= mask:
                pos = pos + 1
            if pos == n or pos == l:
                break
        l = l - pos
        j = j + pos
        mode_arr.append(i)
        k = k + 1
        total_mode_num = total_mode_num + 1
    return mode_arr


# -- vertical bit writer/reader --------------------------------------------

class BitVectors:
    """Vector stream built one bit at a time: ``bits[c]`` is component c's bit list."""

    def __init__(self):
        self.bits = [[], [], [], []]

    def put(self, lane: int, value: int, bw: int) -> None:
        stream = self.bits[lane]
        free = 32 - len(stream) % 32
        if bw <= free:
            stream.extend((value >> i) & 1 for i in range(bw))
            return
        low = bw - free
        high_part = value >> low
        stream.extend((high_part >> i) & 1 for i in range(free))
        stream.extend((value >> i) & 1 for i in range(low))

    def write_quad(self, quad, bw: int) -> None:
        for lane in range(4):
            self.put(lane, quad[lane], bw)

    def align(self) -> None:
        for stream in self.bits:
            while len(stream) % 32:
                stream.append(0)

    def to_bytes(self) -> bytes:
        self.align()
        count = len(self.bits[0]) // 32
        words = []
        for v in range(count):
            for lane in range(4):
                chunk = self.bits[lane][32 * v:32 * v + 32]
                words.append(sum(bit << i for i, bit in enumerate(chunk)))
        return struct.pack(f"<{len(words)}I", *words)


def naive_pack(quads, bw: int) -> bytes:
    w = BitVectors()
    for q in quads:
        w.write_quad(q, bw)
    return w.to_bytes()


def naive_unpack(data: bytes, widths):
    """Read quadruples at the given per-quad widths from one continuous stream."""
    words = struct.unpack(f"<{len(data) // 4}I", data)
    comps = [[], [], [], []]
    for idx, word in enumerate(words):
        comps[idx % 4].extend((word >> i) & 1 for i in range(32))
    pos = 0
    out = []
    for bw in widths:
        free = 32 - pos % 32
        quad = []
        for lane in range(4):
            bits = comps[lane]
            if bw <= free:
                quad.append(sum(bits[pos + i] << i for i in range(bw)))
            else:
                low = bw - free
                high = sum(bits[pos + i] << i for i in range(free))
                lowv = sum(bits[pos + free + i] << i for i in range(low))
                quad.append((high << low) | lowv)
        out.append(quad)
        pos += bw
    return out


# -- length descriptors ------------------------------------------------------

def unary_bits(lds):
    bits = []
    for v in lds:
        bits += [1] * (v - 1) + [0]
    return bits


def bits_to_bytes_msb(bits, fill: int = 0) -> bytes:
    bits = list(bits)
    while len(bits) % 8:
        bits.append(fill)
    return bytes(sum(b << (7 - i) for i, b in enumerate(bits[k:k + 8]))
                 for k in range(0, len(bits), 8))


def naive_cu_encode(lds) -> bytes:
    return bits_to_bytes_msb(unary_bits(lds))


def naive_iu_encode(lds) -> bytes:
    out = bytearray()
    cur = []
    for v in lds:
        code = [1] * (v - 1) + [0]
        if len(cur) + len(code) > 8:
            out += bits_to_bytes_msb(cur, fill=1)
            cur = []
        cur += code
    if cur:
        out += bits_to_bytes_msb(cur, fill=1)
    return bytes(out)


def naive_unary_byte(byte: int, carry: int):
    """Decode one control byte MSB-first, with ``carry`` ones pending from before.

    Returns the completed LDs and the pending run of ones after the byte.
    """
    lds = []
    run = carry
    for i in range(7, -1, -1):
        if (byte >> i) & 1:
            run += 1
        else:
            lds.append(run + 1)
            run = 0
    return lds, run


def naive_binary_encode(lds, cg: int) -> bytes:
    field_bits = {1: 5, 2: 4, 4: 3, 8: 2}[cg]
    per_unit = {1: 3, 2: 2, 4: 2, 8: 4}[cg]
    unit_bytes = 2 if cg == 1 else 1
    out = bytearray()
    for k in range(0, len(lds), per_unit):
        unit = 0
        for t, v in enumerate(lds[k:k + per_unit]):
            unit |= v << (t * field_bits)
        out += unit.to_bytes(unit_bytes, "little")
    return bytes(out)


def naive_binary_decode_unit(unit: int, cg: int):
    """Field values of one alignment unit and whether its padding bits are clear."""
    field_bits = {1: 5, 2: 4, 4: 3, 8: 2}[cg]
    per_unit = {1: 3, 2: 2, 4: 2, 8: 4}[cg]
    unit_bits = 16 if cg == 1 else 8
    mask = (1 << field_bits) - 1
    fields = [(unit >> (t * field_bits)) & mask for t in range(per_unit)]
    padding_clear = unit >> (per_unit * field_bits) == 0
    max_ld = 32 // cg - 1
    in_range = all(f <= max_ld for f in fields)
    return fields, padding_clear and in_range and unit < (1 << unit_bits)


# -- frames ------------------------------------------------------------------

def tiling_cost(widths, lengths):
    cost = 0
    pos = 0
    for length in lengths:
        seg = widths[pos:pos + length]
        bw = max(seg + [1] * (length - len(seg)))
        cost += 8 + 128 * -(-length * bw // 32)
        pos += length
    return cost


def exhaustive_afor(widths):
    """Minimum frame cost over every tiling by 8/16/32 covering ``widths``.

    The last frame may extend past the end (padding has width 1).
    """
    widths = list(widths)
    if not widths:
        return 0
    best = None

    def walk(pos, lengths):
        nonlocal best
        if pos >= len(widths):
            c = tiling_cost(widths, lengths)
            if best is None or c < best:
                best = c
            return
        for length in (8, 16, 32):
            walk(pos + length, lengths + [length])

    walk(0, [])
    return best


def linear_scan_width(widths, zeta):
    m = len(widths)
    for b in range(1, 33):
        if sum(1 for w in widths if w > b) / m <= zeta:
            return b
    return 32
