import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randldc.bitcore import (
    BitString,
    QueryOracle,
    RandomStream,
    SymbolString,
    concat,
    draw_bits,
    partition_blocks,
    xor,
)

bit_lists = st.lists(st.integers(0, 1), max_size=200)


def test_xor_examples():
    assert xor(BitString("1010"), BitString("0000")) == BitString("1010")
    assert xor(BitString("1010"), BitString("1010")) == BitString("0000")
    assert xor(BitString("1100"), BitString("0101")) == BitString("1001")


def test_xor_length_mismatch():
    with pytest.raises(ValueError):
        xor(BitString("10"), BitString("101"))


@given(st.data())
def test_xor_mask_round_trip(data):
    a = data.draw(bit_lists)
    b = data.draw(st.lists(st.integers(0, 1), min_size=len(a), max_size=len(a)))
    a, b = BitString(a), BitString(b)
    assert xor(xor(a, b), b) == a
    assert xor(a, a) == BitString.zeros(a.length)


def test_partition_examples():
    assert partition_blocks(BitString("110101"), 2, 0) == [BitString("11"), BitString("01"), BitString("01")]
    assert partition_blocks(BitString("110"), 2, 0) == [BitString("11"), BitString("00")]
    assert partition_blocks(BitString(""), 2, 0) == []


def test_partition_rejects_zero_block():
    with pytest.raises(ValueError):
        partition_blocks(BitString("1"), 0)


def test_partition_concat_recovers_input_all_lengths():
    rs = RandomStream(3, ("partition",))
    for n in range(257):
        s = rs.draw_bits(n)
        for block_len in (1, 2, 3, 7, 8, 64):
            blocks = partition_blocks(s, block_len, 0)
            assert len(blocks) == -(-n // block_len)
            assert all(b.length == block_len for b in blocks)
            assert concat(blocks)[:n] == s


def test_partition_symbols_pads_with_zero_symbol():
    s = SymbolString((3, 1, 2), 2)
    assert partition_blocks(s, 2) == [SymbolString((3, 1), 2), SymbolString((2, 0), 2)]


@given(st.integers(1, 8), st.data())
def test_symbol_string_round_trip(width, data):
    syms = data.draw(st.lists(st.integers(0, (1 << width) - 1), max_size=40))
    s = SymbolString(tuple(syms), width)
    assert SymbolString.from_bits(s.to_bits(), width) == s


def test_symbols_are_msb_first():
    assert SymbolString.from_bits(BitString("0110"), 2).symbols == (1, 2)
    assert BitString.from_int(6, 4) == BitString("0110")
    assert BitString("0110").to_int() == 6


@given(bit_lists)
def test_bytes_round_trip_lsb_first(bits):
    s = BitString(bits)
    assert BitString.from_bytes(s.to_bytes(), s.length) == s


def test_byte_packing_is_lsb_first():
    assert BitString("10000000").to_bytes() == b"\x01"
    assert BitString("0000000001").to_bytes() == b"\x00\x02"


def test_bitstring_is_immutable_and_validated():
    s = BitString("101")
    with pytest.raises(AttributeError):
        s.bits = np.zeros(3)
    with pytest.raises(ValueError):
        s.bits[0] = 0
    with pytest.raises(ValueError):
        BitString([0, 2])


def test_draw_bits_zero_and_determinism():
    assert draw_bits(RandomStream(5), 0) == BitString("")
    a = RandomStream(11).draw_bits(10_000)
    b = RandomStream(11).draw_bits(10_000)
    assert a == b
    assert a != RandomStream(12).draw_bits(10_000)


def test_draw_bits_advances_counter_contiguously():
    one = RandomStream(8)
    parts = [one.draw_bits(n) for n in (3, 500, 1, 1100)]
    assert one.counter == 1604
    assert concat(parts) == RandomStream(8).draw_bits(1604)


def test_bias_within_three_sigma():
    n = 1_000_000
    ones = RandomStream(2024, ("bias",)).draw_bits(n).weight()
    assert abs(ones - n / 2) <= 3 * np.sqrt(n / 4)


def test_derived_tags_are_separated():
    base = RandomStream(1)
    prefixes = {tuple(base.derive(t).draw_bits(128).bits.tolist()) for t in ("a", "b", ("a",), 1, "1")}
    assert len(prefixes) == 5
    assert base.derive("a").draw_bits(64) == RandomStream(1, ("a",)).draw_bits(64)


def test_seed_range_checked():
    with pytest.raises(ValueError):
        RandomStream(-1)
    with pytest.raises(ValueError):
        RandomStream(1 << 64)


def test_draw_uint64s_matches_sequential_draws():
    a, b = RandomStream(9), RandomStream(9)
    batch = a.draw_uint64s(20).tolist()
    assert batch == [b.draw_uint(64) for _ in range(20)]
    assert a.counter == b.counter


def test_bounded_is_uniform():
    rs = RandomStream(4, ("bounded",))
    vals = rs.bounded(np.full(60_000, 6))
    counts = np.bincount(vals, minlength=6)
    assert vals.min() >= 0 and vals.max() < 6
    assert np.all(np.abs(counts - 10_000) <= 4 * np.sqrt(60_000 * (1 / 6) * (5 / 6)))


def test_sample_distinct_and_in_range():
    rs = RandomStream(6)
    for pop, count in ((10, 10), (100, 7), (1, 1), (5, 0)):
        s = rs.sample(pop, count)
        assert len(s) == count == len(set(s))
        assert all(0 <= v < pop for v in s)
    with pytest.raises(ValueError):
        rs.sample(3, 4)


def test_randbelow_range():
    rs = RandomStream(7)
    vals = {rs.randbelow(5) for _ in range(300)}
    assert vals == {0, 1, 2, 3, 4}


def test_query_oracle_logs_every_read():
    q = QueryOracle(BitString("0110101"))
    assert q.read([1, 2]).tolist() == [1, 1]
    assert q.read_range(-3, 2).tolist() == [0, 1]
    assert q.read_range(5, 99).tolist() == [0, 1]
    q.log_ranges(np.array([[0, 3], [4, 4]]))
    assert q.total == 2 + 2 + 2 + 3
    assert sorted(q.positions().tolist()) == [0, 0, 1, 1, 1, 2, 2, 5, 6]
    assert q.distinct() == 5
    with pytest.raises(IndexError):
        q.read([7])


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(-5, 40), st.integers(-5, 40)), max_size=10))
def test_query_total_equals_logged_positions(ranges):
    q = QueryOracle(BitString.zeros(30))
    for a, b in ranges:
        q.read_range(a, b)
    assert q.total == q.positions().size
