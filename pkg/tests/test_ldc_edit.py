import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from randldc.bitcore import BitString, QueryOracle, RandomStream
from randldc.channel_sim import EDIT_STRATEGIES, AdversaryContext, budget_for, corrupt
from randldc.codes_edit import edit_distance
from randldc.ldc_edit import (
    EditFlexParams,
    EditLdcParams,
    _masks,
    _outer_encode,
    _symbols,
    decode_edit_flexible,
    decode_edit_oblivious,
    decode_edit_shared,
    encode_edit_flexible,
    encode_edit_oblivious,
    encode_edit_shared,
    normalize_length,
    recover_seed_from_blocks,
    symbol_width,
)
from randldc.ldc_hamming import SharedRandomness
from randldc.list_search import Found, sample_at
from randldc.permutations import Permutation


def message(k, seed):
    return RandomStream(seed, ("msg",)).draw_bits(k)


# ---------------------------------------------------------------- parameters

def test_parameter_validation():
    with pytest.raises(ValueError):
        EditLdcParams(24, 0.1)
    with pytest.raises(ValueError):
        EditLdcParams(16, 0.0)
    with pytest.raises(ValueError):
        EditLdcParams(16, 0.1, model="adaptive")
    with pytest.raises(ValueError):
        EditFlexParams(12)
    with pytest.raises(ValueError):
        encode_edit_shared(message(16, 0), SharedRandomness(0), EditLdcParams(16, 0.1, "oblivious"))
    with pytest.raises(ValueError):
        encode_edit_oblivious(message(16, 0), RandomStream(0), EditLdcParams(16, 0.1))


def test_symbol_width_and_outer_code():
    assert [symbol_width(k) for k in (2, 4, 16, 64, 256)] == [2, 2, 4, 6, 8]
    p = EditLdcParams(64, 0.01)
    assert p.n0 == max(math.ceil(2.6 * math.log(100)), 6) and p.n0 <= 1 << p.width
    assert p.k0 == math.ceil(p.n0 / 3)
    assert p.d0 == p.n0 - p.k0 + 1


@pytest.mark.parametrize("k", [16, 256])
def test_fixed_length_is_ten_n0_over_k0_times_k(k):
    # holds exactly when the symbol count divides into outer blocks and the header is w bits
    p = EditLdcParams(k, 0.1)
    assert p.layout.header_width == p.width
    assert p.n == 10 * (p.n0 // p.k0) * k


def test_known_lengths():
    assert [EditLdcParams(64, 0.1, m).n for m in ("shared", "oblivious")] == [2160, 6630]
    assert [EditFlexParams(64, m).n for m in ("shared", "oblivious")] == [62640, 80100]
    assert [EditLdcParams(16, 0.1, m).n for m in ("shared", "oblivious")] == [480, 4510]
    assert [EditFlexParams(16, m).n for m in ("shared", "oblivious")] == [8640, 20800]


@pytest.mark.parametrize("k", [64, 256])
def test_flexible_length_formula(k):
    fp = EditFlexParams(k)
    assert fp.layout.header_width == 2 * fp.width
    assert fp.n == 15 * fp.width * fp.column_n0 * fp.row_length
    n0s = [n0 for _, n0, _ in fp.levels]
    assert n0s == sorted(n0s) and len(set(n0s)) == len(n0s)


# ---------------------------------------------------------------- shared model

def test_identity_hooks_give_tagged_outer_codeword():
    p = EditLdcParams(16, 0.1)
    x = message(16, 1)
    y1 = _outer_encode(_symbols(x, 16, p.width, p.outer_blocks * p.k0), p.outer)
    word = encode_edit_shared(x, SharedRandomness(0), p, permutation=Permutation.identity(p.payload_blocks),
                              zero_mask=True)
    assert word == p.layout.emit(y1)
    got = [decode_edit_shared(i, word, SharedRandomness(0), p, RandomStream(i),
                              permutation=Permutation.identity(p.payload_blocks), zero_mask=True)
           for i in range(16)]
    assert got == x.bits.tolist()


def test_headers_appear_in_order():
    p = EditLdcParams(64, 0.1)
    word = encode_edit_shared(message(64, 2), SharedRandomness(2), p)
    view = p.layout.view(word)
    b = p.layout.block_len
    heads = [sample_at(view, j * b + b // 2) for j in range(p.payload_blocks)]
    assert all(isinstance(h, Found) for h in heads)
    assert [h.index for h in heads] == list(range(p.payload_blocks))


def test_masks_are_uniform_across_seeds():
    # two 4-bit symbols at k = 16 give 2^8 joint values
    vals = np.array([int(m[0]) * 16 + int(m[1]) for m in (_masks(SharedRandomness(s), 12, 4) for s in range(25_600))])
    counts = np.bincount(vals, minlength=256)
    assert chisquare(counts).pvalue > 1e-4


@pytest.mark.parametrize("k", [16, 64])
def test_shared_round_trip(k):
    p = EditLdcParams(k, 0.1)
    for s in range(10):
        x = message(k, s)
        word = encode_edit_shared(x, SharedRandomness(s), p)
        assert word.length == p.n
        for i in range(k):
            q = QueryOracle(word)
            assert decode_edit_shared(i, q, SharedRandomness(s), p, RandomStream(s, (i,))) == x[i]
            assert q.total <= p.query_bound()


def test_shared_decoding_under_edits():
    p = EditLdcParams(64, 0.1)
    fails = 0
    for t in range(100):
        rs = RandomStream(t, ("edit-sr",))
        x = message(64, t)
        sh = SharedRandomness(t)
        word = encode_edit_shared(x, sh, p)
        ctx = AdversaryContext("shared", "edit", p.n, budget_for(p.delta, p.n), visible_codeword=word,
                               block_len=p.layout.block_len)
        bad = corrupt(word, EDIT_STRATEGIES["random-script"], ctx, rs.derive("adv"))
        i = rs.randbelow(64)
        fails += decode_edit_shared(i, bad, sh, p, rs.derive("dec")) != x[i]
    assert fails <= 10


# ---------------------------------------------------------------- oblivious model

@pytest.mark.parametrize("k", [16, 64])
def test_oblivious_round_trip(k):
    p = EditLdcParams(k, 0.1, "oblivious")
    for s in range(5):
        x = message(k, s)
        word = encode_edit_oblivious(x, RandomStream(s, ("enc",)), p)
        assert word.length == p.n
        for i in range(k):
            q = QueryOracle(word)
            assert decode_edit_oblivious(i, q, p, RandomStream(s, ("dec", i))) == x[i]
            assert q.total <= p.query_bound()


def test_seed_survives_payload_edits():
    p = EditLdcParams(64, 0.1, "oblivious")
    b = p.layout.block_len
    payload_bits = p.payload_blocks * b
    for t in range(50):
        rs = RandomStream(t, ("seed-only",))
        word = encode_edit_oblivious(message(64, t), rs.derive("enc"), p)
        bits = word.bits.copy()
        cut = np.array(sorted(rs.sample(payload_bits, budget_for(p.delta, p.n))))
        bits = np.delete(bits, cut)
        view = p.layout.view(normalize_length(BitString(bits), p.n))
        seed = recover_seed_from_blocks(view, p.seed_code, p.payload_blocks, p.width, p.seed_length,
                                        rs.derive("dec"), p.delta, p.k)
        assert seed == rs.derive("enc").derive("perm-seed").draw_bits(p.seed_length)


# ---------------------------------------------------------------- flexible

@pytest.mark.parametrize("model", ["shared", "oblivious"])
def test_flexible_round_trip(model):
    fp = EditFlexParams(16, model)
    for s in range(3):
        x = message(16, s)
        rnd = SharedRandomness(s) if model == "shared" else RandomStream(s, ("enc",))
        word = encode_edit_flexible(x, rnd, fp)
        assert word.length == fp.n
        for i in range(16):
            for eps in (0.3, 0.07):
                q = QueryOracle(word)
                pos = fp.select_level(eps)
                got = decode_edit_flexible(i, q, eps, rnd if model == "shared" else None, fp, RandomStream(s, (i,)))
                assert got == x[i]
                assert q.total <= fp.query_bound(pos)


def test_flexible_whole_word_fallback():
    fp = EditFlexParams(16)
    x = message(16, 4)
    word = encode_edit_flexible(x, SharedRandomness(4), fp)
    assert fp.select_level(1e-6) is None
    assert all(decode_edit_flexible(i, word, 1e-6, SharedRandomness(4), fp, RandomStream(i)) == x[i]
               for i in range(16))


def test_decoder_rejects_bad_requests():
    p = EditLdcParams(16, 0.1)
    word = encode_edit_shared(message(16, 0), SharedRandomness(0), p)
    with pytest.raises(IndexError):
        decode_edit_shared(16, word, SharedRandomness(0), p, RandomStream(0))
    fp = EditFlexParams(16)
    with pytest.raises(ValueError):
        decode_edit_flexible(0, word, 0.0, SharedRandomness(0), fp, RandomStream(0))


# ---------------------------------------------------------------- length normalisation

@settings(max_examples=150)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=60), st.data())
def test_normalize_length_at_most_doubles_distance(code_bits, data):
    c = BitString(code_bits)
    w = BitString(data.draw(st.lists(st.integers(0, 1), max_size=80)))
    out = normalize_length(w, c.length)
    assert out.length == c.length
    assert edit_distance(out, w) == abs(w.length - c.length)
    assert edit_distance(out, c) <= 2 * edit_distance(w, c)
