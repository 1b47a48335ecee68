import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randldc import codes_edit
from randldc.bitcore import BitString, RandomStream
from randldc.codes_edit import (
    BufferedBlockCode,
    Delete,
    EditScript,
    Insert,
    Substitute,
    _cache_text,
    _trie_align,
    _trie_align_dense,
    align_block,
    apply_edit_script,
    backtrack,
    build_greedy_code,
    c0_decode_nearest,
    c0_encode,
    c0_encode_many,
    chunk_sizes,
    decode_window,
    edit_distance,
    edit_distance_within,
    interleave_ones,
    interval_property_holds,
    min_admission_distance,
)


def lev(a, b) -> int:
    """Plain O(nm) Levenshtein over Python sequences."""
    a, b = list(a), list(b)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def greedy_oracle(N: int, rel: float) -> list[tuple]:
    """Lexicographic greedy over {0,1}^(2N), written independently of the library."""
    d = min_admission_distance(N, rel)
    kept = []
    for word in itertools.product((0, 1), repeat=2 * N):
        if all(lev(word, w) >= d for w in kept):
            kept.append(word)
            if len(kept) == 1 << N:
                break
    return kept


bits = st.lists(st.integers(0, 1), max_size=40).map(BitString)


# ---------------------------------------------------------------- distance

def test_edit_distance_examples():
    assert edit_distance(BitString("0101"), BitString("0101")) == 0
    assert edit_distance(BitString("0101"), BitString("1010")) == 2
    assert edit_distance(BitString(""), BitString("111")) == 3
    assert edit_distance(BitString("000"), BitString("111")) == 3
    assert edit_distance_within(BitString("0101"), BitString("1010"), 1) is None
    assert edit_distance_within(BitString("0101"), BitString("1010"), 2) == 2


@settings(max_examples=200)
@given(bits, bits)
def test_edit_distance_matches_oracle(a, b):
    d = lev(a.bits.tolist(), b.bits.tolist())
    assert edit_distance(a, b) == d
    for t in range(0, 8):
        assert edit_distance_within(a, b, t) == (d if d <= t else None)


def test_edit_distance_long_words_match_oracle():
    rs = RandomStream(1, ("long-ed",))
    for n, m in ((63, 64), (64, 64), (65, 130), (200, 180)):
        a, b = rs.draw_bits(n), rs.draw_bits(m)
        assert edit_distance(a, b) == lev(a.bits.tolist(), b.bits.tolist())


@settings(max_examples=100)
@given(bits, bits, bits)
def test_edit_distance_is_a_metric(a, b, c):
    assert edit_distance(a, b) == edit_distance(b, a)
    assert (edit_distance(a, b) == 0) == (a == b)
    assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)
    assert edit_distance(a, b) >= abs(a.length - b.length)


# ---------------------------------------------------------------- edit scripts

def test_apply_edit_script_examples():
    assert apply_edit_script(BitString("00"), [Delete(0), Insert(0, 1)]) == BitString("10")
    assert apply_edit_script(BitString("101"), EditScript((Substitute(1, 1), Insert(3, 0)))) == BitString("1110")
    assert apply_edit_script(BitString("1"), []) == BitString("1")
    with pytest.raises(IndexError):
        apply_edit_script(BitString("1"), [Delete(1)])
    with pytest.raises(IndexError):
        apply_edit_script(BitString("1"), [Insert(3, 0)])


@st.composite
def word_and_script(draw):
    w = draw(st.lists(st.integers(0, 1), max_size=30))
    ops, length = [], len(w)
    for _ in range(draw(st.integers(0, 8))):
        kind = draw(st.sampled_from(["ins", "del", "sub"] if length else ["ins"]))
        if kind == "ins":
            ops.append(Insert(draw(st.integers(0, length)), draw(st.integers(0, 1))))
            length += 1
        elif kind == "del":
            ops.append(Delete(draw(st.integers(0, length - 1))))
            length -= 1
        else:
            ops.append(Substitute(draw(st.integers(0, length - 1)), draw(st.integers(0, 1))))
    return BitString(w), EditScript(tuple(ops))


@settings(max_examples=200)
@given(word_and_script())
def test_script_moves_at_most_its_length(case):
    w, script = case
    out = apply_edit_script(w, script)
    assert edit_distance(w, out) <= len(script)


# ---------------------------------------------------------------- greedy code

@pytest.mark.parametrize("N,rel", [(1, 0.1), (2, 0.1), (2, 0.2), (3, 0.1), (3, 0.15), (4, 0.1), (4, 0.12)])
def test_greedy_matches_independent_oracle(N, rel):
    code = build_greedy_code(N, rel, interleave=False, use_cache=False)
    assert [tuple(r) for r in code.codebook.tolist()] == greedy_oracle(N, rel)


def test_greedy_rejects_bad_sizes():
    with pytest.raises(ValueError):
        build_greedy_code(0, 0.1)
    with pytest.raises(ValueError):
        build_greedy_code(codes_edit.N_MAX + 1, 0.1)
    with pytest.raises(ValueError):
        build_greedy_code(3, 0.45, use_cache=False)


def _pairwise(book):
    n = book.shape[0]
    D = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = edit_distance(BitString(book[i]), BitString(book[j]))
    return D


@pytest.mark.parametrize("N", [4, 6])
def test_greedy_pairwise_distance(N):
    code = build_greedy_code(N, 0.1)
    D = _pairwise(code.codebook)
    assert np.array_equal(D, D.T) and not D.diagonal().any()
    off = D[~np.eye(D.shape[0], dtype=bool)]
    assert off.min() >= min_admission_distance(N, 0.1)
    assert off.min() / code.codeword_len >= 0.1 - 1e-9


@pytest.mark.parametrize("N", [3, 4, 5])
def test_interleaving_never_shrinks_distance(N):
    raw = build_greedy_code(N, 0.1, interleave=False, use_cache=False).codebook
    assert np.all(_pairwise(interleave_ones(raw)) >= _pairwise(raw))


def test_interleave_examples():
    assert interleave_ones(np.array([0, 1, 0])).tolist() == [0, 1, 1, 1, 0, 1]


def test_interval_property_floor_holds_for_all_codewords():
    for N in range(1, 9):
        book = build_greedy_code(N, 0.1).codebook
        assert book.shape == (1 << N, 4 * N)
        assert all(interval_property_holds(row) for row in book)


def test_interval_property_with_ceiling_fails_on_a_codeword():
    # "010" sits inside the codeword of message 0 and holds a single 1
    row = build_greedy_code(4, 0.1).codebook[0]
    text = "".join(map(str, row.tolist()))
    at = text.find("010")
    assert at >= 0
    window = row[at:at + 3]
    assert window.sum() == 1 < -(-3 // 2)
    assert interval_property_holds(np.array([0, 1, 0]))
    assert not interval_property_holds(np.array([0, 0, 1, 1]))


def test_cache_round_trip_and_tamper_detection(tmp_path, monkeypatch):
    monkeypatch.setenv("RANDLDC_CACHE", str(tmp_path))
    codes_edit._build_cached.cache_clear()
    try:
        code = build_greedy_code(3, 0.1)
        files = list(tmp_path.iterdir())
        assert len(files) == 1
        assert files[0].read_text() == _cache_text(code)
        assert np.array_equal(codes_edit._parse_cache(_cache_text(code)).codebook, code.codebook)
        text = files[0].read_text().splitlines()
        text[1] = text[1].replace("0", "1", 1)
        files[0].write_text("\n".join(text) + "\n")
        codes_edit._build_cached.cache_clear()
        with pytest.raises(RuntimeError):
            build_greedy_code(3, 0.1, verify=True)
    finally:
        codes_edit._build_cached.cache_clear()


# ---------------------------------------------------------------- buffered block code

def test_chunk_sizes():
    assert chunk_sizes(8) == [8]
    assert chunk_sizes(12) == [6, 6]
    assert chunk_sizes(13) == [7, 6]
    assert chunk_sizes(18) == [6, 6, 6]
    for M in range(1, 60):
        s = chunk_sizes(M)
        assert sum(s) == M and max(s) - min(s) <= 1 and max(s) <= 8


@pytest.mark.parametrize("M", [4, 8, 12])
def test_c0_layout_and_round_trip(M):
    c = BufferedBlockCode(M)
    rs = RandomStream(M, ("c0",))
    msgs = rs.draw_bits(40 * M).bits.reshape(40, M)
    many = c0_encode_many(c, msgs)
    for m, row in zip(msgs, many):
        cw = c0_encode(c, BitString(m))
        assert cw == BitString(row)
        assert cw.length == c.length == 5 * M
        assert not cw.bits[4 * M:].any()
        assert c0_decode_nearest(c, cw) == BitString(m)
    with pytest.raises(ValueError):
        c0_encode(c, BitString.zeros(M + 1))


def test_c0_rejects_far_words():
    c = BufferedBlockCode(8)
    assert c0_decode_nearest(c, BitString(np.ones(c.length, dtype=np.uint8))) is None
    assert c0_decode_nearest(c, BitString.zeros(c.length - c.radius() - 1)) is None


def _brute_nearest(c, word, t):
    msgs = np.array(list(itertools.product((0, 1), repeat=c.M)), dtype=np.uint8)
    book = c0_encode_many(c, msgs)
    d = np.array([edit_distance(word, BitString(r)) for r in book])
    best = int(d.min())
    return None if best > t else BitString(msgs[int(np.argmin(d))])


@pytest.mark.parametrize("M,rel", [(5, 0.12), (6, 0.1)])
def test_c0_corrects_every_single_edit(M, rel):
    c = BufferedBlockCode(M, min_rel_dist=rel)
    assert c.min_dist >= 3
    thr = 1.0 / c.length
    for v in range(1 << M):
        m = BitString.from_int(v, M)
        cw = c0_encode(c, m).bits.tolist()
        for p in range(len(cw) + 1):
            for b in (0, 1):
                assert c0_decode_nearest(c, BitString(cw[:p] + [b] + cw[p:]), thr) == m
        for p in range(len(cw)):
            assert c0_decode_nearest(c, BitString(cw[:p] + cw[p + 1:]), thr) == m
            flipped = cw.copy()
            flipped[p] ^= 1
            assert c0_decode_nearest(c, BitString(flipped), thr) == m


@pytest.mark.parametrize("M,rel", [(4, 0.1), (5, 0.12), (6, 0.1)])
def test_c0_decode_matches_brute_force(M, rel):
    c = BufferedBlockCode(M, min_rel_dist=rel)
    rs = RandomStream(M, ("brute",))
    for trial in range(150):
        t = trial % 5
        cw = c0_encode(c, rs.draw_bits(M)).bits.tolist()
        for _ in range(rs.randbelow(2 * t + 2)):
            op = rs.randbelow(3)
            p = rs.randbelow(len(cw))
            if op == 0:
                cw[p] ^= 1
            elif op == 1:
                del cw[p]
            else:
                cw.insert(p, rs.randbelow(2))
        word = BitString(cw)
        want = _brute_nearest(c, word, t) if abs(word.length - c.length) <= t else None
        assert c0_decode_nearest(c, word, t / c.length) == want


def test_sparse_trie_matches_dense_reference():
    gen = np.random.default_rng(0)
    for M in (4, 8, 12):
        c = BufferedBlockCode(M)
        for trial in range(150):
            W = int(gen.integers(1, 3 * c.length))
            if trial % 2:
                text = gen.integers(0, 2, W).astype(np.uint8)
            else:
                cw = c0_encode_many(c, gen.integers(0, 2, (3, M))).ravel()
                st_ = int(gen.integers(0, cw.size - 1))
                text = cw[st_:st_ + W].copy()
                for _ in range(gen.integers(0, 4)):
                    text[gen.integers(0, text.size)] ^= 1
            W = text.size
            t = int(gen.integers(0, 4))
            if trial % 3 == 0:
                init = np.where(gen.random(W + 1) < 0.5, gen.integers(0, t + 1, W + 1), 1 << 28)
            else:
                init = np.zeros(W + 1)
            init = init.astype(np.int32)
            for trie in c._tries:
                outs = []
                for f in (_trie_align, _trie_align_dense):
                    oc = np.empty(W + 1, np.int32)
                    ol = np.empty(W + 1, np.int64)
                    oo = np.empty(W + 1, np.int64)
                    f(text, init, trie.rows, t, oc, ol, oo)
                    outs.append((oc, ol, oo))
                ok = outs[1][0] <= t
                assert np.array_equal(outs[0][0][ok], outs[1][0][ok])
                assert np.all(outs[0][0][~ok] > t)
                assert np.array_equal(outs[0][1][ok], outs[1][1][ok])
                assert np.array_equal(outs[0][2][ok], outs[1][2][ok])


def _reference_window(c, text, t, free_start):
    al = align_block(c, text, t, free_start=free_start)
    if not free_start:
        if al.cost[text.size] > t:
            return -1, -1
        return text.size, backtrack(c, al, text.size)[0].to_int()
    ok = np.nonzero(al.cost <= t)[0]
    if ok.size == 0:
        return -1, -1
    first = int(ok[0])
    end = first + int(np.argmin(al.cost[first:first + t + 1]))
    return end, backtrack(c, al, end)[0].to_int()


def test_fused_window_decoder_matches_staged_reference():
    gen = np.random.default_rng(5)
    for M in (8, 12, 13, 18):
        c = BufferedBlockCode(M)
        for trial in range(200):
            cw = c0_encode_many(c, gen.integers(0, 2, (4, M))).ravel()
            start = int(gen.integers(0, cw.size // 2))
            W = int(gen.integers(c.length - 3, 2 * c.length + 2))
            text = cw[start:start + W].copy()
            for _ in range(gen.integers(0, 6)):
                p = int(gen.integers(0, text.size))
                op = gen.integers(3)
                if op == 0:
                    text[p] ^= 1
                elif op == 1:
                    text = np.delete(text, p)
                else:
                    text = np.insert(text, p, gen.integers(2))
            t = int(gen.integers(0, 4))
            fs = bool(trial % 2)
            assert decode_window(c, text, t, fs) == _reference_window(c, text, t, fs)
