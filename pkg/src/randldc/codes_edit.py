"""Edit distance, edit scripts and the buffered greedy insdel block code.

The block code works in two layers.  A greedy code maps ``N`` message bits to
``2N`` bits by scanning candidates in lexicographic order and keeping every
candidate far (in edit distance) from all kept ones.  A 1 is then inserted
after every bit, which doubles the length and makes every interval roughly
half ones.  The buffered code appends ``0^M`` after the codeword so that
blocks are separated by runs of zeros that never occur inside a codeword.

Messages longer than :data:`MAX_CHUNK` bits are split into near-equal chunks,
each carried by its own greedy code, and the chunk codewords are concatenated
before the buffer.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from numba import njit

from .bitcore import BitString

N_MAX = 12
MAX_CHUNK = 8
DEFAULT_REL_DIST = 0.1
_BIG = 1 << 28


# ---------------------------------------------------------------- edit scripts

@dataclass(frozen=True)
class Insert:
    pos: int
    bit: int


@dataclass(frozen=True)
class Delete:
    pos: int


@dataclass(frozen=True)
class Substitute:
    pos: int
    bit: int


EditOp = Union[Insert, Delete, Substitute]


@dataclass(frozen=True)
class EditScript:
    """Operations applied in order; positions are 0-based at application time.

    ``Insert(pos, b)`` makes ``b`` the new bit at index ``pos``.
    """

    ops: tuple = ()

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)


def apply_edit_script(s: BitString, script: EditScript | Sequence[EditOp]) -> BitString:
    bits = s.bits.tolist()
    for op in script:
        if isinstance(op, Insert):
            if not 0 <= op.pos <= len(bits):
                raise IndexError(f"insert position {op.pos} outside [0, {len(bits)}]")
            bits.insert(op.pos, op.bit)
        elif isinstance(op, Delete):
            if not 0 <= op.pos < len(bits):
                raise IndexError(f"delete position {op.pos} outside [0, {len(bits)})")
            del bits[op.pos]
        elif isinstance(op, Substitute):
            if not 0 <= op.pos < len(bits):
                raise IndexError(f"substitute position {op.pos} outside [0, {len(bits)})")
            bits[op.pos] = op.bit
        else:
            raise TypeError(f"unknown edit operation {op!r}")
    return BitString(np.asarray(bits, dtype=np.uint8))


# ---------------------------------------------------------------- distances

@njit(cache=True)
def _levenshtein(a, b):
    n, m = a.size, b.size
    prev = np.arange(m + 1)
    cur = np.empty(m + 1, dtype=prev.dtype)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            v = prev[j - 1] + (ai != b[j - 1])
            if prev[j] + 1 < v:
                v = prev[j] + 1
            if cur[j - 1] + 1 < v:
                v = cur[j - 1] + 1
            cur[j] = v
        prev, cur = cur, prev
    return prev[m]


@njit(cache=True)
def _within(a, b, t):
    """Banded check of ``ed(a, b) <= t``; returns the distance or t + 1."""
    n, m = a.size, b.size
    if abs(n - m) > t:
        return t + 1
    big = t + 1
    prev = np.full(m + 1, big)
    cur = np.full(m + 1, big)
    for j in range(min(m, t) + 1):
        prev[j] = j
    for i in range(1, n + 1):
        lo = max(1, i - t)
        hi = min(m, i + t)
        for j in range(m + 1):
            cur[j] = big
        if i <= t:
            cur[0] = i
        best = cur[0]
        for j in range(lo, hi + 1):
            v = prev[j - 1] + (a[i - 1] != b[j - 1])
            if prev[j] + 1 < v:
                v = prev[j] + 1
            if cur[j - 1] + 1 < v:
                v = cur[j - 1] + 1
            if v > big:
                v = big
            cur[j] = v
            if v < best:
                best = v
        if best > t:
            return t + 1
        prev, cur = cur, prev
    return min(prev[m], t + 1)


def edit_distance(a: BitString, b: BitString) -> int:
    """Levenshtein distance with unit-cost insert, delete and substitute."""
    return int(_levenshtein(a.bits, b.bits))


def edit_distance_within(a: BitString, b: BitString, t: int) -> int | None:
    """The distance if it is at most ``t``, else None (banded DP)."""
    d = int(_within(a.bits, b.bits, t))
    return d if d <= t else None


# ---------------------------------------------------------------- greedy code

@njit(cache=True)
def _ed_words(a, b, m, n):
    # bit-parallel Levenshtein; pattern a has m bits, text b has n bits
    one = np.uint64(1)
    full = (one << np.uint64(m)) - one
    peq1 = a & full
    peq0 = (~a) & full
    pv = full
    mv = np.uint64(0)
    score = m
    hi = one << np.uint64(m - 1)
    for j in range(n):
        eq = peq1 if (b >> np.uint64(j)) & one else peq0
        xv = eq | mv
        xh = ((((eq & pv) + pv) & full) ^ pv) | eq
        ph = mv | ((~(xh | pv)) & full)
        mh = pv & xh
        if ph & hi:
            score += 1
        if mh & hi:
            score -= 1
        ph = ((ph << one) | one) & full
        mh = (mh << one) & full
        pv = mh | ((~(xv | ph)) & full)
        mv = ph & xv
    return score


@njit(cache=True)
def _greedy_scan(length, min_dist, need):
    """Lexicographic greedy; string char i is bit (length-1-i) of the counter."""
    code = np.empty(need, dtype=np.uint64)
    count = 0
    for v in range(1 << length):
        c = np.uint64(0)
        for i in range(length):
            if (v >> (length - 1 - i)) & 1:
                c |= np.uint64(1) << np.uint64(i)
        ok = True
        for q in range(count - 1, -1, -1):
            if _ed_words(c, code[q], length, length) < min_dist:
                ok = False
                break
        if ok:
            code[count] = c
            count += 1
            if count == need:
                break
    return code[:count]


def interleave_ones(bits: np.ndarray) -> np.ndarray:
    """``b -> b1`` for every bit: doubles the length."""
    bits = np.asarray(bits, dtype=np.uint8)
    out = np.ones(bits.shape[:-1] + (2 * bits.shape[-1],), dtype=np.uint8)
    out[..., 0::2] = bits
    return out


@dataclass(eq=False)
class GreedyInsdelCode:
    """Greedy code ``{0,1}^N -> {0,1}^{4N}``; row v of ``codebook`` encodes message v."""

    N: int
    min_rel_dist: float
    codebook: np.ndarray
    interleaved: bool = True

    @property
    def codeword_len(self) -> int:
        return int(self.codebook.shape[1])

    @property
    def min_dist(self) -> int:
        return min_admission_distance(self.N, self.min_rel_dist)


def min_admission_distance(N: int, min_rel_dist: float) -> int:
    """Absolute distance the greedy enforces, relative to the final length 4N."""
    return max(1, math.ceil(min_rel_dist * 4 * N - 1e-9))


def _greedy_raw(N: int, min_rel_dist: float) -> np.ndarray:
    length = 2 * N
    words = _greedy_scan(length, min_admission_distance(N, min_rel_dist), 1 << N)
    if words.size < 1 << N:
        raise ValueError(f"greedy found only {words.size} of {1 << N} codewords at "
                         f"relative distance {min_rel_dist}; lower it")
    shifts = np.arange(length, dtype=np.uint64)
    return ((words[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)


def cache_dir() -> Path:
    return Path(os.environ.get("RANDLDC_CACHE", Path.home() / ".cache" / "randldc"))


def _cache_text(code: GreedyInsdelCode) -> str:
    head = f"N={code.N} min_rel_dist={code.min_rel_dist!r} interleaved={int(code.interleaved)}\n"
    rows = ["".join("1" if b else "0" for b in row) for row in code.codebook.tolist()]
    return head + "\n".join(rows) + "\n"


def _parse_cache(text: str) -> GreedyInsdelCode:
    lines = text.splitlines()
    head = dict(item.split("=", 1) for item in lines[0].split())
    rows = np.array([[c == "1" for c in ln] for ln in lines[1:] if ln], dtype=np.uint8)
    return GreedyInsdelCode(int(head["N"]), float(head["min_rel_dist"]), rows, bool(int(head["interleaved"])))


def build_greedy_code(N: int, min_rel_dist: float, interleave: bool = True,
                      use_cache: bool = True, verify: bool | None = None) -> GreedyInsdelCode:
    """Build (or load) the greedy code for ``N``-bit messages.

    A cached codebook is compared byte for byte against a fresh build when
    ``verify`` is set (the default for ``N <= 8``, where rebuilding is cheap).
    """
    if not 1 <= N <= N_MAX:
        raise ValueError(f"N must lie in [1, {N_MAX}]")
    return _build_cached(N, float(min_rel_dist), bool(interleave), use_cache,
                         N <= 8 if verify is None else verify)


@lru_cache(maxsize=None)
def _build_cached(N, min_rel_dist, interleave, use_cache, verify) -> GreedyInsdelCode:
    path = cache_dir() / f"greedy_N{N}_r{min_rel_dist!r}_i{int(interleave)}.txt"

    def fresh() -> GreedyInsdelCode:
        raw = _greedy_raw(N, min_rel_dist)
        book = interleave_ones(raw) if interleave else raw
        book.setflags(write=False)
        return GreedyInsdelCode(N, min_rel_dist, book, interleave)

    if use_cache and path.exists():
        text = path.read_text()
        if not verify:
            return _parse_cache(text)
        code = fresh()
        if _cache_text(code) != text:
            raise RuntimeError(f"cached codebook {path} differs from a fresh build")
        return code
    code = fresh()
    if use_cache:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".tmp{os.getpid()}")
        tmp.write_text(_cache_text(code))
        tmp.replace(path)
    return code


def interval_property_holds(word: np.ndarray) -> bool:
    """Every interval of length L has at least floor(L/2) ones."""
    w = np.asarray(word, dtype=np.int64)
    pre = np.concatenate([[0], np.cumsum(w)])
    n = w.size
    for length in range(1, n + 1):
        ones = pre[length:] - pre[:-length]
        if ones.min() < length // 2:
            return False
    return True


# ---------------------------------------------------------------- buffered code

def chunk_sizes(M: int, max_chunk: int = MAX_CHUNK) -> list[int]:
    """Split M bits into the fewest near-equal chunks of at most max_chunk."""
    parts = max(1, math.ceil(M / max_chunk))
    base, extra = divmod(M, parts)
    return [base + 1] * extra + [base] * (parts - extra)


@dataclass(frozen=True)
class _Trie:
    """Codebook rows sorted lexicographically, for pruned prefix search."""

    rows: np.ndarray       # sorted codewords
    messages: np.ndarray   # message of each sorted row


def _make_trie(book: np.ndarray) -> _Trie:
    order = np.lexsort(book.T[::-1])
    rows = np.ascontiguousarray(book[order])
    return _Trie(rows, order.astype(np.int64))


@dataclass(eq=False)
class BufferedBlockCode:
    """``M`` message bits -> greedy codeword(s) of 4M bits followed by ``0^M``."""

    M: int
    min_rel_dist: float = DEFAULT_REL_DIST
    max_chunk: int = MAX_CHUNK
    chunks: list = field(init=False)
    _tries: list = field(init=False, repr=False)
    _buffer_trie: _Trie = field(init=False, repr=False)
    _packed: tuple = field(init=False, repr=False)

    def __post_init__(self):
        sizes = chunk_sizes(self.M, self.max_chunk)
        self.chunks = [build_greedy_code(s, self.min_rel_dist) for s in sizes]
        self._tries = [_make_trie(c.codebook) for c in self.chunks]
        self._buffer_trie = _make_trie(np.zeros((1, self.M), dtype=np.uint8))
        # every stage packed into flat arrays for the fused window decoder
        tries = self._tries + [self._buffer_trie]
        width = max(tr.rows.shape[1] for tr in tries)
        nums = np.array([tr.rows.shape[0] for tr in tries], dtype=np.int64)
        self._packed = (
            np.concatenate([np.pad(tr.rows, ((0, 0), (0, width - tr.rows.shape[1]))) for tr in tries]),
            np.concatenate([[0], np.cumsum(nums)[:-1]]).astype(np.int64),
            nums,
            np.array([tr.rows.shape[1] for tr in tries], dtype=np.int64),
            np.concatenate([tr.messages for tr in tries]).astype(np.int64),
            np.array([c.N for c in self.chunks] + [0], dtype=np.int64),
        )

    @property
    def N(self) -> int:
        return self.M

    @property
    def length(self) -> int:
        return 5 * self.M

    @property
    def min_dist(self) -> int:
        return min(c.min_dist for c in self.chunks)

    @property
    def rel_distance(self) -> float:
        """Guaranteed distance between distinct codewords, over the block length."""
        return self.min_dist / self.length

    @property
    def default_threshold(self) -> float:
        return self.rel_distance / 3

    def radius(self, threshold: float | None = None) -> int:
        thr = self.default_threshold if threshold is None else threshold
        return int(math.floor(thr * self.length + 1e-9))


def c0_encode(c: BufferedBlockCode, msg: BitString) -> BitString:
    if msg.length != c.M:
        raise ValueError(f"message has {msg.length} bits, expected {c.M}")
    parts, start = [], 0
    for code in c.chunks:
        v = BitString(msg.bits[start:start + code.N]).to_int()
        parts.append(code.codebook[v])
        start += code.N
    parts.append(np.zeros(c.M, dtype=np.uint8))
    return BitString(np.concatenate(parts))


def c0_encode_many(c: BufferedBlockCode, msgs: np.ndarray) -> np.ndarray:
    """Encode each row of a 0/1 matrix of messages."""
    msgs = np.asarray(msgs, dtype=np.int64)
    out, start = [], 0
    for code in c.chunks:
        w = 1 << np.arange(code.N - 1, -1, -1, dtype=np.int64)
        out.append(code.codebook[msgs[:, start:start + code.N] @ w])
        start += code.N
    out.append(np.zeros((msgs.shape[0], c.M), dtype=np.uint8))
    return np.concatenate(out, axis=1)


@njit(cache=True)
def _trie_align_dense(text, init, rows, t, out_cost, out_leaf, out_origin):
    """Best alignment of one codeword from ``rows`` after a prefix of cost ``init``.

    ``init[j]`` is the cost of explaining ``text[:j]`` so far.  For every end
    position ``e`` this finds ``min_{c, j} init[j] + ed(c, text[j:e])`` along
    with the codeword row and the start ``j``.  Prefixes whose best cost
    exceeds ``t`` are pruned.
    """
    num, L = rows.shape
    W = text.size
    big = 1 << 28
    for e in range(W + 1):
        out_cost[e] = big
        out_leaf[e] = -1
        out_origin[e] = -1
    cost = np.empty((L + 1, W + 1), dtype=np.int32)
    orig = np.empty((L + 1, W + 1), dtype=np.int32)
    start_min = big
    for j in range(W + 1):
        cost[0, j] = init[j]
        orig[0, j] = j
        if init[j] < start_min:
            start_min = init[j]
    if start_min > t or num == 0:
        return
    st_lo = np.empty(2 * L + 4, dtype=np.int64)
    st_hi = np.empty(2 * L + 4, dtype=np.int64)
    st_d = np.empty(2 * L + 4, dtype=np.int64)
    sp = 0
    # split the root by the first character
    s = 0
    while s < num and rows[s, 0] == 0:
        s += 1
    if s < num:
        st_lo[sp] = s
        st_hi[sp] = num
        st_d[sp] = 1
        sp += 1
    if s > 0:
        st_lo[sp] = 0
        st_hi[sp] = s
        st_d[sp] = 1
        sp += 1
    while sp > 0:
        sp -= 1
        lo = st_lo[sp]
        hi = st_hi[sp]
        d = st_d[sp]
        ch = rows[lo, d - 1]
        v0 = cost[d - 1, 0] + 1
        cost[d, 0] = v0
        orig[d, 0] = orig[d - 1, 0]
        rmin = v0
        for j in range(1, W + 1):
            v = cost[d - 1, j - 1] + (1 if ch != text[j - 1] else 0)
            o = orig[d - 1, j - 1]
            u = cost[d - 1, j] + 1
            if u < v:
                v = u
                o = orig[d - 1, j]
            u = cost[d, j - 1] + 1
            if u < v:
                v = u
                o = orig[d, j - 1]
            cost[d, j] = v
            orig[d, j] = o
            if v < rmin:
                rmin = v
        if rmin > t:
            continue
        if d == L:
            for e in range(W + 1):
                v = cost[L, e]
                if v < out_cost[e] or (v == out_cost[e] and lo < out_leaf[e]):
                    out_cost[e] = v
                    out_leaf[e] = lo
                    out_origin[e] = orig[L, e]
            continue
        # children split on character d (rows are sorted)
        a = lo
        b = hi
        while a < b:
            mid = (a + b) // 2
            if rows[mid, d] == 0:
                a = mid + 1
            else:
                b = mid
        if a < hi:
            st_lo[sp] = a
            st_hi[sp] = hi
            st_d[sp] = d + 1
            sp += 1
        if a > lo:
            st_lo[sp] = lo
            st_hi[sp] = a
            st_d[sp] = d + 1
            sp += 1


@njit(cache=True)
def _trie_align(text, init, rows, t, out_cost, out_leaf, out_origin):
    """Same contract as :func:`_trie_align_dense`, but each DP row keeps only
    the cells of cost <= t, which are few once a prefix is a dozen bits long."""
    num, L = rows.shape
    W = text.size
    big = 1 << 28
    for e in range(W + 1):
        out_cost[e] = big
        out_leaf[e] = -1
        out_origin[e] = -1
    pos = np.empty((L + 1, W + 1), dtype=np.int32)
    val = np.empty((L + 1, W + 1), dtype=np.int32)
    org = np.empty((L + 1, W + 1), dtype=np.int32)
    cnt = np.zeros(L + 1, dtype=np.int64)
    c0 = 0
    for j in range(W + 1):
        if init[j] <= t:
            pos[0, c0] = j
            val[0, c0] = init[j]
            org[0, c0] = j
            c0 += 1
    cnt[0] = c0
    if c0 == 0 or num == 0:
        return
    st_lo = np.empty(2 * L + 4, dtype=np.int64)
    st_hi = np.empty(2 * L + 4, dtype=np.int64)
    st_d = np.empty(2 * L + 4, dtype=np.int64)
    sp = 0
    s = 0
    while s < num and rows[s, 0] == 0:
        s += 1
    if s < num:
        st_lo[sp] = s
        st_hi[sp] = num
        st_d[sp] = 1
        sp += 1
    if s > 0:
        st_lo[sp] = 0
        st_hi[sp] = s
        st_d[sp] = 1
        sp += 1
    while sp > 0:
        sp -= 1
        lo = st_lo[sp]
        hi = st_hi[sp]
        d = st_d[sp]
        ch = rows[lo, d - 1]
        pn = cnt[d - 1]
        n_out = 0
        ptr = 0  # first previous-row cell with position >= j - 1
        j = pos[d - 1, 0]
        hj = -10
        hv = big
        ho = -1
        while True:
            while ptr < pn and pos[d - 1, ptr] < j - 1:
                ptr += 1
            v = big
            o = -1
            # diagonal from (d-1, j-1)
            if j >= 1 and ptr < pn and pos[d - 1, ptr] == j - 1:
                v = val[d - 1, ptr] + (1 if ch != text[j - 1] else 0)
                o = org[d - 1, ptr]
                q = ptr + 1
            else:
                q = ptr
            # vertical from (d-1, j)
            if q < pn and pos[d - 1, q] == j:
                u = val[d - 1, q] + 1
                if u < v:
                    v = u
                    o = org[d - 1, q]
                q += 1
            # horizontal from (d, j-1)
            if hj == j - 1 and hv + 1 < v:
                v = hv + 1
                o = ho
            if v <= t:
                pos[d, n_out] = j
                val[d, n_out] = v
                org[d, n_out] = o
                n_out += 1
                hj = j
                hv = v
                ho = o
            # next candidate: j + 1 by horizontal or diagonal, else the next previous-row cell
            nxt = big
            if v < t:
                nxt = j + 1
            if q > 0 and q - 1 < pn and pos[d - 1, q - 1] == j:
                nxt = j + 1
            if q < pn and pos[d - 1, q] < nxt:
                nxt = pos[d - 1, q]
            if nxt > W:
                break
            j = nxt
        cnt[d] = n_out
        if n_out == 0:
            continue
        if d == L:
            for a in range(n_out):
                e = pos[L, a]
                v = val[L, a]
                if v < out_cost[e] or (v == out_cost[e] and lo < out_leaf[e]):
                    out_cost[e] = v
                    out_leaf[e] = lo
                    out_origin[e] = org[L, a]
            continue
        a = lo
        b = hi
        while a < b:
            mid = (a + b) // 2
            if rows[mid, d] == 0:
                a = mid + 1
            else:
                b = mid
        if a < hi:
            st_lo[sp] = a
            st_hi[sp] = hi
            st_d[sp] = d + 1
            sp += 1
        if a > lo:
            st_lo[sp] = lo
            st_hi[sp] = a
            st_d[sp] = d + 1
            sp += 1


@njit(cache=True)
def _decode_window(text, t, free_start, min_len, rows_all, offs, nums, lens, msgs_all, bits):
    """Fused chain of all stages plus end selection and backtracking.

    Returns ``(end, message)`` or ``(-1, -1)``.  With ``free_start`` the end
    is the first position of cost <= t, moved to the cheapest of the next t
    positions; otherwise the whole text must be explained.
    """
    W = text.size
    S = offs.size
    big = 1 << 28
    init = np.empty(W + 1, dtype=np.int32)
    # a block starting at j covers text[j+4M+t, j+5M-t) with its zero buffer,
    # so that stretch holds at most t ones; other starts cannot reach cost <= t
    M = lens[S - 1]
    ones = np.zeros(W + 1, dtype=np.int64)
    for j in range(W):
        ones[j + 1] = ones[j] + text[j]
    for j in range(W + 1):
        if free_start:
            ok = j <= W - min_len
        else:
            ok = j <= t
        if ok:
            a = min(W, j + 4 * M + t)
            b = min(W, max(a, j + 5 * M - t))
            ok = ones[b] - ones[a] <= t
        if ok:
            init[j] = 0 if free_start else j
        else:
            init[j] = big
    leaf = np.empty((S, W + 1), dtype=np.int64)
    origin = np.empty((S, W + 1), dtype=np.int64)
    cost = np.empty(W + 1, dtype=np.int32)
    for s in range(S):
        rows = rows_all[offs[s]:offs[s] + nums[s], :lens[s]]
        _trie_align(text, init, rows, t, cost, leaf[s], origin[s])
        for j in range(W + 1):
            init[j] = cost[j]
    if free_start:
        first = -1
        for e in range(W + 1):
            if init[e] <= t:
                first = e
                break
        if first < 0:
            return -1, -1
        end = first
        best = init[first]
        for e in range(first + 1, min(W, first + t) + 1):
            if init[e] < best:
                best = init[e]
                end = e
    else:
        if init[W] > t:
            return -1, -1
        end = W
    msg = 0
    shift = 0
    e = end
    for s in range(S - 1, -1, -1):
        lf = leaf[s, e]
        if s < S - 1:
            msg |= msgs_all[offs[s] + lf] << shift
            shift += bits[s]
        e = origin[s, e]
    return end, msg


def decode_window(c: BufferedBlockCode, text: np.ndarray, t: int, free_start: bool) -> tuple[int, int]:
    """``(end, message as int)`` of the alignment chosen inside ``text``; (-1, -1) if none."""
    text = np.ascontiguousarray(text, dtype=np.uint8)
    end, msg = _decode_window(text, t, free_start, c.length - t, *c._packed)
    return int(end), int(msg)


@dataclass
class Alignment:
    """Result of aligning the full block code against a window."""

    cost: np.ndarray                   # best cost per end position
    stages: list                       # per stage: (leaf, origin) arrays


def align_block(c: BufferedBlockCode, text: np.ndarray, t: int, free_start: bool) -> Alignment:
    """Chain the chunk codes and the zero buffer through ``text``."""
    text = np.ascontiguousarray(text, dtype=np.uint8)
    W = text.size
    if free_start:
        init = np.zeros(W + 1, dtype=np.int32)
    else:
        init = np.arange(W + 1, dtype=np.int32)
    init = np.where(init > t, _BIG, init).astype(np.int32)
    stages = []
    for trie in c._tries + [c._buffer_trie]:
        cost = np.empty(W + 1, dtype=np.int32)
        leaf = np.empty(W + 1, dtype=np.int64)
        origin = np.empty(W + 1, dtype=np.int64)
        _trie_align(text, init, trie.rows, t, cost, leaf, origin)
        stages.append((leaf, origin))
        init = np.where(cost > t, _BIG, cost).astype(np.int32)
    return Alignment(init, stages)


def backtrack(c: BufferedBlockCode, al: Alignment, end: int) -> tuple[BitString, int]:
    """Message bits and start position of the best alignment ending at ``end``."""
    e = end
    msgs = []
    tries = c._tries + [c._buffer_trie]
    for trie, (leaf, origin) in zip(reversed(tries), reversed(al.stages)):
        msgs.append(int(trie.messages[leaf[e]]))
        e = int(origin[e])
    msgs = msgs[::-1][:-1]  # drop the buffer stage
    bits = np.concatenate([BitString.from_int(v, code.N).bits for v, code in zip(msgs, c.chunks)])
    return BitString(bits), e


def c0_decode_nearest(c: BufferedBlockCode, word: BitString, threshold: float | None = None):
    """Message of the codeword within ``threshold * 5M`` edits of ``word``, or None.

    With several candidates the closest wins, ties going to the lowest
    message in each chunk.
    """
    t = c.radius(threshold)
    if abs(word.length - c.length) > t:
        return None
    end, msg = decode_window(c, word.bits, t, free_start=False)
    if end < 0:
        return None
    return BitString.from_int(msg, c.M)
