"""Searching a corrupted codeword made of index-tagged blocks.

An uncorrupted word is a concatenation of blocks ``C0(header_i || payload_i)``
with headers in increasing order, so it behaves like a sorted list.  After
edits it is a corrupted sorted list: most blocks can still be found near their
original position, some are destroyed.  :func:`sample_at` decodes the first
block that fits in a window around a position; :func:`search` is a
randomized robust binary search over positions that steers by the median
header of several samples and finishes with a short linear scan.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .bitcore import BitString, QueryOracle, RandomStream
from .codes_edit import BufferedBlockCode, _decode_window, decode_window


@dataclass(frozen=True)
class Found:
    index: int
    payload: BitString


class _Bottom:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "Bottom"

    def __bool__(self) -> bool:
        return False


Bottom = _Bottom()


class CorruptedListView:
    """Read-only logged view of a received word cut into ``block_len`` blocks."""

    def __init__(self, word: BitString | QueryOracle, code: BufferedBlockCode, header_width: int,
                 n_blocks: int, threshold: float | None = None, offset: int = 0):
        self.oracle = word if isinstance(word, QueryOracle) else QueryOracle(word)
        self.code = code
        self.block_len = code.length
        self.header_width = header_width
        self.n_blocks = n_blocks
        self.offset = offset  # physical start of block 0
        self.radius = code.radius(threshold)
        self.windows = 0

    @property
    def length(self) -> int:
        return self.oracle.length


def sample_at(view: CorruptedListView, r: int) -> Found | _Bottom:
    """Decode the first block that fits inside ``word[r-b, r+b]``."""
    b = view.block_len
    window = view.oracle.read_range(r - b, r + b + 1)
    view.windows += 1
    t = view.radius
    if window.size < b - t:
        return Bottom
    end, msg = decode_window(view.code, window, t, free_start=True)
    if end < 0:
        return Bottom
    w = view.code.M - view.header_width
    return Found(msg >> w, BitString.from_int(msg & ((1 << w) - 1), w))


def window_budget(k: int) -> int:
    return 8 * max(1, math.ceil(math.log2(max(k, 2)))) ** 3


_MASK64 = (1 << 64) - 1


class XorShift:
    """xorshift64* generator; the search kernel runs the same recurrence."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64 or 1

    def uniform(self) -> float:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self.state = x
        return (((x * 2685821657736338717) & _MASK64) >> 11) / float(1 << 53)


@njit(cache=True)
def _uniform(state):
    x = state[0]
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    state[0] = x
    return float((x * np.uint64(2685821657736338717)) >> np.uint64(11)) / 9007199254740992.0


@njit(cache=True)
def _probe(word, r, b, t, pay_bits, rows_all, offs, nums, lens, msgs_all, bits, log, slot):
    W = word.size
    start = max(0, r - b)
    stop = min(W, r + b + 1)
    log[slot, 0] = start
    log[slot, 1] = stop
    if stop - start < b - t:
        return False, 0, 0
    end, msg = _decode_window(word[start:stop], t, True, b - t, rows_all, offs, nums, lens, msgs_all, bits)
    if end < 0:
        return False, 0, 0
    return True, msg >> pay_bits, msg & ((1 << pay_bits) - 1)


@njit(cache=True)
def _search_kernel(word, target, b, lo, hi, budget, T, t, pay_bits, seed,
                   rows_all, offs, nums, lens, msgs_all, bits, log):
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    used = 0
    headers = np.empty(T, dtype=np.float64)
    mid_frac = 0.5
    empty_rounds = 0
    while hi - lo > 4 * b and used + T <= budget and empty_rounds < 3:
        mid = lo + int((hi - lo) * mid_frac)
        nh = 0
        for _ in range(T):
            r = mid - b // 2 + int(_uniform(state) * b)
            ok, idx, pay = _probe(word, r, b, t, pay_bits, rows_all, offs, nums, lens, msgs_all, bits, log, used)
            used += 1
            if ok:
                if idx == target:
                    return True, pay, used
                headers[nh] = idx
                nh += 1
        if nh == 0:
            empty_rounds += 1
            mid_frac = (1 + _uniform(state)) / 3
            continue
        empty_rounds = 0
        mid_frac = 0.5
        med = np.median(headers[:nh])
        if med < target:
            lo = max(lo, mid - b)
        else:
            hi = min(hi, mid + b)
    step = max(1, b // 2)
    r = lo + step
    while r <= hi + step and used < budget:
        ok, idx, pay = _probe(word, r, b, t, pay_bits, rows_all, offs, nums, lens, msgs_all, bits, log, used)
        used += 1
        if ok and idx == target:
            return True, pay, used
        r += step
    return False, 0, used


@njit(cache=True)
def _search_many_kernel(word, targets, los, his, seeds, b, budget, T, t, pay_bits,
                        rows_all, offs, nums, lens, msgs_all, bits, log, used_out, ok_out, pay_out):
    offset = 0
    for q in range(targets.size):
        ok, pay, used = _search_kernel(word, targets[q], b, los[q], his[q], budget, T, t, pay_bits, seeds[q],
                                       rows_all, offs, nums, lens, msgs_all, bits, log[offset:])
        ok_out[q] = ok
        pay_out[q] = pay
        used_out[q] = used
        offset += used


def _prior_window(view: CorruptedListView, target: int, delta_budget: float) -> tuple[int, int]:
    b = view.block_len
    halo = math.ceil(delta_budget * view.length) + 2 * b
    lo = max(0, view.offset + target * b - halo)
    hi = min(view.length, view.offset + (target + 1) * b + halo)
    return lo, hi


def _samples(k: int, samples: int | None) -> int:
    return samples if samples is not None else max(3, math.ceil(math.log2(max(k, 2))))


def search(view: CorruptedListView, target: int, rs: RandomStream, delta_budget: float = 0.0,
           k: int | None = None, samples: int | None = None) -> Found | _Bottom:
    """Find block ``target``; returns Bottom when the window budget runs out.

    Robust binary search on physical position: each round decodes T random
    windows near the midpoint and steers by the median header.  After three
    rounds that decode nothing it stops steering and scans linearly in
    half-block steps.  Only a block whose decoded header equals ``target``
    is ever returned.
    """
    if not 0 <= target < view.n_blocks:
        raise IndexError(f"target {target} outside [0, {view.n_blocks})")
    k = view.n_blocks if k is None else k
    budget = window_budget(k)
    lo, hi = _prior_window(view, target, delta_budget)
    log = np.zeros((budget, 2), dtype=np.int64)
    pay_bits = view.code.M - view.header_width
    ok, pay, used = _search_kernel(view.oracle.bits, target, view.block_len, lo, hi, budget,
                                   _samples(k, samples), view.radius, pay_bits, np.uint64(rs.draw_uint(64) or 1),
                                   *view.code._packed, log)
    view.oracle.log_ranges(log[:used])
    view.windows += int(used)
    return Found(target, BitString.from_int(int(pay), pay_bits)) if ok else Bottom


def search_payloads(view: CorruptedListView, targets, rs: RandomStream, delta_budget: float = 0.0,
                    k: int | None = None, samples: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Batched search returning ``(found, payload as int)`` arrays."""
    targets = np.asarray([int(tg) for tg in targets], dtype=np.int64)
    if targets.size and (targets.min() < 0 or targets.max() >= view.n_blocks):
        raise IndexError(f"target outside [0, {view.n_blocks})")
    nq = targets.size
    ok = np.zeros(nq, dtype=np.bool_)
    pay = np.zeros(nq, dtype=np.int64)
    if nq == 0:
        return ok, pay
    k = view.n_blocks if k is None else k
    budget = window_budget(k)
    b = view.block_len
    halo = math.ceil(delta_budget * view.length) + 2 * b
    los = np.maximum(0, view.offset + targets * b - halo)
    his = np.minimum(view.length, view.offset + (targets + 1) * b + halo)
    seeds = rs.draw_uint64s(nq).astype(np.uint64)
    seeds[seeds == 0] = 1
    log = np.empty((budget * nq, 2), dtype=np.int64)
    used = np.zeros(nq, dtype=np.int64)
    _search_many_kernel(view.oracle.bits, targets, los, his, seeds, b, budget, _samples(k, samples),
                        view.radius, view.code.M - view.header_width, *view.code._packed, log, used, ok, pay)
    total = int(used.sum())
    view.oracle.log_ranges(log[:total])
    view.windows += total
    return ok, pay


def search_many(view: CorruptedListView, targets, rs: RandomStream, delta_budget: float = 0.0,
                k: int | None = None, samples: int | None = None) -> list:
    """:func:`search` for several targets in one kernel call.

    Same answers and query log as calling ``search(view, tg, rs, ...)`` for
    each target in order with the shared stream ``rs``.
    """
    targets = [int(tg) for tg in targets]
    ok, pay = search_payloads(view, targets, rs, delta_budget, k, samples)
    w = view.code.M - view.header_width
    return [Found(tg, BitString.from_int(v, w)) if f else Bottom
            for tg, f, v in zip(targets, ok.tolist(), pay.tolist())]


def search_reference(view: CorruptedListView, target: int, rs: RandomStream, delta_budget: float = 0.0,
                     k: int | None = None, samples: int | None = None) -> Found | _Bottom:
    """Plain-Python twin of :func:`search` built on :func:`sample_at`; same coins, same answer."""
    if not 0 <= target < view.n_blocks:
        raise IndexError(f"target {target} outside [0, {view.n_blocks})")
    k = view.n_blocks if k is None else k
    budget = window_budget(k)
    T = _samples(k, samples)
    b = view.block_len
    lo, hi = _prior_window(view, target, delta_budget)
    gen = XorShift(rs.draw_uint(64) or 1)
    used = 0

    def probe(r: int):
        nonlocal used
        used += 1
        return sample_at(view, r)

    mid_frac = 0.5
    empty_rounds = 0
    while hi - lo > 4 * b and used + T <= budget and empty_rounds < 3:
        mid = lo + int((hi - lo) * mid_frac)
        headers = []
        for _ in range(T):
            res = probe(mid - b // 2 + int(gen.uniform() * b))
            if isinstance(res, Found):
                if res.index == target:
                    return res
                headers.append(res.index)
        if not headers:
            empty_rounds += 1
            mid_frac = (1 + gen.uniform()) / 3
            continue
        empty_rounds = 0
        mid_frac = 0.5
        if float(np.median(headers)) < target:
            lo = max(lo, mid - b)
        else:
            hi = min(hi, mid + b)
    step = max(1, b // 2)
    r = lo + step
    while r <= hi + step and used < budget:
        res = probe(r)
        if isinstance(res, Found) and res.index == target:
            return res
        r += step
    return Bottom
