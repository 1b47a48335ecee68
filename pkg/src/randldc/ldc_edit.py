"""Locally decodable codes for edit errors with randomized encoding.

The message is read as ``w``-bit symbols (``w = log2 k``), cut into blocks and
protected by a Reed-Solomon outer code over GF(2^w).  Every outer symbol then
becomes its own list block ``C0(header || symbol)``; headers let the decoder
find a block by index inside an edited word (see :mod:`list_search`).

* shared randomness: symbols are permuted by a uniform permutation and each
  payload is masked before the block code is applied.
* oblivious channel: no masks; the permutation comes from a seed that is
  stored, protected by the seed code, in trailing blocks that stay in place.
* flexible: per-level outer codewords are stacked as matrix rows and each
  column is protected by a second RS code before permuting and tagging.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .bitcore import BitString, DecodeFailure, QueryOracle, RandomStream, SymbolString
from .codes_edit import BufferedBlockCode, c0_encode_many
from .codes_hamming import (
    LinearBlockCode,
    SeedCode,
    build_seed_code,
    decode_symbols,
    nearest_message_indices,
    rs_block_code,
    rs_decode,
    seed_encode,
)
from .ldc_hamming import CODE_SEED, SharedRandomness, level_count, level_epsilon
from .list_search import CorruptedListView, Found, sample_at, search_payloads, window_budget
from .permutations import Permutation, PermutationDescription, apply, description_length, expand_description, sample_uniform

MODELS = ("shared", "oblivious")


def symbol_width(k: int) -> int:
    return max(2, math.ceil(math.log2(max(k, 2))))


def _outer_params(epsilon: float, width: int, gamma0: float, c_eps: float, n0_min: int) -> tuple[int, int]:
    n0 = max(math.ceil(c_eps * math.log(1 / epsilon) - 1e-9), n0_min)
    n0 = min(n0, 1 << width)
    return n0, max(1, math.ceil(gamma0 * n0))


@lru_cache(maxsize=None)
def _block_code(M: int, rel: float) -> BufferedBlockCode:
    return BufferedBlockCode(M, rel)


@lru_cache(maxsize=None)
def _edit_seed_code(seed_len: int) -> SeedCode:
    # list blocks already carry C0 protection, so the inner binary code is the identity
    return build_seed_code(seed_len, RandomStream(CODE_SEED, ("edit-seed", seed_len)),
                           inner_rate=1.0, inner_rel_dist=0.0, inner_min_dist=1)


def _header_width(n_blocks: int, full: int) -> int:
    need = max(1, math.ceil(math.log2(max(n_blocks, 2))))
    return full if n_blocks <= 1 << full else need


@dataclass(frozen=True)
class BlockLayout:
    """How symbols become tagged list blocks."""

    n_blocks: int
    header_width: int
    width: int
    c0_rel_dist: float = 0.1
    threshold: float | None = None

    @property
    def code(self) -> BufferedBlockCode:
        return _block_code(self.header_width + self.width, self.c0_rel_dist)

    @property
    def block_len(self) -> int:
        return 5 * (self.header_width + self.width)

    @property
    def n(self) -> int:
        return self.n_blocks * self.block_len

    def emit(self, payload: np.ndarray) -> BitString:
        """Tag symbol ``payload[i]`` with header i and apply the block code."""
        idx = np.arange(self.n_blocks, dtype=np.int64)
        hw, w = self.header_width, self.width
        heads = (idx[:, None] >> np.arange(hw - 1, -1, -1)[None, :]) & 1
        body = (np.asarray(payload, dtype=np.int64)[:, None] >> np.arange(w - 1, -1, -1)[None, :]) & 1
        msgs = np.concatenate([heads, body], axis=1)
        return BitString(c0_encode_many(self.code, msgs).ravel())

    def view(self, word: BitString | QueryOracle) -> CorruptedListView:
        return CorruptedListView(word, self.code, self.header_width, self.n_blocks, self.threshold)


def normalize_length(word: BitString, n: int) -> BitString:
    """Truncate or pad with zeros to length n."""
    if word.length >= n:
        return word[:n]
    return BitString(np.concatenate([word.bits, np.zeros(n - word.length, dtype=np.uint8)]))


def _symbols(x: BitString, k: int, width: int, count: int) -> np.ndarray:
    if x.length != k:
        raise ValueError(f"message has {x.length} bits, expected {k}")
    bits = np.concatenate([x.bits, np.zeros(count * width - k, dtype=np.uint8)])
    return np.asarray(SymbolString.from_bits(BitString(bits), width).symbols, dtype=np.int64)


def _outer_encode(symbols: np.ndarray, code: LinearBlockCode) -> np.ndarray:
    msgs = symbols.reshape(-1, code.k0)
    return code.gf.matmul(msgs, code.generator).ravel()


@lru_cache(maxsize=64)
def _mask_table(seed: int, count: int, width: int, tags: tuple) -> np.ndarray:
    st = SharedRandomness(seed).stream("edit-mask", *tags)
    bits = st.bits_at(0, count * width).reshape(count, width).astype(np.int64)
    table = bits @ (1 << np.arange(width - 1, -1, -1, dtype=np.int64))
    table.setflags(write=False)
    return table


def _masks(shared: SharedRandomness, count: int, width: int, *tags) -> np.ndarray:
    """Mask r_i for every block i < count; r_i does not depend on count."""
    return _mask_table(shared.seed, count, width, tags)


def _unmask(found: list, targets, table: np.ndarray) -> list:
    return [None if v is None else v ^ int(table[tg]) for v, tg in zip(found, targets)]


@lru_cache(maxsize=256)
def _uniform_perm(seed: int, path: tuple, n: int) -> Permutation:
    return sample_uniform(n, RandomStream(seed, path))


def _shared_perm(shared: SharedRandomness, n: int, *tags) -> Permutation:
    st = shared.stream("edit-perm", *tags)
    return _uniform_perm(st.seed, st.path, n)


@lru_cache(maxsize=256)
def _expand(seed_bytes: bytes, seed_len: int, n: int, kappa: int, eps_pi: float) -> Permutation:
    seed = BitString.from_bytes(seed_bytes, seed_len)
    return expand_description(PermutationDescription(seed, n, kappa, eps_pi))


# ---------------------------------------------------------------- parameters

@dataclass(frozen=True)
class EditLdcParams:
    """Fixed-epsilon edit LDC; ``model`` selects shared or oblivious."""

    k: int
    epsilon: float
    model: str = "shared"
    delta: float = 0.01
    gamma0: float = 1 / 3
    c_eps: float = 2.6
    n0_min: int = 6
    c0_rel_dist: float = 0.1
    threshold: float | None = None

    def __post_init__(self):
        if self.k < 2 or self.k & (self.k - 1):
            raise ValueError("k must be a power of two (pad the message)")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.model not in MODELS:
            raise ValueError("model must be shared or oblivious")

    @property
    def width(self) -> int:
        return symbol_width(self.k)

    @property
    def n_symbols(self) -> int:
        return math.ceil(self.k / self.width)

    @property
    def n0(self) -> int:
        return _outer_params(self.epsilon, self.width, self.gamma0, self.c_eps, self.n0_min)[0]

    @property
    def k0(self) -> int:
        return _outer_params(self.epsilon, self.width, self.gamma0, self.c_eps, self.n0_min)[1]

    @property
    def d0(self) -> int:
        return self.n0 - self.k0 + 1

    @property
    def outer(self) -> LinearBlockCode:
        return rs_block_code(self.n0, self.k0, self.width)

    @property
    def outer_blocks(self) -> int:
        return math.ceil(self.n_symbols / self.k0)

    @property
    def payload_blocks(self) -> int:
        """N, the number of permuted symbols."""
        return self.outer_blocks * self.n0

    # oblivious extras
    @property
    def kappa(self) -> int:
        return self.n0

    @property
    def eps_pi(self) -> float:
        return self.epsilon / 10

    @property
    def seed_length(self) -> int:
        return description_length(self.payload_blocks, self.kappa, self.eps_pi)

    @property
    def seed_code(self) -> SeedCode:
        return _edit_seed_code(self.seed_length)

    @property
    def seed_blocks(self) -> int:
        if self.model == "shared":
            return 0
        return math.ceil(self.seed_code.length / self.width)

    @property
    def layout(self) -> BlockLayout:
        total = self.payload_blocks + self.seed_blocks
        return BlockLayout(total, _header_width(total, self.width), self.width, self.c0_rel_dist, self.threshold)

    @property
    def n(self) -> int:
        return self.layout.n

    @property
    def search_k(self) -> int:
        return self.k

    def query_bound(self) -> int:
        b = self.layout.block_len
        searches = self.n0
        if self.model == "oblivious":
            sc = self.seed_code
            searches += sc.sample_blocks * (math.ceil(sc.n2 / self.width) + 1)
        return searches * window_budget(self.search_k) * (2 * b + 1)


# ---------------------------------------------------------------- fixed epsilon

def encode_edit_shared(x: BitString, shared: SharedRandomness, p: EditLdcParams, *,
                       permutation: Permutation | None = None, zero_mask: bool = False) -> BitString:
    """Symbols -> outer code -> permute -> mask -> tag and C0-encode."""
    if p.model != "shared":
        raise ValueError("params are for the oblivious model")
    y1 = _outer_encode(_symbols(x, p.k, p.width, p.outer_blocks * p.k0), p.outer)
    pi = permutation if permutation is not None else _shared_perm(shared, p.payload_blocks)
    y2 = np.asarray(apply(pi, y1.tolist()), dtype=np.int64)
    if not zero_mask:
        y2 = y2 ^ _masks(shared, p.payload_blocks, p.width)
    return p.layout.emit(y2)


def _bit_from(msg_symbols, s: int, k0: int, width: int, i0: int) -> int:
    sym = int(msg_symbols[s % k0])
    return (sym >> (width - 1 - i0 % width)) & 1


def _locate_symbols(view: CorruptedListView, targets, rs: RandomStream, delta: float, k: int) -> list:
    """Search each target block; None marks a block that was not found."""
    ok, pay = search_payloads(view, targets, rs.derive("search"), delta_budget=delta, k=k)
    return [v if f else None for f, v in zip(ok.tolist(), pay.tolist())]


def _outer_decode(code: LinearBlockCode, found: list) -> list[int]:
    erasures = [j for j, v in enumerate(found) if v is None]
    return decode_symbols(code, [0 if v is None else v for v in found], erasures)


def decode_edit_shared(i0: int, word: BitString | QueryOracle, shared: SharedRandomness, p: EditLdcParams,
                       rs: RandomStream, *, permutation: Permutation | None = None,
                       zero_mask: bool = False) -> int:
    """Find the ``n0`` blocks of bit i0's outer codeword and decode it.

    Missing blocks are erasures.  Raises DecodeFailure if the outer decoder
    cannot resolve the codeword.
    """
    if not 0 <= i0 < p.k:
        raise IndexError(f"bit index {i0} outside [0, {p.k})")
    oracle = word if isinstance(word, QueryOracle) else QueryOracle(normalize_length(word, p.n))
    view = p.layout.view(oracle)
    s = i0 // p.width
    ob = s // p.k0
    pi = permutation if permutation is not None else _shared_perm(shared, p.payload_blocks)
    targets = pi.forward[ob * p.n0 + np.arange(p.n0)]
    found = _locate_symbols(view, targets, rs, p.delta, p.search_k)
    if not zero_mask:
        found = _unmask(found, targets, _masks(shared, p.payload_blocks, p.width))
    msg = _outer_decode(p.outer, found)
    return _bit_from(msg, s, p.k0, p.width, i0)


def _seed_bits_to_symbols(bits: BitString, width: int, count: int) -> np.ndarray:
    padded = np.concatenate([bits.bits, np.zeros(count * width - bits.length, dtype=np.uint8)])
    return np.asarray(SymbolString.from_bits(BitString(padded), width).symbols, dtype=np.int64)


def encode_edit_oblivious(x: BitString, rs: RandomStream, p: EditLdcParams) -> BitString:
    """Payload symbols permuted by a seeded permutation; seed blocks appended."""
    if p.model != "oblivious":
        raise ValueError("params are for the shared model")
    y1 = _outer_encode(_symbols(x, p.k, p.width, p.outer_blocks * p.k0), p.outer)
    seed = rs.derive("perm-seed").draw_bits(p.seed_length)
    pi = _expand(seed.to_bytes(), seed.length, p.payload_blocks, p.kappa, p.eps_pi)
    y2 = np.asarray(apply(pi, y1.tolist()), dtype=np.int64)
    z = _seed_bits_to_symbols(seed_encode(p.seed_code, seed), p.width, p.seed_blocks)
    return p.layout.emit(np.concatenate([y2, z]))


def recover_seed_from_blocks(view: CorruptedListView, sc: SeedCode, first_block: int, width: int,
                             seed_len: int, rs: RandomStream, delta: float, k: int) -> BitString:
    """Sample ``8 k1`` seed-code symbols, find the list blocks carrying them
    and RS-decode; symbols whose blocks are missing become erasures."""
    ids = sorted(rs.sample(sc.n1, sc.sample_blocks))
    spans = [(j * sc.n2 // width, ((j + 1) * sc.n2 - 1) // width) for j in ids]
    needed = sorted({blk for lo, hi in spans for blk in range(lo, hi + 1)})
    ok, pay = search_payloads(view, [first_block + blk for blk in needed], rs.derive("seed-search"),
                              delta_budget=delta, k=k)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    found = {blk: (((v >> shifts) & 1).astype(np.uint8) if f else None)
             for blk, f, v in zip(needed, ok.tolist(), pay.tolist())}
    words = np.zeros((len(ids), sc.n2), dtype=np.uint8)
    erasures = []
    for pos, (j, (lo, hi)) in enumerate(zip(ids, spans)):
        parts = [found[blk] for blk in range(lo, hi + 1)]
        if any(p is None for p in parts):
            erasures.append(pos)
            continue
        start = j * sc.n2 - lo * width
        words[pos] = np.concatenate(parts)[start:start + sc.n2]
    symbols = nearest_message_indices(sc.inner, words).tolist()
    msg = rs_decode(sc.outer.restrict(ids), symbols, erasures)
    return SymbolString(tuple(msg), sc.outer.m).to_bits()[:seed_len]


def decode_edit_oblivious(i0: int, word: BitString | QueryOracle, p: EditLdcParams, rs: RandomStream) -> int:
    if not 0 <= i0 < p.k:
        raise IndexError(f"bit index {i0} outside [0, {p.k})")
    oracle = word if isinstance(word, QueryOracle) else QueryOracle(normalize_length(word, p.n))
    view = p.layout.view(oracle)
    seed = recover_seed_from_blocks(view, p.seed_code, p.payload_blocks, p.width, p.seed_length,
                                    rs.derive("seed"), p.delta, p.search_k)
    pi = _expand(seed.to_bytes(), seed.length, p.payload_blocks, p.kappa, p.eps_pi)
    s = i0 // p.width
    ob = s // p.k0
    targets = pi.forward[ob * p.n0 + np.arange(p.n0)]
    found = _locate_symbols(view, targets, rs.derive("payload"), p.delta, p.search_k)
    msg = _outer_decode(p.outer, found)
    return _bit_from(msg, s, p.k0, p.width, i0)


# ---------------------------------------------------------------- flexible

@dataclass(frozen=True)
class EditFlexParams:
    k: int
    model: str = "shared"
    delta: float = 0.005
    gamma0: float = 1 / 3
    c_eps: float = 2.6
    n0_min: int = 6
    c0_rel_dist: float = 0.1
    threshold: float | None = None

    def __post_init__(self):
        if self.k < 2 or self.k & (self.k - 1):
            raise ValueError("k must be a power of two (pad the message)")
        if self.model not in MODELS:
            raise ValueError("model must be shared or oblivious")

    @property
    def width(self) -> int:
        return symbol_width(self.k)

    @property
    def n_symbols(self) -> int:
        return math.ceil(self.k / self.width)

    @cached_property
    def levels(self) -> list[tuple[int, int, int]]:
        """(i, n0_i, k0_i) for every kept level."""
        out = []
        for i in range(1, level_count(self.k) + 1):
            n0 = max(math.ceil(self.c_eps * math.log(1 / level_epsilon(i)) - 1e-9), self.n0_min)
            if n0 > min(self.k, 1 << self.width):
                continue
            out.append((i, n0, max(1, math.ceil(self.gamma0 * n0))))
        return out

    @property
    def rows(self) -> int:
        return len(self.levels)

    def row_symbols(self, pos: int) -> int:
        _, n0, k0 = self.levels[pos]
        return math.ceil(self.n_symbols / k0) * n0

    @property
    def row_length(self) -> int:
        return max(self.row_symbols(p) for p in range(self.rows))

    @property
    def column_n0(self) -> int:
        return min(math.ceil(self.rows / self.gamma0), 1 << self.width)

    @property
    def column_code(self) -> LinearBlockCode:
        return rs_block_code(self.column_n0, self.rows, self.width)

    @property
    def matrix_blocks(self) -> int:
        return self.column_n0 * self.row_length

    @property
    def kappa(self) -> int:
        # one column's blocks must be jointly spread; see the decisions ledger
        return self.column_n0

    @property
    def eps_pi(self) -> float:
        return level_epsilon(self.levels[-1][0]) / 10

    @property
    def seed_length(self) -> int:
        return description_length(self.matrix_blocks, self.kappa, self.eps_pi)

    @property
    def seed_code(self) -> SeedCode:
        return _edit_seed_code(self.seed_length)

    @property
    def seed_blocks(self) -> int:
        if self.model == "shared":
            return 0
        return math.ceil(self.seed_code.length / self.width)

    @property
    def layout(self) -> BlockLayout:
        total = self.matrix_blocks + self.seed_blocks
        return BlockLayout(total, _header_width(total, 2 * self.width), self.width, self.c0_rel_dist, self.threshold)

    @property
    def n(self) -> int:
        return self.layout.n

    def select_level(self, epsilon: float) -> int | None:
        for pos, (i, _, _) in enumerate(self.levels):
            if level_epsilon(i) <= epsilon:
                return pos
        return None

    def query_bound(self, pos: int) -> int:
        b = self.layout.block_len
        searches = self.levels[pos][1] * self.column_n0
        if self.model == "oblivious":
            sc = self.seed_code
            searches += sc.sample_blocks * (math.ceil(sc.n2 / self.width) + 1)
        return searches * window_budget(self.k) * (2 * b + 1)


def _flex_matrix(x: BitString, fp: EditFlexParams) -> np.ndarray:
    rows = []
    for pos, (_, n0, k0) in enumerate(fp.levels):
        code = rs_block_code(n0, k0, fp.width)
        blocks = math.ceil(fp.n_symbols / k0)
        y = _outer_encode(_symbols(x, fp.k, fp.width, blocks * k0), code)
        rows.append(np.concatenate([y, np.zeros(fp.row_length - y.size, dtype=np.int64)]))
    return np.stack(rows)


def encode_edit_flexible(x: BitString, randomness, fp: EditFlexParams) -> BitString:
    """``randomness``: SharedRandomness (shared model) or RandomStream (oblivious)."""
    matrix = _flex_matrix(x, fp)
    cols = fp.column_code.gf.matmul(matrix.T, fp.column_code.generator)  # row_length x column_n0
    flat = cols.ravel()
    if fp.model == "shared":
        pi = _shared_perm(randomness, fp.matrix_blocks, "flex")
        y = np.asarray(apply(pi, flat.tolist()), dtype=np.int64)
        y = y ^ _masks(randomness, fp.matrix_blocks, fp.width, "flex")
        return fp.layout.emit(y)
    seed = randomness.derive("perm-seed").draw_bits(fp.seed_length)
    pi = _expand(seed.to_bytes(), seed.length, fp.matrix_blocks, fp.kappa, fp.eps_pi)
    y = np.asarray(apply(pi, flat.tolist()), dtype=np.int64)
    z = _seed_bits_to_symbols(seed_encode(fp.seed_code, seed), fp.width, fp.seed_blocks)
    return fp.layout.emit(np.concatenate([y, z]))


def _row_decode(fp: EditFlexParams, pos: int, i0: int, column_symbol) -> int:
    _, n0, k0 = fp.levels[pos]
    s = i0 // fp.width
    ob = s // k0
    found = [column_symbol(ob * n0 + j) for j in range(n0)]
    msg = _outer_decode(rs_block_code(n0, k0, fp.width), found)
    return _bit_from(msg, s, k0, fp.width, i0)


def decode_edit_flexible(i0: int, word: BitString | QueryOracle, epsilon: float, randomness,
                         fp: EditFlexParams, rs: RandomStream) -> int:
    """Level selection as in the Hamming flexible decoder; each row-symbol
    query decodes one column from its ``column_n0`` located blocks."""
    if not 0 <= i0 < fp.k:
        raise IndexError(f"bit index {i0} outside [0, {fp.k})")
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    oracle = word if isinstance(word, QueryOracle) else QueryOracle(normalize_length(word, fp.n))
    view = fp.layout.view(oracle)
    if fp.model == "shared":
        pi = _shared_perm(randomness, fp.matrix_blocks, "flex")
    else:
        seed = recover_seed_from_blocks(view, fp.seed_code, fp.matrix_blocks, fp.width, fp.seed_length,
                                        rs.derive("seed"), fp.delta, fp.k)
        pi = _expand(seed.to_bytes(), seed.length, fp.matrix_blocks, fp.kappa, fp.eps_pi)
    pos = fp.select_level(epsilon)
    if pos is None:
        return _decode_whole(i0, view, randomness, fp, pi)
    n0c = fp.column_n0
    col_cache: dict[int, list | None] = {}

    def column(j: int):
        if j not in col_cache:
            targets = pi.forward[j * n0c + np.arange(n0c)]
            found = _locate_symbols(view, targets, rs.derive("column", j), fp.delta, fp.k)
            if fp.model == "shared":
                found = _unmask(found, targets, _masks(randomness, fp.matrix_blocks, fp.width, "flex"))
            try:
                col_cache[j] = _outer_decode(fp.column_code, found)
            except DecodeFailure:
                col_cache[j] = None
        return col_cache[j]

    def column_symbol(j: int):
        col = column(j)
        return None if col is None else int(col[pos])

    return _row_decode(fp, pos, i0, column_symbol)


def _decode_whole(i0: int, view: CorruptedListView, randomness, fp: EditFlexParams, pi: Permutation) -> int:
    """Read the whole word, collect every decodable block, decode the finest level."""
    b = view.block_len
    step = max(1, b // 2)
    blocks: dict[int, int] = {}
    for r in range(step, view.length + step, step):
        res = sample_at(view, r)
        if isinstance(res, Found) and res.index < fp.matrix_blocks and res.index not in blocks:
            blocks[res.index] = BitString(res.payload.bits).to_int()
    n0c = fp.column_n0
    pos = fp.rows - 1

    def column_symbol(j: int):
        targets = pi.forward[j * n0c + np.arange(n0c)]
        found = [blocks.get(int(tg)) for tg in targets]
        if fp.model == "shared":
            found = _unmask(found, targets, _masks(randomness, fp.matrix_blocks, fp.width, "flex"))
        try:
            return int(_outer_decode(fp.column_code, found)[pos])
        except DecodeFailure:
            return None

    return _row_decode(fp, pos, i0, column_symbol)
