"""Small classical codes: random binary linear codes, Reed-Solomon over
GF(2^m), and the concatenated seed code that can be decoded from a random
subset of its blocks."""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np

from .bitcore import BitString, DecodeFailure, QueryOracle, RandomStream, SymbolString
from .gf2m import GF2m, field as gf_field


def _message_matrix(k: int) -> np.ndarray:
    """All ``2^k`` messages as rows, row ``v`` = bits of ``v`` MSB first."""
    v = np.arange(1 << k, dtype=np.int64)[:, None]
    return ((v >> np.arange(k - 1, -1, -1, dtype=np.int64)[None, :]) & 1).astype(np.uint8)


def _pack_rows(rows: np.ndarray) -> np.ndarray:
    """Pack 0/1 rows (width <= 64) into uint64, column i -> bit i."""
    rows = np.asarray(rows, dtype=np.uint8)
    if rows.shape[1] > 64:
        raise ValueError("rows wider than 64 bits")
    padded = np.zeros((rows.shape[0], 64), dtype=np.uint8)
    padded[:, :rows.shape[1]] = rows
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").ravel().astype(np.uint64)


@dataclass(eq=False)
class LinearBlockCode:
    """An (n0, k0) linear code over GF(2^alphabet_width), given by its generator."""

    n0: int
    k0: int
    generator: np.ndarray
    alphabet_width: int = 1
    min_distance: int | None = None
    _codebook: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.generator = np.asarray(self.generator, dtype=np.int64)
        if self.generator.shape != (self.k0, self.n0):
            raise ValueError("generator shape does not match (k0, n0)")

    @property
    def binary(self) -> bool:
        return self.alphabet_width == 1

    @property
    def gf(self) -> GF2m:
        return gf_field(self.alphabet_width)

    def codebook(self) -> np.ndarray:
        """Codeword of every message, indexed by message value (binary only)."""
        if not self.binary:
            raise ValueError("codebook enumeration is for binary codes")
        if self._codebook is None:
            if self.k0 > 20:
                raise ValueError("codebook too large to enumerate")
            self._codebook = (_message_matrix(self.k0).astype(np.int64) @ self.generator) % 2
            self._codebook = self._codebook.astype(np.uint8)
        return self._codebook


def _singleton_ok(n0: int, k0: int, d: int) -> bool:
    return k0 + d <= n0 + 1


def binary_min_distance(generator: np.ndarray) -> int:
    """Exhaustive minimum distance (= minimum nonzero weight) of a binary code."""
    k0, n0 = generator.shape
    cw = (_message_matrix(k0).astype(np.int64) @ generator) % 2
    weights = cw[1:].sum(axis=1)
    return int(weights.min()) if weights.size else n0


def generate_code(n0: int, k0: int, min_d: int, rs: RandomStream, retries: int = 400) -> LinearBlockCode:
    """Random systematic binary code ``[I | P]`` with verified distance >= min_d."""
    if not 1 <= k0 <= n0:
        raise ValueError("need 1 <= k0 <= n0")
    if not _singleton_ok(n0, k0, min_d):
        raise ValueError(f"({n0}, {k0}, {min_d}) violates the Singleton bound")
    if k0 > 16:
        raise ValueError("exhaustive distance check limited to k0 <= 16")
    rng = rs.numpy_generator()
    ident = np.eye(k0, dtype=np.int64)
    for _ in range(retries):
        parity = rng.integers(0, 2, size=(k0, n0 - k0))
        gen = np.concatenate([ident, parity], axis=1)
        d = binary_min_distance(gen)
        if d >= min_d:
            return LinearBlockCode(n0, k0, gen, 1, d)
    raise ValueError(f"no ({n0}, {k0}) code with distance {min_d} found; lower min_d")


def encode_block(c: LinearBlockCode, msg: BitString | SymbolString):
    if msg.length != c.k0:
        raise ValueError(f"message length {msg.length} != k0 = {c.k0}")
    if c.binary:
        return BitString((msg.bits.astype(np.int64) @ c.generator) % 2)
    row = np.asarray(msg.symbols, dtype=np.int64)[None, :]
    return SymbolString(tuple(int(v) for v in c.gf.matmul(row, c.generator)[0]), c.alphabet_width)


def decode_block_nearest(c: LinearBlockCode, word: BitString) -> BitString:
    """Message of the nearest codeword in Hamming distance; ties go to the
    lowest message value."""
    if not c.binary:
        raise ValueError("use decode_symbols for codes over larger fields")
    if word.length != c.n0:
        raise ValueError(f"word length {word.length} != n0 = {c.n0}")
    return BitString.from_int(nearest_message_index(c, word.bits), c.k0)


def nearest_message_index(c: LinearBlockCode, bits: np.ndarray) -> int:
    packed = _packed_codebook(c)
    w = _pack_rows(np.asarray(bits, dtype=np.uint8)[None, :])[0]
    return int(np.argmin(np.bitwise_count(packed ^ w)))


def _packed_codebook(c: LinearBlockCode) -> np.ndarray:
    cached = getattr(c, "_packed", None)
    if cached is None:
        cached = _pack_rows(c.codebook())
        c._packed = cached
    return cached


def nearest_message_indices(c: LinearBlockCode, words: np.ndarray) -> np.ndarray:
    """Vectorized nearest decoding of many words (rows)."""
    packed = _packed_codebook(c)
    w = _pack_rows(np.asarray(words, dtype=np.uint8))
    out = np.empty(w.size, dtype=np.int64)
    for s in range(0, w.size, 256):
        d = np.bitwise_count(packed[None, :] ^ w[s:s + 256, None])
        out[s:s + 256] = np.argmin(d, axis=1)
    return out


def export_codebook(c: LinearBlockCode) -> str:
    """Rows ``message_hex codeword_hex`` (bits packed LSB first)."""
    lines = []
    for v, cw in enumerate(c.codebook()):
        lines.append(f"{BitString.from_int(v, c.k0).to_bytes().hex()} {BitString(cw).to_bytes().hex()}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- Reed-Solomon

@dataclass(eq=False)
class ReedSolomonCode:
    n1: int
    k1: int
    m: int
    eval_points: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.eval_points:
            self.eval_points = tuple(range(self.n1))
        if len(self.eval_points) != self.n1 or len(set(self.eval_points)) != self.n1:
            raise ValueError("need n1 distinct evaluation points")
        if self.n1 > 1 << self.m or max(self.eval_points) >= 1 << self.m:
            raise ValueError("evaluation points exceed the field")
        if not 1 <= self.k1 <= self.n1:
            raise ValueError("need 1 <= k1 <= n1")

    @property
    def gf(self) -> GF2m:
        return gf_field(self.m)

    @property
    def d1(self) -> int:
        return self.n1 - self.k1 + 1

    def vandermonde(self) -> np.ndarray:
        pts = np.asarray(self.eval_points, dtype=np.int64)
        cols = [np.ones(self.n1, dtype=np.int64)]
        for _ in range(1, self.k1):
            cols.append(self.gf.vmul(cols[-1], pts))
        return np.stack(cols, axis=0)  # k1 x n1

    def restrict(self, positions) -> "ReedSolomonCode":
        pts = tuple(self.eval_points[p] for p in positions)
        return ReedSolomonCode(len(pts), self.k1, self.m, pts)


def rs_field_bits(n1: int) -> int:
    return max(2, math.ceil(math.log2(max(n1, 2))) + 1)


def rs_encode(c: ReedSolomonCode, msg) -> list[int]:
    msg = list(msg)
    if len(msg) != c.k1:
        raise ValueError(f"message length {len(msg)} != k1 = {c.k1}")
    gf = c.gf
    return [gf.poly_eval(msg, a) for a in c.eval_points]


def _poly_divmod(gf: GF2m, num: list[int], den: list[int]):
    num = list(num)
    while den and den[-1] == 0:
        den = den[:-1]
    if not den:
        raise ZeroDivisionError
    q = [0] * max(1, len(num) - len(den) + 1)
    inv_lead = gf.inv(den[-1])
    for i in range(len(num) - len(den), -1, -1):
        coef = gf.mul(num[i + len(den) - 1], inv_lead)
        q[i] = coef
        if coef:
            for j, d in enumerate(den):
                num[i + j] ^= gf.mul(coef, d)
    rem = num[:len(den) - 1]
    return q, rem


def _hamming(a, b) -> int:
    return sum(1 for x, y in zip(a, b) if x != y)


@lru_cache(maxsize=512)
def _rs_codebook(k1: int, m: int, points: tuple[int, ...]):
    c = ReedSolomonCode(len(points), k1, m, points)
    v = np.arange(1 << (m * k1), dtype=np.int64)
    msgs = (v[:, None] >> (m * np.arange(k1))[None, :]) & ((1 << m) - 1)
    return msgs, c.gf.matmul(msgs, c.vandermonde())


@lru_cache(maxsize=512)
def _interp_inverse(m: int, points: tuple[int, ...]):
    """Matrix taking evaluations at ``points`` to polynomial coefficients."""
    c = ReedSolomonCode(len(points), len(points), m, points)
    inv = c.gf.inverse(c.vandermonde().T)
    inv.setflags(write=False)
    return inv


@lru_cache(maxsize=512)
def _generator(k1: int, m: int, points: tuple[int, ...]):
    vand = ReedSolomonCode(len(points), k1, m, points).vandermonde()
    vand.setflags(write=False)
    return vand


def rs_decode(c: ReedSolomonCode, word, erasures=()) -> list[int]:
    """Unique decoding up to ``(n1 - k1 - |erasures|) / 2`` errors.

    Brute force when the message space is tiny, Berlekamp-Welch otherwise.
    Raises :class:`DecodeFailure` if no codeword is close enough.
    """
    word = [int(v) for v in word]
    if len(word) != c.n1:
        raise ValueError(f"word length {len(word)} != n1 = {c.n1}")
    if erasures:
        er = set(erasures)
        keep = [i for i in range(c.n1) if i not in er]
        if len(keep) < c.k1:
            raise DecodeFailure("too many erasures")
        return rs_decode(c.restrict(keep), [word[i] for i in keep])
    radius = (c.n1 - c.k1) // 2
    gf = c.gf
    if (1 << (c.m * c.k1)) <= 4096:
        msgs, book = _rs_codebook(c.k1, c.m, c.eval_points)
        dist = (book != np.asarray(word, dtype=np.int64)[None, :]).sum(axis=1)
        best = int(np.argmin(dist))
        if dist[best] > radius:
            raise DecodeFailure("no codeword within the unique decoding radius")
        return [int(v) for v in msgs[best]]
    # fast path: interpolate through the first k1 points
    inv = _interp_inverse(c.m, tuple(c.eval_points[:c.k1]))
    msg = gf.matmul(inv, np.asarray(word[:c.k1], dtype=np.int64)[:, None]).ravel()
    cw = gf.matmul(msg[None, :], _generator(c.k1, c.m, tuple(c.eval_points))).ravel()
    if int(np.count_nonzero(cw != np.asarray(word))) <= radius:
        return [int(v) for v in msg]
    e = radius
    pts = np.asarray(c.eval_points, dtype=np.int64)
    r = np.asarray(word, dtype=np.int64)
    powers = [np.ones(c.n1, dtype=np.int64)]
    for _ in range(e + c.k1):
        powers.append(gf.vmul(powers[-1], pts))
    q_cols = [powers[j] for j in range(e + c.k1)]
    e_cols = [gf.vmul(r, powers[j]) for j in range(e)]
    a = np.stack(q_cols + e_cols, axis=1)
    rhs = gf.vmul(r, powers[e])
    sol = gf.solve(a, rhs)
    if sol is None:
        raise DecodeFailure("Berlekamp-Welch system inconsistent")
    qpoly = [int(v) for v in sol[:e + c.k1]]
    epoly = [int(v) for v in sol[e + c.k1:]] + [1]
    quot, rem = _poly_divmod(gf, qpoly, epoly)
    if any(rem):
        raise DecodeFailure("error locator does not divide")
    msg = (quot + [0] * c.k1)[:c.k1]
    if any(quot[c.k1:]):
        raise DecodeFailure("decoded polynomial degree too high")
    if _hamming(rs_encode(c, msg), word) > radius:
        raise DecodeFailure("no codeword within the unique decoding radius")
    return msg


@lru_cache(maxsize=None)
def rs_block_code(n0: int, k0: int, width: int) -> LinearBlockCode:
    """Reed-Solomon code over GF(2^width) packaged as a generator matrix."""
    rs = ReedSolomonCode(n0, k0, width)
    return LinearBlockCode(n0, k0, rs.vandermonde(), width, n0 - k0 + 1)


def decode_symbols(c: LinearBlockCode, symbols, erasures=()) -> list[int]:
    """Errors-and-erasures decoding for an RS-generated symbol code."""
    rs = ReedSolomonCode(c.n0, c.k0, c.alphabet_width)
    return rs_decode(rs, symbols, erasures)


# ---------------------------------------------------------------- seed code

@dataclass(eq=False)
class SeedCode:
    """Reed-Solomon outer code, each field symbol carried by a binary inner block."""

    outer: ReedSolomonCode
    inner: LinearBlockCode

    @property
    def n1(self) -> int:
        return self.outer.n1

    @property
    def k1(self) -> int:
        return self.outer.k1

    @property
    def n2(self) -> int:
        return self.inner.n0

    @property
    def length(self) -> int:
        return self.outer.n1 * self.inner.n0

    @property
    def capacity(self) -> int:
        return self.outer.k1 * self.outer.m

    @property
    def sample_blocks(self) -> int:
        return 8 * self.outer.k1


def build_seed_code(seed_len: int, rs: RandomStream, min_blocks: int = 0,
                    inner_rate: float = 1 / 3, inner_rel_dist: float = 0.2,
                    inner_min_dist: int = 3) -> SeedCode:
    """Shortest seed code with ``n1 >= 8 k1``, capacity >= seed_len and
    ``m = ceil(log2 n1) + 1``."""
    best = None
    for m in range(3, 17):
        k1 = max(1, math.ceil(seed_len / m))
        n1 = max(8 * k1, min_blocks, (1 << (m - 2)) + 1)
        if n1 > 1 << (m - 1):
            continue
        total = n1 * math.ceil(m / inner_rate)
        if best is None or total < best[0]:
            best = (total, m, k1, n1)
    if best is None:
        raise ValueError("seed too long for any supported field")
    _, m, k1, n1 = best
    n2 = math.ceil(m / inner_rate)
    d2 = max(inner_min_dist, math.ceil(inner_rel_dist * n2))
    inner = generate_code(n2, m, d2, rs.derive("seed-inner", n2, m))
    return SeedCode(ReedSolomonCode(n1, k1, m), inner)


def make_seed_code(n1: int, k1: int, rs: RandomStream, inner_rate: float = 1 / 3,
                   inner_rel_dist: float = 0.2) -> SeedCode:
    """Seed code with explicit outer parameters."""
    m = rs_field_bits(n1)
    n2 = math.ceil(m / inner_rate)
    d2 = max(3, math.ceil(inner_rel_dist * n2))
    inner = generate_code(n2, m, d2, rs.derive("seed-inner", n2, m))
    return SeedCode(ReedSolomonCode(n1, k1, m), inner)


def _seed_symbols(sc: SeedCode, seed: BitString) -> list[int]:
    if seed.length > sc.capacity:
        raise ValueError(f"seed of {seed.length} bits exceeds capacity {sc.capacity}")
    padded = np.concatenate([seed.bits, np.zeros(sc.capacity - seed.length, dtype=np.uint8)])
    return list(SymbolString.from_bits(BitString(padded), sc.outer.m).symbols)


def seed_encode(sc: SeedCode, seed: BitString) -> BitString:
    symbols = rs_encode(sc.outer, _seed_symbols(sc, seed))
    blocks = [encode_block(sc.inner, BitString.from_int(s, sc.outer.m)).bits for s in symbols]
    return BitString(np.concatenate(blocks))


def seed_decode_blocks(sc: SeedCode, block_ids, block_bits: np.ndarray, seed_len: int) -> BitString:
    """Inner-decode the given blocks and RS-decode over their evaluation points."""
    syms = nearest_message_indices(sc.inner, block_bits)
    sub = sc.outer.restrict(list(block_ids))
    msg = rs_decode(sub, syms.tolist())
    return SymbolString(tuple(msg), sc.outer.m).to_bits()[:seed_len]


def seed_local_decode(sc: SeedCode, access: QueryOracle, rs: RandomStream, seed_len: int,
                      offset: int = 0) -> BitString:
    """Query ``8 k1`` random blocks (without replacement) and decode the seed.

    ``offset`` is where the seed codeword starts inside the oracle's word.
    """
    count = sc.sample_blocks
    if count > sc.n1:
        raise ValueError("need 8 k1 <= n1")
    ids = sorted(rs.sample(sc.n1, count))
    n2 = sc.n2
    pos = offset + (np.asarray(ids, dtype=np.int64)[:, None] * n2 + np.arange(n2)[None, :])
    bits = access.read(pos.ravel()).reshape(count, n2)
    return seed_decode_blocks(sc, ids, bits, seed_len)
