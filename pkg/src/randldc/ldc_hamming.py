"""Locally decodable codes for Hamming errors with randomized encoding.

Three families:

* shared randomness: inner-encode blocks, permute every bit by a uniform
  permutation, mask with a one-time pad; the decoder reads the ``n0``
  positions of one block.
* oblivious channel: no mask; the permutation comes from a short seed that is
  shipped in a second half protected by the seed code.
* flexible failure probability: one codeword per level ``eps_i = 2^-2^i``,
  stacked as matrix rows, each column protected by a small binary code.

Bit indices are 0-based throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .bitcore import BitString, QueryOracle, RandomStream, partition_blocks, xor
from .codes_hamming import (
    LinearBlockCode,
    SeedCode,
    build_seed_code,
    generate_code,
    nearest_message_index,
    nearest_message_indices,
    seed_encode,
    seed_local_decode,
)
from .permutations import (
    Permutation,
    PermutationDescription,
    apply,
    description_length,
    expand_description,
    sample_uniform,
)

CODE_SEED = 0x5EED_C0DE  # fixes every generated inner code


@dataclass(frozen=True)
class SharedRandomness:
    """The secret string shared by encoder and decoder, named by a 64-bit seed."""

    seed: int

    def stream(self, *tags) -> RandomStream:
        return RandomStream(self.seed, ("shared",) + tags)


def required_distance(delta0: float, n0: int) -> int:
    return math.ceil(2 * delta0 * n0 + 1 - 1e-9)


@lru_cache(maxsize=None)
def inner_code(n0: int, k0: int, min_d: int) -> LinearBlockCode:
    return generate_code(n0, k0, min_d, RandomStream(CODE_SEED, ("inner", n0, k0, min_d)))


@dataclass(frozen=True)
class HammingLdcParams:
    k: int
    epsilon: float
    delta0: float = 0.1
    gamma0: float = 1 / 3
    c_eps: float = 2.6
    n0_min: int = 6
    n0_override: int | None = None
    k0_override: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")

    @property
    def n0(self) -> int:
        if self.n0_override is not None:
            return self.n0_override
        return max(math.ceil(self.c_eps * math.log(1 / self.epsilon) - 1e-9), self.n0_min)

    @property
    def k0(self) -> int:
        if self.k0_override is not None:
            return self.k0_override
        return max(1, math.ceil(self.gamma0 * self.n0))

    @property
    def min_d(self) -> int:
        """Smallest integer at least ``2 delta0 n0 + 1``."""
        return required_distance(self.delta0, self.n0)

    @property
    def blocks(self) -> int:
        return math.ceil(self.k / self.k0)

    @property
    def payload_length(self) -> int:
        return self.blocks * self.n0

    @property
    def delta(self) -> float:
        return self.delta0 / 3

    @property
    def code(self) -> LinearBlockCode:
        return inner_code(self.n0, self.k0, self.min_d)

    # oblivious-model extras
    @property
    def kappa(self) -> int:
        return self.n0

    @property
    def eps_pi(self) -> float:
        return self.epsilon / 10

    @property
    def seed_length(self) -> int:
        return description_length(self.payload_length, self.kappa, self.eps_pi)

    @property
    def seed_code(self) -> SeedCode:
        return _seed_code_for(self.seed_length)

    def length(self, model: str = "shared") -> int:
        if model == "shared":
            return self.payload_length
        return self.payload_length + self.seed_code.length


@lru_cache(maxsize=None)
def _seed_code_for(seed_len: int) -> SeedCode:
    return build_seed_code(seed_len, RandomStream(CODE_SEED, ("seed-code", seed_len)))


@dataclass(frozen=True)
class SharedCodeword:
    z: BitString
    params: HammingLdcParams


@dataclass(frozen=True)
class ObliviousCodeword:
    y: BitString
    z_seed: BitString
    params: HammingLdcParams

    @property
    def bits(self) -> BitString:
        return self.y + self.z_seed


def _inner_encode_all(x: BitString, p: HammingLdcParams) -> BitString:
    if x.length != p.k:
        raise ValueError(f"message has {x.length} bits, expected {p.k}")
    code = p.code
    msgs = np.stack([b.bits for b in partition_blocks(x, p.k0, 0)])
    return BitString(((msgs.astype(np.int64) @ code.generator) % 2).ravel())


@lru_cache(maxsize=256)
def _uniform_perm(seed: int, path: tuple, n: int) -> Permutation:
    return sample_uniform(n, RandomStream(seed, path))


def shared_permutation(shared: SharedRandomness, n: int, *tags) -> Permutation:
    st = shared.stream("perm", *tags)
    return _uniform_perm(st.seed, st.path, n)


def shared_mask(shared: SharedRandomness, n: int, *tags) -> BitString:
    return shared.stream("mask", *tags).draw_bits(n)


def mask_bits_at(shared: SharedRandomness, positions: np.ndarray, *tags) -> np.ndarray:
    """Mask bits at chosen positions, regenerated on demand from the stream."""
    st = shared.stream("mask", *tags)
    pos = np.asarray(positions, dtype=np.int64)
    lo, hi = int(pos.min()), int(pos.max())
    return st.bits_at(lo, hi - lo + 1)[pos - lo]


def encode_shared(x: BitString, shared: SharedRandomness, p: HammingLdcParams, *,
                  permutation: Permutation | None = None, mask: BitString | None = None,
                  tags: tuple = ()) -> SharedCodeword:
    """Inner-encode, permute all bits, then add the mask.

    ``permutation`` and ``mask`` override the shared draws (debug hooks).
    """
    y_prime = _inner_encode_all(x, p)
    n = y_prime.length
    pi = permutation if permutation is not None else shared_permutation(shared, n, *tags)
    w = mask if mask is not None else shared_mask(shared, n, *tags)
    return SharedCodeword(xor(apply(pi, y_prime), w), p)


def block_positions(i: int, p: HammingLdcParams) -> np.ndarray:
    """Positions, before permutation, of the inner codeword holding bit i."""
    if not 0 <= i < p.k:
        raise IndexError(f"bit index {i} outside [0, {p.k})")
    b = i // p.k0
    return b * p.n0 + np.arange(p.n0, dtype=np.int64)


def decode_shared(i: int, word: QueryOracle, shared: SharedRandomness, p: HammingLdcParams, *,
                  permutation: Permutation | None = None, zero_mask: bool = False,
                  tags: tuple = ()) -> int:
    n = p.payload_length
    pi = permutation if permutation is not None else shared_permutation(shared, n, *tags)
    pos = pi.forward[block_positions(i, p)]
    bits = word.read(pos)
    if not zero_mask:
        bits = bits ^ mask_bits_at(shared, pos, *tags)
    v = nearest_message_index(p.code, bits)
    return (v >> (p.k0 - 1 - i % p.k0)) & 1


@lru_cache(maxsize=256)
def _expand_cached(seed_bytes: bytes, seed_len: int, n: int, kappa: int, eps_pi: float) -> Permutation:
    seed = BitString.from_bytes(seed_bytes, seed_len)
    return expand_description(PermutationDescription(seed, n, kappa, eps_pi))


def payload_permutation(seed: BitString, p: HammingLdcParams) -> Permutation:
    return _expand_cached(seed.to_bytes(), seed.length, p.payload_length, p.kappa, p.eps_pi)


def encode_oblivious(x: BitString, rs: RandomStream, p: HammingLdcParams) -> ObliviousCodeword:
    sc = p.seed_code
    if p.seed_length > sc.capacity:
        raise ValueError("seed does not fit the seed code")
    seed = rs.derive("perm-seed").draw_bits(p.seed_length)
    pi = payload_permutation(seed, p)
    y = apply(pi, _inner_encode_all(x, p))
    return ObliviousCodeword(y, seed_encode(sc, seed), p)


def recover_seed(word: QueryOracle, p: HammingLdcParams, rs: RandomStream, offset: int | None = None) -> BitString:
    off = p.payload_length if offset is None else offset
    return seed_local_decode(p.seed_code, word, rs, p.seed_length, offset=off)


def decode_oblivious(i: int, word: QueryOracle, p: HammingLdcParams, rs: RandomStream, *,
                     offset: int = 0) -> int:
    """Recover the seed from the second half, then read one payload block.

    Raises :class:`DecodeFailure` when the seed cannot be recovered.
    """
    seed = recover_seed(word, p, rs.derive("seed-sample"), offset + p.payload_length)
    pi = payload_permutation(seed, p)
    pos = offset + pi.forward[block_positions(i, p)]
    v = nearest_message_index(p.code, word.read(pos))
    return (v >> (p.k0 - 1 - i % p.k0)) & 1


# ---------------------------------------------------------------- flexible

def level_count(k: int) -> int:
    return math.ceil(math.log2(max(math.log2(max(k, 2)), 1))) + 1


def level_epsilon(i: int) -> float:
    return 2.0 ** -(2 ** i)


@dataclass(frozen=True)
class FlexibleParams:
    """Level schedule ``eps_i = 2^-2^i`` for ``i = 1..L`` plus the column code."""

    k: int
    model: str = "shared"
    delta0: float = 0.1
    gamma0: float = 1 / 3
    c_eps: float = 2.6

    def __post_init__(self):
        if self.model not in ("shared", "oblivious"):
            raise ValueError("model must be shared or oblivious")

    @cached_property
    def levels(self) -> list[tuple[int, HammingLdcParams]]:
        out = []
        for i in range(1, level_count(self.k) + 1):
            lp = HammingLdcParams(self.k, level_epsilon(i), self.delta0, self.gamma0, self.c_eps)
            if lp.n0 <= self.k:
                out.append((i, lp))
        return out

    @property
    def rows(self) -> int:
        return len(self.levels)

    @cached_property
    def row_length(self) -> int:
        return max(lp.length(self.model) for _, lp in self.levels)

    @property
    def column_n0(self) -> int:
        return math.ceil(self.rows / self.gamma0)

    @cached_property
    def column_code(self) -> LinearBlockCode:
        n0c = self.column_n0
        return inner_code(n0c, self.rows, required_distance(self.delta0, n0c))

    @property
    def n(self) -> int:
        return self.row_length * self.column_n0

    @property
    def delta(self) -> float:
        """Tolerated error fraction: column-code share times the weakest level's."""
        return self.delta0 * min(lp.delta for _, lp in self.levels)

    def select_level(self, epsilon: float) -> int | None:
        """Position in :attr:`levels` of the smallest i with eps_i <= epsilon."""
        for pos, (i, _) in enumerate(self.levels):
            if level_epsilon(i) <= epsilon:
                return pos
        return None


@dataclass(frozen=True)
class FlexibleCodeword:
    bits: BitString
    params: FlexibleParams


def _level_word(x: BitString, lp: HammingLdcParams, rnd, model: str, level: int) -> BitString:
    if model == "shared":
        return encode_shared(x, rnd, lp, tags=("level", level)).z
    return encode_oblivious(x, rnd.derive("level", level), lp).bits


def encode_flexible(x: BitString, randomness, fp: FlexibleParams) -> FlexibleCodeword:
    """``randomness`` is a SharedRandomness (shared model) or RandomStream."""
    rows = []
    for i, lp in fp.levels:
        row = _level_word(x, lp, randomness, fp.model, i).bits
        rows.append(np.concatenate([row, np.zeros(fp.row_length - row.size, dtype=np.uint8)]))
    matrix = np.stack(rows)  # rows x row_length
    cols = (matrix.T.astype(np.int64) @ fp.column_code.generator) % 2
    return FlexibleCodeword(BitString(cols.astype(np.uint8).ravel()), fp)


class ColumnOracle:
    """Presents one matrix row as a word; reading bit j decodes column j."""

    def __init__(self, word: QueryOracle, fp: FlexibleParams, row: int):
        self._word = word
        self._fp = fp
        self._row = row
        self._cache = np.full(fp.row_length, -1, dtype=np.int64)  # decoded column messages

    @property
    def length(self) -> int:
        return self._fp.row_length

    @property
    def total(self) -> int:
        return self._word.total

    def read(self, positions) -> np.ndarray:
        pos = np.asarray(positions, dtype=np.int64).ravel()
        fp = self._fp
        n0c = fp.column_n0
        if pos.size and (pos.min() < 0 or pos.max() >= fp.row_length):
            raise IndexError("query outside the matrix row")
        todo = np.unique(pos[self._cache[pos] < 0])
        if todo.size:
            idx = (todo[:, None] * n0c + np.arange(n0c)[None, :]).ravel()
            cols = self._word.read(idx).reshape(todo.size, n0c)
            self._cache[todo] = nearest_message_indices(fp.column_code, cols)
        shift = fp.rows - 1 - self._row
        return ((self._cache[pos] >> shift) & 1).astype(np.uint8)


def _level_decode(i: int, oracle, lp: HammingLdcParams, randomness, model: str, level: int,
                  rs: RandomStream | None) -> int:
    if model == "shared":
        return decode_shared(i, oracle, randomness, lp, tags=("level", level))
    return decode_oblivious(i, oracle, lp, rs if rs is not None else RandomStream(0))


def decode_flexible(i: int, word: QueryOracle, epsilon: float, randomness, fp: FlexibleParams,
                    rs: RandomStream | None = None) -> int:
    """Decode bit i at failure probability ``epsilon``.

    ``randomness`` is the shared string in the shared model and ignored in the
    oblivious one; ``rs`` is the decoder's private coins.
    """
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    pos = fp.select_level(epsilon)
    levels = fp.levels
    if pos is not None:
        level, lp = levels[pos]
        return _level_decode(i, ColumnOracle(word, fp, pos), lp, randomness, fp.model, level, rs)
    # no level is fine enough: read everything and decode the finest level
    all_bits = word.read(np.arange(fp.n)).reshape(fp.row_length, fp.column_n0)
    msgs = nearest_message_indices(fp.column_code, all_bits)
    last = len(levels) - 1
    level, lp = levels[last]
    row = ((msgs >> (fp.rows - 1 - last)) & 1).astype(np.uint8)[:lp.length(fp.model)]
    return _level_decode(i, QueryOracle(BitString(row)), lp, randomness, fp.model, level, rs)


# ---------------------------------------------------------------- serialization

def serialize(bits: BitString, header: dict) -> bytes:
    """One text header line, an 8-byte length, then the packed bits."""
    line = " ".join(f"{k}={v}" for k, v in header.items())
    if "\n" in line:
        raise ValueError("header values must not contain newlines")
    return line.encode("ascii") + b"\n" + bits.length.to_bytes(8, "little") + bits.to_bytes()


def deserialize(data: bytes) -> tuple[BitString, dict]:
    nl = data.index(b"\n")
    header = dict(item.split("=", 1) for item in data[:nl].decode("ascii").split())
    length = int.from_bytes(data[nl + 1:nl + 9], "little")
    return BitString.from_bytes(data[nl + 9:], length), header
