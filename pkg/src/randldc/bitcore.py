"""Bit strings, symbol strings, block partitioning and seeded random streams.

Bits are held as a read-only ``uint8`` array of zeros and ones.  Packing to
bytes is least-significant-bit first, so bit ``i`` lands in byte ``i // 8`` at
bit position ``i % 8`` regardless of word size.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class BitString:
    """Immutable sequence of bits."""

    __slots__ = ("bits",)

    def __init__(self, bits: Iterable[int] | np.ndarray | str = ()):
        if isinstance(bits, str):
            arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
        else:
            arr = np.asarray(bits if isinstance(bits, np.ndarray) else list(bits), dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError("bits must be one-dimensional")
        if arr.size and arr.max() > 1:
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "bits", _frozen(arr.astype(np.uint8, copy=True)))

    def __setattr__(self, name, value):
        raise AttributeError("BitString is immutable")

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_int(cls, value: int, width: int) -> "BitString":
        """Binary representation of ``value``, most significant bit first."""
        if value < 0 or value >> width:
            raise ValueError(f"{value} does not fit in {width} bits")
        return cls([(value >> (width - 1 - i)) & 1 for i in range(width)])

    @classmethod
    def from_bytes(cls, data: bytes, length: int) -> "BitString":
        arr = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
        if length > arr.size:
            raise ValueError("not enough bytes for requested length")
        return cls(arr[:length])

    @property
    def length(self) -> int:
        return int(self.bits.size)

    def __len__(self) -> int:
        return int(self.bits.size)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return BitString(self.bits[idx])
        return int(self.bits[idx])

    def __iter__(self):
        return iter(self.bits.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self.bits.size == other.bits.size and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.bits.size, self.bits.tobytes()))

    def __add__(self, other: "BitString") -> "BitString":
        return BitString(np.concatenate([self.bits, other.bits]))

    def __repr__(self) -> str:
        s = str(self)
        return f"BitString('{s if len(s) <= 64 else s[:61] + '...'}')"

    def __str__(self) -> str:
        return (self.bits + ord("0")).tobytes().decode("ascii")

    def to_int(self) -> int:
        """Inverse of :meth:`from_int` (most significant bit first)."""
        v = 0
        for b in self.bits.tolist():
            v = (v << 1) | b
        return v

    def to_bytes(self) -> bytes:
        return np.packbits(self.bits, bitorder="little").tobytes()

    def weight(self) -> int:
        return int(self.bits.sum())


def concat(parts: Sequence[BitString]) -> BitString:
    if not parts:
        return BitString()
    return BitString(np.concatenate([p.bits for p in parts]))


def xor(a: BitString, b: BitString) -> BitString:
    if a.length != b.length:
        raise ValueError(f"xor of unequal lengths {a.length} and {b.length}")
    return BitString(a.bits ^ b.bits)


@dataclass(frozen=True)
class SymbolString:
    """Sequence of ``width``-bit symbols; symbol bits are most significant first."""

    symbols: tuple[int, ...]
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("symbol width must be positive")
        lim = 1 << self.width
        for s in self.symbols:
            if not 0 <= s < lim:
                raise ValueError(f"symbol {s} out of range for width {self.width}")

    @property
    def length(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return SymbolString(self.symbols[idx], self.width)
        return self.symbols[idx]

    @classmethod
    def from_bits(cls, bits: BitString, width: int) -> "SymbolString":
        if bits.length % width:
            raise ValueError("bit length not divisible by symbol width")
        arr = bits.bits.reshape(-1, width).astype(np.int64)
        weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
        return cls(tuple(int(v) for v in arr @ weights), width)

    def to_bits(self) -> BitString:
        if not self.symbols:
            return BitString()
        vals = np.asarray(self.symbols, dtype=np.int64)[:, None]
        shifts = np.arange(self.width - 1, -1, -1, dtype=np.int64)[None, :]
        return BitString(((vals >> shifts) & 1).ravel())


def partition_blocks(s: BitString | SymbolString, block_len: int, pad_value: int = 0) -> list:
    """Cut ``s`` into consecutive blocks of ``block_len``; the last one is padded."""
    if block_len < 1:
        raise ValueError("block_len must be at least 1")
    if isinstance(s, SymbolString):
        out = []
        for start in range(0, s.length, block_len):
            chunk = list(s.symbols[start:start + block_len])
            chunk += [pad_value] * (block_len - len(chunk))
            out.append(SymbolString(tuple(chunk), s.width))
        return out
    out = []
    for start in range(0, s.length, block_len):
        chunk = s.bits[start:start + block_len]
        if chunk.size < block_len:
            chunk = np.concatenate([chunk, np.full(block_len - chunk.size, pad_value, dtype=np.uint8)])
        out.append(BitString(chunk))
    return out


_WORD_BITS = 512  # one blake2b digest


def _tag_bytes(tag) -> bytes:
    return repr(tag).encode("utf-8")


@dataclass
class RandomStream:
    """Deterministic bit source keyed by a 64-bit seed and a tag path.

    Block ``j`` of the stream is ``blake2b(key=seed||path, msg=j)``; bits are
    read LSB-first out of each 64-byte digest.  Substreams made with
    :meth:`derive` extend the tag path, so distinct tags give unrelated keys.
    """

    seed: int
    path: tuple = ()
    counter: int = 0
    _key: bytes = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        h = hashlib.blake2b(digest_size=32, person=b"randldc-stream")
        h.update(self.seed.to_bytes(8, "little"))
        for t in self.path:
            tb = _tag_bytes(t)
            h.update(len(tb).to_bytes(4, "little"))
            h.update(tb)
        self._key = h.digest()

    def derive(self, *tags) -> "RandomStream":
        """Independent substream for the given domain-separation tags."""
        return RandomStream(self.seed, self.path + tuple(tags))

    def _block(self, j: int) -> np.ndarray:
        blk = self._cache.get(j)
        if blk is None:
            d = hashlib.blake2b(j.to_bytes(8, "little"), key=self._key, digest_size=64).digest()
            blk = np.unpackbits(np.frombuffer(d, dtype=np.uint8), bitorder="little")
            if len(self._cache) > 4096:
                self._cache.clear()
            self._cache[j] = blk
        return blk

    def bits_at(self, start: int, n: int) -> np.ndarray:
        """Bits ``start .. start+n-1`` of the stream, without moving the counter."""
        if n <= 0:
            return np.zeros(0, dtype=np.uint8)
        first, last = start // _WORD_BITS, (start + n - 1) // _WORD_BITS
        if first == last:
            off = start - first * _WORD_BITS
            return self._block(first)[off:off + n].copy()
        parts = [self._block(j) for j in range(first, last + 1)]
        arr = np.concatenate(parts)
        off = start - first * _WORD_BITS
        return arr[off:off + n]

    def draw_bits(self, n: int) -> BitString:
        if n < 0:
            raise ValueError("n must be non-negative")
        out = BitString(self.bits_at(self.counter, n))
        self.counter += n
        return out

    def draw_uint(self, nbits: int) -> int:
        arr = self.bits_at(self.counter, nbits)
        self.counter += nbits
        return _small_uint(arr)

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection sampling."""
        if n < 1:
            raise ValueError("n must be positive")
        if n == 1:
            return 0
        nbits = (n - 1).bit_length()
        while True:
            v = self.draw_uint(nbits)
            if v < n:
                return v

    def draw_words(self, count: int, nbits: int = 32) -> np.ndarray:
        """``count`` independent ``nbits``-bit unsigned integers (nbits <= 63)."""
        if count <= 0:
            return np.zeros(0, dtype=np.int64)
        arr = self.bits_at(self.counter, count * nbits).reshape(count, nbits).astype(np.int64)
        self.counter += count * nbits
        return arr @ (np.int64(1) << np.arange(nbits, dtype=np.int64))

    def draw_uint64s(self, count: int) -> np.ndarray:
        """``count`` values, each equal to what ``draw_uint(64)`` would return in turn."""
        arr = self.bits_at(self.counter, count * 64).reshape(count, 64)
        self.counter += count * 64
        return np.packbits(arr, axis=1, bitorder="little").copy().view("<u8").ravel()

    def random(self) -> float:
        return self.draw_uint(53) / float(1 << 53)

    def sample(self, population: int, count: int) -> list[int]:
        """``count`` distinct values from ``range(population)`` (partial Fisher-Yates)."""
        if count > population:
            raise ValueError("sample larger than population")
        offsets = self.bounded(np.arange(population, population - count, -1, dtype=np.int64)).tolist()
        pool = list(range(population))
        for i, off in enumerate(offsets):
            j = i + off
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:count]

    def bounded(self, bounds: np.ndarray) -> np.ndarray:
        """Uniform ``v < bound`` for every entry of ``bounds``, by per-entry rejection."""
        bounds = np.asarray(bounds, dtype=np.int64)
        if bounds.size and (bounds.min() < 1 or bounds.max() > 1 << 32):
            raise ValueError("bounds must lie in [1, 2^32]")
        nbits = np.maximum(1, np.ceil(np.log2(np.maximum(bounds, 2))).astype(np.int64))
        out = np.full(bounds.size, -1, dtype=np.int64)
        pending = np.arange(bounds.size)
        while pending.size:
            words = self.draw_words(pending.size, 32)
            vals = words >> (32 - nbits[pending])
            ok = vals < bounds[pending]
            out[pending[ok]] = vals[ok]
            pending = pending[~ok]
        return out

    def numpy_generator(self) -> np.random.Generator:
        """A numpy generator seeded from the next 128 stream bits."""
        return np.random.Generator(np.random.PCG64(self.draw_uint(128)))


def _small_uint(arr: np.ndarray) -> int:
    # bit i of the array is bit i of the integer
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


def draw_bits(rs: RandomStream, n: int) -> BitString:
    return rs.draw_bits(n)


class DecodeFailure(Exception):
    """A decoder gave up (as opposed to returning a possibly wrong answer)."""


class QueryOracle:
    """Logged read access to a received word; the unit of query accounting."""

    def __init__(self, word: BitString):
        self._bits = word.bits
        self._reads: list = []  # index arrays or (start, stop) ranges
        self.total = 0

    @property
    def length(self) -> int:
        return int(self._bits.size)

    def read(self, positions) -> np.ndarray:
        pos = np.asarray(positions, dtype=np.int64).ravel()
        if pos.size and (pos.min() < 0 or pos.max() >= self._bits.size):
            raise IndexError("query outside the received word")
        self._reads.append(pos)
        self.total += int(pos.size)
        return self._bits[pos]

    def read_range(self, start: int, stop: int) -> np.ndarray:
        """Bits ``[start, stop)`` clamped to the word (never wraps)."""
        start = max(0, start)
        stop = min(self._bits.size, stop)
        if stop <= start:
            return np.zeros(0, dtype=np.uint8)
        self._reads.append((start, stop))
        self.total += stop - start
        return self._bits[start:stop]

    def log_ranges(self, ranges: np.ndarray) -> None:
        """Record reads ``[start, stop)`` made directly on :attr:`bits`."""
        for start, stop in np.asarray(ranges, dtype=np.int64).reshape(-1, 2).tolist():
            if stop > start:
                self._reads.append((start, stop))
                self.total += stop - start

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    def positions(self) -> np.ndarray:
        if not self._reads:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([np.arange(*r, dtype=np.int64) if isinstance(r, tuple) else r
                               for r in self._reads])

    def distinct(self) -> int:
        return int(np.unique(self.positions()).size)
