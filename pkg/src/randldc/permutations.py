"""Uniform permutations and seed-described pseudorandom permutations.

The seed-described family stands in for a provably k-wise almost independent
construction: the seed keys a pseudorandom stream that drives Fisher-Yates.
It honours the description-length contract and is empirically close to
uniform on small tuples, but its dependence bound is heuristic.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .bitcore import BitString, RandomStream, SymbolString

# description length d = C1 * kappa * ceil(log2 n) + C2 * ceil(log2(1 / eps))
C1 = 1
C2 = 1


@dataclass(frozen=True, eq=False)
class Permutation:
    """Bijection on ``range(n)``; position ``i`` of the input moves to ``forward[i]``."""

    forward: np.ndarray
    inverse: np.ndarray

    @classmethod
    def from_forward(cls, forward) -> "Permutation":
        fwd = np.array(forward, dtype=np.int64)
        if fwd.ndim != 1 or (fwd.size and (fwd.min() < 0 or fwd.max() >= fwd.size)):
            raise ValueError("not a permutation")
        inv = np.full_like(fwd, -1)
        inv[fwd] = np.arange(fwd.size, dtype=np.int64)
        if inv.size and inv.min() < 0:
            raise ValueError("not a permutation")
        fwd.setflags(write=False)
        inv.setflags(write=False)
        return cls(fwd, inv)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls.from_forward(np.arange(n))

    @property
    def n(self) -> int:
        return int(self.forward.size)

    def invert(self) -> "Permutation":
        return Permutation(self.inverse, self.forward)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.forward, other.forward)


def _fisher_yates(n: int, rs: RandomStream) -> np.ndarray:
    """Swap position i with a uniform j <= i, for i = n-1 down to 1."""
    bounds = np.arange(n, 1, -1, dtype=np.int64)
    js = rs.bounded(bounds).tolist()
    perm = list(range(n))
    for i, j in zip(range(n - 1, 0, -1), js):
        perm[i], perm[j] = perm[j], perm[i]
    return np.asarray(perm, dtype=np.int64)


def sample_uniform(n: int, rs: RandomStream) -> Permutation:
    if n < 1:
        raise ValueError("n must be positive")
    return Permutation.from_forward(_fisher_yates(n, rs))


def description_length(n: int, kappa: int, eps_pi: float) -> int:
    """Seed bits for a kappa-wise eps_pi-dependent permutation on ``range(n)``."""
    log_n = max(1, math.ceil(math.log2(max(n, 2))))
    return C1 * kappa * log_n + C2 * max(1, math.ceil(math.log2(1 / eps_pi)))


@dataclass(frozen=True)
class PermutationDescription:
    seed_bits: BitString
    n: int
    kappa: int
    delta_dep: float

    @property
    def length(self) -> int:
        return description_length(self.n, self.kappa, self.delta_dep)


def expand_description(pd: PermutationDescription) -> Permutation:
    if pd.seed_bits.length != pd.length:
        raise ValueError(f"seed has {pd.seed_bits.length} bits, expected {pd.length}")
    digest = hashlib.blake2b(pd.seed_bits.to_bytes() + pd.seed_bits.length.to_bytes(4, "little"),
                             digest_size=8, person=b"randldc-perm").digest()
    rs = RandomStream(int.from_bytes(digest, "little"), ("expand", pd.n))
    return Permutation.from_forward(_fisher_yates(pd.n, rs))


def apply(p: Permutation, s):
    """``output[p.forward[i]] = input[i]``."""
    if isinstance(s, BitString):
        if s.length != p.n:
            raise ValueError("length mismatch")
        out = np.empty(p.n, dtype=np.uint8)
        out[p.forward] = s.bits
        return BitString(out)
    if isinstance(s, SymbolString):
        if s.length != p.n:
            raise ValueError("length mismatch")
        out = [0] * p.n
        for i, v in enumerate(s.symbols):
            out[p.forward[i]] = v
        return SymbolString(tuple(out), s.width)
    seq = list(s)
    if len(seq) != p.n:
        raise ValueError("length mismatch")
    out = [None] * p.n
    for i, v in enumerate(seq):
        out[p.forward[i]] = v
    return "".join(out) if isinstance(s, str) else out
