"""Arithmetic in GF(2^m) with log/antilog tables, scalar and vectorized."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

# Primitive polynomials, bit i = coefficient of x^i.
IRREDUCIBLE = {
    2: 0b111,                  # x^2+x+1
    3: 0b1011,                 # x^3+x+1
    4: 0b10011,                # x^4+x+1
    5: 0b100101,               # x^5+x^2+1
    6: 0b1000011,              # x^6+x+1
    7: 0b10001001,             # x^7+x^3+1
    8: 0b100011101,            # x^8+x^4+x^3+x^2+1
    9: 0b1000010001,           # x^9+x^4+1
    10: 0b10000001001,         # x^10+x^3+1
    11: 0b100000000101,        # x^11+x^2+1
    12: 0b1000001010011,       # x^12+x^6+x^4+x+1
    13: 0b10000000011011,      # x^13+x^4+x^3+x+1
    14: 0b100010001000011,     # x^14+x^10+x^6+x+1
    15: 0b1000000000000011,    # x^15+x+1
    16: 0b10001000000001011,   # x^16+x^12+x^3+x+1
}


class GF2m:
    """The field GF(2^m); elements are ints in ``[0, 2^m)``, alpha = 2."""

    def __init__(self, m: int):
        if m not in IRREDUCIBLE:
            raise ValueError(f"no polynomial for m={m}")
        self.m = m
        self.order = 1 << m
        self.poly = IRREDUCIBLE[m]
        q1 = self.order - 1
        exp = np.zeros(2 * q1, dtype=np.int64)
        log = np.full(self.order, -1, dtype=np.int64)
        x = 1
        for i in range(q1):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.order:
                x ^= self.poly
        if x != 1 or len(set(exp[:q1].tolist())) != q1:
            raise ValueError(f"polynomial for m={m} is not primitive")
        exp[q1:] = exp[:q1]
        self.exp = exp
        self.log = log
        self._exp_list = exp.tolist()
        self._log_list = log.tolist()

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp_list[self._log_list[a] + self._log_list[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return self._exp_list[(self.order - 1 - self._log_list[a]) % (self.order - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e == 0:
            return 1
        if a == 0:
            return 0
        return self._exp_list[(self._log_list[a] * e) % (self.order - 1)]

    def poly_eval(self, coeffs, x: int) -> int:
        """Horner evaluation; ``coeffs[i]`` multiplies ``x^i``."""
        acc = 0
        for c in reversed(list(coeffs)):
            acc = self.mul(acc, x) ^ c
        return acc

    # vectorized helpers
    def vmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        la = self.log[a]
        lb = self.log[b]
        out = self.exp[np.where(la < 0, 0, la) + np.where(lb < 0, 0, lb)]
        return np.where((la < 0) | (lb < 0), 0, out)

    def vinv(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of 0")
        return self.exp[(self.order - 1 - self.log[a]) % (self.order - 1)]

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Matrix product over the field (small matrices)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if a.shape[0] * a.shape[1] * b.shape[1] <= 1 << 20:
            prod = self.vmul(a[:, :, None], b[None, :, :])
            return np.bitwise_xor.reduce(prod, axis=1) if a.shape[1] else np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
        out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
        for t in range(a.shape[1]):
            out ^= self.vmul(a[:, t:t + 1], b[t:t + 1, :])
        return out

    def solve(self, a: np.ndarray, rhs: np.ndarray):
        """One solution of ``a @ x = rhs`` or None if inconsistent.

        Free variables are set to zero.
        """
        a = np.array(a, dtype=np.int64)
        rhs = np.array(rhs, dtype=np.int64)
        rows, cols = a.shape
        aug = np.concatenate([a, rhs[:, None]], axis=1)
        pivots = []
        r = 0
        for c in range(cols):
            if r == rows:
                break
            nz = np.nonzero(aug[r:, c])[0]
            if nz.size == 0:
                continue
            p = r + int(nz[0])
            if p != r:
                aug[[r, p]] = aug[[p, r]]
            aug[r] = self.vmul(aug[r], np.full(cols + 1, self.inv(int(aug[r, c]))))
            col = aug[:, c].copy()
            col[r] = 0
            mask = col != 0
            if mask.any():
                aug[mask] ^= self.vmul(col[mask][:, None], aug[r][None, :])
            pivots.append(c)
            r += 1
        if np.any(aug[r:, cols] != 0):
            return None
        x = np.zeros(cols, dtype=np.int64)
        for i, c in enumerate(pivots):
            x[c] = aug[i, cols]
        return x

    def inverse(self, a: np.ndarray) -> np.ndarray:
        """Inverse of a square matrix by Gauss-Jordan; raises if singular."""
        a = np.array(a, dtype=np.int64)
        n = a.shape[0]
        aug = np.concatenate([a, np.eye(n, dtype=np.int64)], axis=1)
        for c in range(n):
            nz = np.nonzero(aug[c:, c])[0]
            if nz.size == 0:
                raise ZeroDivisionError("singular matrix")
            p = c + int(nz[0])
            if p != c:
                aug[[c, p]] = aug[[p, c]]
            aug[c] = self.vmul(aug[c], np.full(2 * n, self.inv(int(aug[c, c]))))
            col = aug[:, c].copy()
            col[c] = 0
            mask = col != 0
            if mask.any():
                aug[mask] ^= self.vmul(col[mask][:, None], aug[c][None, :])
        return aug[:, n:]


@lru_cache(maxsize=None)
def field(m: int) -> GF2m:
    return GF2m(m)
