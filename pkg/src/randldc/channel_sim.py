"""Adversarial channels for Hamming and edit errors.

An adversary gets an :class:`AdversaryContext`.  In the oblivious model the
context carries only the word length, the budget and public block structure;
the codeword is attached only in the shared-randomness model.  Positions are
0-based.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

from .bitcore import BitString, RandomStream
from .codes_edit import Delete, EditScript, Insert, Substitute, apply_edit_script


@dataclass(frozen=True)
class HammingPattern:
    positions: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.positions)


ErrorPattern = Union[HammingPattern, EditScript]


@dataclass(frozen=True)
class AdversaryContext:
    model: str                 # "shared" or "oblivious"
    error_type: str            # "hamming" or "edit"
    n: int
    budget: int
    visible_codeword: BitString | None = None
    block_len: int | None = None  # public parameter, no codeword content

    def __post_init__(self):
        if self.model not in ("shared", "oblivious"):
            raise ValueError("model must be shared or oblivious")
        if self.error_type not in ("hamming", "edit"):
            raise ValueError("error_type must be hamming or edit")
        if self.model == "oblivious" and self.visible_codeword is not None:
            raise ValueError("an oblivious adversary cannot see the codeword")


def budget_for(delta: float, n: int) -> int:
    return int(np.floor(delta * n + 1e-9))


@dataclass(frozen=True)
class Strategy:
    name: str
    generator: Callable[[AdversaryContext, RandomStream], ErrorPattern]
    needs_codeword: bool = False

    def __call__(self, ctx: AdversaryContext, rs: RandomStream) -> ErrorPattern:
        if not self.needs_codeword:
            ctx = replace(ctx, visible_codeword=None)
        pattern = self.generator(ctx, rs)
        check_budget(pattern, ctx.budget)
        return pattern


class BudgetExceeded(ValueError):
    pass


def check_budget(pattern: ErrorPattern, budget: int) -> None:
    if isinstance(pattern, HammingPattern):
        if len(set(pattern.positions)) != len(pattern.positions):
            raise ValueError("repeated flip position")
    if len(pattern) > budget:
        raise BudgetExceeded(f"pattern of size {len(pattern)} exceeds budget {budget}")


def apply_channel(word: BitString, pattern: ErrorPattern, budget: int | None = None) -> BitString:
    if budget is not None:
        check_budget(pattern, budget)
    if isinstance(pattern, HammingPattern):
        bits = word.bits.copy()
        pos = np.asarray(pattern.positions, dtype=np.int64)
        if pos.size and (pos.min() < 0 or pos.max() >= bits.size):
            raise IndexError("flip position outside the word")
        bits[pos] ^= 1
        return BitString(bits)
    return apply_edit_script(word, pattern)


# ---------------------------------------------------------------- Hamming zoo

def _prefix_flip(ctx, rs):
    return HammingPattern(tuple(range(min(ctx.budget, ctx.n))))


def _random_positions(ctx, rs):
    return HammingPattern(tuple(sorted(rs.sample(ctx.n, min(ctx.budget, ctx.n)))))


def _burst(ctx, rs):
    m = min(ctx.budget, ctx.n)
    start = rs.randbelow(ctx.n - m + 1)
    return HammingPattern(tuple(range(start, start + m)))


def _targeted(ctx, rs):
    # flip ones of the visible word, starting from a random offset
    ones = np.nonzero(ctx.visible_codeword.bits)[0]
    if ones.size == 0:
        return HammingPattern(())
    off = rs.randbelow(ones.size)
    pick = np.roll(ones, -off)[:ctx.budget]
    return HammingPattern(tuple(sorted(int(p) for p in pick)))


# ---------------------------------------------------------------- edit zoo

def _prefix_delete(ctx, rs):
    return EditScript(tuple(Delete(0) for _ in range(min(ctx.budget, ctx.n))))


def _burst_delete(ctx, rs):
    m = min(ctx.budget, ctx.n)
    start = rs.randbelow(ctx.n - m + 1)
    return EditScript(tuple(Delete(start) for _ in range(m)))


def _random_script(ctx, rs):
    ops, length = [], ctx.n
    for _ in range(ctx.budget):
        kind = rs.randbelow(3)
        if kind == 0 or length == 0:
            ops.append(Insert(rs.randbelow(length + 1), rs.randbelow(2)))
            length += 1
        elif kind == 1:
            ops.append(Delete(rs.randbelow(length)))
            length -= 1
        else:
            ops.append(Substitute(rs.randbelow(length), rs.randbelow(2)))
    return EditScript(tuple(ops))


def _block_boundary(ctx, rs):
    # one deletion at each of `budget` distinct block boundaries
    b = ctx.block_len or max(1, ctx.n // max(ctx.budget, 1))
    bounds = list(range(b, ctx.n, b))
    m = min(ctx.budget, len(bounds))
    chosen = sorted((bounds[i] for i in rs.sample(len(bounds), m)), reverse=True)
    return EditScript(tuple(Delete(p - 1) for p in chosen))


def _insert_flood(ctx, rs):
    pos = rs.randbelow(ctx.n + 1)
    return EditScript(tuple(Insert(pos, rs.randbelow(2)) for _ in range(ctx.budget)))


HAMMING_STRATEGIES = {
    "prefix-flip": Strategy("prefix-flip", _prefix_flip),
    "random-positions": Strategy("random-positions", _random_positions),
    "burst": Strategy("burst", _burst),
    "targeted": Strategy("targeted", _targeted, needs_codeword=True),
}

EDIT_STRATEGIES = {
    "prefix-delete": Strategy("prefix-delete", _prefix_delete),
    "burst-delete": Strategy("burst-delete", _burst_delete),
    "random-script": Strategy("random-script", _random_script),
    "block-boundary": Strategy("block-boundary", _block_boundary),
    "insert-flood": Strategy("insert-flood", _insert_flood),
}


def builtin_strategies(error_type: str, model: str) -> list[Strategy]:
    zoo = HAMMING_STRATEGIES if error_type == "hamming" else EDIT_STRATEGIES
    return [s for s in zoo.values() if model == "shared" or not s.needs_codeword]


def strategy_by_name(error_type: str, name: str) -> Strategy:
    zoo = HAMMING_STRATEGIES if error_type == "hamming" else EDIT_STRATEGIES
    if name not in zoo:
        raise KeyError(f"unknown {error_type} strategy {name!r}; choose from {sorted(zoo)}")
    return zoo[name]


def corrupt(word: BitString, strategy: Strategy, ctx: AdversaryContext, rs: RandomStream) -> BitString:
    """Generate a pattern and push the word through the channel."""
    return apply_channel(word, strategy(ctx, rs), ctx.budget)
