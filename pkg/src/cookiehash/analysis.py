"""Exact-integer experiments on the hash generators.

Everything here works over Z with Python integers, so entries never wrap.
The enumerations walk words depth-first and reuse prefix products, which
makes an exhaustive pass over all words of length <= L cost one matrix
multiplication per word.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Optional, Sequence, Union

import numpy as np

from .hasher import NORMAL, automaton_step, cookie_product
from .matrix import (
    COOKIE_GENERATORS,
    GeneratorSet,
    Mat2,
    get_preset,
    lower_unipotent,
    max_abs_entry,
    upper_unipotent,
)

DEFAULT_OP_LIMIT = 10**8
OP_LIMIT_ENV = "COOKIEHASH_OP_LIMIT"


class BudgetExceededError(RuntimeError):
    """Raised when an enumeration would exceed the configured operation limit."""


def op_limit() -> int:
    return int(os.environ.get(OP_LIMIT_ENV, DEFAULT_OP_LIMIT))


def _check_budget(alphabet: int, max_len: int, override: bool) -> int:
    total = sum(alphabet**k for k in range(1, max_len + 1))
    if not override and total > op_limit():
        raise BudgetExceededError(
            f"{total} matrix multiplications requested (limit {op_limit()}); pass override=True to force"
        )
    return total


def _mul(m, g):
    a, b, c, d = m
    e, f, g_, h = g
    return (a * e + b * g_, a * f + b * h, c * e + d * g_, c * f + d * h)


def _resolve(gset: Union[GeneratorSet, str]) -> GeneratorSet:
    return get_preset(gset) if isinstance(gset, str) else gset


def integer_hash(bits: str) -> Mat2:
    """Cookie-rule product over Z (no reduction, no padding)."""
    return cookie_product(bits)


@dataclass(frozen=True)
class CollisionWitness:
    first: str
    second: str
    product: Mat2

    def __post_init__(self):
        if self.first == self.second:
            raise ValueError("a collision needs two distinct words")


@dataclass(frozen=True)
class FreenessResult:
    generator_set: str
    max_len: int
    words_checked: int
    witness: Optional[CollisionWitness] = None

    @property
    def free(self) -> bool:
        return self.witness is None

    def summary(self) -> str:
        if self.free:
            return f"free up to length {self.max_len} ({self.words_checked} words)"
        w = self.witness
        return f"collision: {w.first} = {w.second} (after {self.words_checked} words)"


def freeness_check(gset: Union[GeneratorSet, str], max_len: int, override: bool = False) -> FreenessResult:
    """Hash every nonempty word of length <= ``max_len`` into a product map.

    Returns the first collision found (verified by recomputing both words),
    or a verdict that no two words up to that length share a product.
    """
    gset = _resolve(gset)
    _check_budget(len(gset), max_len, override)
    members = sorted(gset.members)
    gens = [(label, m.entries) for label, m in members]
    seen: dict[tuple, str] = {}
    checked = 0
    stack = [("", (1, 0, 0, 1))]
    while stack:
        word, prod = stack.pop()
        # reversed push keeps lexicographic visiting order
        for label, g in reversed(gens):
            w = word + label
            m = _mul(prod, g)
            checked += 1
            other = seen.get(m)
            if other is not None:
                pa, pb = gset.word_product(other), gset.word_product(w)
                if pa == pb:
                    return FreenessResult(gset.name, max_len, checked, CollisionWitness(other, w, pa))
            seen[m] = w
            if len(w) < max_len:
                stack.append((w, m))
    return FreenessResult(gset.name, max_len, checked)


def max_growth_profile(gset: Union[GeneratorSet, str], max_n: int, override: bool = False) -> list[tuple[int, int, str]]:
    """For n = 0..max_n: (n, max |entry| over all length-n words, least maximizing word)."""
    gset = _resolve(gset)
    _check_budget(len(gset), max_n, override)
    gens = [(label, m.entries) for label, m in sorted(gset.members)]
    best = [(1, "")] + [(-1, "")] * max_n
    stack = [("", (1, 0, 0, 1))] if max_n > 0 else []
    while stack:
        word, prod = stack.pop()
        n = len(word) + 1
        for label, g in reversed(gens):
            m = _mul(prod, g)
            top = max(abs(m[0]), abs(m[1]), abs(m[2]), abs(m[3]))
            cur = best[n][0]
            # ties go to the lexicographically least word
            if top >= cur:
                if top > cur or word + label < best[n][1]:
                    best[n] = (top, word + label)
            if n < max_n:
                stack.append((word + label, m))
    return [(n, value, w) for n, (value, w) in enumerate(best)]


def exhaustive_max_growth(gset: Union[GeneratorSet, str], n: int, override: bool = False) -> tuple[int, str]:
    """Exact maximum of max |entry| over all length-``n`` words, with the least arg-max word."""
    _, value, word = max_growth_profile(gset, n, override)[n]
    return value, word


def exact_largest_entry_a2b2(n: int) -> int:
    """Largest entry over length-n words in A(2), B(2): e_n = 2 e_{n-1} + e_{n-2}, e_0 = 1, e_1 = 2."""
    if n < 0 or n % 2:
        raise ValueError(f"n must be a nonnegative even integer, got {n}")
    prev, cur = 1, 2
    if n == 0:
        return 1
    for _ in range(n - 1):
        prev, cur = cur, 2 * cur + prev
    return cur


def cookie_max_entry(n: int) -> int:
    """Largest entry of the integer hash of ``1`` repeated n times (B^3 C^(n-3) for n >= 3)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return max_abs_entry(integer_hash("1" * n))


@dataclass(frozen=True)
class Prop2Row:
    n: int
    all_ones_max: int
    exhaustive_max: int
    argmax: str

    @property
    def holds(self) -> bool:
        return self.all_ones_max >= self.exhaustive_max


def proposition2_check(max_len: int, override: bool = False) -> list[Prop2Row]:
    """Compare the all-ones string with every bit string of each length 1..max_len."""
    _check_budget(2, max_len, override)
    gens = {label: m.entries for label, m in COOKIE_GENERATORS.items()}
    best = [(-1, "")] * (max_len + 1)
    stack = [("", (1, 0, 0, 1), NORMAL, 0, 0)] if max_len > 0 else []
    while stack:
        bits, prod, mode, ones, zeros = stack.pop()
        n = len(bits) + 1
        for bit in "10":
            label, m_mode, m_ones, m_zeros = automaton_step(mode, ones, zeros, bit)
            m = _mul(prod, gens[label])
            top = max(m)  # all entries are nonnegative
            s = bits + bit
            cur = best[n][0]
            if top > cur or (top == cur and s < best[n][1]):
                best[n] = (top, s)
            if n < max_len:
                stack.append((s, m, m_mode, m_ones, m_zeros))
    return [Prop2Row(n, cookie_max_entry(n), best[n][0], best[n][1]) for n in range(1, max_len + 1)]


@dataclass(frozen=True)
class GrowthRow:
    length: int
    trials: int
    value: float
    fitted_base: float


@dataclass
class GrowthReport:
    """Per-length growth summary.

    ``mode`` is ``"random"`` (value = mean of log2(max entry)/n) or
    ``"exhaustive-max"`` (value = bit length of the exact maximum).
    """

    preset: str
    mode: str
    rows: list[GrowthRow] = field(default_factory=list)
    seed: Optional[int] = None

    @property
    def fitted_base(self) -> float:
        return self.rows[-1].fitted_base

    def value_column(self) -> str:
        return "mean_log2_per_letter" if self.mode == "random" else "max_entry_bits"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["length", "trials", self.value_column(), "fitted_base"])
        for r in self.rows:
            value = f"{r.value:.12g}" if isinstance(r.value, float) else r.value
            writer.writerow([r.length, r.trials, value, f"{r.fitted_base:.12g}"])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"{self.mode} growth for {self.preset}" + (f" (seed {self.seed})" if self.seed is not None else "")]
        for r in self.rows:
            lines.append(f"  n={r.length:<6} trials={r.trials:<6} {self.value_column()}={r.value:.6g}  base~{r.fitted_base:.4f}")
        return "\n".join(lines)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """PCG64 stream for one trial, derived from (seed, trial) only."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def _random_word_log2(gens: list[tuple[int, int, int, int]], n: int, rng: np.random.Generator) -> float:
    prod = (1, 0, 0, 1)
    for idx in rng.integers(0, len(gens), size=n).tolist():
        prod = _mul(prod, gens[idx])
    return math.log2(max(abs(x) for x in prod))


def random_growth(
    gset: Union[GeneratorSet, str],
    n: Union[int, Sequence[int]],
    trials: int,
    seed: int,
) -> GrowthReport:
    """Average growth of the largest entry in uniformly random words.

    Each trial draws a word with every letter equiprobable, takes
    log2(max |entry|)/n, and the fitted base is 2 to the mean of those.
    """
    gset = _resolve(gset)
    gens = [m.entries for _, m in sorted(gset.members)]
    lengths = [n] if isinstance(n, int) else list(n)
    report = GrowthReport(gset.name, "random", seed=seed)
    for length in lengths:
        if length < 1:
            raise ValueError("word length must be positive")
        per_letter = [_random_word_log2(gens, length, trial_rng(seed, i)) / length for i in range(trials)]
        mean = math.fsum(per_letter) / trials
        report.rows.append(GrowthRow(length, trials, mean, 2.0**mean))
    return report


def exhaustive_growth_report(gset: Union[GeneratorSet, str], max_n: int, override: bool = False) -> GrowthReport:
    gset = _resolve(gset)
    report = GrowthReport(gset.name, "exhaustive-max")
    for n, value, _ in max_growth_profile(gset, max_n, override)[1:]:
        report.rows.append(GrowthRow(n, len(gset) ** n, value.bit_length(), 2.0 ** (math.log2(value) / n)))
    return report


def abba_growth_check(n: int) -> int:
    """max |entry| of (A B B A)^(n/4) with A = A(2), B = B(-2)."""
    if n <= 0 or n % 4:
        raise ValueError(f"n must be a positive multiple of 4, got {n}")
    a, b = upper_unipotent(2), lower_unipotent(-2)
    block = a @ b @ b @ a
    return max_abs_entry(block ** (n // 4))


def per_letter_ratio(values: dict[int, int], n_lo: int, n_hi: int) -> float:
    """Geometric per-letter growth between two exact sequence terms."""
    return 2.0 ** ((math.log2(values[n_hi]) - math.log2(values[n_lo])) / (n_hi - n_lo))


def golden_square() -> Decimal:
    """(3 + sqrt 5) / 2, the growth of one C factor per bit."""
    return (3 + Decimal(5).sqrt()) / 2


def collision_bound(
    p: Optional[int] = None,
    p_bits: Optional[int] = None,
    rate: Union[float, Decimal, None] = None,
) -> int:
    """Length below which distinct inputs cannot collide: floor(log p / log rate).

    ``p_bits`` stands for p ~ 2**p_bits. The default rate is (3 + sqrt 5)/2.
    """
    if (p is None) == (p_bits is None):
        raise ValueError("give exactly one of p or p_bits")
    with localcontext() as ctx:
        ctx.prec = 1300  # enough for an exact floor with p up to 4096 bits
        r = golden_square() if rate is None else Decimal(str(rate))
        if r <= 1:
            raise ValueError("growth rate must exceed 1")
        if p is not None:
            if p < 2:
                raise ValueError("p must be >= 2")
            log_p = Decimal(p).ln()
        else:
            log_p = Decimal(p_bits) * Decimal(2).ln()
        return int((log_p / r.ln()).to_integral_value(rounding="ROUND_FLOOR"))
