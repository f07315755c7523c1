"""Preimage searches against the integer (unreduced) hashes.

Over Z, the two-generator hash built from A(2), B(2) is invertible by greedy
descent on the entry-absolute-value sum. The cookie hash is not: several
inverse multiplications may shrink the sum, so the search has to branch.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .hasher import COOKIE, NORMAL, PADDING, Digest, HashParams, automaton_step, cookie_product, h1_product
from .matrix import A, COOKIE_GENERATORS, COOKIE_SET, Mat2, generator_inverse

DEFAULT_NODE_BUDGET = 10**6


class NotInSemigroupError(ValueError):
    """The greedy descent got stuck: the matrix is not a positive word in the generators."""


class SearchBudgetExceeded(RuntimeError):
    def __init__(self, message: str, stats: "SearchStats"):
        super().__init__(message)
        self.stats = stats


@dataclass
class SearchStats:
    nodes: int = 0
    backtracks: int = 0
    max_frontier: int = 0
    steps: int = 0
    branching_steps: int = 0
    elapsed: float = 0.0
    outcome: str = "exhausted"
    word: Optional[str] = None

    @property
    def branching_fraction(self) -> float:
        """Share of expanded nodes where two or more inverses shrank the entry sum."""
        return self.branching_steps / self.steps if self.steps else 0.0

    def summary(self) -> str:
        return (
            f"outcome={self.outcome} nodes={self.nodes} backtracks={self.backtracks} "
            f"max_frontier={self.max_frontier} branching={self.branching_steps}/{self.steps} "
            f"elapsed={self.elapsed:.3f}s"
        )


_A_INV = (1, -2, 0, 1)
_B_INV = (1, 0, -2, 1)


def _mul(m, g):
    a, b, c, d = m
    e, f, g_, h = g
    return (a * e + b * g_, a * f + b * h, c * e + d * g_, c * f + d * h)


def _abs_sum(m) -> int:
    return abs(m[0]) + abs(m[1]) + abs(m[2]) + abs(m[3])


def greedy_preimage_2gen(W: Mat2) -> str:
    """Recover the bit word (A(2) -> 0, B(2) -> 1) whose integer product is ``W``.

    Peels the last factor each round: exactly one of ``W A^-1`` and ``W B^-1``
    must have a strictly smaller entry sum, otherwise ``W`` is rejected.
    """
    if W.p is not None:
        raise ValueError("greedy descent needs an integer matrix")
    cur = W.entries
    out = []
    while cur != (1, 0, 0, 1):
        s = _abs_sum(cur)
        via_a = _mul(cur, _A_INV)
        via_b = _mul(cur, _B_INV)
        shrink_a = _abs_sum(via_a) < s
        shrink_b = _abs_sum(via_b) < s
        if shrink_a == shrink_b:
            raise NotInSemigroupError(f"descent stuck after {len(out)} steps")
        bit, cur = ("0", via_a) if shrink_a else ("1", via_b)
        if min(cur) < 0:
            raise NotInSemigroupError(f"negative entry after {len(out) + 1} steps")
        out.append(bit)
    word = "".join(reversed(out))
    if h1_product(word) != W:
        raise NotInSemigroupError("recovered word does not reproduce the input")
    return word


# Reverse realizability: a letter suffix is kept only if some automaton state
# can emit it. Run counters are capped at 3, which preserves every transition.
_STATES = tuple(
    (mode, ones, zeros) for mode in (NORMAL, COOKIE) for ones in range(4) for zeros in range(4) if not (ones and zeros)
)
_LETTER_BIT = {"A": "0", "B": "1", "C": "1"}


def _transitions():
    table = {}
    for s in _STATES:
        mode, ones, zeros = s
        for bit in "01":
            label, m, o, z = automaton_step(mode, ones, zeros, bit)
            table[(s, label)] = (m, min(o, 3), min(z, 3))
    return table


_TRANSITIONS = _transitions()
_START = (NORMAL, 0, 0)


def _prepend(letter: str, allowed: frozenset) -> frozenset:
    """States from which emitting ``letter`` leads into ``allowed``."""
    return frozenset(
        s for s in _STATES if (s, letter) in _TRANSITIONS and _TRANSITIONS[(s, letter)] in allowed
    )


_COOKIE_INVERSES = [(label, generator_inverse(label, COOKIE_SET).entries) for label in ("A", "B", "C")]


def backtrack_preimage_3gen(
    W: Mat2,
    max_len: Optional[int] = None,
    budget: int = DEFAULT_NODE_BUDGET,
) -> tuple[Optional[str], SearchStats]:
    """Depth-first search for a bit string whose integer cookie hash is ``W``.

    Candidate last letters are tried in order A, B, C; a branch survives if
    the inverse step keeps entries nonnegative, strictly shrinks the entry
    sum, and the letter suffix is still emittable by the cookie automaton.
    Raises :class:`SearchBudgetExceeded` once ``budget`` nodes are expanded.
    """
    if W.p is not None:
        raise ValueError("preimage search needs an integer matrix")
    stats = SearchStats()
    t0 = time.perf_counter()
    all_states = frozenset(_STATES)
    # frame: (matrix, suffix letters, states that can emit the suffix)
    stack = [(W.entries, "", all_states)]
    found = None
    while stack:
        stats.max_frontier = max(stats.max_frontier, len(stack))
        cur, suffix, allowed = stack.pop()
        if cur == (1, 0, 0, 1):
            if _START in allowed:
                found = suffix
                break
            stats.backtracks += 1
            continue
        if max_len is not None and len(suffix) >= max_len:
            stats.backtracks += 1
            continue
        stats.nodes += 1
        if stats.nodes > budget:
            stats.outcome = "budget"
            stats.elapsed = time.perf_counter() - t0
            raise SearchBudgetExceeded(f"node budget {budget} exhausted", stats)
        s = _abs_sum(cur)
        children = []
        shrinking = 0
        for label, inv in _COOKIE_INVERSES:
            nxt = _mul(cur, inv)
            if _abs_sum(nxt) >= s:
                continue
            shrinking += 1
            if min(nxt) < 0:
                continue
            states = _prepend(label, allowed)
            if not states:
                continue
            children.append((nxt, label + suffix, states))
        stats.steps += 1
        if shrinking >= 2:
            stats.branching_steps += 1
        if not children:
            stats.backtracks += 1
        stack.extend(reversed(children))
    stats.elapsed = time.perf_counter() - t0
    if found is None:
        return None, stats
    bits = "".join(_LETTER_BIT[ch] for ch in found)
    if cookie_product(bits) != W:
        raise AssertionError("search returned a string that does not re-hash to the target")
    stats.outcome = "found"
    stats.word = bits
    return bits, stats


def brute_force_preimage(
    digest: Digest,
    max_len: int,
    params: Optional[HashParams] = None,
    padded: bool = False,
) -> Optional[str]:
    """Shortest, then lexicographically least, bit string of length <= max_len hashing to ``digest``.

    Compares raw products by default; with ``padded`` the candidate is
    followed by ``000`` before comparing. Returns None when exhausted.
    """
    p = digest.p if params is None else params.p
    if p != digest.p:
        raise ValueError("digest and params disagree on the modulus")
    gens = {label: m.reduce(p).entries for label, m in COOKIE_GENERATORS.items()}
    target = digest.entries
    tail = None
    if padded:
        tail = Mat2(1, 0, 0, 1, p)
        for _ in PADDING:
            tail = tail @ A.reduce(p)
        tail = tail.entries

    def matches(m) -> bool:
        if tail is not None:
            e, f, g, h = tail
            a, b, c, d = m
            m = ((a * e + b * g) % p, (a * f + b * h) % p, (c * e + d * g) % p, (c * f + d * h) % p)
        return m == target

    if matches((1, 0, 0, 1)):
        return ""
    best: Optional[str] = None
    stack = [("", (1, 0, 0, 1), NORMAL, 0, 0)]
    while stack:
        bits, prod, mode, ones, zeros = stack.pop()
        limit = max_len if best is None else len(best)
        n = len(bits) + 1
        if n > limit:
            continue
        children = []
        for bit in "01":
            label, m_mode, m_ones, m_zeros = automaton_step(mode, ones, zeros, bit)
            e, f, g, h = gens[label]
            a, b, c, d = prod
            m = ((a * e + b * g) % p, (a * f + b * h) % p, (c * e + d * g) % p, (c * f + d * h) % p)
            s = bits + bit
            if matches(m) and (best is None or len(s) < len(best) or (len(s) == len(best) and s < best)):
                best = s
            children.append((s, m, m_mode, min(m_ones, 3), min(m_zeros, 3)))
        stack.extend(reversed(children))
    return best


@dataclass
class ReductionReport:
    """Outcome of comparing the two-generator and cookie hashes over Z.

    Strings are bucketed by whether they contain ``111`` and by whether the
    cookie rule actually hashed some bit to C.
    """

    max_len: int
    free_strings: int = 0
    free_agree: int = 0
    triggered_strings: int = 0
    triggered_differ: int = 0
    uses_c_strings: int = 0
    uses_c_differ: int = 0

    @property
    def agree_on_111_free(self) -> bool:
        return self.free_agree == self.free_strings

    @property
    def differ_on_all_111(self) -> bool:
        return self.triggered_differ == self.triggered_strings

    @property
    def differ_exactly_when_c_used(self) -> bool:
        # strings containing 111 but never hashing a bit to C map to the same word
        return self.uses_c_differ == self.uses_c_strings == self.triggered_differ


def h1_h2_comparison(max_len: int) -> ReductionReport:
    """Compare raw integer hashes H1 (A, B only) and H2 (cookie rule) on every string up to ``max_len``."""
    a, b = A.entries, COOKIE_GENERATORS["B"].entries
    gens = {label: m.entries for label, m in COOKIE_GENERATORS.items()}
    report = ReductionReport(max_len, free_strings=1, free_agree=1)  # the empty string
    # frame: bits, H1 product, H2 product, automaton state, saw 111, used C
    stack = [("", (1, 0, 0, 1), (1, 0, 0, 1), NORMAL, 0, 0, False, False)]
    while stack:
        bits, p1, p2, mode, ones, zeros, seen, used_c = stack.pop()
        if len(bits) >= max_len:
            continue
        for bit in "01":
            label, m, o, z = automaton_step(mode, ones, zeros, bit)
            q1 = _mul(p1, a if bit == "0" else b)
            q2 = _mul(p2, gens[label])
            hit = seen or (bit == "1" and o >= 3)
            c = used_c or label == "C"
            if hit:
                report.triggered_strings += 1
                report.triggered_differ += q1 != q2
                if c:
                    report.uses_c_strings += 1
                    report.uses_c_differ += q1 != q2
            else:
                report.free_strings += 1
                report.free_agree += q1 == q2
            stack.append((bits + bit, q1, q2, m, min(o, 3), min(z, 3), hit, c))
    return report
