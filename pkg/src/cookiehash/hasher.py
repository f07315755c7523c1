"""The cookie hash: a streaming bit consumer over 2x2 matrices mod p.

Bits are read left to right. A 0 bit multiplies the running product on the
right by A. A 1 bit multiplies by B, or by C while the hasher is in cookie
mode. Cookie mode switches on after three consecutive 1 bits (the third one
is still hashed with B) and switches off after three consecutive 0 bits.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Union

from .matrix import A, B, C, COOKIE_GENERATORS, Mat2, OpCounter, RingMismatchError, fold, mat_mul
from .primes import is_probable_prime

NORMAL = "NORMAL"
COOKIE = "COOKIE"

PAPER_256 = int(
    "112130193533856809970443000822829414572933780556534369189742044710202716867171"
)
PAPER_512 = int(
    "12596709914012381331575222078025550833666545653686556299412073058759112539196"
    "792509169699422775197821869177859263195184957153059906758380302238329723774073"
)
PRIME_PRESETS = {"paper-256": PAPER_256, "paper-512": PAPER_512}

PADDING = "000"

Bits = Union[str, Iterable[int]]


class InvalidBitsError(ValueError):
    """Raised for bit-string text containing characters other than 0/1."""


class ParamsMismatchError(ValueError):
    """Raised when digests produced under different moduli are combined."""


@dataclass(frozen=True)
class HashParams:
    """Modulus of the hash together with an optional preset name."""

    p: int
    name: Optional[str] = None
    assume_prime: bool = False

    def __post_init__(self):
        if self.p <= 13:
            raise ValueError(f"modulus must exceed 13, got {self.p}")
        if self.p % 2 == 0:
            raise ValueError("modulus must be an odd prime")
        if not self.assume_prime and not is_probable_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @classmethod
    def preset(cls, name: str) -> "HashParams":
        try:
            p = PRIME_PRESETS[name]
        except KeyError:
            raise KeyError(f"unknown prime preset {name!r}; choose from {sorted(PRIME_PRESETS)}") from None
        return cls(p, name, assume_prime=True)

    @property
    def width(self) -> int:
        """Bits per serialized entry."""
        return self.p.bit_length()

    @property
    def digest_bits(self) -> int:
        return 4 * self.width

    def generators(self) -> dict[str, Mat2]:
        return {label: m.reduce(self.p) for label, m in COOKIE_GENERATORS.items()}


def parse_bits(text: str) -> str:
    """Strip whitespace from ASCII bit text; reject anything but 0 and 1."""
    cleaned = re.sub(r"\s+", "", text)
    bad = set(cleaned) - {"0", "1"}
    if bad:
        raise InvalidBitsError(f"non-binary characters in bit string: {''.join(sorted(bad))!r}")
    return cleaned


def bytes_to_bits(data: bytes) -> str:
    """MSB-first bit string of ``data``."""
    if not data:
        return ""
    return format(int.from_bytes(data, "big"), f"0{8 * len(data)}b")


def _as_bit_str(bits: Bits) -> str:
    if isinstance(bits, str):
        return bits
    return "".join("1" if b else "0" for b in bits)


def automaton_step(mode: str, ones: int, zeros: int, bit: str) -> tuple[str, str, int, int]:
    """One transition: returns (generator label, mode, ones_run, zeros_run)."""
    if bit == "1":
        zeros = 0
        ones += 1
        label = "C" if mode == COOKIE else "B"
        if mode == NORMAL and ones >= 3:
            mode = COOKIE
    elif bit == "0":
        ones = 0
        zeros += 1
        label = "A"
        if mode == COOKIE and zeros >= 3:
            mode = NORMAL
    else:
        raise InvalidBitsError(f"not a bit: {bit!r}")
    return label, mode, ones, zeros


def generator_sequence(bits: Bits, mode: str = NORMAL) -> str:
    """Labels the cookie rule assigns to each bit, e.g. ``10011110001`` -> ``BAABBBCAAAB``."""
    ones = zeros = 0
    out = []
    for bit in _as_bit_str(bits):
        label, mode, ones, zeros = automaton_step(mode, ones, zeros, bit)
        out.append(label)
    return "".join(out)


@dataclass(frozen=True)
class Digest:
    """Finalized hash value: the four product entries mod p."""

    entries: tuple[int, int, int, int]
    p: int

    def __post_init__(self):
        if len(self.entries) != 4 or any(not 0 <= e < self.p for e in self.entries):
            raise ValueError("digest entries must be four residues in [0, p)")

    @classmethod
    def from_matrix(cls, m: Mat2) -> "Digest":
        if m.p is None:
            raise RingMismatchError("digests are built from mod-p matrices")
        return cls(m.entries, m.p)

    @classmethod
    def identity(cls, p: int) -> "Digest":
        return cls((1, 0, 0, 1), p)

    @property
    def width(self) -> int:
        return self.p.bit_length()

    def matrix(self) -> Mat2:
        return Mat2(*self.entries, p=self.p)

    def to_bits(self) -> str:
        """Row-major entries, each a big-endian field of ``bit_length(p)`` bits."""
        w = self.width
        return "".join(format(e, f"0{w}b") for e in self.entries)

    def hex(self) -> str:
        bits = self.to_bits()
        return format(int(bits, 2), f"0{len(bits) // 4}x")

    @classmethod
    def from_bits(cls, bits: str, p: int) -> "Digest":
        w = p.bit_length()
        if len(bits) != 4 * w:
            raise ParamsMismatchError(f"expected {4 * w} digest bits for this modulus, got {len(bits)}")
        entries = tuple(int(bits[i * w:(i + 1) * w], 2) for i in range(4))
        return cls(entries, p)

    @classmethod
    def from_hex(cls, text: str, p: int) -> "Digest":
        text = text.strip()
        try:
            value = int(text, 16)
        except ValueError:
            raise ValueError(f"not a hex digest: {text[:20]!r}") from None
        return cls.from_bits(format(value, f"0{4 * len(text)}b"), p)

    def __str__(self) -> str:
        return self.hex()


def combine(d1: Digest, d2: Digest) -> Digest:
    """Digest of a concatenation from the digests of its parts."""
    if d1.p != d2.p:
        raise ParamsMismatchError("cannot combine digests computed under different moduli")
    return Digest.from_matrix(mat_mul(d1.matrix(), d2.matrix()))


class CookieHasher:
    """Streaming cookie hash state.

    Not safe to mutate from two threads at once; use :meth:`copy` to fork.
    """

    def __init__(self, params: HashParams):
        self.params = params
        self.mode = NORMAL
        self.ones_run = 0
        self.zeros_run = 0
        self.bits_absorbed = 0
        self.counters = OpCounter()
        self._entries = (1, 0, 0, 1)

    @property
    def product(self) -> Mat2:
        return Mat2(*self._entries, p=self.params.p)

    def copy(self) -> "CookieHasher":
        other = CookieHasher.__new__(CookieHasher)
        other.params = self.params
        other.mode = self.mode
        other.ones_run = self.ones_run
        other.zeros_run = self.zeros_run
        other.bits_absorbed = self.bits_absorbed
        other.counters = OpCounter(self.counters.additions, self.counters.multiplications)
        other._entries = self._entries
        return other

    def absorb_bit(self, bit: int) -> "CookieHasher":
        return self.absorb_bits("1" if bit else "0")

    def absorb_bits(self, bits: Bits) -> "CookieHasher":
        """Absorb a bit string; the hot loop uses modular additions only."""
        bits = _as_bit_str(bits)
        if not bits:
            return self
        p = self.params.p
        a, b, c, d = self._entries
        mode_cookie = self.mode == COOKIE
        ones, zeros = self.ones_run, self.zeros_run
        adds = 0
        start = 0
        if self.bits_absorbed == 0:
            # The first generator seeds the product directly; I * G = G.
            label, mode, ones, zeros = automaton_step(self.mode, ones, zeros, bits[0])
            mode_cookie = mode == COOKIE
            a, b, c, d = COOKIE_GENERATORS[label].reduce(p).entries
            start = 1
        for i in range(start, len(bits)):
            bit = bits[i]
            if bit == "0":
                ones = 0
                zeros += 1
                # A: [[a, 2a + b], [c, 2c + d]]
                t = a + a
                if t >= p:
                    t -= p
                b += t
                if b >= p:
                    b -= p
                t = c + c
                if t >= p:
                    t -= p
                d += t
                if d >= p:
                    d -= p
                if mode_cookie and zeros >= 3:
                    mode_cookie = False
            elif bit == "1":
                zeros = 0
                ones += 1
                if mode_cookie:
                    # C: [[2a + b, a + b], [2c + d, c + d]]
                    s = a + b
                    if s >= p:
                        s -= p
                    a += s
                    if a >= p:
                        a -= p
                    b = s
                    s = c + d
                    if s >= p:
                        s -= p
                    c += s
                    if c >= p:
                        c -= p
                    d = s
                else:
                    # B: [[a + 2b, b], [c + 2d, d]]
                    t = b + b
                    if t >= p:
                        t -= p
                    a += t
                    if a >= p:
                        a -= p
                    t = d + d
                    if t >= p:
                        t -= p
                    c += t
                    if c >= p:
                        c -= p
                    if ones >= 3:
                        mode_cookie = True
            else:
                raise InvalidBitsError(f"not a bit: {bit!r}")
            adds += 4
        self._entries = (a, b, c, d)
        self.mode = COOKIE if mode_cookie else NORMAL
        self.ones_run, self.zeros_run = ones, zeros
        self.bits_absorbed += len(bits)
        self.counters.additions += adds
        return self

    def absorb_bytes(self, data: bytes) -> "CookieHasher":
        """Absorb bytes, each read MSB first."""
        return self.absorb_bits(bytes_to_bits(data))

    update = absorb_bytes

    def finalize_raw(self) -> Digest:
        return Digest(self._entries, self.params.p)

    def finalize_padded(self) -> Digest:
        """Digest of the absorbed bits followed by ``000``; this hasher is left untouched."""
        return self.copy().absorb_bits(PADDING).finalize_raw()

    def __repr__(self) -> str:
        return f"CookieHasher(p={self.params.p}, mode={self.mode}, bits={self.bits_absorbed})"


def hash_bits(bits: Bits, params: HashParams, padded: bool = True) -> Digest:
    h = CookieHasher(params).absorb_bits(bits)
    return h.finalize_padded() if padded else h.finalize_raw()


def hash_bytes(data: bytes, params: HashParams, padded: bool = True) -> Digest:
    return hash_bits(bytes_to_bits(data), params, padded)


def h1_product(bits: Bits, p: Optional[int] = None) -> Mat2:
    """Two-generator product: A for 0, B for 1, no cookie rule."""
    gens = {"0": A, "1": B} if p is None else {"0": A.reduce(p), "1": B.reduce(p)}
    return fold((gens[bit] for bit in _as_bit_str(bits)), p)


def h1_hash(bits: Bits, params: HashParams) -> Digest:
    return Digest.from_matrix(h1_product(bits, params.p))


def cookie_product(bits: Bits, p: Optional[int] = None) -> Mat2:
    """Cookie-rule product by plain multiplication (reference path, any ring)."""
    gens = COOKIE_GENERATORS if p is None else {k: m.reduce(p) for k, m in COOKIE_GENERATORS.items()}
    return fold((gens[label] for label in generator_sequence(bits)), p)


# Byte-at-a-time path for bulk hashing. Run counters are capped at 3, which
# leaves every transition unchanged.
_MODES = (NORMAL, COOKIE)


def _state_index(mode: str, ones: int, zeros: int) -> int:
    return (_MODES.index(mode) * 4 + min(ones, 3)) * 4 + min(zeros, 3)


def _state_from_index(idx: int) -> tuple[str, int, int]:
    mode_i, rest = divmod(idx, 16)
    ones, zeros = divmod(rest, 4)
    return _MODES[mode_i], ones, zeros


@lru_cache(maxsize=None)
def _byte_table() -> tuple[tuple[tuple[tuple[int, int, int, int], int], ...], ...]:
    table = []
    for idx in range(32):
        mode, ones, zeros = _state_from_index(idx)
        row = []
        for byte in range(256):
            m, o, z = mode, ones, zeros
            labels = []
            for bit in format(byte, "08b"):
                label, m, o, z = automaton_step(m, o, z, bit)
                labels.append(label)
            prod = fold(COOKIE_GENERATORS[lab] for lab in labels)
            row.append((prod.entries, _state_index(m, o, z)))
        table.append(tuple(row))
    return tuple(table)


def fast_hash_bits(bits: str, params: HashParams, padded: bool = True) -> Digest:
    """Same digest as :func:`hash_bits`, using one general multiply per byte.

    Intended for bulk generation where operation counts do not matter.
    """
    p = params.p
    table = _byte_table()
    n_full = len(bits) // 8 * 8
    a, b, c, d = 1, 0, 0, 1
    state = _state_index(NORMAL, 0, 0)
    if n_full:
        for byte in int(bits[:n_full], 2).to_bytes(n_full // 8, "big"):
            (e, f, g, h), state = table[state][byte]
            a, b, c, d = (a * e + b * g) % p, (a * f + b * h) % p, (c * e + d * g) % p, (c * f + d * h) % p
    tail = bits[n_full:] + (PADDING if padded else "")
    mode, ones, zeros = _state_from_index(state)
    for bit in tail:
        label, mode, ones, zeros = automaton_step(mode, ones, zeros, bit)
        e, f, g, h = COOKIE_GENERATORS[label].entries
        a, b, c, d = (a * e + b * g) % p, (a * f + b * h) % p, (c * e + d * g) % p, (c * f + d * h) % p
    return Digest((a, b, c, d), p)
