"""2x2 matrices over Z and Z/pZ, and the generator sets used by the hash.

A :class:`Mat2` with ``p=None`` lives in the integers (arbitrary precision,
signed); with an integer ``p`` every entry is a residue in ``[0, p)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional


class RingMismatchError(ValueError):
    """Raised when combining matrices from different rings or moduli."""


@dataclass(frozen=True, slots=True)
class Mat2:
    """Row-major 2x2 matrix ``[[a, b], [c, d]]``."""

    a: int
    b: int
    c: int
    d: int
    p: Optional[int] = None

    def __post_init__(self):
        if self.p is not None:
            p = self.p
            if p < 2:
                raise ValueError(f"modulus must be >= 2, got {p}")
            # canonicalize on construction
            object.__setattr__(self, "a", self.a % p)
            object.__setattr__(self, "b", self.b % p)
            object.__setattr__(self, "c", self.c % p)
            object.__setattr__(self, "d", self.d % p)

    @classmethod
    def identity(cls, p: Optional[int] = None) -> "Mat2":
        return cls(1, 0, 0, 1, p)

    @classmethod
    def from_rows(cls, rows, p: Optional[int] = None) -> "Mat2":
        (a, b), (c, d) = rows
        return cls(a, b, c, d, p)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def is_integer(self) -> bool:
        return self.p is None

    def rows(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]

    def det(self) -> int:
        v = self.a * self.d - self.b * self.c
        return v if self.p is None else v % self.p

    def reduce(self, p: int) -> "Mat2":
        """Image of an integer matrix in Z/pZ."""
        if self.p is not None and self.p != p:
            raise RingMismatchError(f"cannot reduce a mod-{self.p} matrix mod {p}")
        return Mat2(self.a, self.b, self.c, self.d, p)

    def is_identity(self) -> bool:
        return self.a == 1 and self.b == 0 and self.c == 0 and self.d == 1

    def max_abs_entry(self) -> int:
        return max_abs_entry(self)

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return mat_mul(self, other)

    def __pow__(self, k: int) -> "Mat2":
        if k < 0:
            raise ValueError("negative powers are not supported; use generator_inverse")
        result = Mat2.identity(self.p)
        base = self
        while k:
            if k & 1:
                result = mat_mul(result, base)
            base = mat_mul(base, base)
            k >>= 1
        return result

    def __str__(self) -> str:
        ring = "Z" if self.p is None else f"F_{self.p}"
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]] over {ring}"


def mat_mul(lhs: Mat2, rhs: Mat2) -> Mat2:
    """General 2x2 product; both operands must share a ring."""
    if lhs.p != rhs.p:
        raise RingMismatchError(f"ring mismatch: p={lhs.p} vs p={rhs.p}")
    a, b, c, d = lhs.a, lhs.b, lhs.c, lhs.d
    e, f, g, h = rhs.a, rhs.b, rhs.c, rhs.d
    return Mat2(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h, lhs.p)


def max_abs_entry(m: Mat2) -> int:
    if m.p is not None:
        raise RingMismatchError("max_abs_entry is defined for integer matrices only")
    return max(abs(m.a), abs(m.b), abs(m.c), abs(m.d))


def entry_sum(m: Mat2) -> int:
    """Sum of absolute values of the four entries."""
    return abs(m.a) + abs(m.b) + abs(m.c) + abs(m.d)


def fold(matrices: Iterable[Mat2], p: Optional[int] = None) -> Mat2:
    """Left-to-right product of ``matrices``; identity when empty."""
    result = Mat2.identity(p)
    for m in matrices:
        result = mat_mul(result, m)
    return result


@dataclass
class OpCounter:
    """Ring-operation tally owned by whoever runs the hashing loop."""

    additions: int = 0
    multiplications: int = 0

    def reset(self) -> None:
        self.additions = 0
        self.multiplications = 0


# The recommended hash generators.
A = Mat2(1, 2, 0, 1)
B = Mat2(1, 0, 2, 1)
C = Mat2(2, 1, 1, 1)
# A = X^2, B = Y^2, C = XY
X = Mat2(1, 1, 0, 1)
Y = Mat2(1, 0, 1, 1)

COOKIE_GENERATORS = {"A": A, "B": B, "C": C}
ADDITIONS_PER_GENERATOR = 4
ADDITIONS_BOUND = 5


def upper_unipotent(k: int) -> Mat2:
    """``A(k) = [[1, k], [0, 1]]``."""
    return Mat2(1, k, 0, 1)


def lower_unipotent(m: int) -> Mat2:
    """``B(m) = [[1, 0], [m, 1]]``."""
    return Mat2(1, 0, m, 1)


def _mod_add(x: int, y: int, p: int) -> int:
    s = x + y
    return s - p if s >= p else s


def mul_by_generator(state: Mat2, gen: str, counter: Optional[OpCounter] = None) -> Mat2:
    """Right-multiply a mod-p matrix by A, B or C using additions only.

    Each call performs 4 modular additions (doubling is self-addition and
    the row sum ``a + b`` is reused for C).
    """
    p = state.p
    if p is None:
        raise RingMismatchError("mul_by_generator operates on mod-p states")
    a, b, c, d = state.a, state.b, state.c, state.d
    if gen == "A":
        # [[a, 2a + b], [c, 2c + d]]
        b = _mod_add(_mod_add(a, a, p), b, p)
        d = _mod_add(_mod_add(c, c, p), d, p)
    elif gen == "B":
        # [[a + 2b, b], [c + 2d, d]]
        a = _mod_add(a, _mod_add(b, b, p), p)
        c = _mod_add(c, _mod_add(d, d, p), p)
    elif gen == "C":
        # [[2a + b, a + b], [2c + d, c + d]]
        s = _mod_add(a, b, p)
        a, b = _mod_add(s, a, p), s
        t = _mod_add(c, d, p)
        c, d = _mod_add(t, c, p), t
    else:
        raise KeyError(f"unknown generator label {gen!r}")
    if counter is not None:
        counter.additions += ADDITIONS_PER_GENERATOR
    return Mat2(a, b, c, d, p)


@dataclass(frozen=True)
class GeneratorSet:
    """A named, ordered collection of labelled integer generators."""

    name: str
    members: tuple[tuple[str, Mat2], ...] = field(default_factory=tuple)

    def __post_init__(self):
        labels = [label for label, _ in self.members]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in generator set {self.name!r}: {labels}")
        for label, m in self.members:
            if label not in ("A", "B", "C", "X", "Y"):
                raise ValueError(f"label must be one of A, B, C, X, Y; got {label!r}")
            if m.p is not None:
                raise ValueError("generator matrices must be integer matrices")
            if m.det() not in (1, -1):
                raise ValueError(f"generator {label} has determinant {m.det()}, expected +-1")
        object.__setattr__(self, "members", tuple(self.members))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, label: str) -> Mat2:
        for lab, m in self.members:
            if lab == label:
                return m
        raise KeyError(label)

    def as_dict(self) -> dict[str, Mat2]:
        return dict(self.members)

    def reduced(self, p: int) -> dict[str, Mat2]:
        return {label: m.reduce(p) for label, m in self.members}

    def word_product(self, word: str) -> Mat2:
        """Integer product of a word over this set's labels."""
        gens = self.as_dict()
        return fold(gens[ch] for ch in word)


def generator_inverse(gen: str, gset: GeneratorSet) -> Mat2:
    """Exact integer inverse of a member (adjugate scaled by det = +-1)."""
    m = gset[gen]
    det = m.det()
    if det not in (1, -1):
        raise ValueError(f"generator {gen} is not invertible over Z")
    return Mat2(det * m.d, -det * m.b, -det * m.c, det * m.a)


def unipotent_pair(k: int, m: int, name: Optional[str] = None) -> GeneratorSet:
    """The pair ``{A(k), B(m)}`` labelled A and B."""
    return GeneratorSet(name or f"A({k}),B({m})", (("A", upper_unipotent(k)), ("B", lower_unipotent(m))))


COOKIE_SET = GeneratorSet("cookie", (("A", A), ("B", B), ("C", C)))
XY_SET = GeneratorSet("xy", (("X", X), ("Y", Y)))

PRESETS: dict[str, GeneratorSet] = {
    "cookie": COOKIE_SET,
    "xy": XY_SET,
    "a1b1": unipotent_pair(1, 1, "a1b1"),
    "a2b2": unipotent_pair(2, 2, "a2b2"),
    "a2bm2": unipotent_pair(2, -2, "a2bm2"),
}


def get_preset(name: str) -> GeneratorSet:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown generator preset {name!r}; choose from {sorted(PRESETS)}") from None
