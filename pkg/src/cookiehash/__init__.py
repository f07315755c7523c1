"""Cayley hashing with cookies over 2x2 matrices mod p, plus analysis tools."""

from .hasher import (
    PAPER_256,
    PAPER_512,
    CookieHasher,
    Digest,
    HashParams,
    combine,
    generator_sequence,
    h1_hash,
    hash_bits,
    hash_bytes,
)
from .matrix import A, B, C, GeneratorSet, Mat2, OpCounter, mat_mul, mul_by_generator

__all__ = [
    "A", "B", "C", "PAPER_256", "PAPER_512", "CookieHasher", "Digest", "GeneratorSet",
    "HashParams", "Mat2", "OpCounter", "combine", "generator_sequence", "h1_hash",
    "hash_bits", "hash_bytes", "mat_mul", "mul_by_generator",
]
__version__ = "0.1.0"
