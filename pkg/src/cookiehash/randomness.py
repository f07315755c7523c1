"""Five NIST SP 800-22 tests and the data pipeline that feeds them hash output.

Built in: frequency (monobit), block frequency, runs, longest run of ones,
cumulative sums. The remaining suite tests are meant to be run by the
reference ``assess`` tool on files written by :func:`sts_export`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .hasher import Digest, HashParams, bytes_to_bits, fast_hash_bits

ALPHA = 0.01

BitInput = Union[str, Sequence[int], np.ndarray]


class SequenceTooShortError(ValueError):
    pass


def as_bits(seq: BitInput) -> np.ndarray:
    """0/1 uint8 array from a '0'/'1' string or any integer sequence."""
    if isinstance(seq, str):
        arr = np.frombuffer(seq.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(seq, dtype=np.uint8)
    if arr.size and arr.max() > 1:
        raise ValueError("bit sequences may only contain 0 and 1")
    return arr


# --- special functions --------------------------------------------------

_EPS = 1e-16
_BIG = 4503599627370496.0  # 2**52


def _igam_series(a: float, x: float) -> float:
    ax = a * math.log(x) - x - math.lgamma(a)
    if ax < -709.78:
        return 0.0
    ax = math.exp(ax)
    r, c, total = a, 1.0, 1.0
    while True:
        r += 1.0
        c *= x / r
        total += c
        if c / total <= _EPS:
            return total * ax / a


def _igamc_fraction(a: float, x: float) -> float:
    ax = a * math.log(x) - x - math.lgamma(a)
    if ax < -709.78:
        return 0.0
    ax = math.exp(ax)
    # continued fraction, Cephes igamc
    y = 1.0 - a
    z = x + y + 1.0
    c = 0.0
    pkm2, qkm2 = 1.0, x
    pkm1, qkm1 = x + 1.0, z * x
    ans = pkm1 / qkm1
    while True:
        c += 1.0
        y += 1.0
        z += 2.0
        yc = y * c
        pk = pkm1 * z - pkm2 * yc
        qk = qkm1 * z - qkm2 * yc
        if qk != 0:
            r = pk / qk
            t = abs((ans - r) / r)
            ans = r
        else:
            t = 1.0
        pkm2, pkm1 = pkm1, pk
        qkm2, qkm1 = qkm1, qk
        if abs(pk) > _BIG:
            pkm2 /= _BIG
            pkm1 /= _BIG
            qkm2 /= _BIG
            qkm1 /= _BIG
        if t <= _EPS:
            return ans * ax


def igamc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 1.0
    if x < 1.0 or x < a:
        return 1.0 - _igam_series(a, x)
    return _igamc_fraction(a, x)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


# --- reports ------------------------------------------------------------

@dataclass(frozen=True)
class TestReport:
    __test__ = False  # keep pytest from collecting this class

    name: str
    params: str
    statistic: float
    p_value: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.p_value >= ALPHA

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def csv_line(self) -> str:
        return f"{self.name},{self.params},{self.statistic:.10g},{self.p_value:.6f},{self.verdict}"


CSV_HEADER = "test,param,statistic,p_value,verdict"


def _require(bits: np.ndarray, minimum: int, name: str) -> int:
    n = int(bits.size)
    if n < minimum:
        raise SequenceTooShortError(f"{name} needs at least {minimum} bits, got {n}")
    return n


# --- tests --------------------------------------------------------------

def monobit(seq: BitInput) -> TestReport:
    bits = as_bits(seq)
    n = _require(bits, 100, "frequency")
    s_n = 2 * int(bits.sum()) - n
    s_obs = abs(s_n) / math.sqrt(n)
    return TestReport("frequency", "", s_obs, math.erfc(s_obs / math.sqrt(2.0)))


def block_frequency(seq: BitInput, block_size: int = 128) -> TestReport:
    bits = as_bits(seq)
    n = _require(bits, 100, "block_frequency")
    blocks = n // block_size
    if blocks < 1:
        raise SequenceTooShortError(f"sequence shorter than one block of {block_size}")
    ones = bits[: blocks * block_size].reshape(blocks, block_size).sum(axis=1, dtype=np.int64)
    pi = ones / block_size
    chi2 = 4.0 * block_size * float(np.sum((pi - 0.5) ** 2))
    return TestReport("block_frequency", f"M={block_size}", chi2, igamc(blocks / 2.0, chi2 / 2.0))


def runs_test(seq: BitInput) -> TestReport:
    """Total-runs test; a failed frequency prerequisite yields P = 0 with a note."""
    bits = as_bits(seq)
    n = _require(bits, 100, "runs")
    pi = float(bits.sum()) / n
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return TestReport("runs", "", 0.0, 0.0, note="prerequisite frequency test failed")
    v_obs = 1 + int(np.count_nonzero(bits[1:] != bits[:-1]))
    num = abs(v_obs - 2.0 * n * pi * (1.0 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi)
    return TestReport("runs", "", float(v_obs), math.erfc(num / den))


_LONGEST_RUN_TABLE = {
    # block size: (lowest category, highest category, class probabilities)
    8: (1, 4, (0.21484375, 0.3671875, 0.23046875, 0.1875)),
    128: (4, 9, (0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847)),
    10000: (10, 16, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
}


def _longest_runs(blocks: np.ndarray) -> np.ndarray:
    # pad a zero column so every run is terminated, then measure runs per row
    n_blocks, m = blocks.shape
    padded = np.zeros((n_blocks, m + 2), dtype=np.int8)
    padded[:, 1:-1] = blocks
    diff = np.diff(padded, axis=1)
    rows_s, cols_s = np.nonzero(diff == 1)
    _, cols_e = np.nonzero(diff == -1)
    longest = np.zeros(n_blocks, dtype=np.int64)
    np.maximum.at(longest, rows_s, cols_e - cols_s)
    return longest


def longest_run_of_ones(seq: BitInput) -> TestReport:
    bits = as_bits(seq)
    n = _require(bits, 128, "longest_run")
    if n < 6272:
        m = 8
    elif n < 750000:
        m = 128
    else:
        m = 10000
    lo, hi, probs = _LONGEST_RUN_TABLE[m]
    n_blocks = n // m
    longest = _longest_runs(bits[: n_blocks * m].reshape(n_blocks, m))
    counts = np.bincount(np.clip(longest, lo, hi) - lo, minlength=hi - lo + 1)
    expected = n_blocks * np.asarray(probs)
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    k = hi - lo
    return TestReport("longest_run", f"M={m}", chi2, igamc(k / 2.0, chi2 / 2.0))


def _cusum_p_value(n: int, z: int) -> float:
    if z == 0:
        return 1.0
    sqrt_n = math.sqrt(n)
    total1 = 0.0
    for k in range((-n // z + 1) // 4, (n // z - 1) // 4 + 1):
        total1 += normal_cdf((4 * k + 1) * z / sqrt_n) - normal_cdf((4 * k - 1) * z / sqrt_n)
    total2 = 0.0
    for k in range((-n // z - 3) // 4, (n // z - 1) // 4 + 1):
        total2 += normal_cdf((4 * k + 3) * z / sqrt_n) - normal_cdf((4 * k + 1) * z / sqrt_n)
    return 1.0 - total1 + total2


def cumulative_sums(seq: BitInput, direction: str = "forward") -> TestReport:
    bits = as_bits(seq)
    n = _require(bits, 100, "cumulative_sums")
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    steps = 2 * bits.astype(np.int64) - 1
    if direction == "backward":
        steps = steps[::-1]
    z = int(np.abs(np.cumsum(steps)).max())
    return TestReport("cumulative_sums", direction, float(z), _cusum_p_value(n, z))


def run_suite(seq: BitInput, block_size: int = 128) -> list[TestReport]:
    """All built-in tests, cumulative sums in both directions."""
    bits = as_bits(seq)
    return [
        monobit(bits),
        block_frequency(bits, block_size),
        cumulative_sums(bits, "forward"),
        cumulative_sums(bits, "backward"),
        runs_test(bits),
        longest_run_of_ones(bits),
    ]


def pass_counts(sequences: Iterable[BitInput], block_size: int = 128) -> dict[str, tuple[int, int]]:
    """Per test (keyed ``name`` or ``name:param`` for cusum): (passes, sequences tested)."""
    counts: dict[str, list[int]] = {}
    for seq in sequences:
        for rep in run_suite(seq, block_size):
            key = f"{rep.name}:{rep.params}" if rep.name == "cumulative_sums" else rep.name
            tally = counts.setdefault(key, [0, 0])
            tally[0] += rep.passed
            tally[1] += 1
    return {k: (v[0], v[1]) for k, v in counts.items()}


# --- hash output generation and export ------------------------------------

def input_rng(seed: int, sequence: int, digest: int) -> np.random.Generator:
    """PCG64 stream for one hash input, keyed by (seed, sequence, digest)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(sequence, digest))))


def random_input_bits(seed: int, sequence: int, digest: int, n_bits: int) -> str:
    rng = input_rng(seed, sequence, digest)
    return bytes_to_bits(rng.bytes((n_bits + 7) // 8))[:n_bits]


def iter_hash_sequences(
    params: HashParams,
    count: int,
    input_bits: int,
    seed: int,
    target_bits: Optional[int] = None,
) -> Iterator[str]:
    """Yield ``count`` test sequences built from padded digests of random inputs.

    Each sequence concatenates ``ceil(target_bits / digest_bits)`` serialized
    digests (a single digest when ``target_bits`` is None). Input ``j`` of
    sequence ``i`` depends only on ``(seed, i, j)``.
    """
    per_seq = 1 if target_bits is None else max(1, -(-target_bits // params.digest_bits))
    for i in range(count):
        yield "".join(
            fast_hash_bits(random_input_bits(seed, i, j, input_bits), params).to_bits() for j in range(per_seq)
        )


def hash_stream_generate(
    params: HashParams,
    count: int,
    input_bits: int,
    seed: int,
    target_bits: Optional[int] = None,
) -> list[str]:
    return list(iter_hash_sequences(params, count, input_bits, seed, target_bits))


def stream_digests(params: HashParams, count: int, input_bits: int, seed: int) -> list[Digest]:
    """The individual digests behind ``hash_stream_generate(..., target_bits=None)``."""
    return [fast_hash_bits(random_input_bits(seed, i, 0, input_bits), params) for i in range(count)]


def sts_export(sequences: Iterable[str], directory: Union[str, Path]) -> list[Path]:
    """Write each sequence as ASCII 0/1 to ``data_<index>.txt`` (index from 0), newline-terminated."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, seq in enumerate(sequences):
        path = out / f"data_{i}.txt"
        path.write_text(seq + "\n", encoding="ascii")
        paths.append(path)
    return paths


def read_sts_file(path: Union[str, Path]) -> str:
    return "".join(Path(path).read_text(encoding="ascii").split())
