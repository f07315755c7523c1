import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gammaincc

from cookiehash import randomness as rt
from cookiehash.hasher import HashParams, fast_hash_bits, hash_bits

TOL = 1e-4
PAPER = HashParams.preset("paper-256")


def pi_bits(n: int = 100) -> str:
    with mpmath.workprec(200):
        return format(int(mpmath.floor(mpmath.pi * 2 ** (n - 2))), "b")


LONGEST_RUN_EXAMPLE = (
    "11001100000101010110110001001100111000000000001001"
    "00110101010001000100111101011010000000110101111100"
    "1100111001101101100010110010"
)


def oracle_bits(seed: int, n: int = 6272) -> np.ndarray:
    return np.random.Generator(np.random.PCG64(seed)).integers(0, 2, size=n)


# P-values from the third-party nistrng package (tests/oracle/nist_oracle.py)
NISTRNG = {
    11: {
        "frequency": 0.13623080863213052,
        "block_frequency": 0.5123618244736965,
        "runs": 0.8618182586166567,
        "cusum_forward": 0.19620292686432084,
        "cusum_backward": 0.09207457117150142,
    },
    12: {
        "frequency": 0.7426851639896301,
        "block_frequency": 0.1517692977464316,
        "runs": 0.5775585808951694,
        "cusum_forward": 0.5102575719813092,
        "cusum_backward": 0.8074769867815805,
    },
    13: {
        "frequency": 0.979852513565955,
        "block_frequency": 0.7173461984013612,
        "runs": 0.8201963835520654,
        "cusum_forward": 0.8074769867815805,
        "cusum_backward": 0.8299024138104851,
    },
}


def test_pi_bits_prefix():
    eps = pi_bits()
    assert len(eps) == 100
    assert eps.startswith("11001001000011111101101010100010001000010110100011")


@pytest.mark.parametrize(
    "fn, expected",
    [
        (lambda s: rt.monobit(s), 0.109599),
        (lambda s: rt.block_frequency(s, 10), 0.706438),
        (lambda s: rt.runs_test(s), 0.500798),
        (lambda s: rt.cumulative_sums(s, "forward"), 0.219194),
        (lambda s: rt.cumulative_sums(s, "backward"), 0.114866),
    ],
)
def test_reference_worked_examples(fn, expected):
    assert abs(fn(pi_bits()).p_value - expected) <= TOL


def test_cusum_statistics_on_worked_example():
    assert rt.cumulative_sums(pi_bits(), "forward").statistic == 16
    assert rt.cumulative_sums(pi_bits(), "backward").statistic == 19


def test_longest_run_worked_example():
    rep = rt.longest_run_of_ones(LONGEST_RUN_EXAMPLE)
    assert len(LONGEST_RUN_EXAMPLE) == 128
    assert rep.params == "M=8"
    assert abs(rep.p_value - 0.180598) <= TOL
    assert abs(rep.statistic - 4.882605) <= 1e-3


@pytest.mark.parametrize("seed", sorted(NISTRNG))
@pytest.mark.parametrize("key", ["frequency", "block_frequency", "runs", "cusum_forward", "cusum_backward"])
def test_matches_nistrng(seed, key):
    bits = oracle_bits(seed)
    got = {
        "frequency": lambda: rt.monobit(bits),
        "block_frequency": lambda: rt.block_frequency(bits, 128),
        "runs": lambda: rt.runs_test(bits),
        "cusum_forward": lambda: rt.cumulative_sums(bits, "forward"),
        "cusum_backward": lambda: rt.cumulative_sums(bits, "backward"),
    }[key]()
    assert abs(got.p_value - NISTRNG[seed][key]) <= TOL


def no_run_longer_than(m: int, k: int) -> int:
    """Number of m-bit strings whose longest run of ones is at most k."""
    # state: length of the current trailing run of ones
    counts = [1] + [0] * k
    for _ in range(m):
        nxt = [0] * (k + 1)
        nxt[0] = sum(counts)
        for r in range(k):
            nxt[r + 1] = counts[r]
        counts = nxt
    return sum(counts)


def category_probabilities(m: int, lo: int, hi: int) -> list[Fraction]:
    cdf = lambda k: Fraction(no_run_longer_than(m, k), 2**m)
    probs = [cdf(lo)]
    probs += [cdf(k) - cdf(k - 1) for k in range(lo + 1, hi)]
    probs.append(1 - cdf(hi - 1))
    return probs


def longest_run_oracle(bits: np.ndarray, m: int, lo: int, hi: int) -> float:
    n_blocks = bits.size // m
    longest = []
    for i in range(n_blocks):
        block = "".join(map(str, bits[i * m:(i + 1) * m]))
        longest.append(max(len(r) for r in block.split("0")))
    counts = [0] * (hi - lo + 1)
    for v in longest:
        counts[min(max(v, lo), hi) - lo] += 1
    probs = category_probabilities(m, lo, hi)
    chi2 = sum((c - n_blocks * float(p)) ** 2 / (n_blocks * float(p)) for c, p in zip(counts, probs))
    return float(gammaincc((hi - lo) / 2, chi2 / 2))


def test_longest_run_tables_match_exact_probabilities():
    for m, (lo, hi, probs) in rt._LONGEST_RUN_TABLE.items():
        if m == 10000:
            continue  # exact enumeration is slow; the table carries 4 digits
        exact = category_probabilities(m, lo, hi)
        for got, want in zip(probs, exact):
            assert abs(got - float(want)) < 1e-8


@pytest.mark.parametrize("seed", [11, 12, 13])
def test_longest_run_against_exact_oracle(seed):
    bits = oracle_bits(seed)
    assert abs(rt.longest_run_of_ones(bits).p_value - longest_run_oracle(bits, 128, 4, 9)) <= TOL


def test_longest_run_small_block_oracle():
    bits = oracle_bits(99, 4000)
    assert abs(rt.longest_run_of_ones(bits).p_value - longest_run_oracle(bits, 8, 1, 4)) <= TOL


def test_longest_run_block_size_selection():
    assert rt.longest_run_of_ones(oracle_bits(1, 6271)).params == "M=8"
    assert rt.longest_run_of_ones(oracle_bits(1, 6272)).params == "M=128"
    assert rt.longest_run_of_ones(oracle_bits(1, 750000)).params == "M=10000"


@settings(max_examples=200)
@given(st.floats(0.5, 200.0), st.floats(0.0, 400.0))
def test_igamc_matches_scipy(a, x):
    assert math.isclose(rt.igamc(a, x), float(gammaincc(a, x)), rel_tol=1e-9, abs_tol=1e-14)


def test_igamc_edges():
    assert rt.igamc(2.0, 0.0) == 1.0
    assert rt.igamc(2.0, -1.0) == 1.0


def test_all_ones_and_zeros_fail():
    for seq in ("1" * 1000, "0" * 1000):
        assert rt.monobit(seq).p_value < 1e-100
        assert not rt.monobit(seq).passed
        assert rt.block_frequency(seq).p_value < 1e-10
        assert rt.cumulative_sums(seq).p_value < 1e-10


def test_alternating_sequence():
    seq = "01" * 500
    assert rt.monobit(seq).p_value == 1.0
    assert rt.block_frequency(seq).p_value == 1.0
    runs = rt.runs_test(seq)
    assert runs.statistic == 1000
    assert runs.p_value < 1e-100


def test_runs_prerequisite_failure():
    seq = "1" * 71 + "0" * 29  # |pi - 1/2| = 0.21 >= 2/sqrt(100)
    rep = rt.runs_test(seq)
    assert rep.p_value == 0.0 and rep.note


def test_too_short():
    with pytest.raises(rt.SequenceTooShortError):
        rt.longest_run_of_ones("1" * 127)
    with pytest.raises(rt.SequenceTooShortError):
        rt.monobit("1" * 99)
    with pytest.raises(rt.SequenceTooShortError):
        rt.block_frequency("01" * 60, 128)


def test_bad_input():
    with pytest.raises(ValueError):
        rt.monobit("012" * 50)
    with pytest.raises(ValueError):
        rt.cumulative_sums(pi_bits(), "sideways")


def test_report_csv_line():
    rep = rt.monobit(pi_bits())
    fields = rep.csv_line().split(",")
    assert len(fields) == len(rt.CSV_HEADER.split(","))
    assert fields[0] == "frequency" and fields[-1] == "pass"


def test_run_suite_and_counts():
    seqs = [oracle_bits(s) for s in (11, 12, 13)]
    assert [r.name for r in rt.run_suite(seqs[0])] == [
        "frequency", "block_frequency", "cumulative_sums", "cumulative_sums", "runs", "longest_run",
    ]
    counts = rt.pass_counts(seqs)
    assert set(counts) == {
        "frequency", "block_frequency", "cumulative_sums:forward", "cumulative_sums:backward", "runs", "longest_run",
    }
    assert all(total == 3 for _, total in counts.values())


def test_sts_export_round_trip(tmp_path):
    seqs = ["0101", "1" * 50, ""]
    paths = rt.sts_export(seqs, tmp_path / "out")
    assert [p.name for p in paths] == ["data_0.txt", "data_1.txt", "data_2.txt"]
    assert paths[0].read_text() == "0101\n"
    assert [rt.read_sts_file(p) for p in paths] == seqs
    assert rt.sts_export([], tmp_path / "empty") == []


def test_stream_determinism():
    a = rt.hash_stream_generate(PAPER, 3, 64, seed=5)
    assert a == rt.hash_stream_generate(PAPER, 3, 64, seed=5)
    assert a != rt.hash_stream_generate(PAPER, 3, 64, seed=6)
    assert all(len(s) == 1024 for s in a)
    # a longer run shares its leading sequences
    assert rt.hash_stream_generate(PAPER, 5, 64, seed=5)[:3] == a


def test_stream_digests_are_padded_hashes():
    digests = rt.stream_digests(PAPER, 2, 100, seed=1)
    for i, d in enumerate(digests):
        bits = rt.random_input_bits(1, i, 0, 100)
        assert len(bits) == 100
        assert d == hash_bits(bits, PAPER)
    assert [d.to_bits() for d in digests] == rt.hash_stream_generate(PAPER, 2, 100, seed=1)


def test_stream_target_length():
    seq = next(rt.iter_hash_sequences(PAPER, 1, 1024, seed=0, target_bits=10**6))
    assert len(seq) == 977 * 1024 == 1_000_448
    first = fast_hash_bits(rt.random_input_bits(0, 0, 0, 1024), PAPER).to_bits()
    assert seq.startswith(first)
