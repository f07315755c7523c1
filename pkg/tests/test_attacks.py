import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from cookiehash import analysis as an
from cookiehash.attacks import (
    NotInSemigroupError,
    SearchBudgetExceeded,
    backtrack_preimage_3gen,
    brute_force_preimage,
    greedy_preimage_2gen,
    h1_h2_comparison,
)
from cookiehash.hasher import Digest, HashParams, cookie_product, generator_sequence, h1_product, hash_bits
from cookiehash.matrix import A, B, C, Mat2, entry_sum

P = 1009
PARAMS = HashParams(P)


def test_greedy_single_letter():
    assert greedy_preimage_2gen(A) == "0"
    assert greedy_preimage_2gen(B) == "1"
    assert greedy_preimage_2gen(Mat2.identity()) == ""


def test_greedy_one_step():
    w = Mat2(1, 2, 2, 5)
    assert entry_sum(w @ Mat2(1, -2, 0, 1)) == 4
    assert entry_sum(w @ Mat2(1, 0, -2, 1)) == 18
    assert greedy_preimage_2gen(w) == "10"


@settings(max_examples=200)
@given(st.text(alphabet="01", max_size=200))
def test_greedy_round_trip(word):
    assert greedy_preimage_2gen(h1_product(word)) == word


@pytest.mark.parametrize(
    "m",
    [
        Mat2(2, 1, 1, 1),  # C is not a word in A(2), B(2)
        Mat2(1, -2, 0, 1),
        Mat2(0, 1, -1, 0),
        Mat2(3, 0, 0, 1),
    ],
)
def test_greedy_rejects_non_members(m):
    with pytest.raises(NotInSemigroupError):
        greedy_preimage_2gen(m)


def test_greedy_rejects_mod_p():
    with pytest.raises(ValueError):
        greedy_preimage_2gen(A.reduce(P))


def test_backtrack_worked_example():
    target = an.integer_hash("10011110001")
    bits, stats = backtrack_preimage_3gen(target)
    assert bits == "10011110001"
    assert stats.outcome == "found"
    assert stats.nodes >= len(bits)


def test_backtrack_identity():
    bits, stats = backtrack_preimage_3gen(Mat2.identity())
    assert bits == ""
    assert stats.outcome == "found"


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet="01", max_size=60))
def test_backtrack_round_trip(bits):
    found, stats = backtrack_preimage_3gen(an.integer_hash(bits))
    assert found == bits
    assert cookie_product(found) == an.integer_hash(bits)


def test_backtrack_rejects_unrealizable_letter_words():
    # "C" alone is a valid word over {A, B, C} but no bit string hashes to it
    bits, stats = backtrack_preimage_3gen(C)
    assert bits is None
    assert stats.outcome == "exhausted"
    # "BBBC" is realizable: 1111
    assert backtrack_preimage_3gen(B @ B @ B @ C)[0] == "1111"


def test_backtrack_non_member():
    bits, _ = backtrack_preimage_3gen(Mat2(1, 1, 0, 1))
    assert bits is None


def test_backtrack_budget():
    rng = random.Random(3)
    bits = "".join(rng.choice("01") for _ in range(60))
    with pytest.raises(SearchBudgetExceeded) as info:
        backtrack_preimage_3gen(an.integer_hash(bits), budget=5)
    assert info.value.stats.outcome == "budget"


def test_backtrack_max_len():
    bits, stats = backtrack_preimage_3gen(an.integer_hash("0110111"), max_len=5)
    assert bits is None


def test_branching_is_observed():
    rng = random.Random(11)
    steps = branching = 0
    for _ in range(20):
        bits = "".join(rng.choice("01") for _ in range(60))
        found, stats = backtrack_preimage_3gen(an.integer_hash(bits))
        assert found == bits
        steps += stats.steps
        branching += stats.branching_steps
    assert branching > 0
    print(f"branching steps: {branching}/{steps} = {branching / steps:.3f}")


def test_brute_force_recovers_short_input():
    d = hash_bits("101", PARAMS, padded=False)
    assert brute_force_preimage(d, 8, PARAMS) == "101"


def test_brute_force_padded():
    d = hash_bits("0110", PARAMS)
    assert brute_force_preimage(d, 6, PARAMS, padded=True) == "0110"


def test_brute_force_identity_only_empty():
    assert brute_force_preimage(Digest.identity(P), 0, PARAMS) == ""
    assert brute_force_preimage(hash_bits("1", PARAMS, padded=False), 0, PARAMS) is None
    # no nonempty string below the collision bound hashes to I
    assert an.collision_bound(p=P) > 4


def test_brute_force_exhausted_for_identity_nonempty():
    target = hash_bits("", PARAMS, padded=False)
    # the empty string matches first, so ask about a digest no short string reaches
    d = Digest((0, 1, 1, 0), P)  # determinant -1; every product has determinant 1
    assert brute_force_preimage(d, 10, PARAMS) is None
    assert target == Digest.identity(P)


def test_brute_force_shortlex_order():
    # brute-force oracle: enumerate by length, then lexicographically
    p = 17
    params = HashParams(p)
    d = hash_bits("110100110", params, padded=False)
    expected = None
    for n in range(0, 10):
        for tup in itertools.product("01", repeat=n):
            s = "".join(tup)
            if hash_bits(s, params, padded=False) == d:
                expected = s
                break
        if expected is not None:
            break
    assert brute_force_preimage(d, 9, params) == expected


def test_h1_h2_agree_on_111_free_strings():
    report = h1_h2_comparison(12)
    assert report.agree_on_111_free
    assert report.free_strings == sum(
        1 for n in range(13) for i in range(2**n) if "111" not in (format(i, f"0{n}b") if n else "")
    )


def test_h1_h2_differ_exactly_when_c_is_used():
    report = h1_h2_comparison(12)
    assert report.differ_exactly_when_c_used
    # strings that contain 111 but never reach a C agree, e.g. 111 itself
    assert h1_product("111") == cookie_product("111")
    assert "C" not in generator_sequence("1110001")
    assert h1_product("1111") != cookie_product("1111")
