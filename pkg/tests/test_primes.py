import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bytearray_sieve, is_prime
from prime_ifs.errors import CapacityError
from prime_ifs.primes import (
    MAX_VALUE,
    PrimeRangeQuery,
    RangeMode,
    TupleCenterQuery,
    iter_prime_segments,
    nth_prime,
    primes_from_count,
    primes_in_range,
    sieve_segment,
    simple_sieve,
    tuple_centers,
    twin_pairs,
)


@pytest.fixture(scope="module")
def oracle_1e7():
    return np.array(bytearray_sieve(10**7), dtype=np.int64)


def test_primes_in_small_ranges():
    assert primes_in_range(1, 10).tolist() == [2, 3, 5, 7]
    assert primes_in_range(90, 96).tolist() == []
    assert primes_in_range(0, 0).tolist() == []
    assert primes_in_range(2, 2).tolist() == [2]


def test_count_from_seven_to_a_million(oracle_1e7):
    expected = int(np.count_nonzero((oracle_1e7 >= 7) & (oracle_1e7 <= 10**6)))
    assert expected == 78_495
    assert primes_in_range(7, 10**6).size == expected


def test_segmented_agrees_with_unsegmented_to_ten_million(oracle_1e7):
    assert np.array_equal(primes_in_range(0, 10**7), oracle_1e7)
    assert np.array_equal(simple_sieve(10**7), oracle_1e7)


@pytest.mark.parametrize("workers", [2, 8])
def test_worker_count_does_not_change_output(workers):
    lo, hi = 10**9, 10**9 + 5 * (1 << 20) + 17
    assert np.array_equal(primes_in_range(lo, hi, workers=workers), primes_in_range(lo, hi, workers=1))


@given(st.integers(0, 5000), st.integers(0, 3000))
@settings(max_examples=60, deadline=None)
def test_small_windows_match_trial_division(lo, width):
    hi = lo + width
    assert primes_in_range(lo, hi).tolist() == [n for n in range(lo, hi + 1) if is_prime(n)]


@given(st.integers(0, 2**40), st.integers(1, 4000))
@settings(max_examples=25, deadline=None)
def test_segment_flags_match_trial_division(lo, width):
    flags = sieve_segment(lo, lo + width)
    sample = range(lo, lo + width, max(1, width // 50))
    for n in sample:
        assert flags[n - lo] == is_prime(n)


def test_primes_from_count():
    assert primes_from_count(7, 5).tolist() == [7, 11, 13, 17, 19]
    assert primes_from_count(2, 1).tolist() == [2]
    assert primes_from_count(100, 0).tolist() == []


def test_first_primes_past_a_billion():
    expected = [n for n in range(10**9, 10**9 + 101) if is_prime(n)][:3]
    assert primes_from_count(10**9, 3).tolist() == expected


def test_kth_prime_prefix_property(oracle_1e7):
    got = primes_from_count(2, 10**5)
    assert np.array_equal(got, oracle_1e7[: 10**5])
    rng = np.random.default_rng(5)
    for k in rng.integers(1, 10**5 + 1, size=20).tolist() + [1, 10**5]:
        assert primes_from_count(2, k)[-1] == oracle_1e7[k - 1]


def test_nth_prime(oracle_1e7):
    assert nth_prime(1) == 2
    assert nth_prime(4) == 7
    assert nth_prime(664_579) == oracle_1e7[-1]
    with pytest.raises(ValueError):
        nth_prime(0)


def test_segments_are_ascending_and_contiguous():
    ends = []
    last = -1
    for end, primes in iter_prime_segments(10**6, 10**6 + 3 * 1000 + 5, segment_size=1000):
        ends.append(end)
        assert (np.diff(primes) > 0).all()
        if primes.size:
            assert primes[0] > last
            last = primes[-1]
    assert ends == [1_001_000, 1_002_000, 1_003_000, 1_003_005]


def test_near_a_trillion_uses_segmented_base():
    lo = 10**12
    got = primes_in_range(lo, lo + 2000).tolist()
    assert got == [n for n in range(lo, lo + 2001) if is_prime(n)]


def test_capacity_errors():
    with pytest.raises(CapacityError):
        primes_in_range(0, MAX_VALUE + 1)
    with pytest.raises(CapacityError):
        primes_from_count(MAX_VALUE + 1, 1)


def test_query_validation():
    with pytest.raises(ValueError):
        PrimeRangeQuery.by_value(10, 5)
    with pytest.raises(ValueError):
        PrimeRangeQuery.by_count(0, -1)
    with pytest.raises(ValueError):
        TupleCenterQuery(0, PrimeRangeQuery.by_value(0, 10))
    q = PrimeRangeQuery.by_count(7, 10)
    assert q.mode is RangeMode.BY_COUNT_FROM
    assert q.convention() == {"mode": "ByCountFrom", "lo": 7, "count": 10}


def test_twin_pairs_up_to_twenty():
    assert twin_pairs(PrimeRangeQuery.by_value(0, 20)).tolist() == [[3, 5], [5, 7], [11, 13], [17, 19]]
    # p + 2 must not exceed the bound
    assert twin_pairs(PrimeRangeQuery.by_value(0, 18)).tolist() == [[3, 5], [5, 7], [11, 13]]


def test_first_twin_pair_from_five():
    assert twin_pairs(PrimeRangeQuery.by_count(5, 1)).tolist() == [[5, 7]]


def test_twin_pairs_among_first_million_primes(oracle_1e7):
    first = oracle_1e7[: 10**6]
    expected = int(np.count_nonzero(np.diff(first) == 2))
    got = twin_pairs(PrimeRangeQuery.by_value(2, int(first[-1])))
    assert got.shape[0] == expected


def test_tuple_centers_small():
    r = PrimeRangeQuery.by_value(0, 20)
    assert tuple_centers(TupleCenterQuery(1, r)).tolist() == [4, 6, 12, 18]
    assert tuple_centers(TupleCenterQuery(3, r)).tolist() == [8, 10, 14, 16, 20]


@pytest.mark.parametrize("d", [1, 2, 3, 6])
def test_tuple_centers_match_brute_force(d):
    lo, hi = 500, 20_000
    expected = [n for n in range(lo, hi + 1) if n - d >= 0 and is_prime(n - d) and is_prime(n + d)]
    assert tuple_centers(TupleCenterQuery(d, PrimeRangeQuery.by_value(lo, hi))).tolist() == expected
    by_count = tuple_centers(TupleCenterQuery(d, PrimeRangeQuery.by_count(lo, len(expected))))
    assert by_count.tolist() == expected


def test_count_mode_crosses_segment_boundaries():
    # Long enough to span several 2**20 segments.
    by_count = tuple_centers(TupleCenterQuery(3, PrimeRangeQuery.by_count(0, 60_000)))
    by_value = tuple_centers(TupleCenterQuery(3, PrimeRangeQuery.by_value(0, int(by_count[-1]))))
    assert np.array_equal(by_count, by_value)


def test_twin_centers_are_multiples_of_six():
    centers = tuple_centers(TupleCenterQuery(1, PrimeRangeQuery.by_count(5, 10_000)))
    assert (centers % 6 == 0).all()


@given(st.integers(0, 10**6), st.integers(0, 20_000))
@settings(max_examples=30, deadline=None)
def test_twin_pairs_biject_with_centers(lo, width):
    r = PrimeRangeQuery.by_value(lo, lo + width)
    pairs = twin_pairs(r)
    centers = tuple_centers(TupleCenterQuery(1, PrimeRangeQuery.by_value(lo + 1, max(lo + 1, lo + width - 1))))
    if width < 2:
        centers = centers[:0]
    assert np.array_equal(pairs[:, 0] + 1, centers)
    assert np.array_equal(pairs[:, 1] - 1, centers)
