"""Prime, twin-pair and k-tuple center generation over arbitrary ranges.

Everything here is built on one segmented sieve of Eratosthenes.  Segments
are ``SEGMENT_SIZE`` consecutive integers; base primes up to the square root
of the segment end are cached and grown on demand, so count-based queries
can run without knowing their upper bound in advance.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import CapacityError

SEGMENT_SIZE = 1 << 20
MAX_VALUE = 1 << 62  # keeps every intermediate (p*p, n+d, lo+offset) inside int64

_THREADS_ENV = "PRIME_IFS_THREADS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(_THREADS_ENV, "1")))
    except ValueError:
        return 1


class RangeMode(str, enum.Enum):
    BY_VALUE_RANGE = "ByValueRange"
    BY_COUNT_FROM = "ByCountFrom"


@dataclass(frozen=True)
class PrimeRangeQuery:
    """Either a closed value interval ``[lo, hi]`` or ``count`` items from ``lo``."""

    mode: RangeMode
    lo: int
    hi: int | None = None
    count: int | None = None

    def __post_init__(self) -> None:
        if self.lo < 0:
            raise ValueError("lo must be >= 0")
        if self.mode is RangeMode.BY_VALUE_RANGE:
            if self.hi is None or self.lo > self.hi:
                raise ValueError("ByValueRange requires lo <= hi")
        else:
            if self.count is None or self.count < 0:
                raise ValueError("ByCountFrom requires count >= 0")

    @classmethod
    def by_value(cls, lo: int, hi: int) -> "PrimeRangeQuery":
        return cls(RangeMode.BY_VALUE_RANGE, lo, hi=hi)

    @classmethod
    def by_count(cls, lo: int, count: int) -> "PrimeRangeQuery":
        return cls(RangeMode.BY_COUNT_FROM, lo, count=count)

    def convention(self) -> dict:
        """JSON-ready record of which range convention produced a stream."""
        rec = {"mode": self.mode.value, "lo": self.lo}
        if self.mode is RangeMode.BY_VALUE_RANGE:
            rec["hi"] = self.hi
        else:
            rec["count"] = self.count
        return rec


@dataclass(frozen=True)
class TupleCenterQuery:
    offset: int
    query: PrimeRangeQuery

    def __post_init__(self) -> None:
        if self.offset < 1:
            raise ValueError("offset must be >= 1")


def _check_capacity(value: int) -> None:
    if value > MAX_VALUE:
        raise CapacityError(f"{value} exceeds the sieving bound {MAX_VALUE}")


def simple_sieve(limit: int) -> np.ndarray:
    """All primes ``<= limit`` from a plain (unsegmented) sieve."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


class _BasePrimes:
    # Grows geometrically so count-based scans re-sieve the base only O(log) times.
    def __init__(self) -> None:
        self.limit = 0
        self.primes = np.array([], dtype=np.int64)

    def upto(self, limit: int) -> np.ndarray:
        if limit > self.limit:
            self.limit = max(limit, 2 * self.limit, 1 << 16)
            self.primes = simple_sieve(self.limit)
        return self.primes[: np.searchsorted(self.primes, limit, side="right")]


_BASE = _BasePrimes()


def sieve_segment(lo: int, hi: int, base: np.ndarray | None = None) -> np.ndarray:
    """Boolean primality flags for the integers in ``[lo, hi)``."""
    n = hi - lo
    flags = np.ones(max(n, 0), dtype=bool)
    if n <= 0:
        return flags
    if lo < 2:
        flags[: min(2 - lo, n)] = False
    root = math.isqrt(hi - 1)
    if base is None:
        base = _BASE.upto(root)
    else:
        base = base[: np.searchsorted(base, root, side="right")]
    if base.size == 0:
        return flags

    split = int(np.searchsorted(base, max(n // 8, 2), side="right"))
    for p in base[:split].tolist():
        start = max(p * p, -(-lo // p) * p)
        if start < hi:
            flags[start - lo :: p] = False

    # Primes comparable to the segment length hit it only a few times each.
    ps = base[split:]
    if ps.size:
        offs = np.maximum(ps * ps, -(-lo // ps) * ps) - lo
        while ps.size:
            live = offs < n
            if not live.any():
                break
            ps, offs = ps[live], offs[live]
            flags[offs] = False
            offs = offs + ps
    return flags


def _segment_primes(bounds: tuple[int, int]) -> np.ndarray:
    lo, hi = bounds
    return np.flatnonzero(sieve_segment(lo, hi)).astype(np.int64) + lo


def _bounds(lo: int, hi: int | None, segment_size: int) -> Iterator[tuple[int, int]]:
    a = lo
    while hi is None or a < hi:
        b = a + segment_size if hi is None else min(a + segment_size, hi)
        _check_capacity(b - 1)
        yield a, b
        a = b


def iter_prime_segments(
    lo: int,
    hi: int | None = None,
    *,
    segment_size: int = SEGMENT_SIZE,
    workers: int | None = None,
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(segment_end, primes)`` for consecutive segments covering ``[lo, hi)``.

    ``hi=None`` streams forever.  Segments may be sieved by several threads,
    but they are always yielded in ascending order.
    """
    workers = workers or default_workers()
    bounds = _bounds(lo, hi, segment_size)
    if workers == 1:
        for b in bounds:
            yield b[1], _segment_primes(b)
        return
    # Base primes are grown on the calling thread so workers only read them.
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while True:
            batch = []
            for b in bounds:
                batch.append(b)
                if len(batch) == workers:
                    break
            if not batch:
                return
            _BASE.upto(math.isqrt(batch[-1][1] - 1))
            for b, primes in zip(batch, pool.map(_segment_primes, batch)):
                yield b[1], primes


def primes_in_range(lo: int, hi: int, *, workers: int | None = None) -> np.ndarray:
    """Ascending primes ``p`` with ``lo <= p <= hi``."""
    if lo < 0 or lo > hi:
        raise ValueError("need 0 <= lo <= hi")
    _check_capacity(hi)
    parts = [p for _, p in iter_prime_segments(lo, hi + 1, workers=workers)]
    return np.concatenate(parts) if parts else np.array([], dtype=np.int64)


def primes_from_count(
    start_value: int, count: int, *, workers: int | None = None
) -> np.ndarray:
    """The first ``count`` primes that are ``>= start_value``."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if start_value < 0:
        raise ValueError("start_value must be >= 0")
    _check_capacity(start_value)
    out = np.empty(count, dtype=np.int64)
    filled = 0
    if count == 0:
        return out
    for _, primes in iter_prime_segments(start_value, None, workers=workers):
        take = min(count - filled, primes.size)
        out[filled : filled + take] = primes[:take]
        filled += take
        if filled == count:
            break
    return out


def _centers_in_range(d: int, lo: int, hi: int, workers: int | None) -> np.ndarray:
    _check_capacity(hi + d)
    primes = primes_in_range(max(lo - d, 0), hi + d, workers=workers)
    return _centers_from_primes(primes, d, lo, hi + 1)


def _centers_from_primes(primes: np.ndarray, d: int, n_lo: int, n_hi: int) -> np.ndarray:
    # n is a center iff n-d and n+d are both in the (complete) prime list.
    partner = primes + 2 * d
    idx = np.searchsorted(primes, partner)
    idx[idx == primes.size] = 0
    hit = primes[idx] == partner if primes.size else np.zeros(0, dtype=bool)
    centers = primes[hit] + d
    return centers[(centers >= n_lo) & (centers < n_hi)]


def _iter_centers(d: int, n_lo: int, workers: int | None) -> Iterator[np.ndarray]:
    tail = np.array([], dtype=np.int64)
    done_below = n_lo  # centers < done_below have been emitted
    for seg_hi, primes in iter_prime_segments(max(n_lo - d, 0), None, workers=workers):
        buf = np.concatenate([tail, primes])
        # Every prime below seg_hi is known, so centers n with n + d < seg_hi are final.
        upper = seg_hi - d
        if upper > done_below:
            yield _centers_from_primes(buf, d, done_below, upper)
            done_below = upper
        tail = buf[buf >= done_below - d]


def tuple_centers(q: TupleCenterQuery, *, workers: int | None = None) -> np.ndarray:
    """Ascending centers ``n`` with ``n - d`` and ``n + d`` both prime."""
    d, rq = q.offset, q.query
    if rq.mode is RangeMode.BY_VALUE_RANGE:
        return _centers_in_range(d, rq.lo, rq.hi, workers)
    out = np.empty(rq.count, dtype=np.int64)
    filled = 0
    if rq.count == 0:
        return out
    for chunk in _iter_centers(d, rq.lo, workers):
        take = min(rq.count - filled, chunk.size)
        out[filled : filled + take] = chunk[:take]
        filled += take
        if filled == rq.count:
            break
    return out


def twin_pairs(query: PrimeRangeQuery, *, workers: int | None = None) -> np.ndarray:
    """Twin prime pairs as an ``(n, 2)`` array ordered by the smaller member.

    Under ``ByValueRange`` a pair is included when ``lo <= p`` and ``p + 2 <= hi``;
    under ``ByCountFrom`` the first ``count`` pairs with ``p >= lo`` are returned.
    """
    if query.mode is RangeMode.BY_VALUE_RANGE:
        if query.hi - query.lo < 2:
            return np.empty((0, 2), dtype=np.int64)
        cq = PrimeRangeQuery.by_value(query.lo + 1, query.hi - 1)
    else:
        cq = PrimeRangeQuery.by_count(query.lo + 1, query.count)
    centers = tuple_centers(TupleCenterQuery(1, cq), workers=workers)
    return np.column_stack([centers - 1, centers + 1])


def nth_prime(n: int, *, workers: int | None = None) -> int:
    """The ``n``-th prime (1-based) by counting sieve segments.

    Linear in the size of the answer; practical up to roughly ``n = 10**8``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    seen = 0
    for _, primes in iter_prime_segments(0, None, workers=workers):
        if seen + primes.size >= n:
            return int(primes[n - seen - 1])
        seen += primes.size
    raise AssertionError("unreachable")
