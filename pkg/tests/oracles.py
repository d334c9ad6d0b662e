"""Independent reference computations used as test oracles.

Nothing here imports from ``prime_ifs``; each routine takes the slow,
obvious route so it can check the fast one.
"""

from __future__ import annotations

import math
from fractions import Fraction


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def bytearray_sieve(limit: int) -> list[int]:
    """Plain sieve over a bytearray, no numpy."""
    if limit < 2:
        return []
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = bytes(len(range(p * p, limit + 1, p)))
    return [i for i, f in enumerate(flags) if f]


def exact_orbit(symbols, start=(Fraction(1, 2), Fraction(1, 2))):
    """Square-system orbit in exact rational arithmetic."""
    shift = {1: (0, 0), 2: (Fraction(1, 2), 0), 3: (0, Fraction(1, 2)), 4: (Fraction(1, 2), Fraction(1, 2))}
    x, y = start
    out = []
    for s in symbols:
        e, f = shift[s]
        x, y = x / 2 + e, y / 2 + f
        out.append((x, y))
    return out


def exact_address(x: Fraction, y: Fraction, depth: int) -> str:
    digits = []
    for _ in range(depth):
        bx, by = int(x >= Fraction(1, 2)), int(y >= Fraction(1, 2))
        digits.append(str(1 + bx + 2 * by))
        x, y = 2 * x - bx, 2 * y - by
    return "".join(digits)


def gasket_cells(depth: int) -> set[tuple[Fraction, Fraction]]:
    """Lower-left corners of the gasket's depth-``depth`` cells by recursion on corners."""
    corners = {(Fraction(0), Fraction(0))}
    side = Fraction(1)
    for _ in range(depth):
        side /= 2
        corners = {(x / 2 + e, y / 2 + f) for x, y in corners
                   for e, f in ((0, 0), (Fraction(1, 2), 0), (0, Fraction(1, 2)))}
    return corners


def sample_stdev(values) -> float:
    import statistics

    return statistics.stdev(values)


def pair_counts(values, q):
    counts = {}
    for a, b in zip(values, values[1:]):
        key = (a % q, b % q)
        counts[key] = counts.get(key, 0) + 1
    return counts
