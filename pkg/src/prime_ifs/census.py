"""Frequency censuses over symbol and residue streams.

Address tables count length-``k`` windows of a symbol stream, keyed by the
IFS address of the window, i.e. the window read backwards (most recent
symbol first).  Residue-tuple tables key the same windows by their residues
in stream order.  Every table materialises its whole key space, zeros
included, so standard deviations are always taken over a fixed population.
"""

from __future__ import annotations

import enum
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .ifs import address_codes
from .errors import DegenerateTableError, EmptyStreamError, UnmappedResidueError
from .primes import default_workers, nth_prime, primes_from_count, primes_in_range
from .residues import (
    ResidueAlphabet,
    SymbolStream,
    as_symbols,
    rot_distance_stream,
)

MAX_ARITY = 12


class KeyKind(str, enum.Enum):
    ADDRESS = "Address"
    RESIDUE_TUPLE = "ResidueTuple"
    DISTANCE_CLASS = "DistanceClass"


def _key_json(key):
    if isinstance(key, tuple):
        return list(key)
    return key


@dataclass
class FrequencyTable:
    key_kind: KeyKind
    arity: int
    entries: dict
    total: int
    convention: dict | None = None

    def __post_init__(self) -> None:
        if sum(self.entries.values()) != self.total:
            raise ValueError("total must equal the sum of the counts")

    def __getitem__(self, key) -> int:
        return self.entries[key]

    def __len__(self) -> int:
        return len(self.entries)

    def percent(self, key) -> float:
        return 100.0 * self.entries[key] / self.total if self.total else 0.0

    def ranked(self) -> list[tuple[object, int]]:
        """Entries by ascending count, ties broken by key."""
        return sorted(self.entries.items(), key=lambda kv: (kv[1], kv[0]))

    def lowest(self, n: int = 1) -> list[tuple[object, int]]:
        return self.ranked()[:n]

    def highest(self, n: int = 1) -> list[tuple[object, int]]:
        return self.ranked()[::-1][:n]

    def zero_keys(self) -> list:
        return [k for k, c in self.ranked() if c == 0]

    @property
    def sigma(self) -> float:
        return stddev_of_counts(self)

    def to_json(self) -> dict:
        entries = [
            {
                "key": _key_json(k),
                "count": int(c),
                "percent": round(100.0 * c / self.total, 3) if self.total else 0.0,
            }
            for k, c in self.ranked()
        ]
        sigma = stddev_of_counts(self) if len(self.entries) >= 2 else None
        return {
            "key_kind": self.key_kind.value,
            "arity": self.arity,
            "convention": self.convention,
            "entries": entries,
            "total": int(self.total),
            "sigma": sigma,
        }


def stddev_of_counts(t: FrequencyTable) -> float:
    """Sample standard deviation (divisor n - 1) across every key's count."""
    if len(t.entries) < 2:
        raise DegenerateTableError("standard deviation needs at least 2 keys")
    return float(np.std(np.fromiter(t.entries.values(), dtype=np.float64), ddof=1))


# --------------------------------------------------------------------------- k-grams


def _window_codes(sym: np.ndarray, k: int) -> np.ndarray:
    # Code digits, most significant first, are the window reversed: the
    # newest symbol s[t+k-1] becomes the leading address digit.
    n = sym.size - k + 1
    code = np.zeros(n, dtype=np.int64)
    for j in range(k - 1, -1, -1):
        code = 4 * code + (sym[j : j + n].astype(np.int64) - 1)
    return code


def kgram_count_array(
    symbols: SymbolStream | Iterable[int], k: int, *, workers: int | None = None
) -> np.ndarray:
    """Counts of every length-``k`` address, indexed by :meth:`Address.code`.

    With several workers the stream is cut into chunks that overlap by
    ``k - 1`` symbols, so every window is counted exactly once.
    """
    if not 1 <= k <= MAX_ARITY:
        raise ValueError(f"k must be in 1..{MAX_ARITY}")
    sym = as_symbols(symbols)
    if sym.size < k:
        raise EmptyStreamError(f"stream of length {sym.size} is shorter than k={k}")
    size = 4**k
    workers = workers or default_workers()
    n_windows = sym.size - k + 1
    if workers == 1 or n_windows < 2 * workers:
        return np.bincount(_window_codes(sym, k), minlength=size)
    edges = np.linspace(0, n_windows, workers + 1).astype(np.int64)
    chunks = [sym[a : b + k - 1] for a, b in zip(edges[:-1], edges[1:]) if b > a]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda c: np.bincount(_window_codes(c, k), minlength=size), chunks)
        return np.sum(list(parts), axis=0)


def _address_label(code: int, k: int) -> str:
    digits = []
    for _ in range(k):
        code, rem = divmod(code, 4)
        digits.append(str(rem + 1))
    return "".join(reversed(digits))


def kgram_frequencies(
    s: SymbolStream | Iterable[int],
    k: int,
    *,
    convention: dict | None = None,
    workers: int | None = None,
) -> FrequencyTable:
    """Address census of the length-``k`` windows of ``s``."""
    counts = kgram_count_array(s, k, workers=workers)
    entries = {_address_label(c, k): int(n) for c, n in enumerate(counts)}
    return FrequencyTable(KeyKind.ADDRESS, k, entries, int(counts.sum()), convention)


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    # Maximal [start, stop) runs of True.
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return list(zip(edges[::2].tolist(), edges[1::2].tolist()))


def residue_kgram_counts(
    values: Sequence[int] | np.ndarray,
    alphabet: ResidueAlphabet,
    k: int,
    *,
    convention: dict | None = None,
    skip_unmapped: bool = False,
    workers: int | None = None,
) -> FrequencyTable:
    """Counts of consecutive residue ``k``-tuples, keyed in stream order.

    Unmapped residues raise :class:`UnmappedResidueError` unless
    ``skip_unmapped`` is set; then they split the stream and no window
    bridges them.
    """
    v = np.asarray(values, dtype=np.int64)
    sym = alphabet.lookup_table()[v % alphabet.modulus] if v.size else np.zeros(0, np.int8)
    if (sym == 0).any() and not skip_unmapped:
        i = int(np.flatnonzero(sym == 0)[0])
        raise UnmappedResidueError(int(v[i]), alphabet.modulus, alphabet.classes)
    counts = np.zeros(4**k, dtype=np.int64)
    for a, b in _runs(sym != 0):
        if b - a >= k:
            counts += kgram_count_array(sym[a:b], k, workers=workers)
    return _tuple_table(counts, alphabet, k, convention)


def _tuple_table(counts: np.ndarray, alphabet: ResidueAlphabet, k: int, convention) -> FrequencyTable:
    entries = {}
    for code, n in enumerate(counts.tolist()):
        digits = [int(ch) for ch in _address_label(code, k)]
        # Address digits run newest-first; residue tuples read oldest-first.
        entries[tuple(alphabet.classes[d - 1] for d in reversed(digits))] = n
    return FrequencyTable(KeyKind.RESIDUE_TUPLE, k, entries, int(counts.sum()), convention)


def residue_pair_counts(
    values: Sequence[int] | np.ndarray,
    alphabet: ResidueAlphabet,
    *,
    convention: dict | None = None,
    workers: int | None = None,
) -> FrequencyTable:
    """``count[(a, b)]``: positions with ``v[t] = a`` and ``v[t+1] = b`` mod ``q``."""
    return residue_kgram_counts(values, alphabet, 2, convention=convention, workers=workers)


def distance_frequencies(
    s: SymbolStream | Iterable[int], *, convention: dict | None = None
) -> FrequencyTable:
    """Forward rotational distances 0..3 between consecutive symbols."""
    sym = as_symbols(s)
    if sym.size < 2:
        raise EmptyStreamError("distance census needs at least 2 symbols")
    dist = rot_distance_stream(sym).symbols.astype(np.int64) - 1
    counts = np.bincount(dist, minlength=4)
    entries = {d: int(counts[d]) for d in range(4)}
    return FrequencyTable(KeyKind.DISTANCE_CLASS, 1, entries, int(counts.sum()), convention)


# --------------------------------------------------------------------------- sigma scan


class Interpretation(str, enum.Enum):
    WINDOW_WIDTH = "WindowWidth"  # primes in [x0, x0 + size]
    PRIME_COUNT = "PrimeCount"  # `size` primes >= x0
    PRIME_INDEX = "PrimeIndex"  # `size` primes starting at the x0-th prime

    @classmethod
    def parse(cls, text: str) -> "Interpretation":
        aliases = {"window": cls.WINDOW_WIDTH, "count": cls.PRIME_COUNT, "index": cls.PRIME_INDEX}
        key = text.strip()
        if key.lower() in aliases:
            return aliases[key.lower()]
        return cls(key)


@dataclass(frozen=True)
class SigmaScanRow:
    x0: int
    sigma: float
    interpretation: Interpretation
    first_prime: int | None = None
    pairs: int = 0

    def to_json(self) -> dict:
        return {
            "x0": self.x0,
            "sigma": self.sigma,
            "interpretation": self.interpretation.value,
            "first_prime": self.first_prime,
            "pairs": self.pairs,
        }


def scan_primes(x0: int, size: int, interpretation: Interpretation, workers: int | None = None):
    if interpretation is Interpretation.WINDOW_WIDTH:
        return primes_in_range(x0, x0 + size, workers=workers)
    if interpretation is Interpretation.PRIME_COUNT:
        return primes_from_count(x0, size, workers=workers)
    return primes_from_count(nth_prime(x0, workers=workers), size, workers=workers)


def sigma_scan(
    x0_list: Sequence[int],
    size: int,
    q: int = 10,
    ordering: Sequence[int] | None = None,
    interpretation: Interpretation | str = Interpretation.PRIME_COUNT,
    *,
    workers: int | None = None,
) -> list[SigmaScanRow]:
    """Standard deviation of the consecutive-pair residue counts for each start ``x0``."""
    if isinstance(interpretation, str) and not isinstance(interpretation, Interpretation):
        interpretation = Interpretation.parse(interpretation)
    if size <= 0:
        raise DegenerateTableError("sigma scan needs a positive size")
    alphabet = ResidueAlphabet.for_modulus(q, ordering)
    rows = []
    for x0 in x0_list:
        primes = scan_primes(int(x0), size, interpretation, workers)
        # Primes dividing q can only open the list; start after the last one
        # rather than bridge across it.
        shared = np.flatnonzero(np.gcd(primes, q) != 1)
        if shared.size:
            primes = primes[shared[-1] + 1 :]
        if primes.size < 2:
            raise DegenerateTableError(f"fewer than 2 primes for x0={x0}")
        table = residue_pair_counts(primes, alphabet, workers=workers)
        rows.append(
            SigmaScanRow(int(x0), stddev_of_counts(table), interpretation, int(primes[0]), table.total)
        )
    return rows


# --------------------------------------------------------------------------- twins and tuples


@dataclass
class TwinCensus:
    concatenated: FrequencyTable
    classes: FrequencyTable
    forbidden: list = field(default_factory=list)
    dropped_pairs: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "concatenated": self.concatenated.to_json(),
            "classes": self.classes.to_json(),
            "forbidden": [list(k) for k in self.forbidden],
            "dropped_pairs": [list(p) for p in self.dropped_pairs],
        }


def twin_census(
    pairs: np.ndarray,
    alphabet: ResidueAlphabet | None = None,
    *,
    convention: dict | None = None,
    workers: int | None = None,
) -> TwinCensus:
    """Residue censuses of twin pairs ``(p, p + 2)``.

    Returns the pair census of the concatenated stream ``p1, p1+2, p2, p2+2, ...``,
    the census of the twin classes ``(p mod q, p+2 mod q)``, and the pairs of
    the concatenated census that never occur.  A twin pair with an unmapped
    member (``(3, 5)`` and ``(5, 7)`` mod 10) is removed as a whole; the
    stream is split there rather than bridged.
    """
    alphabet = alphabet or ResidueAlphabet.for_modulus(10, (1, 3, 7, 9))
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    lut = alphabet.lookup_table()
    ok = (lut[pairs % alphabet.modulus] != 0).all(axis=1)
    dropped = [tuple(p) for p in pairs[~ok].tolist()]

    concat = np.zeros(16, dtype=np.int64)
    for a, b in _runs(ok):
        stream = pairs[a:b].ravel()
        if stream.size >= 2:
            concat += kgram_count_array(lut[stream % alphabet.modulus], 2, workers=workers)
    concatenated = _tuple_table(concat, alphabet, 2, convention)

    kept = pairs[ok] % alphabet.modulus
    q = alphabet.modulus
    class_counts = {(a, (a + 2) % q): 0 for a in sorted(alphabet.classes) if (a + 2) % q in alphabet.classes}
    for a, b in kept.tolist():
        class_counts[(a, b)] += 1
    classes = FrequencyTable(KeyKind.RESIDUE_TUPLE, 2, class_counts, int(kept.shape[0]), convention)
    return TwinCensus(concatenated, classes, concatenated.zero_keys(), dropped)


def center_alphabet(offset: int) -> ResidueAlphabet:
    """Mod-8 alphabet for centers of ``n +- offset``: even centers for odd offsets, odd for even."""
    return ResidueAlphabet(8, (0, 2, 4, 6) if offset % 2 else (1, 3, 5, 7))


def tuple_center_census(
    centers: np.ndarray,
    alphabet: ResidueAlphabet | None = None,
    k: int = 2,
    *,
    shift: int = 0,
    convention: dict | None = None,
    workers: int | None = None,
) -> FrequencyTable:
    """Length-``k`` census of the residues of ``centers + shift``."""
    alphabet = alphabet or ResidueAlphabet(8, (0, 2, 4, 6))
    values = np.asarray(centers, dtype=np.int64) + shift
    return residue_kgram_counts(values, alphabet, k, convention=convention, workers=workers)


def address_of_tuple(key: Sequence[int], alphabet: ResidueAlphabet) -> str:
    """IFS address of a residue tuple (stream order) under ``alphabet``."""
    return "".join(str(alphabet.classes.index(r) + 1) for r in reversed(tuple(key)))


def all_tuples(alphabet: ResidueAlphabet, k: int) -> list[tuple[int, ...]]:
    return list(itertools.product(alphabet.classes, repeat=k))


def point_census(points: np.ndarray, depth: int, *, convention: dict | None = None) -> FrequencyTable:
    """Number of points in each depth-``depth`` cell of the unit square."""
    codes = address_codes(points, depth) if len(points) else np.zeros(0, dtype=np.int64)
    counts = np.bincount(codes, minlength=4**depth)
    entries = {_address_label(c, depth): int(n) for c, n in enumerate(counts)}
    return FrequencyTable(KeyKind.ADDRESS, depth, entries, int(counts.sum()), convention)
