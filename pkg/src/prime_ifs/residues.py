"""Residue alphabets, vertex orderings and symbol streams.

A :class:`ResidueAlphabet` assigns four residue classes mod ``q`` to the four
maps of the unit-square system: ``classes[0]`` drives map 1, ``classes[1]``
map 2, and so on.  Symbol streams are small-integer numpy arrays with values
in ``{1, 2, 3, 4}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyStreamError, InvalidModulusError, UnmappedResidueError

SUPPORTED_MODULI = (5, 8, 10, 12)


def reduced_residues(q: int) -> list[int]:
    """Units mod ``q`` in ascending order."""
    if q < 2:
        raise InvalidModulusError(f"modulus must be >= 2, got {q}")
    return [a for a in range(1, q + 1) if math.gcd(a, q) == 1]


def canonical_orderings(q: int) -> list[list[int]]:
    """The three inequivalent ways to place the four units mod ``q`` on the square.

    The smallest unit is pinned to vertex 1 (quotienting rotations); the
    remaining 3! arrangements are paired with their circular reversal and
    the lexicographically smaller of each pair is kept.
    """
    units = reduced_residues(q)
    if len(units) != 4:
        raise InvalidModulusError(
            f"modulus {q} has {len(units)} reduced residues; exactly 4 are required"
        )
    first, rest = units[0], units[1:]
    keep = set()
    for perm in itertools.permutations(rest):
        cyc = (first, *perm)
        rev = (first, *reversed(perm))
        keep.add(min(cyc, rev))
    return [list(o) for o in sorted(keep)]


@dataclass(frozen=True)
class ResidueAlphabet:
    modulus: int
    classes: tuple[int, ...]
    reduced: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "classes", tuple(int(c) for c in self.classes))
        q, cls = self.modulus, self.classes
        if q < 2:
            raise InvalidModulusError(f"modulus must be >= 2, got {q}")
        if len(cls) != 4 or len(set(cls)) != 4:
            raise ValueError(f"need 4 distinct classes, got {list(cls)}")
        if any(not 0 <= c < q for c in cls):
            raise ValueError(f"classes must lie in [0, {q}), got {list(cls)}")
        if self.reduced and sorted(cls) != [r % q for r in reduced_residues(q)]:
            raise ValueError(f"{list(cls)} is not the reduced residue system mod {q}")

    @classmethod
    def for_modulus(cls, q: int, ordering: Sequence[int] | None = None) -> "ResidueAlphabet":
        """Reduced alphabet mod ``q``; defaults to the first canonical ordering."""
        if ordering is None:
            ordering = canonical_orderings(q)[0]
        return cls(q, tuple(ordering), reduced=True)

    def lookup_table(self) -> np.ndarray:
        """``lut[r]`` is the symbol for residue ``r``, or 0 when unmapped."""
        lut = np.zeros(self.modulus, dtype=np.int8)
        lut[list(self.classes)] = np.arange(1, 5, dtype=np.int8)
        return lut

    def label(self) -> str:
        return "[" + " ".join(map(str, self.classes)) + "]"

    def describe(self) -> dict:
        return {"modulus": self.modulus, "classes": list(self.classes), "reduced": self.reduced}


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SymbolStream:
    """Transform indices in ``{1, 2, 3, 4}`` plus a record of what produced them."""

    symbols: np.ndarray
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        s = np.ascontiguousarray(self.symbols, dtype=np.int8)
        if s.ndim != 1:
            raise ValueError("symbols must be one-dimensional")
        if s.size and (s.min() < 1 or s.max() > 4):
            raise ValueError("symbols must lie in {1, 2, 3, 4}")
        if s is self.symbols:
            s = s.copy()
        object.__setattr__(self, "symbols", _freeze(s))

    def __len__(self) -> int:
        return self.symbols.size

    def __iter__(self):
        return iter(self.symbols.tolist())

    def tolist(self) -> list[int]:
        return self.symbols.tolist()


def as_symbols(s: SymbolStream | Iterable[int]) -> np.ndarray:
    if isinstance(s, SymbolStream):
        return s.symbols
    return SymbolStream(np.asarray(list(s) if not isinstance(s, np.ndarray) else s)).symbols


def symbolize(
    values: Sequence[int] | np.ndarray,
    alphabet: ResidueAlphabet,
    provenance: dict | None = None,
) -> SymbolStream:
    """Map each value to the 1-based position of its residue in ``alphabet.classes``."""
    v = np.asarray(values, dtype=np.int64)
    sym = alphabet.lookup_table()[v % alphabet.modulus] if v.size else np.zeros(0, np.int8)
    bad = np.flatnonzero(sym == 0)
    if bad.size:
        raise UnmappedResidueError(int(v[bad[0]]), alphabet.modulus, alphabet.classes)
    prov = {"alphabet": alphabet.describe()}
    prov.update(provenance or {})
    return SymbolStream(sym, prov)


def desymbolize(stream: SymbolStream | Iterable[int], alphabet: ResidueAlphabet) -> np.ndarray:
    """Residue class of every symbol, inverting :func:`symbolize` per element."""
    classes = np.asarray((0,) + alphabet.classes, dtype=np.int64)
    return classes[as_symbols(stream)]


def _derived(s: SymbolStream | Iterable[int], name: str) -> tuple[np.ndarray, dict]:
    arr = as_symbols(s)
    if arr.size < 2:
        raise EmptyStreamError(f"{name} needs at least 2 symbols, got {arr.size}")
    prov = dict(s.provenance) if isinstance(s, SymbolStream) else {}
    prov["derived"] = prov.get("derived", []) + [name]
    return arr.astype(np.int16), prov


def abs_diff_stream(s: SymbolStream | Iterable[int]) -> SymbolStream:
    """``|s[t+1] - s[t]| + 1`` for each consecutive pair."""
    arr, prov = _derived(s, "abs_diff")
    return SymbolStream(np.abs(np.diff(arr)) + 1, prov)


def rot_distance_stream(s: SymbolStream | Iterable[int]) -> SymbolStream:
    """Forward rotational distance ``(s[t+1] - s[t]) mod 4``, shifted to a symbol.

    Distance 0 (a repeat) drives map 1, a single forward step drives map 2.
    """
    arr, prov = _derived(s, "rot_distance")
    return SymbolStream(np.mod(np.diff(arr), 4) + 1, prov)


def rot_distance(i: int, j: int) -> int:
    """Distance from index ``j`` (applied first) to ``i`` (applied after)."""
    return (i - j) % 4
