"""Affine maps, iterated function systems and unit-square addresses.

Cell convention: every dyadic cell is half-open, ``[lo, lo + 2**-k)`` on both
axes, except that a coordinate equal to 1.0 belongs to the top cell.  With
the four halving maps of the unit square this makes the address of an orbit
point exactly the reversed tail of the symbols that produced it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import OutOfUnitSquareError, SymbolOutOfRangeError, UnsupportedMapError
from .residues import SymbolStream

Point = tuple[float, float]

DEFAULT_START: Point = (0.5, 0.5)
RNG_ALGORITHM = "numpy.random.PCG64"


@dataclass(frozen=True)
class AffineMap2D:
    """``(x, y) -> (r cos(theta) x - s sin(phi) y + e, r sin(theta) x + s cos(phi) y + f)``"""

    r: float
    s: float
    theta: float = 0.0
    phi: float = 0.0
    e: float = 0.0
    f: float = 0.0

    def matrix(self) -> tuple[float, float, float, float]:
        return (
            self.r * math.cos(self.theta),
            -self.s * math.sin(self.phi),
            self.r * math.sin(self.theta),
            self.s * math.cos(self.phi),
        )

    def __call__(self, p: Point) -> Point:
        return apply_map(self, p)


def apply_map(m: AffineMap2D, p: Point) -> Point:
    a, b, c, d = m.matrix()
    x, y = p
    return (a * x + b * y + m.e, c * x + d * y + m.f)


@dataclass(frozen=True)
class IfsSystem:
    maps: tuple[AffineMap2D, ...]
    probabilities: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "maps", tuple(self.maps))
        if not self.maps:
            raise ValueError("an IFS needs at least one map")
        if self.probabilities is not None:
            probs = tuple(float(p) for p in self.probabilities)
            if len(probs) != len(self.maps):
                raise ValueError("one probability per map is required")
            if any(p < 0 for p in probs) or abs(math.fsum(probs) - 1.0) > 1e-12:
                raise ValueError("probabilities must be >= 0 and sum to 1")
            object.__setattr__(self, "probabilities", probs)

    def __len__(self) -> int:
        return len(self.maps)

    @property
    def contractive(self) -> bool:
        return all(abs(m.r) < 1 and abs(m.s) < 1 for m in self.maps)

    def with_probabilities(self, probs: Sequence[float] | None) -> "IfsSystem":
        return IfsSystem(self.maps, None if probs is None else tuple(probs))

    def uniform(self) -> "IfsSystem":
        n = len(self.maps)
        return self.with_probabilities([1.0 / n] * n)

    def cumulative(self) -> np.ndarray:
        probs = self.probabilities or (1.0 / len(self.maps),) * len(self.maps)
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        return cum


def _halving(e: float, f: float) -> AffineMap2D:
    return AffineMap2D(0.5, 0.5, 0.0, 0.0, e, f)


def gasket_system() -> IfsSystem:
    """The three maps of the Sierpinski gasket."""
    return IfsSystem((_halving(0, 0), _halving(0.5, 0), _halving(0, 0.5)))


def standard_square_system(probabilities: Sequence[float] | None = None) -> IfsSystem:
    """The four quadrant maps that fill the unit square; map ``i`` pulls toward vertex ``i``."""
    maps = (_halving(0, 0), _halving(0.5, 0), _halving(0, 0.5), _halving(0.5, 0.5))
    return IfsSystem(maps, None if probabilities is None else tuple(probabilities))


# --------------------------------------------------------------------------- addresses


@dataclass(frozen=True, order=True)
class Address:
    """Base-4 cell label; ``digits[0]`` is the most recently applied map.

    The empty address denotes the whole square (depth 0).
    """

    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        d = tuple(int(x) for x in self.digits)
        if any(x not in (1, 2, 3, 4) for x in d):
            raise ValueError(f"address digits must be in 1..4, got {d}")
        object.__setattr__(self, "digits", d)

    @classmethod
    def parse(cls, text: str) -> "Address":
        return cls(tuple(int(ch) for ch in text))

    @classmethod
    def from_code(cls, code: int, depth: int) -> "Address":
        digits = []
        for _ in range(depth):
            code, rem = divmod(code, 4)
            digits.append(rem + 1)
        return cls(tuple(reversed(digits)))

    @property
    def depth(self) -> int:
        return len(self.digits)

    def code(self) -> int:
        """Integer whose base-4 digits (most significant first) are ``digits - 1``."""
        c = 0
        for x in self.digits:
            c = 4 * c + (x - 1)
        return c

    def __str__(self) -> str:
        return "".join(map(str, self.digits))


def _as_address(a: Address | str | Sequence[int]) -> Address:
    if isinstance(a, Address):
        return a
    if isinstance(a, str):
        return Address.parse(a)
    return Address(tuple(a))


@dataclass(frozen=True)
class CellSet:
    depth: int
    members: frozenset[Address]

    def __post_init__(self) -> None:
        members = frozenset(_as_address(a) for a in self.members)
        if any(a.depth != self.depth for a in members):
            raise ValueError(f"all addresses must have depth {self.depth}")
        object.__setattr__(self, "members", members)

    @classmethod
    def full_square(cls) -> "CellSet":
        return cls(0, frozenset({Address(())}))

    def __len__(self) -> int:
        return len(self.members)

    def labels(self) -> list[str]:
        return sorted(str(a) for a in self.members)


def cell_of_address(a: Address | str | Sequence[int]) -> tuple[Point, float]:
    """Lower-left corner and side length of the cell ``T_a1 o ... o T_ak (S)``."""
    a = _as_address(a)
    x = y = 0.0
    side = 1.0
    for digit in a.digits:
        side /= 2
        x += side * ((digit - 1) & 1)
        y += side * ((digit - 1) >> 1)
    return (x, y), side


def _check_unit(xs: np.ndarray, ys: np.ndarray) -> None:
    bad = ~((xs >= 0) & (xs <= 1) & (ys >= 0) & (ys <= 1))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise OutOfUnitSquareError(f"point ({xs[i]}, {ys[i]}) lies outside [0, 1]^2")


def cell_indices(points: np.ndarray, depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Column and row (from the bottom) of each point's depth-``depth`` cell."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    xs, ys = pts[:, 0], pts[:, 1]
    _check_unit(xs, ys)
    n = 1 << depth
    # Scaling by a power of two is exact, so floor() sees the true dyadic position.
    ix = np.minimum(np.floor(xs * n).astype(np.int64), n - 1)
    iy = np.minimum(np.floor(ys * n).astype(np.int64), n - 1)
    return ix, iy


def address_codes(points: np.ndarray, depth: int) -> np.ndarray:
    """Vectorised :func:`address_of_point`, returning :meth:`Address.code` values."""
    ix, iy = cell_indices(points, depth)
    code = np.zeros(ix.shape, dtype=np.int64)
    for bit in range(depth - 1, -1, -1):
        code = 4 * code + ((ix >> bit) & 1) + 2 * ((iy >> bit) & 1)
    return code


def address_of_point(p: Point, depth: int) -> Address:
    """Quadrant 1 is lower-left, 2 lower-right, 3 upper-left, 4 upper-right."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    code = int(address_codes(np.array([p], dtype=np.float64), depth)[0])
    return Address.from_code(code, depth)


# --------------------------------------------------------------------------- iteration


def _quadrant_digit(m: AffineMap2D) -> int:
    a, b, c, d = m.matrix()
    if (a, b, c, d) != (0.5, 0.0, 0.0, 0.5) or m.e not in (0.0, 0.5) or m.f not in (0.0, 0.5):
        raise UnsupportedMapError(f"{m} does not map dyadic cells onto dyadic cells")
    return 1 + int(m.e == 0.5) + 2 * int(m.f == 0.5)


def deterministic_iterate(sys: IfsSystem, initial: CellSet, k: int) -> CellSet:
    """Apply the collage map ``k`` times to a set of cells.

    Each application prepends, to every member address, the quadrant of each
    map's image (for the standard tables this is the map's own index).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    digits = [_quadrant_digit(m) for m in sys.maps]
    members = {a.digits for a in initial.members}
    for _ in range(k):
        members = {(dg, *a) for a in members for dg in digits}
    return CellSet(initial.depth + k, frozenset(Address(a) for a in members))


def _symbol_array(symbols: SymbolStream | Iterable[int]) -> np.ndarray:
    if isinstance(symbols, SymbolStream):
        return symbols.symbols
    return np.asarray(list(symbols) if not isinstance(symbols, np.ndarray) else symbols)


def _shared_diagonal(sys: IfsSystem) -> tuple[float, float] | None:
    mats = {m.matrix() for m in sys.maps}
    if len(mats) != 1:
        return None
    a, b, c, d = mats.pop()
    return (a, d) if b == 0 and c == 0 else None


def driven_orbit(
    symbols: SymbolStream | Iterable[int],
    sys: IfsSystem | None = None,
    start: Point = DEFAULT_START,
) -> np.ndarray:
    """Orbit ``p_t = T_{s_t}(p_{t-1})`` as an ``(n, 2)`` array, ``p_0 = start`` not included."""
    sys = sys or standard_square_system()
    idx = np.asarray(_symbol_array(symbols), dtype=np.int64)
    n = len(sys.maps)
    if idx.size and (idx.min() < 1 or idx.max() > n):
        bad = idx[(idx < 1) | (idx > n)][0]
        raise SymbolOutOfRangeError(f"symbol {bad} is outside 1..{n}")
    out = np.empty((idx.size, 2), dtype=np.float64)
    if idx.size == 0:
        return out

    diag = _shared_diagonal(sys)
    if diag is not None:
        # Same linear part for every map: each axis is a first-order linear
        # recurrence x_t = a x_{t-1} + e_{s_t}, evaluated in the same
        # floating-point order as the step-by-step loop.
        e = np.array([m.e for m in sys.maps])[idx - 1]
        f = np.array([m.f for m in sys.maps])[idx - 1]
        for col, (coef, shift, x0) in enumerate(((diag[0], e, start[0]), (diag[1], f, start[1]))):
            out[:, col] = lfilter([1.0], [1.0, -coef], shift, zi=[coef * x0])[0]
        return out

    mats = [m.matrix() + (m.e, m.f) for m in sys.maps]
    x, y = start
    for t, i in enumerate(idx.tolist()):
        a, b, c, d, e, f = mats[i - 1]
        x, y = a * x + b * y + e, c * x + d * y + f
        out[t] = (x, y)
    return out


def driven_orbit_reference(symbols, sys: IfsSystem | None = None, start: Point = DEFAULT_START):
    """Step-by-step orbit with :func:`apply_map`; slow, kept as an oracle."""
    sys = sys or standard_square_system()
    p = start
    pts = []
    for i in _symbol_array(symbols).tolist():
        if not 1 <= i <= len(sys.maps):
            raise SymbolOutOfRangeError(f"symbol {i} is outside 1..{len(sys.maps)}")
        p = apply_map(sys.maps[i - 1], p)
        pts.append(p)
    return np.array(pts, dtype=np.float64).reshape(-1, 2)


def chaos_indices(sys: IfsSystem, n: int, seed: int) -> np.ndarray:
    """Map indices (1-based) drawn from a seeded PCG64 stream via the cumulative table."""
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(n)
    idx = np.searchsorted(sys.cumulative(), u, side="right")
    return np.minimum(idx, len(sys.maps) - 1) + 1


def chaos_game(
    sys: IfsSystem, n: int, seed: int, start: Point = DEFAULT_START
) -> np.ndarray:
    """Random IFS orbit of ``n`` points; deterministic for a given ``(seed, start)``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return driven_orbit(chaos_indices(sys, n, seed), sys, start)
