"""Exception types raised across the package."""

from __future__ import annotations


class PrimeIFSError(Exception):
    """Base class for all package errors."""


class CapacityError(PrimeIFSError, OverflowError):
    """A requested range exceeds the 64-bit-safe sieving bound."""


class UnmappedResidueError(PrimeIFSError, ValueError):
    def __init__(self, value: int, modulus: int, classes) -> None:
        self.value = value
        self.modulus = modulus
        self.classes = tuple(classes)
        super().__init__(
            f"value {value} has residue {value % modulus} mod {modulus}, "
            f"which is not one of the classes {list(self.classes)}"
        )


class InvalidModulusError(PrimeIFSError, ValueError):
    pass


class EmptyStreamError(PrimeIFSError, ValueError):
    """A stream is too short for the requested derivation or census."""


class SymbolOutOfRangeError(PrimeIFSError, ValueError):
    pass


class UnsupportedMapError(PrimeIFSError, ValueError):
    """A map does not carry dyadic cells onto dyadic cells exactly."""


class OutOfUnitSquareError(PrimeIFSError, ValueError):
    pass


class DegenerateTableError(PrimeIFSError, ValueError):
    pass
