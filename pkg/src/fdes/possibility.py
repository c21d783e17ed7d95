"""Exact possibility degrees and the max-min vector/matrix composition.

Degrees are possibilities in [0, 1] stored as integer counts of thousandths,
so every comparison, minimum and maximum is exact; there is no floating point
anywhere in the package. Values with more than three decimal places are
rejected at parse time instead of rounded, because silent rounding would
corrupt threshold comparisons downstream.
"""

from __future__ import annotations

import re
from typing import Iterable

from .errors import ModelError, ParseError

SCALE = 1000

_DEGREE_RE = re.compile(r"^(0|1)(?:\.([0-9]{1,3}))?$")


class Degree(int):
    """A possibility in [0, 1], an exact count of thousandths.

    Subclassing int gives exact total ordering, hashing and min/max for free.
    """

    __slots__ = ()

    def __new__(cls, thousandths: int) -> "Degree":
        if isinstance(thousandths, bool) or not isinstance(thousandths, int):
            raise TypeError("Degree takes an integer count of thousandths")
        if not 0 <= thousandths <= SCALE:
            raise ValueError(f"degree out of [0, 1]: {thousandths}/{SCALE}")
        return super().__new__(cls, thousandths)

    @classmethod
    def parse(cls, text: str) -> "Degree":
        """Parse a decimal literal like "0.4" exactly.

        At most three fractional digits are accepted; anything else is a
        ParseError, never a rounded value.
        """
        if not isinstance(text, str):
            raise ParseError(f"degree must be a decimal string, got {text!r}")
        m = _DEGREE_RE.match(text)
        if m is None:
            raise ParseError(
                f"bad degree literal {text!r}: expected 0, 1, or a value with "
                "at most three decimal places"
            )
        whole, frac = m.group(1), m.group(2) or ""
        value = int(whole) * SCALE + int(frac.ljust(3, "0") or "0")
        if value > SCALE:
            raise ParseError(f"degree {text!r} exceeds 1")
        return cls(value)

    def complement(self) -> "Degree":
        return Degree(SCALE - int(self))

    def __str__(self) -> str:
        return f"{int(self) // SCALE}.{int(self) % SCALE:03d}"

    def __repr__(self) -> str:
        return f"Degree({str(self)!r})"


Degree.ZERO = Degree(0)
Degree.ONE = Degree(SCALE)


def degree_min(values: Iterable[Degree]) -> Degree:
    """Exact minimum of a non-empty collection of degrees.

    Callers owning an empty-collection convention must apply it themselves;
    there is deliberately no silent default here.
    """
    values = list(values)
    if not values:
        raise ValueError("degree_min of empty collection: supply the identity explicitly")
    return min(values)


def degree_max(values: Iterable[Degree]) -> Degree:
    """Exact maximum of a non-empty collection of degrees."""
    values = list(values)
    if not values:
        raise ValueError("degree_max of empty collection: supply the identity explicitly")
    return max(values)


class StateVector(tuple):
    """An immutable possibility distribution over the crisp states."""

    __slots__ = ()

    def __new__(cls, entries: Iterable[Degree]) -> "StateVector":
        entries = tuple(entries)
        if not entries:
            raise ModelError("state vector must have at least one entry")
        for e in entries:
            if not isinstance(e, Degree):
                raise ModelError(f"state vector entry {e!r} is not a Degree")
        return super().__new__(cls, entries)

    @property
    def dimension(self) -> int:
        return len(self)

    def is_positive(self) -> bool:
        """True when some crisp state is possible at all."""
        return any(e > 0 for e in self)

    def max_entry(self) -> Degree:
        return max(self)

    def __repr__(self) -> str:
        return "[" + ", ".join(str(e) for e in self) + "]"


class EventMatrix(tuple):
    """An immutable square matrix of transfer possibilities between crisp states."""

    __slots__ = ()

    def __new__(cls, rows: Iterable[Iterable[Degree]]) -> "EventMatrix":
        rows = tuple(tuple(row) for row in rows)
        if not rows:
            raise ModelError("event matrix must have at least one row")
        n = len(rows)
        for row in rows:
            if len(row) != n:
                raise ModelError(f"event matrix is not square: {n} rows, row of width {len(row)}")
            for e in row:
                if not isinstance(e, Degree):
                    raise ModelError(f"event matrix entry {e!r} is not a Degree")
        return super().__new__(cls, rows)

    @property
    def dimension(self) -> int:
        return len(self)

    @classmethod
    def identity(cls, n: int) -> "EventMatrix":
        return cls(
            tuple(Degree.ONE if i == j else Degree.ZERO for j in range(n))
            for i in range(n)
        )

    def __repr__(self) -> str:
        return "[" + "; ".join(", ".join(str(e) for e in row) for row in self) + "]"


def max_min_compose(vec: StateVector, mat: EventMatrix) -> StateVector:
    """Compose a fuzzy state with a fuzzy event: out[j] = max_i min(vec[i], mat[i][j])."""
    n = vec.dimension
    if mat.dimension != n:
        raise ModelError(
            f"dimension mismatch in max-min composition: vector {n}, matrix {mat.dimension}"
        )
    return StateVector(
        max(min(vec[i], mat[i][j]) for i in range(n)) for j in range(n)
    )
