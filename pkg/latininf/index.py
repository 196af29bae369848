"""Index sets N, Z, Q inside the ordered field ℚ, with exact arithmetic.

Points are ``int`` when integral and a reduced ``Fraction`` otherwise, so
``Fraction(4, 2)`` and ``2`` are the same point (same hash, same key).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from latininf.errors import DescriptorSyntaxError, NonPositiveDistance, OutOfRange
from latininf.groups import calkin_wilf
from latininf.utils.constants import INDEX_KINDS
from latininf.utils.formatting import format_rational, normalize_rational, parse_rational


def _is_rational(x) -> bool:
    return (isinstance(x, int) and not isinstance(x, bool)) or isinstance(x, Fraction)


def as_point(x):
    """Coerce an int / Fraction / ``p/q`` literal to a canonical point."""
    if isinstance(x, str):
        try:
            return parse_rational(x)
        except ValueError as e:
            raise DescriptorSyntaxError(str(e))
    if not _is_rational(x):
        raise DescriptorSyntaxError(f"{x!r} is not an exact rational")
    return normalize_rational(x)


@dataclass(frozen=True)
class IndexSet:
    kind: str

    def __post_init__(self):
        if self.kind not in INDEX_KINDS:
            raise DescriptorSyntaxError(
                f"Invalid index kind '{self.kind}'. Must be one of: {', '.join(sorted(INDEX_KINDS))}"
            )

    @property
    def integral(self) -> bool:
        return self.kind in ("N", "Z")

    def contains(self, i) -> bool:
        if not _is_rational(i):
            return False
        if self.kind == "Q":
            return True
        if isinstance(i, Fraction) and i.denominator != 1:
            return False
        return self.kind == "Z" or i >= 0

    def require(self, i):
        """Canonical form of ``i``; OutOfRange if it is not a point of this set."""
        i = as_point(i)
        if not self.contains(i):
            raise OutOfRange(f"{format_rational(i)} is not in index set {self.kind}")
        return i

    def has_distance(self, d) -> bool:
        """True iff d is an admissible positive distance (I_(d) nonempty)."""
        if not _is_rational(d) or d <= 0:
            return False
        if self.integral:
            return not isinstance(d, Fraction) or d.denominator == 1
        return True

    def in_shift(self, d, i) -> bool:
        """i ∈ I_(d), i.e. i ∈ I and i + d ∈ I."""
        d = as_point(d)
        if d <= 0:
            raise NonPositiveDistance(f"distance must be > 0, got {format_rational(d)}")
        i = as_point(i)
        return self.contains(i) and self.contains(normalize_rational(i + d))

    def enumerate_points(self, k: int):
        if k < 0:
            raise OutOfRange(f"enumeration index must be >= 0, got {k}")
        if self.kind == "N":
            return k
        if k == 0:
            return 0
        if self.kind == "Z":
            return (k + 1) // 2 if k % 2 else -(k // 2)
        q = normalize_rational(calkin_wilf((k + 1) // 2))
        return q if k % 2 else -q

    def enumerate_distances(self, k: int):
        if k < 0:
            raise OutOfRange(f"enumeration index must be >= 0, got {k}")
        if self.integral:
            return k + 1
        return normalize_rational(calkin_wilf(k + 1))


def parse_index(kind: str) -> IndexSet:
    return IndexSet(str(kind).strip().upper())


@dataclass(frozen=True)
class Window:
    """Finite strictly sorted row / column coordinate lists."""

    rows: tuple
    cols: tuple

    def __post_init__(self):
        rows = tuple(as_point(r) for r in self.rows)
        cols = tuple(as_point(c) for c in self.cols)
        for name, seq in (("rows", rows), ("cols", cols)):
            if any(a >= b for a, b in zip(seq, seq[1:])):
                raise DescriptorSyntaxError(f"Window {name} must be strictly increasing")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @classmethod
    def square(cls, points) -> "Window":
        pts = tuple(sorted({as_point(p) for p in points}))
        return cls(pts, pts)

    @classmethod
    def first(cls, index: IndexSet, n: int) -> "Window":
        """Square window on the first n enumerated points of ``index``, sorted."""
        return cls.square(index.enumerate_points(k) for k in range(n))
