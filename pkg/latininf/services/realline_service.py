"""An explicit semi-Vatican square on (ℝ, +).

    a(x) = e^x - 1        x >= 0
    a(x) = -ln(1 - x)     x < 0

a is a strictly increasing bijection ℝ → ℝ with a′ strictly increasing and
positive, so for each d > 0 the sequencing a_(d)(i) = a(i+d) - a(i) is a
strictly increasing bijection from ℝ onto ℝ⁺. The square ℓ_ij = a(j) - a(i)
then holds every unordered pair {x, y} at each distance exactly once in rows
(in the order making y - x positive) and once in columns.

Everything here is binary floating point; "equal" means "within tol".
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations, product

from latininf.errors import BracketFailure, DegeneratePair, NonPositiveDistance
from latininf.models import ProbeResult, VerificationReport
from latininf.services.square_service import REALS, LatinRegion
from latininf.utils.constants import BISECTION_MAX_ITER, BRACKET_MAX_DOUBLINGS, DEFAULT_TOL

logger = logging.getLogger(__name__)

ROW = "row"
COLUMN = "column"


def a(x: float) -> float:
    if x >= 0:
        return math.expm1(x)
    return -math.log1p(-x)


def a_inv(y: float) -> float:
    if y >= 0:
        return math.log1p(y)
    return -math.expm1(-y)


def a_prime(x: float) -> float:
    if x >= 0:
        return math.exp(x)
    return 1.0 / (1.0 - x)


def seq_value(i: float, d: float) -> float:
    """a_(d)(i) = a(i + d) - a(i)."""
    if d <= 0:
        raise NonPositiveDistance(f"distance must be > 0, got {d!r}")
    return a(i + d) - a(i)


def _check_positive(name: str, value: float) -> None:
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")


def _bracket(f) -> tuple[float, float]:
    """[lo, hi] with f(lo) <= 0 <= f(hi) for increasing f, doubling outward from 0."""
    if f(0.0) <= 0:
        lo, hi = 0.0, 1.0
        for _ in range(BRACKET_MAX_DOUBLINGS):
            if f(hi) >= 0:
                return lo, hi
            lo, hi = hi, hi * 2
    else:
        lo, hi = -1.0, 0.0
        for _ in range(BRACKET_MAX_DOUBLINGS):
            if f(lo) <= 0:
                return lo, hi
            lo, hi = lo * 2, lo
    raise BracketFailure(f"no sign change after {BRACKET_MAX_DOUBLINGS} doublings")


def _invert(d: float, target: float, tol: float) -> tuple[float, int]:
    """(i, bisection steps) with |a_(d)(i) - target| <= tol, or the best float
    within tol·target once the bracket has shrunk to adjacent floats."""
    if d <= 0:
        raise NonPositiveDistance(f"distance must be > 0, got {d!r}")
    _check_positive("target", target)
    _check_positive("tol", tol)

    def f(i: float) -> float:
        return seq_value(i, d) - target

    lo, hi = _bracket(f)
    for step in range(1, BISECTION_MAX_ITER + 1):
        mid = (lo + hi) / 2
        value = f(mid)
        if abs(value) <= tol:
            return mid, step
        if mid in (lo, hi):
            if abs(value) <= tol * max(1.0, target):
                return mid, step
            break
        if value < 0:
            lo = mid
        else:
            hi = mid
    mid = (lo + hi) / 2
    raise BracketFailure(
        f"bisection for a_({d!r})(i) = {target!r} stalled at residual {abs(f(mid)):.3e}"
    )


def invert_seq(d: float, target: float, tol: float = DEFAULT_TOL) -> float:
    """The unique i with a(i + d) - a(i) = target (target > 0).

    The residual bound is ``tol`` for targets up to 1 and scales with the
    target above that, where float spacing alone exceeds ``tol``.
    """
    return _invert(d, target, tol)[0]


def _solve(x: float, y: float, d: float, tol: float, direction: str) -> tuple[float, float, int]:
    """(i, j) placing x then y at distance d, assuming the order is the realizable one."""
    if direction == ROW:
        # a(j) - a(i) = x, a(j+d) - a(i) = y
        j, steps = _invert(d, y - x, tol)
        return a_inv(a(j) - x), j, steps
    # a(j) - a(i) = x, a(j) - a(i+d) = y
    i, steps = _invert(d, x - y, tol)
    return i, a_inv(x + a(i)), steps


def _residuals(x: float, y: float, i: float, j: float, d: float, direction: str) -> tuple:
    if direction == ROW:
        return abs(a(j) - a(i) - x), abs(a(j + d) - a(i) - y)
    return abs(a(j) - a(i) - x), abs(a(j) - a(i + d) - y)


def locate_pair(x: float, y: float, d: float, tol: float = DEFAULT_TOL,
                direction: str = ROW) -> ProbeResult:
    """Where x is followed by y at distance d in some row (or column).

    Rows realize the order with y > x and columns the order with x > y; for
    the other order the result has ``ordered=False`` and locates (y, x).
    """
    if direction not in (ROW, COLUMN):
        raise ValueError(f"Invalid direction '{direction}'. Must be row or column.")
    if d <= 0:
        raise NonPositiveDistance(f"distance must be > 0, got {d!r}")
    _check_positive("tol", tol)
    if x == y:
        raise DegeneratePair(f"x and y are both {x!r}; a pair needs two symbols")
    ordered = (y > x) if direction == ROW else (x > y)
    first, second = (x, y) if ordered else (y, x)
    i, j, steps = _solve(first, second, d, tol, direction)
    residuals = _residuals(first, second, i, j, d, direction)
    logger.debug("%s probe (%r, %r, d=%r): i=%r j=%r residuals=%s",
                 direction, x, y, d, i, j, residuals)
    return ProbeResult(direction, ordered, i, j, residuals, steps)


def realline_window(rows, cols) -> LatinRegion:
    """Cell (i, j) = a(j) - a(i)."""
    region = LatinRegion(REALS, REALS)
    a_cols = [(float(j), a(float(j))) for j in cols]
    for i in rows:
        ai = a(float(i))
        for j, aj in a_cols:
            region.place(i, j, aj - ai, enforce=False)
    return region


def _bucket(key: tuple, tol: float) -> tuple:
    return tuple(math.floor(v / tol) for v in key)


def verify_semivatican_tolerance(r: LatinRegion, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Semi-Vatican safety with symbols and distances compared within ``tol``.

    Occurrences are hashed into tol-sized boxes on (d, min, max); each one is
    compared against the 27 neighbouring boxes.
    """
    _check_positive("tol", tol)
    witnesses = []
    stats = {}
    for axis in ("row", "column"):
        boxes: dict = {}
        total = 0
        for line, entries in sorted(r.lines(axis).items()):
            for (p1, s1), (p2, s2) in combinations(entries, 2):
                key = (p2 - p1, min(s1, s2), max(s1, s2))
                loc = (line, p1, p2)
                total += 1
                home = _bucket(key, tol)
                for offset in product((-1, 0, 1), repeat=3):
                    near = tuple(h + o for h, o in zip(home, offset))
                    for other_key, other_loc in boxes.get(near, ()):
                        if all(abs(u - v) <= tol for u, v in zip(key, other_key)):
                            witnesses.append({
                                "axis": axis, "d": repr(key[0]),
                                "pair": [repr(key[1]), repr(key[2])],
                                "occurrences": [list(map(repr, other_loc)), list(map(repr, loc))],
                            })
                boxes.setdefault(home, []).append((key, loc))
        stats[f"{axis}_occurrences"] = total
    return VerificationReport("semivatican-tolerance", not witnesses, witnesses, stats)


def check_monotone(samples) -> VerificationReport:
    """a strictly increasing and a′ strictly increasing and positive on sorted samples."""
    points = sorted(float(x) for x in samples)
    witnesses = []
    for x in points:
        if not a_prime(x) > 0:
            witnesses.append({"violation": "a' not positive", "x": repr(x)})
    for x, y in zip(points, points[1:]):
        if x == y:
            continue
        if not a(x) < a(y):
            witnesses.append({"violation": "a not increasing", "between": [repr(x), repr(y)]})
        if not a_prime(x) < a_prime(y):
            witnesses.append({"violation": "a' not increasing", "between": [repr(x), repr(y)]})
    return VerificationReport("realline-monotone", not witnesses, witnesses, {"samples": len(points)})


@dataclass(frozen=True)
class RealTerrace:
    """The fixed map a with a probe tolerance."""

    tolerance: float = DEFAULT_TOL

    def __post_init__(self):
        _check_positive("tolerance", self.tolerance)

    def probe(self, x: float, y: float, d: float, direction: str = ROW) -> ProbeResult:
        return locate_pair(x, y, d, self.tolerance, direction)

    def window(self, rows, cols) -> LatinRegion:
        return realline_window(rows, cols)

    def verify(self, region: LatinRegion) -> VerificationReport:
        return verify_semivatican_tolerance(region, self.tolerance)
