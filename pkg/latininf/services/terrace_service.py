"""Partial directed T / S / R terraces and their dense-set meet rules.

A terrace is a partial injective map a: I ⇀ G. For every distance d the
sequencing a_(d)(i) = a(i)⁻¹a(i+d) is defined where i and i+d are both
assigned, and must stay injective (kind T / R) or hit at most one of each
{x, x⁻¹} (kind S). Kind R additionally never uses the identity as a value.

Bookkeeping keeps one flat map ``(d, value) -> i`` of realized sequencing
entries; the per-distance view ``sequencing(d)`` is recomputed from the
assignments on demand.

Meet rules (all first-fit over the deterministic group enumeration):

- ``meet_domain(i)``: assign i the first element that passes every check.
- ``meet_range(g)``: place g at a far index, beyond max(dom) + diam(dom),
  so every new sequencing entry lands on a previously unrealized distance.
- ``meet_seq_range(d, g)``: place x and x·g at far indices ḡ, ḡ+d with
  ḡ = max(dom) + diam(dom) + d + 1, so g ∈ ran a_(d).
"""

from __future__ import annotations

import logging
from collections import Counter

from latininf.errors import (
    ExtensionFailed, IdentityValue, LatinInfError, NonPositiveDistance, Occupied,
    OutOfRange, PairClash, SequencingClash, SquareClash, UnsupportedGroup, ValueUsed,
)
from latininf.groups import GroupKernel
from latininf.index import IndexSet, as_point
from latininf.models import Requirement, VerificationReport
from latininf.services.scheduler_service import diagonal_pairs, enumeration, interleave
from latininf.utils.constants import SEARCH_BUDGET, TERRACE_KINDS
from latininf.utils.formatting import format_rational, normalize_rational

logger = logging.getLogger(__name__)

DOMAIN = "D_i"
RANGE = "D_g"
SEQ_RANGE = "D^d_g"


class PartialTerrace:
    def __init__(self, group: GroupKernel, index: IndexSet, kind: str = "T",
                 search_budget: int = SEARCH_BUDGET):
        kind = kind.upper()
        if kind not in TERRACE_KINDS:
            raise ValueError(
                f"Invalid terrace kind '{kind}'. Must be one of: {', '.join(sorted(TERRACE_KINDS))}"
            )
        if group.is_finite:
            raise UnsupportedGroup(
                f"{group.descriptor} is finite; an infinite index set needs an infinite group"
            )
        if kind == "S" and not group.involution_free:
            raise UnsupportedGroup(
                f"kind S needs an involution-free group; {group.descriptor} has involutions"
            )
        self.group = group
        self.index = index
        self.kind = kind
        self.search_budget = search_budget
        self.forward: dict = {}
        self.backward: dict = {}
        self._realized: dict = {}
        self._by_distance: dict = {}   # d -> set of realized values
        self._lo = None
        self._hi = None
        # clashes hit by tentative assigns, by error name
        self.clash_counts: Counter = Counter()

    # ─── queries ─────────────────────────────────────────────────────

    def size(self) -> int:
        return len(self.forward)

    def is_realized(self, d, value) -> bool:
        return (as_point(d), self.group.coerce(value)) in self._realized

    def sequencing(self, d) -> dict:
        """The partial map a_(d) as {i: a(i)⁻¹a(i+d)}."""
        d = as_point(d)
        out = {}
        for i, g in self.forward.items():
            h = self.forward.get(normalize_rational(i + d))
            if h is not None:
                out[i] = self.group.op(self.group.inv(g), h)
        return out

    def distances(self) -> set:
        return {d for d, _ in self._realized}

    def seq_sizes(self) -> Counter:
        return Counter(d for d, _ in self._realized)

    def diameter(self):
        if not self.forward:
            return 0
        return normalize_rational(self._hi - self._lo)

    # ─── assignment ──────────────────────────────────────────────────

    def _plan(self, i, g) -> list[tuple]:
        """New sequencing entries (d, pos, value) induced by a(i) = g; raises on clash.

        A point can gain two entries at one distance d, one from i - d and
        one from i + d; both are returned.
        """
        grp = self.group
        op, inv = grp._op, grp._inv
        e = grp.identity()
        g_inv = inv(g)
        realized = self._realized
        kind_s = self.kind == "S"
        seen: dict = {}
        plan = []
        for j, h in self.forward.items():
            if j > i:
                d, pos, value = normalize_rational(j - i), i, op(g_inv, h)
            else:
                d, pos, value = normalize_rational(i - j), j, op(inv(h), g)
            other = seen.get(d)
            if other is not None:
                if other == value:
                    raise SquareClash(
                        f"a({format_rational(i)}) = {grp.encode(g)} gives value "
                        f"{grp.encode(value)} twice at distance {format_rational(d)}"
                    )
                if kind_s and op(other, value) == e:
                    raise PairClash(
                        f"a({format_rational(i)}) = {grp.encode(g)} gives an inverse pair "
                        f"at distance {format_rational(d)}"
                    )
            if (d, value) in realized:
                raise SequencingClash(
                    f"value {grp.encode(value)} already realized at distance {format_rational(d)}"
                )
            if kind_s and (d, inv(value)) in realized:
                raise PairClash(
                    f"inverse of {grp.encode(value)} already realized at distance {format_rational(d)}"
                )
            seen[d] = value
            plan.append((d, pos, value))
        return plan

    def assign(self, i, g) -> "PartialTerrace":
        i = self.index.require(i)
        g = self.group.coerce(g)
        if i in self.forward:
            raise Occupied(f"index {format_rational(i)} is already assigned")
        if g in self.backward:
            raise ValueUsed(f"{self.group.encode(g)} is already in the range")
        if self.kind == "R" and g == self.group.identity():
            raise IdentityValue("kind R terraces never take the identity value")
        plan = self._plan(i, g)
        self.forward[i] = g
        self.backward[g] = i
        for d, pos, value in plan:
            self._realized[(d, value)] = pos
            self._by_distance.setdefault(d, set()).add(value)
        self._lo = i if self._lo is None or i < self._lo else self._lo
        self._hi = i if self._hi is None or i > self._hi else self._hi
        return self

    def _retract(self, i) -> None:
        """Undo the most recent assign at i (tentative placements only)."""
        g = self.forward.pop(i)
        del self.backward[g]
        for d, pos, value in self._plan_existing(i, g):
            del self._realized[(d, value)]
            values = self._by_distance[d]
            values.discard(value)
            if not values:
                del self._by_distance[d]
        if self.forward:
            self._lo, self._hi = min(self.forward), max(self.forward)
        else:
            self._lo = self._hi = None

    def _plan_existing(self, i, g) -> list[tuple]:
        op, inv = self.group._op, self.group._inv
        out = []
        for j, h in self.forward.items():
            if j > i:
                out.append((normalize_rational(j - i), i, op(inv(g), h)))
            else:
                out.append((normalize_rational(i - j), j, op(inv(h), g)))
        return out

    def _try_assign(self, i, g) -> bool:
        try:
            self.assign(i, g)
        except LatinInfError as e:
            self.clash_counts[type(e).__name__] += 1
            return False
        return True

    def _candidates(self):
        """Group elements in enumeration order, within the search budget."""
        for k in range(self.search_budget):
            try:
                yield self.group.enumerate(k)
            except OutOfRange:
                return

    def _excluded(self, i) -> set:
        """Values a(i) cannot take without repeating a realized sequencing entry."""
        op, inv = self.group._op, self.group._inv
        kind_s = self.kind == "S"
        out: set = set()
        for j, h in self.forward.items():
            if j > i:
                values = self._by_distance.get(normalize_rational(j - i))
                if values:
                    # g⁻¹h = v  <=>  g = hv⁻¹
                    out.update(op(h, inv(v)) for v in values)
                    if kind_s:
                        out.update(op(h, v) for v in values)
            else:
                values = self._by_distance.get(normalize_rational(i - j))
                if values:
                    # h⁻¹g = v  <=>  g = hv
                    out.update(op(h, v) for v in values)
                    if kind_s:
                        out.update(op(h, inv(v)) for v in values)
        return out

    def _far_point(self, d=0):
        if not self.forward:
            return None
        return normalize_rational(self._hi + (self._hi - self._lo) + d + 1)

    # ─── meet rules ──────────────────────────────────────────────────

    def meet_domain(self, i) -> "PartialTerrace":
        i = self.index.require(i)
        if i in self.forward:
            return self
        e = self.group.identity()
        excluded = self._excluded(i)
        for g in self._candidates():
            if g in self.backward or g in excluded or (self.kind == "R" and g == e):
                continue
            if self._try_assign(i, g):
                return self
        raise ExtensionFailed(
            f"no legal value for index {format_rational(i)} within {self.search_budget} candidates"
        )

    def meet_range(self, g) -> "PartialTerrace":
        g = self.group.coerce(g)
        if g in self.backward:
            return self
        if self.kind == "R" and g == self.group.identity():
            raise IdentityValue("kind R terraces never take the identity value")
        far = self._far_point()
        if far is None:
            far = self.index.enumerate_points(0)
        try:
            self.assign(far, g)
        except LatinInfError as e:
            raise ExtensionFailed(
                f"far placement of {self.group.encode(g)} at {format_rational(far)} failed: {e}"
            )
        return self

    def seq_satisfied(self, d, g) -> bool:
        if (d, g) in self._realized:
            return True
        return self.kind == "S" and (d, self.group.inv(g)) in self._realized

    def meet_seq_range(self, d, g) -> "PartialTerrace":
        d = as_point(d)
        if d <= 0:
            raise NonPositiveDistance(f"distance must be > 0, got {format_rational(d)}")
        if not self.index.has_distance(d):
            raise OutOfRange(
                f"{format_rational(d)} is not an admissible distance of {self.index.kind}"
            )
        grp = self.group
        g = grp.coerce(g)
        e = grp.identity()
        if g == e:
            raise IdentityValue("no sequencing ever takes the identity value")
        if self.seq_satisfied(d, g):
            return self
        start = self._far_point(d)
        if start is None:
            start = next(
                p for p in enumeration(self.index.enumerate_points)
                if self.index.in_shift(d, p)
            )
        end = normalize_rational(start + d)
        for x in self._candidates():
            xg = grp.op(x, g)
            if x in self.backward or xg in self.backward:
                continue
            if self.kind == "R" and e in (x, xg):
                continue
            if not self._try_assign(start, x):
                continue
            if self._try_assign(end, xg):
                return self
            self._retract(start)
        raise ExtensionFailed(
            f"no legal pair for {grp.encode(g)} at distance {format_rational(d)} "
            f"within {self.search_budget} candidates"
        )

    # ─── scheduler protocol ──────────────────────────────────────────

    def satisfied(self, req: Requirement) -> bool:
        if req.family == DOMAIN:
            return req.params[0] in self.forward
        if req.family == RANGE:
            return req.params[0] in self.backward
        if req.family == SEQ_RANGE:
            return self.seq_satisfied(*req.params)
        raise ValueError(f"Unknown requirement family '{req.family}'")

    def meet(self, req: Requirement) -> None:
        if req.family == DOMAIN:
            self.meet_domain(*req.params)
        elif req.family == RANGE:
            self.meet_range(*req.params)
        elif req.family == SEQ_RANGE:
            self.meet_seq_range(*req.params)
        else:
            raise ValueError(f"Unknown requirement family '{req.family}'")

    def check(self) -> VerificationReport:
        return check(self)


def requirement_stream(t: PartialTerrace, max_distance=None):
    """Fair interleave of D_i, D_g and D^d_g over the index and group enumerations.

    Kind R omits the identity from D_g; kind S keeps one representative of
    each {g, g⁻¹} (the one enumerated first) in D^d_g. ``max_distance``
    restricts D^d_g to d <= max_distance (directed T_D-terraces).
    """
    grp, index = t.group, t.index
    e = grp.identity()
    if max_distance is not None:
        max_distance = as_point(max_distance)

    def points():
        for p in enumeration(index.enumerate_points):
            yield Requirement(DOMAIN, (p,))

    def elements():
        for g in enumeration(grp.enumerate, grp.order):
            if t.kind == "R" and g == e:
                continue
            yield Requirement(RANGE, (g,))

    def pairs():
        first_len = None
        if max_distance is not None and index.integral:
            first_len = int(max_distance)
        for d, g in diagonal_pairs(index.enumerate_distances, grp.enumerate,
                                   first_len, grp.order):
            if g == e:
                continue
            if max_distance is not None and d > max_distance:
                continue
            if t.kind == "S" and grp.index_of(grp.inv(g)) < grp.index_of(g):
                continue
            yield Requirement(SEQ_RANGE, (d, g))

    return interleave([points(), elements(), pairs()])


def check(t: PartialTerrace) -> VerificationReport:
    """Recompute every terrace invariant from the assignments alone."""
    grp, index = t.group, t.index
    e = grp.identity()
    witnesses: list[dict] = []
    seen_values: dict = {}
    for i, g in t.forward.items():
        if not index.contains(i):
            witnesses.append({"violation": "index outside I", "i": format_rational(i)})
        if not grp.contains(g):
            witnesses.append({"violation": "value outside G", "i": format_rational(i)})
            continue
        if g in seen_values:
            witnesses.append({
                "violation": "a not injective", "value": grp.encode(g),
                "indices": [format_rational(seen_values[g]), format_rational(i)],
            })
        seen_values[g] = i
        if t.backward.get(g) != i:
            witnesses.append({"violation": "backward map inconsistent", "i": format_rational(i)})
        if t.kind == "R" and g == e:
            witnesses.append({"violation": "identity value", "i": format_rational(i)})
    if len(t.backward) != len(t.forward):
        witnesses.append({"violation": "backward map has stray entries"})

    realized: dict = {}
    points = sorted(t.forward)
    for a_pos, i in enumerate(points):
        gi_inv = grp.inv(t.forward[i])
        for j in points[a_pos + 1:]:
            d = normalize_rational(j - i)
            value = grp.op(gi_inv, t.forward[j])
            where = {"d": format_rational(d), "i": format_rational(i), "value": grp.encode(value)}
            if value == e:
                witnesses.append({"violation": "identity in sequencing", **where})
            if (d, value) in realized:
                witnesses.append({
                    "violation": "sequencing not injective", **where,
                    "other": format_rational(realized[(d, value)]),
                })
            realized[(d, value)] = i
    if t.kind == "S":
        for (d, value), i in realized.items():
            inv = grp.inv(value)
            if (d, inv) in realized and grp.index_of(value) < grp.index_of(inv):
                witnesses.append({
                    "violation": "both x and x^-1 at one distance",
                    "d": format_rational(d), "value": grp.encode(value),
                    "i": format_rational(i), "other": format_rational(realized[(d, inv)]),
                })
    if realized != t._realized:
        witnesses.append({
            "violation": "incremental bookkeeping differs from recomputation",
            "recomputed": len(realized), "tracked": len(t._realized),
        })
    stats = {
        "points": len(t.forward),
        "distances": len({d for d, _ in realized}),
        "entries": len(realized),
    }
    return VerificationReport(f"{t.kind}-terrace", not witnesses, witnesses, stats)
