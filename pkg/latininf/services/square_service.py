"""Finite Latin regions: windows, verifiers, and text formats.

A ``LatinRegion`` is a sparse grid (row, col) -> symbol. Rows and columns are
index points (exact rationals, or floats for real-line windows); symbols are
group elements, naturals, or floats. Every verifier here is pure and returns a
``VerificationReport``; "exactly once" properties are checked as "at most
once" (safety) with coverage counts in the report statistics.
"""

from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from itertools import combinations

from latininf.errors import (
    LatinViolation, Occupied, OddOrder, SearchBudgetExceeded, ShapeMismatch,
    UnassignedIndex,
)
from latininf.groups import GroupKernel, parse_group
from latininf.index import as_point
from latininf.models import VerificationReport
from latininf.utils.constants import QUADRANGLE_CAP
from latininf.utils.formatting import format_rational, normalize_rational, parse_rational

logger = logging.getLogger(__name__)

NATURALS = "N"
REALS = "R"
RATIONALS = "Q"


def symbol_codec(tag: str):
    """(encode, decode) for a symbol universe tag: N, R, or a group descriptor."""
    if tag == NATURALS:
        return str, lambda text: int(str(text).strip())
    if tag == REALS:
        return repr, lambda text: float(text)
    kernel = parse_group(tag)
    return kernel.encode, kernel.decode


def coord_codec(tag: str):
    """(encode, decode) for coordinates: Q (exact rationals), R, or a group descriptor."""
    if tag == REALS:
        return repr, lambda text: float(text)
    if tag == RATIONALS:
        return format_rational, parse_rational
    kernel = parse_group(tag)
    return kernel.encode, kernel.decode


def coord_normalizer(tag: str):
    if tag == REALS:
        return float
    if tag == RATIONALS:
        return as_point
    return parse_group(tag).coerce


class LatinRegion:
    """Sparse grid with per-row and per-column symbol indexes."""

    def __init__(self, symbols: str = NATURALS, coords: str = RATIONALS):
        self.symbols = symbols
        self.coords = coords
        self._point = coord_normalizer(coords)
        self.cells: dict = {}
        self.row_index: dict = defaultdict(dict)   # row -> {symbol: col}
        self.col_index: dict = defaultdict(dict)   # col -> {symbol: row}

    def place(self, row, col, symbol, enforce: bool = True) -> None:
        row, col = self._point(row), self._point(col)
        if (row, col) in self.cells:
            raise Occupied(f"cell ({format_rational(row)}, {format_rational(col)}) is filled")
        if enforce:
            if symbol in self.row_index.get(row, {}):
                raise LatinViolation(f"symbol {symbol!r} already in row {format_rational(row)}")
            if symbol in self.col_index.get(col, {}):
                raise LatinViolation(f"symbol {symbol!r} already in column {format_rational(col)}")
        self.cells[(row, col)] = symbol
        self.row_index[row].setdefault(symbol, col)
        self.col_index[col].setdefault(symbol, row)

    def get(self, row, col, default=None):
        return self.cells.get((row, col), default)

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, key) -> bool:
        return key in self.cells

    def rows(self) -> list:
        return sorted({r for r, _ in self.cells})

    def cols(self) -> list:
        return sorted({c for _, c in self.cells})

    def row_cells(self, row) -> list[tuple]:
        """(col, symbol) pairs of one row, by column."""
        return sorted((c, s) for (r, c), s in self.cells.items() if r == row)

    def lines(self, axis: str) -> dict:
        """{row: [(col, symbol)...]} or {col: [(row, symbol)...]}, each sorted."""
        out = defaultdict(list)
        for (r, c), s in self.cells.items():
            if axis == "row":
                out[r].append((c, s))
            else:
                out[c].append((r, s))
        for v in out.values():
            v.sort(key=lambda t: t[0])
        return out

    def symbol_set(self) -> set:
        return set(self.cells.values())

    def max_symbol(self):
        return max(self.cells.values(), default=None)

    def copy(self) -> "LatinRegion":
        out = LatinRegion(self.symbols, self.coords)
        for (r, c), s in self.cells.items():
            out.place(r, c, s, enforce=False)
        return out

    @classmethod
    def from_cells(cls, cells, symbols: str = NATURALS, coords: str = RATIONALS,
                   enforce: bool = False) -> "LatinRegion":
        r = cls(symbols, coords)
        items = cells.items() if isinstance(cells, dict) else ((k[:2], k[2]) for k in cells)
        for (row, col), s in items:
            r.place(row, col, s, enforce=enforce)
        return r

    @classmethod
    def from_grid(cls, grid: list[list], symbols: str = NATURALS) -> "LatinRegion":
        """Rows listed top to bottom become rows 0, 1, 2, ...; None leaves a gap."""
        r = cls(symbols)
        for i, line in enumerate(grid):
            for j, s in enumerate(line):
                if s is not None:
                    r.place(i, j, s, enforce=False)
        return r


# ─── windows ─────────────────────────────────────────────────────────

def cayley_window(a, rows, cols, group: GroupKernel | None = None) -> LatinRegion:
    """Cell (i, j) = a(i)⁻¹a(j) for a terrace or an explicit {index: element} map."""
    if group is None:
        group = a.group
    mapping = a.forward if hasattr(a, "forward") else a
    region = LatinRegion(group.descriptor)
    rows = [as_point(i) for i in rows]
    cols = [as_point(j) for j in cols]
    for p in list(rows) + list(cols):
        if p not in mapping:
            raise UnassignedIndex(f"index {format_rational(p)} is not in dom a")
    for i in rows:
        ai_inv = group.inv(mapping[i])
        for j in cols:
            region.place(i, j, group.op(ai_inv, mapping[j]))
    return region


def williams_complete_square(n: int) -> LatinRegion:
    """Row- and column-complete square of even order from the terrace 0,1,n-1,2,n-2,..."""
    if n < 2 or n % 2:
        raise OddOrder(f"complete squares from this terrace need even n >= 2, got {n}")
    seq = {k: 0 if k == 0 else ((k + 1) // 2 if k % 2 else n - k // 2) for k in range(n)}
    return cayley_window(seq, range(n), range(n), parse_group(f"Zn:{n}"))


# ─── verifiers ───────────────────────────────────────────────────────

def verify_latin(r: LatinRegion) -> VerificationReport:
    encode, _ = symbol_codec(r.symbols)
    fmt, _ = coord_codec(r.coords)
    witnesses = []
    for axis in ("row", "column"):
        for line, entries in r.lines(axis).items():
            seen = {}
            for pos, s in entries:
                if s in seen:
                    witnesses.append({
                        "axis": axis, "line": fmt(line), "symbol": encode(s),
                        "positions": [fmt(seen[s]), fmt(pos)],
                    })
                else:
                    seen[s] = pos
    return VerificationReport("latin", not witnesses, witnesses, {"cells": len(r)})


def pair_occurrences(r: LatinRegion, unordered: bool = False, max_distance=None):
    """Count symbol pairs at each distance, per axis.

    Returns {axis: {key: [locations]}} where key is (d, s1, s2) with s1 the
    symbol at the smaller coordinate, or (d, frozenset) when ``unordered``.
    """
    out = {}
    for axis in ("row", "column"):
        seen = defaultdict(list)
        for line, entries in r.lines(axis).items():
            for (p1, s1), (p2, s2) in combinations(entries, 2):
                d = p2 - p1
                if r.coords != REALS:
                    d = normalize_rational(d)
                if max_distance is not None and d > max_distance:
                    continue
                key = (d, frozenset((s1, s2))) if unordered else (d, s1, s2)
                seen[key].append((line, p1, p2))
        out[axis] = seen
    return out


def _distance_report(r: LatinRegion, name: str, unordered: bool, max_distance=None):
    encode, _ = symbol_codec(r.symbols)
    fmt, _ = coord_codec(r.coords)
    occ = pair_occurrences(r, unordered, max_distance)
    witnesses = []
    stats = {}
    for axis, seen in occ.items():
        total = 0
        for key, locs in seen.items():
            total += len(locs)
            if len(locs) > 1:
                d = key[0]
                pair = sorted(encode(s) for s in key[1]) if unordered else [encode(key[1]), encode(key[2])]
                witnesses.append({
                    "axis": axis, "d": fmt(d), "pair": pair,
                    "occurrences": [[fmt(line), fmt(p1), fmt(p2)] for line, p1, p2 in locs[:2]],
                })
        stats[f"{axis}_occurrences"] = total
        stats[f"{axis}_distinct"] = len(seen)
        stats[f"{axis}_distances"] = len({k[0] for k in seen})
    witnesses.sort(key=lambda w: (w["axis"], json.dumps(w, sort_keys=True)))
    return VerificationReport(name, not witnesses, witnesses, stats)


def verify_vatican_safety(r: LatinRegion) -> VerificationReport:
    """Every ordered pair at most once per distance in rows and in columns."""
    return _distance_report(r, "vatican", unordered=False)


def verify_d_complete(r: LatinRegion, max_distance) -> VerificationReport:
    return _distance_report(r, f"{max_distance}-complete", unordered=False,
                            max_distance=as_point(max_distance))


def verify_semivatican_safety(r: LatinRegion) -> VerificationReport:
    """Every unordered pair at most once per distance in rows and in columns."""
    return _distance_report(r, "semivatican", unordered=True)


def find_quadrangle_violation(r: LatinRegion, cap: int = QUADRANGLE_CAP) -> dict | None:
    """Cells (i1,j1),(i2,j2),(k1,j1),(k2,j2),(i1,l1),(i2,l2),(k1,l1),(k2,l2) where
    the first three pairs agree and the fourth does not; None if there are none.
    """
    by_symbol = defaultdict(list)
    for cell, s in sorted(r.cells.items()):
        by_symbol[s].append(cell)
    rows = r.lines("row")
    tests = 0
    for s in sorted(by_symbol, key=repr):
        for (i1, j1), (i2, j2) in _ordered_pairs(by_symbol[s]):
            for k1, t in _column(r, j1):
                if k1 == i1:
                    continue
                k2 = r.col_index.get(j2, {}).get(t)
                if k2 is None:
                    continue
                for l1, u in rows.get(i1, ()):
                    if l1 == j1:
                        continue
                    l2 = r.row_index.get(i2, {}).get(u)
                    if l2 is None:
                        continue
                    tests += 1
                    if tests > cap:
                        raise SearchBudgetExceeded(
                            f"quadrangle search exceeded {cap:,} candidate tests"
                        )
                    x = r.cells.get((k1, l1))
                    y = r.cells.get((k2, l2))
                    if x is not None and y is not None and x != y:
                        return _quadrangle_witness(r, (i1, j1, i2, j2, k1, k2, l1, l2))
    return None


def _ordered_pairs(cells: list) -> list:
    return [(a, b) for a in cells for b in cells if a != b]


def _column(r: LatinRegion, col) -> list:
    return sorted((row, s) for s, row in r.col_index.get(col, {}).items())


def _quadrangle_witness(r: LatinRegion, idx: tuple) -> dict:
    i1, j1, i2, j2, k1, k2, l1, l2 = idx
    fmt, _ = coord_codec(r.coords)
    encode, _ = symbol_codec(r.symbols)
    cells = [(i1, j1), (i2, j2), (k1, j1), (k2, j2), (i1, l1), (i2, l2), (k1, l1), (k2, l2)]
    return {
        "cells": [[fmt(a), fmt(b)] for a, b in cells],
        "symbols": [encode(r.cells[c]) for c in cells],
    }


def verify_orthogonal(ra: LatinRegion, rb: LatinRegion) -> VerificationReport:
    """No superimposed ordered symbol pair occurs twice."""
    if set(ra.cells) != set(rb.cells):
        raise ShapeMismatch("orthogonality needs both regions on the same cells")
    fmt, _ = coord_codec(ra.coords)
    enc_a, _ = symbol_codec(ra.symbols)
    enc_b, _ = symbol_codec(rb.symbols)
    seen = {}
    witnesses = []
    for cell in sorted(ra.cells):
        pair = (ra.cells[cell], rb.cells[cell])
        if pair in seen:
            witnesses.append({
                "pair": [enc_a(pair[0]), enc_b(pair[1])],
                "cells": [[fmt(x) for x in seen[pair]], [fmt(x) for x in cell]],
            })
        else:
            seen[pair] = cell
    return VerificationReport("orthogonal", not witnesses, witnesses,
                              {"cells": len(ra), "distinct_pairs": len(seen)})


def verify_knutvic(r: LatinRegion, group: GroupKernel, full: bool = False) -> VerificationReport:
    """Rows, columns and broken left / right diagonals carry no repeated symbol.

    Cell (i, j) lies on left diagonal j·i⁻¹ and right diagonal i·j. With
    ``full`` the region must be the whole |G|×|G| square and every line a
    permutation of the symbols.
    """
    encode, _ = symbol_codec(r.symbols)
    lines = defaultdict(list)
    for (i, j), s in r.cells.items():
        gi, gj = group.coerce(i), group.coerce(j)
        lines[("row", group.encode(gi))].append(s)
        lines[("column", group.encode(gj))].append(s)
        lines[("left", group.encode(group.op(gj, group.inv(gi))))].append(s)
        lines[("right", group.encode(group.op(gi, gj)))].append(s)
    witnesses = []
    for (kind, key), symbols in sorted(lines.items()):
        dup = [s for s, n in Counter(symbols).items() if n > 1]
        if dup:
            witnesses.append({"line": kind, "key": key, "repeated": sorted(encode(s) for s in dup)})
    if full:
        n = group.order
        if n is None or len(r) != n * n:
            witnesses.append({"line": "square", "key": "shape",
                              "repeated": [], "cells": len(r), "order": n})
        elif len(r.symbol_set()) != n:
            witnesses.append({"line": "square", "key": "symbols",
                              "repeated": [], "symbols": len(r.symbol_set()), "order": n})
    return VerificationReport("knutvic", not witnesses, witnesses,
                              {"lines": len(lines), "cells": len(r)})


# ─── text formats ────────────────────────────────────────────────────

CSV_HEADER = "row,col,symbol"


def render(r: LatinRegion, fmt: str = "csv") -> str:
    """Deterministic CSV (``row,col,symbol``) or JSON text for a region."""
    encode, _ = symbol_codec(r.symbols)
    cfmt, _ = coord_codec(r.coords)
    cells = sorted(r.cells.items())
    if fmt == "csv":
        lines = [CSV_HEADER]
        lines += [f"{_csv_field(cfmt(i))},{_csv_field(cfmt(j))},{_csv_field(encode(s))}" for (i, j), s in cells]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        doc = {
            "symbols": r.symbols,
            "coords": r.coords,
            "cells": [[cfmt(i), cfmt(j), encode(s)] for (i, j), s in cells],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"Invalid format '{fmt}'. Must be csv or json.")


def _csv_field(text: str) -> str:
    return f'"{text}"' if "," in text else text


def parse_region(text: str, fmt: str = "csv", symbols: str = NATURALS,
                 coords: str = RATIONALS) -> LatinRegion:
    """Inverse of ``render``; regions are rebuilt without Latin enforcement."""
    if fmt == "json":
        doc = json.loads(text)
        symbols = doc.get("symbols", symbols)
        coords = doc.get("coords", coords)
        rows = doc.get("cells", [])
    elif fmt == "csv":
        from latininf.importers.region_csv import read_region_rows
        rows = read_region_rows(text.splitlines())
    else:
        raise ValueError(f"Invalid format '{fmt}'. Must be csv or json.")
    _, decode = symbol_codec(symbols)
    _, cparse = coord_codec(coords)
    region = LatinRegion(symbols, coords)
    for i, j, s in rows:
        region.place(cparse(i), cparse(j), decode(s), enforce=False)
    return region
