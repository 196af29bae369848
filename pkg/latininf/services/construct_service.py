"""Non-group constructions on natural-number grids.

Two builders, both driven by ``scheduler_service.run``:

- ``ImmuneRegion`` grows a Latin region that no column permutation can make
  row-complete. Every time a column becomes nonempty, ``immunize`` gives each
  untreated triple of nonempty columns its own cyclic 3×3 block on fresh
  symbols γ, γ+1, γ+2 in three new rows. Three columns moved next to each other
  then carry a 3×3 Latin square, which always repeats an adjacent pair.
- ``NonGroupVaticanState`` starts from a 4×4 Vatican block that breaks the
  quadrangle criterion and only ever places symbols far enough out that every
  new (pair, distance) occurrence is fresh.

Rows are numbered bottom-up (row 0 is the bottom row of a printed grid);
new rows go on top.
"""

from __future__ import annotations

import logging
from itertools import combinations, permutations
from math import comb
from multiprocessing import Pool

from latininf.errors import ExtensionFailed, LatinViolation, TooManyColumns
from latininf.models import Requirement, VerificationReport
from latininf.services.scheduler_service import diagonal_pairs, interleave
from latininf.services.square_service import (
    LatinRegion, NATURALS, verify_latin, verify_semivatican_safety,
    verify_vatican_safety,
)
from latininf.utils.constants import IMMUNE_MAX_COLS

logger = logging.getLogger(__name__)

ROW = "row"          # symbol α appears in row β
COLUMN = "column"    # symbol α appears in column β
CELL = "cell"        # cell (row α, column β) is filled
ROW_PAIR = "row-pair"        # α then β at distance d in some row
COLUMN_PAIR = "column-pair"  # α then β at distance d in some column


def _naturals(k: int) -> int:
    return k


def _distances(k: int) -> int:
    return k + 1


def _family(tag: str):
    for a, b in diagonal_pairs(_naturals, _naturals):
        yield Requirement(tag, (a, b))


def growth_bound(columns: int) -> int:
    """Cells one non-row-completable step may add with ``columns`` nonempty columns.

    A step places one cell and may treat up to C(c, 3) triples, each adding
    3 rows of 3 cells. The row bound 3·C(c, 3) + 1 is 9·C(c, 3) + 1 in cells,
    the unit ``ImmuneRegion.size`` counts.
    """
    return 9 * comb(columns, 3) + 1


# ─── immune regions ──────────────────────────────────────────────────

class ImmuneRegion:
    """Latin region plus the ledger of treated column triples {cols: γ}."""

    def __init__(self, region: LatinRegion | None = None, ledger: dict | None = None):
        self.region = region if region is not None else LatinRegion(NATURALS)
        self.ledger: dict[tuple, int] = dict(ledger or {})

    def columns(self) -> list:
        return self.region.cols()

    def size(self) -> int:
        return len(self.region)

    def _fresh_symbol(self) -> int:
        top = self.region.max_symbol()
        return 0 if top is None else top + 1

    def _next_row(self) -> int:
        rows = self.region.rows()
        return rows[-1] + 1 if rows else 0

    def _new_column(self) -> int:
        used = set(self.region.cols())
        c = 0
        while c in used:
            c += 1
        return c

    def immunize(self) -> "ImmuneRegion":
        """Treat every untreated triple of nonempty columns, in lexicographic order."""
        added = 0
        for triple in combinations(self.columns(), 3):
            if triple in self.ledger:
                continue
            gamma = self._fresh_symbol()
            base = self._next_row()
            for k in range(3):
                for pos, col in enumerate(triple):
                    self.region.place(base + k, col, gamma + (pos + k) % 3)
            self.ledger[triple] = gamma
            added += 1
        if added:
            logger.debug("immunized %d column triples (%d new rows)", added, 3 * added)
        return self

    # ─── meet rules ──────────────────────────────────────────────────

    def _place_and_immunize(self, row, col, symbol) -> None:
        new_column = not self.region.col_index.get(col)
        self.region.place(row, col, symbol)
        if new_column:
            self.immunize()

    def meet_row(self, symbol: int, row: int) -> None:
        r = self.region
        if symbol in r.row_index.get(row, {}):
            return
        for col in self.columns():
            if (row, col) not in r.cells and symbol not in r.col_index.get(col, {}):
                r.place(row, col, symbol)
                return
        self._place_and_immunize(row, self._new_column(), symbol)

    def meet_column(self, symbol: int, col: int) -> None:
        r = self.region
        if symbol in r.col_index.get(col, {}):
            return
        row = 0
        while (row, col) in r.cells or symbol in r.row_index.get(row, {}):
            row += 1
        self._place_and_immunize(row, col, symbol)

    def meet_cell(self, row: int, col: int) -> None:
        if (row, col) in self.region.cells:
            return
        self._place_and_immunize(row, col, self._fresh_symbol())

    # ─── scheduler protocol ──────────────────────────────────────────

    def satisfied(self, req: Requirement) -> bool:
        a, b = req.params
        if req.family == ROW:
            return a in self.region.row_index.get(b, {})
        if req.family == COLUMN:
            return a in self.region.col_index.get(b, {})
        if req.family == CELL:
            return (a, b) in self.region.cells
        raise ValueError(f"Unknown requirement family '{req.family}'")

    def meet(self, req: Requirement) -> None:
        a, b = req.params
        if req.family == ROW:
            self.meet_row(a, b)
        elif req.family == COLUMN:
            self.meet_column(a, b)
        elif req.family == CELL:
            self.meet_cell(a, b)
        else:
            raise ValueError(f"Unknown requirement family '{req.family}'")

    def check(self) -> VerificationReport:
        """Latin plus immunity by ledger: every triple treated with an intact block."""
        latin = verify_latin(self.region)
        witnesses = list(latin.witnesses)
        cols = self.columns()
        for triple in combinations(cols, 3):
            gamma = self.ledger.get(triple)
            if gamma is None:
                if not _has_latin_block(self.region, triple):
                    witnesses.append({"violation": "untreated column triple", "columns": list(triple)})
                continue
            if not _has_cyclic_block(self.region, triple, gamma):
                witnesses.append({"violation": "missing cyclic block", "columns": list(triple),
                                  "gamma": gamma})
        if len(cols) >= 3 and not any(
            cols[k + 1] - cols[k] == 1 and cols[k + 2] - cols[k + 1] == 1
            for k in range(len(cols) - 2)
        ):
            witnesses.append({"violation": "no three adjacent column positions"})
        return VerificationReport(
            "immune-region", not witnesses, witnesses,
            {"cells": len(self.region), "columns": len(cols), "treated": len(self.ledger)},
        )


def _has_cyclic_block(region: LatinRegion, triple: tuple, gamma: int) -> bool:
    block = {gamma, gamma + 1, gamma + 2}
    rows = {region.col_index.get(c, {}).get(gamma) for c in triple}
    if None in rows or len(rows) != 3:
        return False
    return all({region.cells.get((row, c)) for c in triple} == block for row in rows)


def _has_latin_block(region: LatinRegion, triple: tuple) -> bool:
    """Some three rows restricted to ``triple`` form a 3×3 Latin square."""
    full = []
    for row, entries in region.row_index.items():
        line = tuple(region.cells.get((row, c)) for c in triple)
        if None not in line and len(set(line)) == 3:
            full.append(line)
    for a, b, c in combinations(full, 3):
        if set(a) == set(b) == set(c) and all(len({a[k], b[k], c[k]}) == 3 for k in range(3)):
            return True
    return False


def seed_rowcomplete() -> ImmuneRegion:
    """The immune 3×3 start block (printed top row first)."""
    grid = [[0, 1, 2], [1, 2, 0], [2, 0, 1]]  # rows 0, 1, 2 bottom-up
    region = LatinRegion(NATURALS)
    for row, line in enumerate(grid):
        for col, s in enumerate(line):
            region.place(row, col, s)
    return ImmuneRegion(region)


def immunize(r: ImmuneRegion) -> ImmuneRegion:
    return r.immunize()


def step_growth_bound(state: ImmuneRegion) -> int:
    return growth_bound(len(state.columns()))


def rowcomplete_stream():
    return interleave([_family(ROW), _family(COLUMN), _family(CELL)])


def build_non_rowcomplete(steps: int, state: ImmuneRegion | None = None, start: int = 0,
                          verify_each: bool = False):
    from latininf.services.scheduler_service import run

    state = state if state is not None else seed_rowcomplete()
    return run(state, rowcomplete_stream(), steps, verify_each=verify_each, start=start,
               growth_bound=step_growth_bound)


# ─── immunity brute force ────────────────────────────────────────────

def _permutations_chunk(args) -> tuple[int, list | None]:
    """Check every permutation whose first entry is ``first``; returns (count, failing perm)."""
    positions, contents, first = args
    n = len(positions)
    adjacent = [(k, k + 1) for k in range(n - 1) if positions[k + 1] - positions[k] == 1]
    rest = [c for c in range(n) if c != first]
    checked = 0
    for tail in permutations(rest):
        perm = (first, *tail)
        checked += 1
        if not _permutation_repeats(perm, adjacent, contents):
            return checked, list(perm)
    return checked, None


def _permutation_repeats(perm, adjacent, contents) -> bool:
    seen = set()
    for left, right in adjacent:
        a, b = contents[perm[left]], contents[perm[right]]
        for row, s in a.items():
            t = b.get(row)
            if t is None:
                continue
            if (s, t) in seen:
                return True
            seen.add((s, t))
    return False


def verify_immune(r, max_cols: int = IMMUNE_MAX_COLS, jobs: int = 1) -> VerificationReport:
    """Brute force: every permutation of column contents over the occupied
    column positions repeats some ordered pair at horizontal distance 1.
    """
    region = r.region if isinstance(r, ImmuneRegion) else r
    positions = region.cols()
    if len(positions) > max_cols:
        raise TooManyColumns(
            f"{len(positions)} nonempty columns exceeds the brute-force cap of {max_cols}"
        )
    contents = [{row: s for s, row in region.col_index[c].items()} for c in positions]
    tasks = [(positions, contents, first) for first in range(len(positions))]
    if jobs > 1 and len(tasks) > 1:
        with Pool(processes=jobs) as pool:
            results = pool.map(_permutations_chunk, tasks)
    else:
        results = [_permutations_chunk(t) for t in tasks]
    checked = sum(n for n, _ in results)
    failing = [perm for _, perm in results if perm is not None]
    witnesses = [{
        "permutation": [str(positions[k]) for k in failing[0]],
        "positions": [str(p) for p in positions],
    }] if failing else []
    if not positions:
        witnesses = [{"violation": "empty region has no repeated pair"}]
    return VerificationReport("immune", not witnesses, witnesses,
                              {"columns": len(positions), "permutations": checked})


# ─── non-group Vatican ───────────────────────────────────────────────

VATICAN_SEED = [  # printed top row first
    [0, 5, 6, 1],
    [7, 0, 1, 8],
    [9, 2, 3, 10],
    [2, 11, 12, 4],
]


class NonGroupVaticanState:
    """Vatican (or semi-Vatican) region with per-distance pair ledgers.

    ``semi`` switches the ledgers and the pair families to unordered pairs.
    """

    def __init__(self, semi: bool = False):
        self.semi = semi
        self.region = LatinRegion(NATURALS)
        self.ledger: dict = {}   # (axis, d, key) -> (line, p1, p2)

    def size(self) -> int:
        return len(self.region)

    def _pair_key(self, s1, s2):
        return frozenset((s1, s2)) if self.semi else (s1, s2)

    def place(self, row: int, col: int, symbol: int) -> None:
        """Place one cell, updating ledgers; raises on any Latin or Vatican clash."""
        r = self.region
        fresh = []
        for axis, line, pos, entries in (
            ("row", row, col, r.row_index.get(row, {})),
            ("column", col, row, r.col_index.get(col, {})),
        ):
            for s, other in entries.items():
                if other < pos:
                    d, key = pos - other, self._pair_key(s, symbol)
                    where = (line, other, pos)
                else:
                    d, key = other - pos, self._pair_key(symbol, s)
                    where = (line, pos, other)
                entry = (axis, d, key)
                if entry in self.ledger:
                    raise LatinViolation(
                        f"pair {sorted(key) if self.semi else list(key)} would repeat at "
                        f"{axis} distance {d}"
                    )
                fresh.append((entry, where))
        r.place(row, col, symbol)
        self.ledger.update(fresh)

    def _far(self, coords: list) -> int:
        return coords[-1] + (coords[-1] - coords[0]) + 1

    def _fresh_symbol(self) -> int:
        top = self.region.max_symbol()
        return 0 if top is None else top + 1

    def meet_row(self, symbol: int, row: int) -> None:
        r = self.region
        if symbol in r.row_index.get(row, {}):
            return
        cols = r.cols()
        if not r.row_index.get(row):
            col = cols[-1] + 1 if cols else 0
        else:
            col = self._far(cols)
        self.place(row, col, symbol)

    def meet_column(self, symbol: int, col: int) -> None:
        r = self.region
        if symbol in r.col_index.get(col, {}):
            return
        rows = r.rows()
        if not r.col_index.get(col):
            row = rows[-1] + 1 if rows else 0
        else:
            row = self._far(rows)
        self.place(row, col, symbol)

    def meet_cell(self, row: int, col: int) -> None:
        if (row, col) not in self.region.cells:
            self.place(row, col, self._fresh_symbol())

    def meet_row_pair(self, a: int, b: int, d: int) -> None:
        if self.pair_realized("row", a, b, d):
            return
        rows, cols = self.region.rows(), self.region.cols()
        row = rows[-1] + 1 if rows else 0
        col = cols[-1] + 1 if cols else 0
        self.place(row, col, a)
        self.place(row, col + d, b)

    def meet_column_pair(self, a: int, b: int, d: int) -> None:
        if self.pair_realized("column", a, b, d):
            return
        rows, cols = self.region.rows(), self.region.cols()
        row = rows[-1] + 1 if rows else 0
        col = cols[-1] + 1 if cols else 0
        self.place(row, col, a)
        self.place(row + d, col, b)

    def pair_realized(self, axis: str, a, b, d) -> bool:
        return (axis, d, self._pair_key(a, b)) in self.ledger

    # ─── scheduler protocol ──────────────────────────────────────────

    def satisfied(self, req: Requirement) -> bool:
        p = req.params
        if req.family == ROW:
            return p[0] in self.region.row_index.get(p[1], {})
        if req.family == COLUMN:
            return p[0] in self.region.col_index.get(p[1], {})
        if req.family == CELL:
            return (p[0], p[1]) in self.region.cells
        if req.family == ROW_PAIR:
            return self.pair_realized("row", *p)
        if req.family == COLUMN_PAIR:
            return self.pair_realized("column", *p)
        raise ValueError(f"Unknown requirement family '{req.family}'")

    def meet(self, req: Requirement) -> None:
        handlers = {
            ROW: self.meet_row, COLUMN: self.meet_column, CELL: self.meet_cell,
            ROW_PAIR: self.meet_row_pair, COLUMN_PAIR: self.meet_column_pair,
        }
        if req.family not in handlers:
            raise ValueError(f"Unknown requirement family '{req.family}'")
        try:
            handlers[req.family](*req.params)
        except LatinViolation as e:
            raise ExtensionFailed(f"{req.label}: {e}")

    def contains_seed(self) -> bool:
        top = len(VATICAN_SEED) - 1
        return all(
            self.region.cells.get((top - i, j)) == s
            for i, line in enumerate(VATICAN_SEED) for j, s in enumerate(line)
        )

    def check(self) -> VerificationReport:
        """Latin, (semi-)Vatican safety recomputed from cells, seed intact."""
        safety = verify_semivatican_safety if self.semi else verify_vatican_safety
        witnesses = verify_latin(self.region).witnesses + safety(self.region).witnesses
        if not self.contains_seed():
            witnesses.append({"violation": "seed block missing"})
        name = "semivatican-region" if self.semi else "vatican-region"
        return VerificationReport(name, not witnesses, witnesses,
                                  {"cells": len(self.region), "ledger": len(self.ledger)})


def seed_vatican(semi: bool = False) -> NonGroupVaticanState:
    state = NonGroupVaticanState(semi=semi)
    top = len(VATICAN_SEED) - 1
    for i, line in enumerate(VATICAN_SEED):
        for j, s in enumerate(line):
            state.place(top - i, j, s)
    return state


def _pair_family(tag: str, semi: bool):
    def ordered_pairs():
        for a, b in diagonal_pairs(_naturals, _naturals):
            if a == b or (semi and a > b):
                continue
            yield a, b

    cache: list = []
    source = ordered_pairs()

    def pair_at(k: int):
        while len(cache) <= k:
            cache.append(next(source))
        return cache[k]

    for (a, b), d in diagonal_pairs(pair_at, _distances):
        yield Requirement(tag, (a, b, d))


def vatican_stream(semi: bool = False):
    return interleave([
        _family(ROW), _family(COLUMN), _family(CELL),
        _pair_family(ROW_PAIR, semi), _pair_family(COLUMN_PAIR, semi),
    ])


def build_nongroup_vatican(steps: int, semi: bool = False,
                           state: NonGroupVaticanState | None = None, start: int = 0,
                           verify_each: bool = False):
    from latininf.services.scheduler_service import run

    state = state if state is not None else seed_vatican(semi)
    return run(state, vatican_stream(semi), steps, verify_each=verify_each, start=start,
               growth_bound=2)
