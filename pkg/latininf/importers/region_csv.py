"""Region CSV importer.

Format (what ``square_service.render(region, "csv")`` writes):

    row,col,symbol
    0,0,0
    0,1/2,3
    1,0,"(1,2)"

Notes:
    - Coordinates are exact rationals ``p/q`` (floats for real-line windows)
    - Tuple symbols (sum groups) contain commas and are quoted
    - Blank lines are skipped; any other header is rejected
"""

import csv
from pathlib import Path

from latininf.errors import ArtifactError

HEADER = ["row", "col", "symbol"]


def read_region_rows(lines) -> list[tuple[str, str, str]]:
    """Parse CSV lines into (row, col, symbol) text triples."""
    reader = csv.reader(lines)
    rows = []
    header = None
    for line_no, record in enumerate(reader, start=1):
        if not record or all(not field.strip() for field in record):
            continue
        if header is None:
            header = [field.strip() for field in record]
            if header != HEADER:
                raise ArtifactError(
                    f"Region CSV must start with '{','.join(HEADER)}', got '{','.join(header)}'"
                )
            continue
        if len(record) != 3:
            raise ArtifactError(f"line {line_no}: expected 3 fields, got {len(record)}")
        rows.append(tuple(field.strip() for field in record))
    if header is None:
        raise ArtifactError("Region CSV is empty (no header line)")
    return rows


def parse_region_csv(file_path: str, symbols: str = "N", coords: str = "Q"):
    """Load a region CSV file into a LatinRegion (no Latin enforcement)."""
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"CSV file not found: {file_path}")
    from latininf.services.square_service import parse_region
    with open(path, "r", encoding="utf-8-sig") as f:
        return parse_region(f.read(), "csv", symbols=symbols, coords=coords)
