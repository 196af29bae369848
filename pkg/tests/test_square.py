"""Latin regions, verifiers, the complete-square oracle and the text formats."""

from fractions import Fraction

import pytest

from latininf.errors import ArtifactError, LatinViolation, OddOrder, ShapeMismatch
from latininf.groups import CyclicGroup, parse_group
from latininf.importers.region_csv import parse_region_csv, read_region_rows
from latininf.services.ortho_service import cayley_table_window
from latininf.services.square_service import (
    LatinRegion, find_quadrangle_violation, parse_region, render, verify_d_complete,
    verify_knutvic, verify_latin, verify_orthogonal, verify_semivatican_safety,
    verify_vatican_safety, williams_complete_square,
)

CYCLIC_3 = [[0, 1, 2], [1, 2, 0], [2, 0, 1]]


class TestLatinRegion:
    def test_enforced_place_rejects_repeats(self):
        r = LatinRegion()
        r.place(0, 0, 1)
        with pytest.raises(LatinViolation, match="row"):
            r.place(0, 1, 1)
        with pytest.raises(LatinViolation, match="column"):
            r.place(1, 0, 1)

    def test_rational_coordinates_are_canonical(self):
        r = LatinRegion()
        r.place("1/2", Fraction(2, 1), 7)
        assert r.get(Fraction(1, 2), 2) == 7

    def test_lines(self):
        r = LatinRegion.from_grid(CYCLIC_3)
        assert r.lines("row")[1] == [(0, 1), (1, 2), (2, 0)]
        assert r.lines("column")[0] == [(0, 0), (1, 1), (2, 2)]


class TestVerifiers:
    def test_latin(self):
        assert verify_latin(LatinRegion()).passed
        assert verify_latin(LatinRegion.from_grid(CYCLIC_3)).passed
        bad = LatinRegion.from_grid([[0, 0], [1, None]])
        report = verify_latin(bad)
        assert not report.passed
        assert report.witnesses[0]["axis"] == "row"

    def test_failed_report_needs_a_witness(self):
        from latininf.models import VerificationReport
        with pytest.raises(ValueError, match="witness"):
            VerificationReport("latin", False)

    def test_cyclic_cayley_table_is_not_vatican(self):
        # Z_3 rows repeat (x, x+1) at distance 1
        report = verify_vatican_safety(LatinRegion.from_grid(CYCLIC_3))
        assert not report.passed

    def test_z2_cayley_table_is_not_semivatican(self):
        report = verify_semivatican_safety(cayley_table_window(CyclicGroup(2)))
        assert not report.passed
        assert report.witnesses[0]["pair"] == ["0", "1"]

    def test_orthogonal(self):
        r = LatinRegion.from_grid(CYCLIC_3)
        assert not verify_orthogonal(r, r).passed
        other = LatinRegion.from_grid([[0, 1, 2], [2, 0, 1], [1, 2, 0]])
        assert verify_orthogonal(r, other).passed
        assert verify_orthogonal(LatinRegion(), LatinRegion()).passed

    def test_orthogonal_needs_same_cells(self):
        with pytest.raises(ShapeMismatch):
            verify_orthogonal(LatinRegion.from_grid([[0]]), LatinRegion.from_grid([[0, 1]]))

    def test_knutvic_on_cyclic_tables(self):
        assert not verify_knutvic(cayley_table_window(CyclicGroup(6)), CyclicGroup(6), full=True).passed
        assert verify_knutvic(cayley_table_window(CyclicGroup(1)), CyclicGroup(1), full=True).passed

    def test_knutvic_full_needs_whole_square(self):
        g = CyclicGroup(5)
        part = cayley_table_window(g, rows=[0, 1], cols=[0])
        assert not verify_knutvic(part, g, full=True).passed

    def test_group_tables_pass_quadrangle(self):
        assert find_quadrangle_violation(cayley_table_window(CyclicGroup(5))) is None
        assert find_quadrangle_violation(cayley_table_window(parse_group("E2:2"))) is None


class TestWilliams:
    @pytest.mark.parametrize("n", [2, 4, 8])
    def test_row_complete(self, n):
        r = williams_complete_square(n)
        assert len(r) == n * n
        assert verify_latin(r).passed
        assert verify_d_complete(r, 1).passed

    def test_odd_order_rejected(self):
        with pytest.raises(OddOrder):
            williams_complete_square(3)


class TestFormats:
    def test_empty_region_renders_header_only(self):
        assert render(LatinRegion()) == "row,col,symbol\n"

    def test_block_renders_one_line_per_cell(self):
        text = render(LatinRegion.from_grid(CYCLIC_3))
        assert len(text.splitlines()) == 10
        assert text.splitlines()[1] == "0,0,0"

    def test_csv_and_json_parse_back(self):
        r = LatinRegion.from_grid(CYCLIC_3)
        assert parse_region(render(r, "csv")).cells == r.cells
        assert parse_region(render(r, "json"), "json").cells == r.cells

    def test_tuple_symbols_are_quoted(self):
        g = parse_group("sum(Z,Z)")
        r = LatinRegion(g.descriptor)
        r.place(0, "1/2", (1, -2))
        text = render(r)
        assert '"(1,-2)"' in text
        back = parse_region(text, "csv", symbols=g.descriptor)
        assert back.get(0, Fraction(1, 2)) == (1, -2)

    def test_unknown_format_rejected(self):
        with pytest.raises(ValueError, match="Invalid format"):
            render(LatinRegion(), "xml")


class TestRegionCsv:
    def test_blank_lines_skipped(self):
        assert read_region_rows(["row,col,symbol", "", "0,1,2"]) == [("0", "1", "2")]

    def test_wrong_header_rejected(self):
        with pytest.raises(ArtifactError, match="must start with"):
            read_region_rows(["r,c,s", "0,0,0"])

    def test_empty_file_rejected(self):
        with pytest.raises(ArtifactError, match="empty"):
            read_region_rows([])

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "w.csv"
        path.write_text(render(williams_complete_square(4)), encoding="utf-8")
        assert parse_region_csv(path).cells == williams_complete_square(4).cells

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            parse_region_csv(tmp_path / "nope.csv")
