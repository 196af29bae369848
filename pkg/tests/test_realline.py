import math
import random

import pytest

from latininf.errors import DegeneratePair, NonPositiveDistance
from latininf.services.realline_service import (
    COLUMN, ROW, RealTerrace, a, a_inv, a_prime, check_monotone, invert_seq,
    locate_pair, realline_window, seq_value, verify_semivatican_tolerance,
)


class TestMap:
    def test_known_values(self):
        assert a(0) == 0
        assert a(1) == pytest.approx(math.e - 1, abs=1e-12)
        assert a(-1) == pytest.approx(-math.log(2), abs=1e-12)

    @pytest.mark.parametrize("x", [-30.0, -2.5, -1e-9, 0.0, 1e-9, 0.7, 12.0])
    def test_inverse(self, x):
        assert a_inv(a(x)) == pytest.approx(x, rel=1e-12, abs=1e-15)

    def test_derivative_is_continuous_at_zero(self):
        assert a_prime(0.0) == 1.0
        assert a_prime(-1e-12) == pytest.approx(1.0)

    def test_monotone_on_a_grid(self):
        assert check_monotone([k / 8 for k in range(-200, 200)]).passed

    def test_monotone_reports_unsorted_input_as_sorted(self):
        assert check_monotone([3, -1, 2, 2]).statistics["samples"] == 4


class TestSequencing:
    def test_seq_value(self):
        assert seq_value(0, 1) == pytest.approx(math.e - 1)

    def test_invert(self):
        assert invert_seq(1, math.e - 1) == pytest.approx(0, abs=1e-9)

    @pytest.mark.parametrize("d,target", [(0.5, 1e-4), (2.0, 3.0), (0.1, 40.0), (3.0, 0.02)])
    def test_invert_hits_target(self, d, target):
        i = invert_seq(d, target)
        assert seq_value(i, d) == pytest.approx(target, abs=1e-10 * max(1.0, target))

    def test_nonpositive_distance(self):
        with pytest.raises(NonPositiveDistance):
            seq_value(0, 0)
        with pytest.raises(NonPositiveDistance):
            invert_seq(-1, 1)

    def test_nonpositive_target(self):
        with pytest.raises(ValueError, match="target"):
            invert_seq(1, 0)


class TestLocatePair:
    def test_random_row_probes(self):
        rng = random.Random(20140623)
        for _ in range(100):
            x = rng.uniform(-5, 5)
            y = x + rng.uniform(0.01, 5)
            d = rng.uniform(0.1, 3)
            result = locate_pair(x, y, d)
            assert result.ordered
            assert result.direction == ROW
            assert max(result.residuals) <= 1e-10
            assert a(result.j) - a(result.i) == pytest.approx(x, abs=1e-10)

    def test_reversed_row_order(self):
        result = locate_pair(1, 0, 1)
        assert not result.ordered
        # located the realizable order: 0 then 1
        assert a(result.j) - a(result.i) == pytest.approx(0, abs=1e-10)
        assert a(result.j + 1) - a(result.i) == pytest.approx(1, abs=1e-10)

    def test_column(self):
        result = locate_pair(2, 0.5, 0.75, direction=COLUMN)
        assert result.ordered
        assert a(result.j) - a(result.i) == pytest.approx(2, abs=1e-10)
        assert a(result.j) - a(result.i + 0.75) == pytest.approx(0.5, abs=1e-10)

    def test_column_reversed(self):
        assert not locate_pair(0.5, 2, 0.75, direction=COLUMN).ordered

    def test_degenerate(self):
        with pytest.raises(DegeneratePair):
            locate_pair(1.5, 1.5, 1)

    def test_bad_distance(self):
        with pytest.raises(NonPositiveDistance):
            locate_pair(0, 1, 0)

    def test_bad_direction(self):
        with pytest.raises(ValueError, match="direction"):
            locate_pair(0, 1, 1, direction="diagonal")

    def test_to_dict(self):
        doc = locate_pair(0, 1, 1).to_dict()
        assert doc["direction"] == "row"
        assert len(doc["residuals"]) == 2


class TestWindow:
    def test_fifty_by_fifty(self):
        points = [-6 + 0.25 * k for k in range(50)]
        region = realline_window(points, points)
        assert len(region) == 2500
        report = verify_semivatican_tolerance(region)
        assert report.passed, report.witnesses[:3]
        assert report.statistics["row_occurrences"] == 50 * 50 * 49 // 2

    def test_diagonal_is_zero(self):
        region = realline_window([0, 1, 2], [0, 1, 2])
        assert all(region.get(k, k) == 0 for k in (0.0, 1.0, 2.0))

    def test_repeated_pair_is_caught(self):
        region = realline_window([0], [0, 1])
        region.place(5, 0, 0.0, enforce=False)
        region.place(5, 1, a(1), enforce=False)
        report = verify_semivatican_tolerance(region)
        assert not report.passed
        assert report.witnesses[0]["axis"] == "row"

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            verify_semivatican_tolerance(realline_window([0], [0]), tol=0)


class TestRealTerrace:
    def test_zero_tolerance_rejected(self):
        with pytest.raises(ValueError, match="tolerance"):
            RealTerrace(tolerance=0)

    def test_probe_and_verify(self):
        t = RealTerrace()
        assert t.probe(-1, 3, 0.5).ordered
        assert t.verify(t.window(range(10), range(10))).passed
