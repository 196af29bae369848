"""Fair interleaving, Cantor pairs, and the run loop's failure modes."""

from itertools import count, islice

import pytest

from latininf.errors import ExtensionFailed, VerifyFailed
from latininf.groups import CyclicGroup
from latininf.models import Requirement, VerificationReport
from latininf.services.scheduler_service import diagonal_pairs, enumeration, interleave, run


class Counter:
    """Toy construction: meeting Requirement("n", (k,)) adds k to a set."""

    def __init__(self, lazy=False, broken=False):
        self.seen = set()
        self.lazy = lazy
        self.broken = broken

    def satisfied(self, req):
        return req.params[0] in self.seen

    def meet(self, req):
        if not self.lazy:
            self.seen.add(req.params[0])

    def size(self):
        return len(self.seen)

    def check(self):
        if self.broken:
            return VerificationReport("toy", False, [{"why": "broken"}])
        return VerificationReport("toy", True)


def naturals():
    for k in count():
        yield Requirement("n", (k,))


class TestInterleave:
    def test_two_streams_alternate(self):
        out = list(islice(interleave([count(0, 2), count(1, 2)]), 6))
        assert out == [0, 1, 2, 3, 4, 5]

    def test_exhausted_streams_drop_out(self):
        assert list(interleave([[1, 2], [10]])) == [1, 10, 2]

    def test_every_stream_advances(self):
        streams = [(("a", k) for k in count()), (("b", k) for k in count()), (("c", k) for k in count())]
        prefix = list(islice(interleave(streams), 306))
        for tag in "abc":
            assert sum(1 for t, _ in prefix if t == tag) >= 100


class TestDiagonalPairs:
    def test_finite_factors_cover_product(self):
        pairs = list(diagonal_pairs(lambda i: i, lambda j: j, 2, 3))
        assert sorted(pairs) == [(i, j) for i in range(2) for j in range(3)]

    def test_infinite_prefix_is_cantor_order(self):
        pairs = list(islice(diagonal_pairs(lambda i: i, lambda j: j), 6))
        assert pairs == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]

    def test_enumeration_stops_at_order(self):
        assert list(enumeration(CyclicGroup(3).enumerate)) == [0, 1, 2]


class TestRun:
    def test_zero_steps_is_a_noop(self):
        state, log = run(Counter(), naturals(), 0)
        assert state.size() == 0
        assert len(log) == 0

    def test_resume_matches_straight_run(self):
        straight, full = run(Counter(), naturals(), 10)
        state, first = run(Counter(), naturals(), 4)
        state, second = run(state, naturals(), 6, start=4)
        first.extend(second)
        assert state.seen == straight.seen
        assert first.to_list() == full.to_list()

    def test_already_satisfied_is_logged(self):
        state = Counter()
        state.seen.add(0)
        _, log = run(state, naturals(), 2)
        assert log.satisfied_count == 1
        assert log.max_growth == 1

    def test_lazy_meet_raises(self):
        with pytest.raises(ExtensionFailed, match="unsatisfied"):
            run(Counter(lazy=True), naturals(), 1)

    def test_verify_each_raises(self):
        with pytest.raises(VerifyFailed, match="toy check failed"):
            run(Counter(broken=True), naturals(), 1, verify_each=True)

    def test_negative_steps_rejected(self):
        with pytest.raises(ValueError, match="steps must be >= 0"):
            run(Counter(), naturals(), -1)

    def test_growth_over_bound_warns(self, caplog):
        class Greedy(Counter):
            def meet(self, req):
                self.seen.update({req.params[0], -1 - req.params[0]})

        with caplog.at_level("WARNING", logger="latininf"):
            run(Greedy(), naturals(), 1, growth_bound=1)
        assert "exceeds declared bound" in caplog.text

    def test_growth_bound_may_depend_on_state(self, caplog):
        class Greedy(Counter):
            def meet(self, req):
                self.seen.update({req.params[0], -1 - req.params[0]})

        with caplog.at_level("WARNING", logger="latininf"):
            run(Greedy(), naturals(), 5, growth_bound=lambda state: state.size())
        assert "exceeds declared bound" not in caplog.text
        with caplog.at_level("WARNING", logger="latininf"):
            run(Greedy(), naturals(), 1, growth_bound=lambda state: 1)
        assert "exceeds declared bound 1" in caplog.text
