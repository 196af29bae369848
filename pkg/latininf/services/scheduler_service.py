"""Fair greedy engine: interleave requirement families and meet them in order.

A construction is anything with ``satisfied(req)``, ``meet(req)``, ``size()``
and ``check()``. ``run`` walks a requirement stream and, at step n, extends the
construction until requirement n holds. Nothing is ever retracted, so the
state after step n extends the state after step n-1, and every requirement
with stream position <= n is met by step n.

Resuming: a run started with ``start=c`` skips the first c requirements of
the (deterministic) stream, so (N steps) then (M steps from cursor N) gives
the same state as N+M steps straight through.
"""

from __future__ import annotations

import logging
from itertools import count, islice
from typing import Any, Callable, Iterable, Iterator, Protocol

from latininf.errors import ExtensionFailed, OutOfRange, VerifyFailed
from latininf.models import BuildLog, Requirement, StepRecord, VerificationReport

logger = logging.getLogger(__name__)


class Construction(Protocol):
    def satisfied(self, req: Requirement) -> bool: ...

    def meet(self, req: Requirement) -> None: ...

    def size(self) -> int: ...

    def check(self) -> VerificationReport: ...


def interleave(streams: list[Iterable]) -> Iterator:
    """Merge streams fairly along anti-diagonals.

    Diagonal s visits stream j at its k-th element where j + k = s, highest j
    first, so two streams come out a0, b0, a1, b1, ... The k-th element of
    stream j is emitted at position < (j+k+1)². Exhausted streams drop out.
    """
    iters = [iter(s) for s in streams]
    done = [False] * len(iters)
    s = 0
    while not all(done):
        for j in range(min(s, len(iters) - 1), -1, -1):
            if done[j]:
                continue
            try:
                yield next(iters[j])
            except StopIteration:
                done[j] = True
        s += 1


def enumeration(fn: Callable[[int], Any], length: int | None = None) -> Iterator:
    """fn(0), fn(1), ... stopping at ``length`` or at the first OutOfRange."""
    for k in count():
        if length is not None and k >= length:
            return
        try:
            yield fn(k)
        except OutOfRange:
            return


def diagonal_pairs(
    first: Callable[[int], Any],
    second: Callable[[int], Any],
    first_len: int | None = None,
    second_len: int | None = None,
) -> Iterator[tuple]:
    """All (first(i), second(j)) pairs in Cantor order; each factor may be finite."""
    for s in count():
        if first_len is not None and second_len is not None and s > first_len + second_len - 2:
            return
        lo = 0 if second_len is None else max(0, s - second_len + 1)
        hi = s if first_len is None else min(s, first_len - 1)
        for i in range(lo, hi + 1):
            yield first(i), second(s - i)


def run(
    state: Construction,
    stream: Iterable[Requirement],
    steps: int,
    verify_each: bool = False,
    start: int = 0,
    growth_bound: int | Callable[[Construction], int] | None = None,
) -> tuple[Construction, BuildLog]:
    """Meet ``steps`` requirements of ``stream`` starting at position ``start``.

    ``growth_bound`` is a fixed number of size units or a function of the
    state after the step; a step that grows past it is logged as a warning.

    Raises ExtensionFailed when a meet leaves its requirement unsatisfied and
    VerifyFailed when ``verify_each`` is set and the checker rejects a state.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if start < 0:
        raise ValueError(f"start must be >= 0, got {start}")
    log = BuildLog()
    for step, req in enumerate(islice(iter(stream), start, start + steps), start=start):
        if state.satisfied(req):
            log.append(StepRecord(step, req.label, 0, True))
            logger.debug("step %d: %s already satisfied", step, req.label)
            continue
        before = state.size()
        state.meet(req)
        if not state.satisfied(req):
            raise ExtensionFailed(f"step {step}: meet rule left {req.label} unsatisfied")
        growth = state.size() - before
        log.append(StepRecord(step, req.label, growth, False))
        logger.debug("step %d: met %s (+%d)", step, req.label, growth)
        bound = growth_bound(state) if callable(growth_bound) else growth_bound
        if bound is not None and growth > bound:
            logger.warning(
                "step %d: growth %d exceeds declared bound %d", step, growth, bound
            )
        if verify_each:
            report = state.check()
            if not report.passed:
                raise VerifyFailed(
                    f"step {step}: {report.property} check failed: {report.witnesses[0]}"
                )
    logger.info(
        "ran %d steps from cursor %d: size %d, max growth %d",
        len(log), start, state.size(), log.max_growth,
    )
    return state, log
