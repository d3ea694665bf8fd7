"""Joint-assignment enumeration and selection.

The full candidate space of a request is the cartesian product of its
per-slot bid lists, streamed lazily in mixed-radix order (last slot varies
fastest). Rows containing competitive advertiser pairs are filtered out;
the survivor with the highest weighted rank score wins. Degenerate cases
(no survivors, enumeration budget exceeded) fall back to the traditional
highest-bid selection.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import BudgetExceeded
from .metrics import (
    MetricContext,
    column_extrema,
    compute_metric_vector,
    normalize,
)
from .model import (
    AuctionRequest,
    CandidateRow,
    MetricVector,
    SelectionResult,
    WeightVector,
)
from .text import CompetitorRelation

DEFAULT_MAX_ROWS = 10_000_000


@dataclass(frozen=True)
class EnumerationBudget:
    """Guard against joint-assignment blow-up (the space is a product of
    per-slot bidder counts)."""

    max_rows: int = DEFAULT_MAX_ROWS

    def __post_init__(self):
        if self.max_rows < 1:
            raise ValueError("max_rows must be at least 1")


DEFAULT_BUDGET = EnumerationBudget()


def omega_size(request: AuctionRequest) -> int:
    """Number of joint assignments: the product of per-slot bidder counts."""
    z = 1
    for bids in request.per_slot_bids:
        z *= len(bids)
    return z


def enumerate_rows(
    request: AuctionRequest, budget: EnumerationBudget = DEFAULT_BUDGET
) -> Iterator[CandidateRow]:
    """Stream all joint assignments in mixed-radix order, one row at a time."""
    z = omega_size(request)
    if z > budget.max_rows:
        raise BudgetExceeded(
            f"request {request.id!r} has {z} joint assignments, budget is {budget.max_rows}"
        )
    return (CandidateRow(picks=picks) for picks in itertools.product(*request.per_slot_bids))


def filter_competitive(
    rows: Iterable[CandidateRow], relation: CompetitorRelation
) -> Iterator[CandidateRow]:
    """Keep rows whose picked advertisers contain no competitive pair."""
    for row in rows:
        ids = row.advertiser_ids
        ok = True
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                if relation.competitive(ids[i], ids[j]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            yield row


def rank_score(x_normalized: MetricVector, gamma: WeightVector) -> float:
    """Weighted sum of normalized metrics; in [0, 1] for simplex weights."""
    total = 0.0
    for xv, gv in zip(x_normalized.x, gamma.gamma):
        total += xv * gv
    return total


def baseline_row(request: AuctionRequest) -> CandidateRow:
    """Per-slot highest-bid picks (ties broken by advertiser id ascending)."""
    picks = tuple(
        min(bids, key=lambda b: (-b.bid, b.advertiser_id))
        for bids in request.per_slot_bids
    )
    return CandidateRow(picks=picks)


def baseline_selection(request: AuctionRequest, ctx: MetricContext) -> SelectionResult:
    """Traditional per-slot selection: the highest bid wins each slot
    independently.

    The resulting row may contain competitive pairs. Rank scores are not
    meaningful on this weight-free path and are reported as 0.0.
    """
    row = baseline_row(request)
    return SelectionResult(
        request_id=request.id,
        row=row,
        rank_score=0.0,
        raw_metrics=compute_metric_vector(row, ctx),
        is_fallback=True,
    )


def select_optimal(
    request: AuctionRequest,
    ctx: MetricContext,
    relation: CompetitorRelation,
    gamma: WeightVector,
    budget: EnumerationBudget = DEFAULT_BUDGET,
) -> SelectionResult:
    """Highest-rank-score row among non-competitive joint assignments.

    Ties break toward the earliest enumerated row. Falls back to
    :func:`baseline_selection` (flagged) when no row survives the filter
    or the enumeration budget is exceeded.
    """
    try:
        rows = enumerate_rows(request, budget)
    except BudgetExceeded:
        return baseline_selection(request, ctx)
    extrema = column_extrema(request, ctx)
    best_row = None
    best_score = -1.0
    best_raw: MetricVector | None = None
    for row in filter_competitive(rows, relation):
        raw = compute_metric_vector(row, ctx)
        score = rank_score(normalize(raw, extrema), gamma)
        if score > best_score:
            best_row = row
            best_score = score
            best_raw = raw
    if best_row is None:
        return baseline_selection(request, ctx)
    return SelectionResult(
        request_id=request.id,
        row=best_row,
        rank_score=best_score,
        raw_metrics=best_raw,
        is_fallback=False,
    )
