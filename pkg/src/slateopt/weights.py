"""Trade-off weight learning.

The learned object is a weight vector on the 6-simplex. Because the
selected row depends on the weights, the objective (sum of winning rank
scores over the training auctions) is optimized by exhaustive grid search
over the simplex, keeping only candidates whose training change report
satisfies the publisher's thresholds: revenue change >= theta[0] (a
non-positive loss bound) and every other metric change >= theta[k] >= 0.

Per-request work is cached once in ``TrainingExample`` (raw and normalized
metric matrices of the filtered rows plus the baseline), so evaluating one
weight candidate costs a single matrix-vector pass.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import BudgetExceeded, EmptyTraining
from .metrics import (
    Extrema,
    MetricContext,
    column_extrema,
    compute_metric_vector,
    normalize_array,
)
from .model import (
    AuctionRequest,
    CandidateRow,
    ChangeReport,
    MetricVector,
    N_METRICS,
    SelectionResult,
    ThresholdVector,
    WeightVector,
)
from .selection import (
    DEFAULT_BUDGET,
    EnumerationBudget,
    baseline_selection,
    enumerate_rows,
    filter_competitive,
)
from .text import CompetitorRelation

ZERO_THRESHOLDS = ThresholdVector(theta=(0.0,) * N_METRICS)


@dataclass(frozen=True)
class WeightSearchConfig:
    grid_step: float = 0.05
    thresholds: ThresholdVector = ZERO_THRESHOLDS

    def __post_init__(self):
        if not 0.0 < self.grid_step <= 1.0:
            raise ValueError("grid_step must lie in (0, 1]")
        m = round(1.0 / self.grid_step)
        if abs(m * self.grid_step - 1.0) > 1e-9:
            raise ValueError(f"1/grid_step must be an integer, got {self.grid_step}")


@dataclass(frozen=True)
class TrainingExample:
    """Replayable per-request state for weight evaluation.

    ``picks`` holds per-slot bid indices of every surviving row, aligned
    with the rows of ``raw`` and ``normalized``. ``fallback`` marks
    requests with no surviving rows or a blown enumeration budget; they
    always resolve to the baseline.
    """

    request_id: str
    request: AuctionRequest
    picks: np.ndarray = field(repr=False)  # (q, n_slots) int32
    raw: np.ndarray = field(repr=False)  # (q, 6)
    normalized: np.ndarray = field(repr=False)  # (q, 6)
    baseline_picks: np.ndarray = field(repr=False)  # (n_slots,) int32
    baseline_raw: np.ndarray = field(repr=False)  # (6,)
    baseline_normalized: np.ndarray = field(repr=False)  # (6,)
    extrema: Extrema = field(repr=False)
    fallback: bool = False

    @property
    def q(self) -> int:
        return int(self.raw.shape[0])

    def row(self, index: int) -> CandidateRow:
        picks = tuple(
            bids[j] for bids, j in zip(self.request.per_slot_bids, self.picks[index])
        )
        return CandidateRow(picks=picks)

    def baseline_row(self) -> CandidateRow:
        picks = tuple(
            bids[j] for bids, j in zip(self.request.per_slot_bids, self.baseline_picks)
        )
        return CandidateRow(picks=picks)


def build_training_example(
    request: AuctionRequest,
    ctx: MetricContext,
    relation: CompetitorRelation,
    budget: EnumerationBudget = DEFAULT_BUDGET,
) -> TrainingExample:
    """Enumerate, filter and pre-normalize one request's candidate rows."""
    n_slots = len(request.per_slot_bids)
    extrema = column_extrema(request, ctx)
    base = baseline_selection(request, ctx)
    index_of = [
        {b.advertiser_id: j for j, b in enumerate(bids)}
        for bids in request.per_slot_bids
    ]
    baseline_picks = np.array(
        [index_of[s][p.advertiser_id] for s, p in enumerate(base.row.picks)],
        dtype=np.int32,
    )
    baseline_raw = base.raw_metrics.as_array()
    baseline_normalized = normalize_array(baseline_raw, extrema)

    picks_list: list[tuple[int, ...]] = []
    raw_list: list[np.ndarray] = []
    fallback = False
    try:
        rows = enumerate_rows(request, budget)
        for row in filter_competitive(rows, relation):
            picks_list.append(
                tuple(index_of[s][p.advertiser_id] for s, p in enumerate(row.picks))
            )
            raw_list.append(compute_metric_vector(row, ctx).as_array())
    except BudgetExceeded:
        picks_list = []
        raw_list = []
        fallback = True
    if not picks_list:
        fallback = True
        picks = np.zeros((0, n_slots), dtype=np.int32)
        raw = np.zeros((0, N_METRICS), dtype=np.float64)
    else:
        picks = np.array(picks_list, dtype=np.int32)
        raw = np.stack(raw_list)
    normalized = normalize_array(raw, extrema)
    for arr in (picks, raw, normalized, baseline_picks, baseline_raw, baseline_normalized):
        arr.flags.writeable = False
    return TrainingExample(
        request_id=request.id,
        request=request,
        picks=picks,
        raw=raw,
        normalized=normalized,
        baseline_picks=baseline_picks,
        baseline_raw=baseline_raw,
        baseline_normalized=baseline_normalized,
        extrema=extrema,
        fallback=fallback,
    )


def _xi_from_sums(
    optimized_sums: np.ndarray, baseline_sums: np.ndarray, n: int
) -> ChangeReport:
    """Relative change of summed raw metrics, with the zero-denominator
    policy: 0 when the numerator is also 0, otherwise flagged undefined."""
    xi = np.zeros(N_METRICS, dtype=np.float64)
    undefined = [False] * N_METRICS
    num = optimized_sums - baseline_sums
    for k in range(N_METRICS):
        if baseline_sums[k] == 0.0:
            if num[k] == 0.0:
                xi[k] = 0.0
            else:
                undefined[k] = True
        else:
            xi[k] = num[k] / baseline_sums[k]
    return ChangeReport(xi=tuple(xi), n=n, undefined=tuple(undefined))


def xi_changes(
    optimized: Sequence[SelectionResult], baseline: Sequence[SelectionResult]
) -> ChangeReport:
    """Change report between aligned optimized and baseline selections."""
    if len(optimized) != len(baseline) or not optimized:
        raise ValueError("selection lists must be non-empty and equally long")
    for opt, base in zip(optimized, baseline):
        if opt.request_id != base.request_id:
            raise ValueError(
                f"misaligned selections: {opt.request_id!r} vs {base.request_id!r}"
            )
    opt_sums = np.stack([r.raw_metrics.as_array() for r in optimized]).sum(axis=0)
    base_sums = np.stack([r.raw_metrics.as_array() for r in baseline]).sum(axis=0)
    return _xi_from_sums(opt_sums, base_sums, n=len(optimized))


def enumerate_simplex(step: float) -> Iterator[WeightVector]:
    """All weight vectors with components that are multiples of ``step``
    summing to 1, in ascending lexicographic order."""
    m = round(1.0 / step)
    if abs(m * step - 1.0) > 1e-9 or m < 1:
        raise ValueError(f"1/step must be an integer, got {step}")

    def compositions(remaining: int, parts: int):
        if parts == 1:
            yield (remaining,)
            return
        for c in range(remaining + 1):
            for rest in compositions(remaining - c, parts - 1):
                yield (c,) + rest

    for counts in compositions(m, N_METRICS):
        yield WeightVector(gamma=tuple(c / m for c in counts))


class _TrainingCache:
    """Stacked matrices over a training set for fast per-candidate scans."""

    def __init__(self, training: Sequence[TrainingExample]):
        self.examples = list(training)
        self.n = len(self.examples)
        live = [ex for ex in self.examples if not ex.fallback]
        fallback = [ex for ex in self.examples if ex.fallback]
        # Summation layout matters: selected sums below use the same
        # (rows, 6).sum(axis=0) reduction, so a candidate that reproduces
        # the baselines yields a bitwise-zero numerator.
        self.base_raw_fallback = (
            np.stack([ex.baseline_raw for ex in fallback]).sum(axis=0)
            if fallback
            else np.zeros(N_METRICS, dtype=np.float64)
        )
        self.base_norm_fallback = (
            np.stack([ex.baseline_normalized for ex in fallback]).sum(axis=0)
            if fallback
            else np.zeros(N_METRICS, dtype=np.float64)
        )
        if live:
            self.lengths = np.array([ex.q for ex in live], dtype=np.int64)
            self.starts = np.concatenate(([0], np.cumsum(self.lengths)[:-1]))
            self.norm = np.concatenate([ex.normalized for ex in live])
            self.raw = np.concatenate([ex.raw for ex in live])
            self.base_raw_live = np.stack([ex.baseline_raw for ex in live]).sum(axis=0)
            self._row_ids = np.arange(self.norm.shape[0], dtype=np.int64)
        else:
            self.lengths = np.zeros(0, dtype=np.int64)
            self.starts = np.zeros(0, dtype=np.int64)
            self.norm = np.zeros((0, N_METRICS))
            self.raw = np.zeros((0, N_METRICS))
            self.base_raw_live = np.zeros(N_METRICS, dtype=np.float64)
            self._row_ids = np.zeros(0, dtype=np.int64)
        self.base_raw_total = self.base_raw_live + self.base_raw_fallback

    def _scores(self, matrix: np.ndarray, g: np.ndarray) -> np.ndarray:
        # left-to-right accumulation, bitwise identical to rank_score()
        scores = matrix[:, 0] * g[0]
        for k in range(1, N_METRICS):
            scores = scores + matrix[:, k] * g[k]
        return scores

    def _winners_from_scores(self, scores: np.ndarray) -> np.ndarray:
        """First argmax row index per live example (earliest-row tie-break)."""
        seg_max = np.maximum.reduceat(scores, self.starts)
        sentinel = scores.shape[0]
        candidates = np.where(
            scores == np.repeat(seg_max, self.lengths), self._row_ids, sentinel
        )
        return np.minimum.reduceat(candidates, self.starts)

    def winners(self, gamma: WeightVector) -> np.ndarray:
        return self._winners_from_scores(self._scores(self.norm, gamma.as_array()))

    def evaluate(self, gamma: WeightVector) -> tuple[float, ChangeReport]:
        g = gamma.as_array()
        fallback_obj = 0.0
        for k in range(N_METRICS):
            fallback_obj += self.base_norm_fallback[k] * g[k]
        if self.lengths.size == 0:
            return fallback_obj, _xi_from_sums(
                self.base_raw_total.copy(), self.base_raw_total, self.n
            )
        scores = self._scores(self.norm, g)
        winner_idx = self._winners_from_scores(scores)
        objective = float(np.sum(scores[winner_idx])) + fallback_obj
        selected_sums = self.raw[winner_idx].sum(axis=0) + self.base_raw_fallback
        return objective, _xi_from_sums(selected_sums, self.base_raw_total, self.n)


def feasible(report: ChangeReport, thresholds: ThresholdVector) -> bool:
    """Threshold check; metrics flagged undefined are excluded."""
    for k in range(N_METRICS):
        if report.undefined[k]:
            continue
        if report.xi[k] < thresholds.theta[k]:
            return False
    return True


def evaluate_gamma(
    gamma: WeightVector, training: Sequence[TrainingExample]
) -> tuple[float, ChangeReport]:
    """Objective (sum of winning rank scores) and training change report
    for one weight candidate."""
    if not training:
        raise EmptyTraining("no training examples")
    return _TrainingCache(training).evaluate(gamma)


def grid_search_weights(
    training: Sequence[TrainingExample], config: WeightSearchConfig
) -> Optional[WeightVector]:
    """Best feasible grid candidate, or None when the thresholds admit none.

    Ties break toward the lexicographically smallest weight vector.
    """
    if not training:
        raise EmptyTraining("no training examples")
    cache = _TrainingCache(training)
    best: Optional[WeightVector] = None
    best_obj = -np.inf
    for gamma in enumerate_simplex(config.grid_step):
        objective, report = cache.evaluate(gamma)
        if not feasible(report, config.thresholds):
            continue
        if objective > best_obj:
            best = gamma
            best_obj = objective
    return best


class TradeoffAdSelector(BaseEstimator):
    """Learns trade-off weights from training auctions and selects joint ad
    assignments with them.

    Follows the scikit-learn estimator protocol: parameters are plain
    constructor arguments, fitted state lives in trailing-underscore
    attributes, and ``get_params``/``set_params`` come from the base class.
    ``fit`` and ``predict`` operate on lists of :class:`TrainingExample`
    (see :func:`build_training_example` and the harness helpers).

    When no grid candidate satisfies the thresholds, ``gamma_`` is None and
    prediction falls back to the traditional highest-bid selection.
    """

    def __init__(self, grid_step: float = 0.05, theta: Sequence[float] = (0.0,) * 6):
        self.grid_step = grid_step
        self.theta = theta

    def _config(self) -> WeightSearchConfig:
        thresholds = (
            self.theta
            if isinstance(self.theta, ThresholdVector)
            else ThresholdVector(theta=tuple(self.theta))
        )
        return WeightSearchConfig(grid_step=self.grid_step, thresholds=thresholds)

    def fit(self, X: Sequence[TrainingExample], y=None) -> "TradeoffAdSelector":
        config = self._config()
        self.gamma_ = grid_search_weights(X, config)
        if self.gamma_ is None:
            cache = _TrainingCache(X)
            self.objective_ = None
            self.training_report_ = _xi_from_sums(
                cache.base_raw_total.copy(), cache.base_raw_total, cache.n
            )
        else:
            self.objective_, self.training_report_ = evaluate_gamma(self.gamma_, X)
        return self

    def _check_fitted(self):
        if not hasattr(self, "gamma_"):
            raise NotFittedError("TradeoffAdSelector is not fitted")

    def predict(self, X: Sequence[TrainingExample]) -> list[SelectionResult]:
        self._check_fitted()
        return [self._predict_one(ex) for ex in X]

    def _predict_one(self, ex: TrainingExample) -> SelectionResult:
        if self.gamma_ is None or ex.fallback:
            return SelectionResult(
                request_id=ex.request_id,
                row=ex.baseline_row(),
                rank_score=0.0,
                raw_metrics=MetricVector.from_array(ex.baseline_raw),
                is_fallback=True,
            )
        g = self.gamma_.as_array()
        scores = ex.normalized[:, 0] * g[0]
        for k in range(1, N_METRICS):
            scores = scores + ex.normalized[:, k] * g[k]
        idx = int(np.argmax(scores))
        return SelectionResult(
            request_id=ex.request_id,
            row=ex.row(idx),
            rank_score=float(scores[idx]),
            raw_metrics=MetricVector.from_array(ex.raw[idx]),
            is_fallback=False,
        )

    def change_report(self, X: Sequence[TrainingExample]) -> ChangeReport:
        """Change report of this estimator's selections versus baseline."""
        self._check_fitted()
        if not X:
            raise EmptyTraining("no examples to report on")
        if self.gamma_ is None:
            cache = _TrainingCache(X)
            return _xi_from_sums(
                cache.base_raw_total.copy(), cache.base_raw_total, cache.n
            )
        _, report = evaluate_gamma(self.gamma_, X)
        return report

    def objective(self, X: Sequence[TrainingExample]) -> Optional[float]:
        """Sum of winning rank scores under the fitted weights, or None
        when fitting was infeasible."""
        self._check_fitted()
        if self.gamma_ is None:
            return None
        obj, _ = evaluate_gamma(self.gamma_, X)
        return obj
