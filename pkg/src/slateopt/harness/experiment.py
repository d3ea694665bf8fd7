"""Cross-validation and revenue-threshold sweeps.

Folds come from a seeded shuffle followed by a contiguous split, so runs
are reproducible byte for byte. A fold trains weights on its training
split and evaluates the change reports on both splits; when no grid
candidate is feasible every selection falls back to the traditional
highest-bid rule and the fold reports zero changes.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import TooFewRequests, ValidationError
from ..model import ChangeReport, N_METRICS, ThresholdVector, WeightVector
from ..weights import (
    TrainingExample,
    WeightSearchConfig,
    _TrainingCache,
    _xi_from_sums,
    evaluate_gamma,
    grid_search_weights,
)
from .dataset import Dataset
from .examples import ExampleBuilder


@dataclass(frozen=True)
class FoldReport:
    fold_index: int
    gamma: Optional[WeightVector]
    train_report: ChangeReport
    test_report: ChangeReport
    train_objective: Optional[float]
    test_objective: Optional[float]
    train_fallbacks: int
    test_fallbacks: int


@dataclass(frozen=True)
class SweepPoint:
    theta1: float
    objective: Optional[float]  # training objective; None when infeasible
    xi: tuple[float, ...]  # test-set changes
    gamma: Optional[WeightVector]


def _all_baseline_report(examples: Sequence[TrainingExample]) -> ChangeReport:
    cache = _TrainingCache(examples)
    return _xi_from_sums(cache.base_raw_total.copy(), cache.base_raw_total, cache.n)


def run_fold(
    train_examples: Sequence[TrainingExample],
    test_examples: Sequence[TrainingExample],
    thresholds: ThresholdVector,
    grid_step: float = 0.05,
    fold_index: int = 0,
) -> FoldReport:
    """Train weights on the training split and report changes on both splits."""
    config = WeightSearchConfig(grid_step=grid_step, thresholds=thresholds)
    gamma = grid_search_weights(train_examples, config)
    if gamma is None:
        return FoldReport(
            fold_index=fold_index,
            gamma=None,
            train_report=_all_baseline_report(train_examples),
            test_report=_all_baseline_report(test_examples),
            train_objective=None,
            test_objective=None,
            train_fallbacks=len(train_examples),
            test_fallbacks=len(test_examples),
        )
    train_objective, train_report = evaluate_gamma(gamma, train_examples)
    test_objective, test_report = evaluate_gamma(gamma, test_examples)
    return FoldReport(
        fold_index=fold_index,
        gamma=gamma,
        train_report=train_report,
        test_report=test_report,
        train_objective=train_objective,
        test_objective=test_objective,
        train_fallbacks=sum(ex.fallback for ex in train_examples),
        test_fallbacks=sum(ex.fallback for ex in test_examples),
    )


@dataclass(frozen=True)
class CVResult:
    folds: tuple[FoldReport, ...]
    train_xi_mean: tuple[float, ...]
    train_xi_std: tuple[float, ...]
    test_xi_mean: tuple[float, ...]
    test_xi_std: tuple[float, ...]

    def to_csv(self) -> str:
        out = io.StringIO()
        gamma_cols = ",".join(f"gamma_{k}" for k in range(1, N_METRICS + 1))
        train_cols = ",".join(f"train_xi_{k}" for k in range(1, N_METRICS + 1))
        test_cols = ",".join(f"test_xi_{k}" for k in range(1, N_METRICS + 1))
        out.write(f"fold,{gamma_cols},{train_cols},{test_cols}\n")
        for fold in self.folds:
            gamma = (
                ",".join(repr(g) for g in fold.gamma.gamma)
                if fold.gamma is not None
                else "," * (N_METRICS - 1)
            )
            train = ",".join(repr(v) for v in fold.train_report.xi)
            test = ",".join(repr(v) for v in fold.test_report.xi)
            out.write(f"{fold.fold_index + 1},{gamma},{train},{test}\n")
        blank_gamma = "," * (N_METRICS - 1)
        for label, train_vals, test_vals in (
            ("Mean", self.train_xi_mean, self.test_xi_mean),
            ("Std", self.train_xi_std, self.test_xi_std),
        ):
            train = ",".join(repr(v) for v in train_vals)
            test = ",".join(repr(v) for v in test_vals)
            out.write(f"{label},{blank_gamma},{train},{test}\n")
        return out.getvalue()

    def to_table(self) -> str:
        """Plain-text summary table of weights and per-fold changes."""
        lines = []
        header = (
            ["fold"]
            + [f"g{k}" for k in range(1, N_METRICS + 1)]
            + [f"train_xi{k}" for k in range(1, N_METRICS + 1)]
            + [f"test_xi{k}" for k in range(1, N_METRICS + 1)]
        )
        lines.append(" ".join(f"{h:>10}" for h in header))
        for fold in self.folds:
            cells = [f"{fold.fold_index + 1:>10}"]
            if fold.gamma is not None:
                cells += [f"{g:>10.2f}" for g in fold.gamma.gamma]
            else:
                cells += [f"{'-':>10}"] * N_METRICS
            cells += [f"{100 * v:>9.1f}%" for v in fold.train_report.xi]
            cells += [f"{100 * v:>9.1f}%" for v in fold.test_report.xi]
            lines.append(" ".join(cells))
        for label, train_vals, test_vals in (
            ("Mean", self.train_xi_mean, self.test_xi_mean),
            ("Std", self.train_xi_std, self.test_xi_std),
        ):
            cells = [f"{label:>10}"] + [f"{'-':>10}"] * N_METRICS
            cells += [f"{100 * v:>9.1f}%" for v in train_vals]
            cells += [f"{100 * v:>9.1f}%" for v in test_vals]
            lines.append(" ".join(cells))
        return "\n".join(lines) + "\n"


def fold_partition(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle plus contiguous split; folds differ in size by at most one."""
    if n < folds:
        raise TooFewRequests(f"{n} requests cannot fill {folds} folds")
    perm = np.random.default_rng(seed).permutation(n)
    base, rem = divmod(n, folds)
    parts = []
    start = 0
    for f in range(folds):
        size = base + (1 if f < rem else 0)
        parts.append(perm[start : start + size])
        start += size
    return parts


def cross_validate(
    dataset: Dataset,
    thresholds: ThresholdVector,
    folds: int = 10,
    seed: int = 0,
    grid_step: float = 0.05,
    builder: Optional[ExampleBuilder] = None,
) -> CVResult:
    """K-fold cross-validation over the dataset's requests."""
    requests = dataset.requests
    parts = fold_partition(len(requests), folds, seed)
    if builder is None:
        builder = ExampleBuilder(dataset)
    all_examples = builder.examples(requests)
    reports = []
    for f, test_idx in enumerate(parts):
        test_set = set(int(i) for i in test_idx)
        train_examples = [
            all_examples[i] for i in range(len(requests)) if i not in test_set
        ]
        test_examples = [all_examples[int(i)] for i in test_idx]
        reports.append(
            run_fold(
                train_examples,
                test_examples,
                thresholds,
                grid_step=grid_step,
                fold_index=f,
            )
        )
    train_xi = np.array([r.train_report.xi for r in reports])
    test_xi = np.array([r.test_report.xi for r in reports])
    return CVResult(
        folds=tuple(reports),
        train_xi_mean=tuple(float(v) for v in train_xi.mean(axis=0)),
        train_xi_std=tuple(float(v) for v in train_xi.std(axis=0)),
        test_xi_mean=tuple(float(v) for v in test_xi.mean(axis=0)),
        test_xi_std=tuple(float(v) for v in test_xi.std(axis=0)),
    )


def sweep_theta1(
    dataset: Dataset,
    theta1_values: Sequence[float],
    grid_step: float = 0.05,
    seed: int = 0,
    test_fraction: float = 0.1,
    builder: Optional[ExampleBuilder] = None,
) -> list[SweepPoint]:
    """Train/evaluate once per revenue threshold on one fixed split.

    ``theta1_values`` must be non-positive and non-increasing, starting
    from the tightest bound; the other thresholds stay at zero.
    """
    values = [float(v) for v in theta1_values]
    if not values:
        raise ValidationError("no theta1 values to sweep")
    if any(v > 0.0 for v in values):
        raise ValidationError("theta1 values must be non-positive")
    if any(b > a for a, b in zip(values, values[1:])):
        raise ValidationError("theta1 values must be sorted descending")
    requests = dataset.requests
    if len(requests) < 2:
        raise TooFewRequests("sweep needs at least 2 requests")
    if builder is None:
        builder = ExampleBuilder(dataset)
    all_examples = builder.examples(requests)
    perm = np.random.default_rng(seed).permutation(len(requests))
    n_test = max(1, round(len(requests) * test_fraction))
    test_examples = [all_examples[int(i)] for i in perm[:n_test]]
    train_examples = [all_examples[int(i)] for i in perm[n_test:]]
    points = []
    for theta1 in values:
        thresholds = ThresholdVector(theta=(theta1,) + (0.0,) * (N_METRICS - 1))
        fold = run_fold(train_examples, test_examples, thresholds, grid_step=grid_step)
        points.append(
            SweepPoint(
                theta1=theta1,
                objective=fold.train_objective,
                xi=fold.test_report.xi,
                gamma=fold.gamma,
            )
        )
    return points


def sweep_to_csv(points: Sequence[SweepPoint]) -> str:
    out = io.StringIO()
    xi_cols = ",".join(f"test_xi_{k}" for k in range(1, N_METRICS + 1))
    gamma_cols = ",".join(f"gamma_{k}" for k in range(1, N_METRICS + 1))
    out.write(f"theta1,objective,{xi_cols},{gamma_cols}\n")
    for p in points:
        objective = repr(p.objective) if p.objective is not None else ""
        xi = ",".join(repr(v) for v in p.xi)
        gamma = (
            ",".join(repr(g) for g in p.gamma.gamma)
            if p.gamma is not None
            else "," * (N_METRICS - 1)
        )
        out.write(f"{p.theta1!r},{objective},{xi},{gamma}\n")
    return out.getvalue()
