"""Command-line interface.

Subcommands: ingest, synth, topics, simulate, train, cv, sweep, stats.
Exit codes: 0 success, 2 validation error (bad data or configuration),
1 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import SlateoptError, ValidationError
from ..model import METRIC_NAMES, N_METRICS, WeightVector
from ..selection import EnumerationBudget, baseline_selection, select_optimal
from ..text import TopicClusterer
from ..weights import WeightSearchConfig, grid_search_weights, xi_changes
from .config import RunConfig, load_config
from .dataset import load_dataset, save_dataset
from .examples import ExampleBuilder
from .experiment import cross_validate, sweep_theta1, sweep_to_csv
from .stats import histograms_to_csv, metric_histograms, scenario_stats
from .synth import generate_synthetic


def _config(args) -> RunConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return RunConfig()


def _builder(dataset, config: RunConfig) -> ExampleBuilder:
    return ExampleBuilder(
        dataset,
        reserve_price=config.reserve_price,
        mbd_passes=config.mbd_passes,
        neutral_saliency=config.neutral_saliency,
        budget=EnumerationBudget(max_rows=config.max_rows),
    )


def _cmd_ingest(args) -> int:
    dataset = load_dataset(args.data)
    n_images = sum(1 for p in dataset.webpages.values() if p.snapshot is not None)
    print(
        f"ok: {len(dataset.webpages)} webpages ({n_images} with snapshots), "
        f"{len(dataset.ads)} ads, {len(dataset.requests)} auction requests"
    )
    if dataset.relation is not None:
        print(f"competitor pairs: {len(dataset.relation)}")
    else:
        print("no topics.jsonl; run the topics command to derive competitors")
    return 0


def _cmd_synth(args) -> int:
    config = _config(args)
    dataset = generate_synthetic(config.synth, seed=args.seed if args.seed is not None else config.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(dataset, out)
    print(
        f"wrote {len(dataset.webpages)} webpages, {len(dataset.ads)} ads, "
        f"{len(dataset.requests)} requests to {out}"
    )
    return 0


def _cmd_topics(args) -> int:
    dataset = load_dataset(args.data)
    ads = list(dataset.ads.values())
    clusterer = TopicClusterer(n_topics=args.k, seed=args.seed).fit(ads)
    labels = clusterer.assignment_.topics
    out = Path(args.data) / "topics.jsonl"
    with open(out, "w", encoding="utf-8") as f:
        for ad in ads:
            f.write(json.dumps({"ad_id": ad.id, "topic": int(labels[ad.id])}) + "\n")
    relation = clusterer.competitor_relation(ads)
    print(f"wrote {out} ({args.k} topics, {len(relation)} competitor pairs)")
    return 0


def _cmd_simulate(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    if args.gamma is not None:
        gamma = WeightVector(gamma=tuple(args.gamma))
    else:
        with open(args.gamma_file, "r", encoding="utf-8") as f:
            gamma = WeightVector(gamma=tuple(json.load(f)["gamma"]))
    if not dataset.requests:
        print("dataset has no auction requests", file=sys.stderr)
        return 2
    builder = _builder(dataset, config)
    relation = builder.relation
    budget = EnumerationBudget(max_rows=config.max_rows)
    optimized = []
    baseline = []
    for request in dataset.requests:
        ctx = builder.context(request)
        optimized.append(select_optimal(request, ctx, relation, gamma, budget))
        baseline.append(baseline_selection(request, ctx))
    report = xi_changes(optimized, baseline)
    lines = ["request_id,is_fallback,rank_score," + ",".join(
        f"slot_{i + 1}_ad" for i in range(max(len(r.row.picks) for r in optimized))
    )]
    for result in optimized:
        ads = ",".join(p.ad_id for p in result.row.picks)
        lines.append(
            f"{result.request_id},{int(result.is_fallback)},{result.rank_score!r},{ads}"
        )
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {args.out}")
    fallbacks = sum(r.is_fallback for r in optimized)
    print(f"fallbacks: {fallbacks}/{len(optimized)}")
    for k, name in enumerate(METRIC_NAMES):
        flag = " (undefined)" if report.undefined[k] else ""
        print(f"xi_{k + 1} {name}: {100 * report.xi[k]:+.2f}%{flag}")
    return 0


def _cmd_train(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    builder = _builder(dataset, config)
    gamma = grid_search_weights(
        builder.examples(),
        WeightSearchConfig(
            grid_step=config.grid_step, thresholds=config.threshold_vector()
        ),
    )
    if gamma is None:
        print("infeasible: no grid candidate satisfies the thresholds", file=sys.stderr)
        Path(args.out).write_text(json.dumps({"gamma": None}) + "\n", encoding="utf-8")
        return 0
    Path(args.out).write_text(
        json.dumps({"gamma": list(gamma.gamma)}) + "\n", encoding="utf-8"
    )
    print(f"wrote {args.out}: gamma = {[round(g, 4) for g in gamma.gamma]}")
    return 0


def _cmd_cv(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    result = cross_validate(
        dataset,
        config.threshold_vector(),
        folds=config.folds,
        seed=config.seed,
        grid_step=config.grid_step,
        builder=_builder(dataset, config),
    )
    Path(args.out).write_text(result.to_csv(), encoding="utf-8")
    print(f"wrote {args.out}")
    print(result.to_table(), end="")
    return 0


def _cmd_sweep(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    values = [float(v) for v in args.theta1.split(",")]
    points = sweep_theta1(
        dataset,
        values,
        grid_step=config.grid_step,
        seed=config.seed,
        test_fraction=config.test_fraction,
        builder=_builder(dataset, config),
    )
    Path(args.out).write_text(sweep_to_csv(points), encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def _cmd_stats(args) -> int:
    config = _config(args)
    dataset = load_dataset(args.data)
    counts = scenario_stats(dataset)
    print(f"requests: {counts.n_requests} ({counts.multi_slot_requests} multi-slot)")
    print(f"scenario same_landing: {counts.same_landing}")
    print(f"scenario same_company: {counts.same_company}")
    print(f"scenario competitive:  {counts.competitive}")
    histograms = metric_histograms(
        dataset,
        bins=args.bins,
        mbd_passes=config.mbd_passes,
        neutral_saliency=config.neutral_saliency,
    )
    Path(args.out).write_text(histograms_to_csv(histograms), encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slateopt",
        description="Multi-slot ad auction simulation and trade-off optimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a dataset directory")
    p.add_argument("data")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("out")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("topics", help="cluster ads and write topics.jsonl")
    p.add_argument("data")
    p.add_argument("--k", type=int, default=24)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_topics)

    p = sub.add_parser("simulate", help="select ads for every request under fixed weights")
    p.add_argument("data")
    p.add_argument("--gamma", type=float, nargs=N_METRICS, default=None)
    p.add_argument("--gamma-file", default="gamma.json")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="selections.csv")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="grid-search trade-off weights")
    p.add_argument("data")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="gamma.json")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("cv", help="k-fold cross-validation")
    p.add_argument("data")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="fold_report.csv")
    p.set_defaults(func=_cmd_cv)

    p = sub.add_parser("sweep", help="revenue-threshold sweep")
    p.add_argument("data")
    p.add_argument("--theta1", default="0,-0.05,-0.1,-0.15,-0.25,-0.4,-0.5")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("stats", help="scenario counts and metric histograms")
    p.add_argument("data")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="histograms.csv")
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SlateoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
