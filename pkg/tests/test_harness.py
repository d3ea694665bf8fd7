import numpy as np
import pytest

from slateopt import DanglingReference, InvalidSpec, ParseError, ThresholdVector, TooFewRequests
from slateopt.harness import (
    Dataset,
    ExampleBuilder,
    RunConfig,
    SynthSpec,
    cross_validate,
    generate_synthetic,
    load_config,
    load_dataset,
    metric_histograms,
    run_fold,
    save_dataset,
    scenario_stats,
    sweep_theta1,
)
from slateopt.harness.experiment import fold_partition
from slateopt.harness.stats import histograms_to_csv
from fixtures import scenario_fixture

SMALL_SPEC = SynthSpec(
    n_webpages=6,
    slots_per_page=2,
    n_ads=24,
    n_advertisers=12,
    n_companies=8,
    bidders_per_slot=4,
    n_requests=24,
    n_topics=4,
    with_images=False,
)


def small_dataset(seed=5, **overrides) -> Dataset:
    spec = SynthSpec(**{**SMALL_SPEC.__dict__, **overrides})
    return generate_synthetic(spec, seed=seed)


MINIMAL_FILES = {
    "webpages.jsonl": (
        '{"id": "w0", "url": "https://x.test", "title": "guitar news", '
        '"keywords": "guitar", "description": "daily guitar", '
        '"content": "strings and frets", "snapshot": null, '
        '"slots": [{"id": "s0", "x": 0, "y": 0, "w": 8, "h": 8}]}\n'
    ),
    "ads.jsonl": (
        '{"id": "ad0", "advertiser_id": "advA", "company_domain": "a.test", '
        '"landing_title": "guitar shop", "landing_keywords": "guitar", '
        '"landing_description": "buy guitars", "image": null, '
        '"memorability": 0.8, "ctr": 0.05}\n'
        '{"id": "ad1", "advertiser_id": "advB", "company_domain": "b.test", '
        '"landing_title": "piano shop", "landing_keywords": "piano", '
        '"landing_description": "buy pianos", "image": null, '
        '"memorability": 0.7, "ctr": 0.02, "value": 3.5}\n'
    ),
    "auctions.jsonl": (
        '{"id": "r0", "webpage_id": "w0", '
        '"slots": [[{"ad_id": "ad0", "bid": 2.0}, {"ad_id": "ad1", "bid": 1.0}]]}\n'
    ),
}


def write_minimal(tmp_path, **overrides):
    for name, content in {**MINIMAL_FILES, **overrides}.items():
        (tmp_path / name).write_text(content, encoding="utf-8")
    return tmp_path


class TestLoadDataset:
    def test_minimal_fixture(self, tmp_path):
        dataset = load_dataset(write_minimal(tmp_path))
        assert len(dataset.requests) == 1
        assert len(dataset.webpages) == 1
        assert len(dataset.ads) == 2
        # ad value defaults to the bid; explicit value carries through
        bids = dataset.requests[0].per_slot_bids[0]
        assert bids[0].value == 2.0
        assert bids[1].value == 3.5

    def test_landing_text_joins_parts(self, tmp_path):
        dataset = load_dataset(write_minimal(tmp_path))
        assert dataset.ads["ad0"].landing_text == "guitar shop guitar buy guitars"

    def test_dangling_ad_reference(self, tmp_path):
        bad = (
            '{"id": "r0", "webpage_id": "w0", '
            '"slots": [[{"ad_id": "missing", "bid": 2.0}]]}\n'
        )
        with pytest.raises(DanglingReference):
            load_dataset(write_minimal(tmp_path, **{"auctions.jsonl": bad}))

    def test_dangling_webpage_reference(self, tmp_path):
        bad = (
            '{"id": "r0", "webpage_id": "nope", '
            '"slots": [[{"ad_id": "ad0", "bid": 2.0}]]}\n'
        )
        with pytest.raises(DanglingReference):
            load_dataset(write_minimal(tmp_path, **{"auctions.jsonl": bad}))

    def test_parse_error_carries_line(self, tmp_path):
        bad = MINIMAL_FILES["ads.jsonl"] + "{not json}\n"
        with pytest.raises(ParseError, match="ads.jsonl:3"):
            load_dataset(write_minimal(tmp_path, **{"ads.jsonl": bad}))

    def test_missing_field_reported(self, tmp_path):
        bad = '{"id": "w0", "url": "https://x.test"}\n'
        with pytest.raises(ParseError, match="missing field"):
            load_dataset(write_minimal(tmp_path, **{"webpages.jsonl": bad}))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError, match="not found"):
            load_dataset(tmp_path)

    def test_topics_derive_relation(self, tmp_path):
        topics = '{"ad_id": "ad0", "topic": 0}\n{"ad_id": "ad1", "topic": 0}\n'
        dataset = load_dataset(
            write_minimal(tmp_path, **{"topics.jsonl": topics})
        )
        assert dataset.relation is not None
        assert dataset.relation.competitive("advA", "advB")


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path):
        dataset = generate_synthetic(
            SynthSpec(
                n_webpages=3,
                slots_per_page=2,
                n_ads=12,
                n_advertisers=6,
                n_companies=4,
                bidders_per_slot=3,
                n_requests=6,
                n_topics=3,
                snapshot_height=24,
                snapshot_width=24,
                slot_height=6,
                slot_width=8,
            ),
            seed=11,
        )
        save_dataset(dataset, tmp_path)
        loaded = load_dataset(tmp_path)
        assert loaded.webpages == dataset.webpages
        assert loaded.ads == dataset.ads
        assert loaded.requests == dataset.requests
        assert loaded.topic_labels == dataset.topic_labels
        assert loaded.relation == dataset.relation


class TestGenerateSynthetic:
    def test_deterministic(self):
        a = small_dataset(seed=9)
        b = small_dataset(seed=9)
        assert a.requests == b.requests
        assert a.ads == b.ads
        assert a.webpages == b.webpages

    def test_different_seeds_differ(self):
        assert small_dataset(seed=1).requests != small_dataset(seed=2).requests

    def test_single_bidder_ground_truth(self):
        dataset = small_dataset(bidders_per_slot=1)
        for request in dataset.requests:
            for bids in request.per_slot_bids:
                assert len(bids) == 1

    def test_bid_median_near_one(self):
        dataset = small_dataset(
            n_requests=500, bidders_per_slot=10, n_ads=60, n_advertisers=30
        )
        bids = [
            b.bid
            for request in dataset.requests
            for bids in request.per_slot_bids
            for b in bids
        ]
        assert len(bids) == 10_000
        assert abs(float(np.median(bids)) - 1.0) <= 0.1

    def test_strict_ground_truth_winner(self):
        dataset = small_dataset()
        for request in dataset.requests:
            for bids in request.per_slot_bids:
                top = max(b.bid for b in bids)
                assert sum(1 for b in bids if b.bid == top) == 1

    def test_anticorrelation_ranks_bids_against_ctr(self):
        dataset = small_dataset(bid_ctr_anticorrelation=1.0)
        for request in dataset.requests:
            for bids in request.per_slot_bids:
                by_bid = sorted(bids, key=lambda b: -b.bid)
                ctrs = [dataset.ads[b.ad_id].ctr for b in by_bid]
                assert ctrs == sorted(ctrs)

    def test_invalid_spec_rejected(self):
        with pytest.raises(InvalidSpec):
            SynthSpec(n_ads=3, n_advertisers=6)
        with pytest.raises(InvalidSpec):
            SynthSpec(bid_ctr_anticorrelation=1.5)
        with pytest.raises(InvalidSpec):
            SynthSpec(slots_per_page=10, snapshot_height=30, slot_height=10)

    def test_validated_against_model_invariants(self):
        dataset = small_dataset()
        from slateopt import validate_request

        for request in dataset.requests:
            validate_request(request, dataset.webpages[request.webpage_id])


class TestFoldPartition:
    def test_partition_covers_everything_once(self):
        parts = fold_partition(23, 10, seed=4)
        seen = np.concatenate(parts)
        assert sorted(seen) == list(range(23))
        sizes = [len(p) for p in parts]
        assert max(sizes) - min(sizes) <= 1

    def test_deterministic(self):
        a = fold_partition(50, 10, seed=7)
        b = fold_partition(50, 10, seed=7)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_too_few_requests(self):
        with pytest.raises(TooFewRequests):
            fold_partition(5, 10, seed=0)


class TestRunFold:
    def _examples(self, dataset, builder=None):
        builder = builder or ExampleBuilder(dataset)
        return builder.examples()

    def test_train_equals_test(self):
        dataset = small_dataset()
        examples = self._examples(dataset)
        report = run_fold(
            examples,
            examples,
            ThresholdVector(theta=(-0.5, 0, 0, 0, 0, 0)),
            grid_step=0.5,
        )
        assert report.train_report.xi == report.test_report.xi
        assert report.train_objective == report.test_objective

    def test_infeasible_thresholds_fall_back_to_zero_changes(self):
        dataset = small_dataset()
        examples = self._examples(dataset)
        # demanding a 50% gain on every metric is unsatisfiable here
        report = run_fold(
            examples,
            examples,
            ThresholdVector(theta=(0.0, 0.5, 0.5, 0.5, 0.5, 0.5)),
            grid_step=0.5,
        )
        assert report.gamma is None
        assert report.train_report.xi == (0.0,) * 6
        assert report.test_report.xi == (0.0,) * 6
        assert report.train_fallbacks == len(examples)

    def test_trained_fold_respects_thresholds(self):
        dataset = small_dataset(bid_ctr_anticorrelation=0.8)
        examples = self._examples(dataset)
        thresholds = ThresholdVector(theta=(-0.3, 0, 0, 0, 0, 0))
        report = run_fold(examples, examples, thresholds, grid_step=0.1)
        assert report.gamma is not None
        assert report.train_report.xi[0] >= -0.3
        assert all(v >= 0.0 for v in report.train_report.xi[1:])

    def test_fold_report_matches_live_replay(self):
        # replay the whole selection pipeline request by request and
        # recompute the change report independently of the cached matrices
        from slateopt import baseline_selection, select_optimal, xi_changes

        dataset = small_dataset(bid_ctr_anticorrelation=0.8)
        builder = ExampleBuilder(dataset)
        examples = builder.examples()
        report = run_fold(
            examples, examples, ThresholdVector(theta=(-0.5, 0, 0, 0, 0, 0)),
            grid_step=0.25,
        )
        assert report.gamma is not None
        optimized = []
        baseline = []
        for request in dataset.requests:
            ctx = builder.context(request)
            optimized.append(
                select_optimal(request, ctx, builder.relation, report.gamma)
            )
            baseline.append(baseline_selection(request, ctx))
        replayed = xi_changes(optimized, baseline)
        np.testing.assert_allclose(
            replayed.xi, report.train_report.xi, rtol=0, atol=1e-12
        )
        assert replayed.undefined == report.train_report.undefined


class TestCrossValidate:
    def test_ten_requests_ten_folds(self):
        dataset = small_dataset(n_requests=10)
        result = cross_validate(
            dataset, ThresholdVector(theta=(-0.5, 0, 0, 0, 0, 0)), folds=10, seed=3,
            grid_step=0.5,
        )
        assert len(result.folds) == 10
        # with n == folds each fold holds exactly one test request
        for fold in result.folds:
            assert fold.test_report.n == 1

    def test_summary_mean_matches_folds(self):
        dataset = small_dataset()
        result = cross_validate(
            dataset, ThresholdVector(theta=(-0.5, 0, 0, 0, 0, 0)), folds=5, seed=3,
            grid_step=0.5,
        )
        train_xi = np.array([f.train_report.xi for f in result.folds])
        np.testing.assert_allclose(
            train_xi.mean(axis=0), result.train_xi_mean, atol=1e-12
        )
        np.testing.assert_allclose(
            train_xi.std(axis=0), result.train_xi_std, atol=1e-12
        )

    def test_csv_deterministic_and_shaped(self):
        dataset = small_dataset()
        kwargs = dict(
            thresholds=ThresholdVector(theta=(-0.5, 0, 0, 0, 0, 0)),
            folds=5,
            seed=8,
            grid_step=0.5,
        )
        a = cross_validate(dataset, **kwargs).to_csv()
        b = cross_validate(dataset, **kwargs).to_csv()
        assert a == b
        lines = a.strip().split("\n")
        assert len(lines) == 1 + 5 + 2  # header, folds, Mean, Std
        assert lines[-2].startswith("Mean,")
        assert lines[-1].startswith("Std,")

    def test_too_few_requests(self):
        dataset = small_dataset(n_requests=6)
        with pytest.raises(TooFewRequests):
            cross_validate(dataset, ThresholdVector(theta=(0.0,) * 6), folds=10)


class TestSweep:
    def test_values_must_be_descending_nonpositive(self):
        dataset = small_dataset()
        from slateopt import ValidationError

        with pytest.raises(ValidationError):
            sweep_theta1(dataset, [0.1, 0.0])
        with pytest.raises(ValidationError):
            sweep_theta1(dataset, [-0.2, -0.1])

    def test_sweep_points_and_monotonicity(self):
        dataset = small_dataset(bid_ctr_anticorrelation=0.8)
        points = sweep_theta1(
            dataset, [0.0, -0.05, -0.15, -0.3, -0.6, -1.0], grid_step=0.25, seed=1
        )
        assert [p.theta1 for p in points] == [0.0, -0.05, -0.15, -0.3, -0.6, -1.0]
        objectives = [p.objective for p in points if p.objective is not None]
        assert all(b >= a - 1e-12 for a, b in zip(objectives, objectives[1:]))


class TestScenarioStats:
    def test_hand_built_fixture(self):
        dataset, expected = scenario_fixture()
        counts = scenario_stats(dataset)
        assert counts.n_requests == expected["n_requests"]
        assert counts.multi_slot_requests == expected["multi_slot_requests"]
        assert counts.same_landing == expected["same_landing"]
        assert counts.same_company == expected["same_company"]
        assert counts.competitive == expected["competitive"]

    def test_single_slot_only_counts_nothing(self):
        dataset, _ = scenario_fixture()
        singles = Dataset(
            webpages=dataset.webpages,
            ads=dataset.ads,
            requests=[r for r in dataset.requests if len(r.per_slot_bids) == 1],
            topic_labels=dataset.topic_labels,
            relation=dataset.relation,
        )
        counts = scenario_stats(singles)
        assert counts.same_landing == counts.same_company == counts.competitive == 0

    def test_counts_bounded_by_multislot(self):
        dataset = small_dataset()
        counts = scenario_stats(dataset)
        for value in (counts.same_landing, counts.same_company, counts.competitive):
            assert 0 <= value <= counts.multi_slot_requests


class TestHistograms:
    def test_counts_conserved(self):
        dataset = small_dataset()
        histograms = metric_histograms(dataset, bins=10)
        pair_count = len(
            {
                (r.webpage_id, b.ad_id)
                for r in dataset.requests
                for bids in r.per_slot_bids
                for b in bids
            }
        )
        for counts, edges in histograms.values():
            assert counts.sum() == pair_count
            assert len(edges) == 11

    def test_identical_scores_single_bin(self):
        dataset, _ = scenario_fixture()  # memorability 0.8 everywhere
        histograms = metric_histograms(dataset, bins=10)
        counts, _ = histograms["memorability"]
        assert (counts > 0).sum() == 1

    def test_uniform_scores_spread_within_3_sigma(self, rng):
        n = 10_000
        bins = 10
        values = rng.uniform(0.0, 1.0, size=n)
        counts, _ = np.histogram(values, bins=bins, range=(0.0, 1.0))
        sigma = np.sqrt(n * (1 / bins) * (1 - 1 / bins))
        assert (np.abs(counts - n / bins) <= 3 * sigma).all()

    def test_csv_rendering(self):
        dataset = small_dataset()
        text = histograms_to_csv(metric_histograms(dataset, bins=5))
        lines = text.strip().split("\n")
        assert lines[0] == "metric,bin_start,bin_end,count"
        assert len(lines) == 1 + 3 * 5


class TestConfig:
    def test_defaults(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("")
        config = load_config(path)
        assert config == RunConfig()

    def test_overrides_and_synth_section(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(
            "thresholds: [-0.05, 0, 0, 0, 0, 0]\n"
            "grid_step: 0.1\n"
            "seed: 42\n"
            "synth:\n  n_webpages: 3\n  with_images: false\n"
        )
        config = load_config(path)
        assert config.thresholds == (-0.05, 0, 0, 0, 0, 0)
        assert config.grid_step == 0.1
        assert config.synth.n_webpages == 3
        assert not config.synth.with_images

    def test_unknown_key_rejected(self, tmp_path):
        from slateopt import ValidationError

        path = tmp_path / "cfg.yaml"
        path.write_text("grid_steps: 0.1\n")
        with pytest.raises(ValidationError):
            load_config(path)

    def test_bad_threshold_sign_rejected(self, tmp_path):
        from slateopt import ValidationError

        path = tmp_path / "cfg.yaml"
        path.write_text("thresholds: [0.05, 0, 0, 0, 0, 0]\n")
        with pytest.raises(ValidationError):
            load_config(path)
