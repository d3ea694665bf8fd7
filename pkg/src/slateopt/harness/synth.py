"""Synthetic dataset generation.

Auctions are simulated by drawing i.i.d. log-normal bids per slot and
matching them to the slot's candidate ads; the candidate that receives the
strictly highest bid plays the role of the originally displayed ad, so the
traditional highest-bid rule recovers it as the ground truth. A
``bid_ctr_anticorrelation`` knob rank-matches bids against ctr (highest
bid to lowest ctr) with the given probability per slot, which creates
head-room for selection strategies that trade a little revenue for
clickability. Candidates are drawn shape-compatible with their slot.

Everything is driven by one seeded generator, so a (spec, seed) pair
always produces the identical dataset.
"""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from ..errors import InvalidSpec
from ..model import Ad, AdSlot, AuctionRequest, BidEntry, GrayImage, Rect, Webpage
from ..text import build_competitor_relation
from .dataset import Dataset


@dataclass(frozen=True)
class SynthSpec:
    """Counts, distributions and correlation knobs for synthetic data."""

    n_webpages: int = 40
    slots_per_page: int = 2
    n_ads: int = 60
    n_advertisers: int = 30
    n_companies: int = 24
    bidders_per_slot: int = 5
    n_requests: int = 200
    n_topics: int = 6
    bid_mu: float = 0.0
    bid_sigma: float = 1.0
    ctr_alpha: float = 2.0
    ctr_beta: float = 5.0
    memorability_alpha: float = 6.0
    memorability_beta: float = 2.0
    bid_ctr_anticorrelation: float = 0.0
    ctr_saliency_correlation: float = 0.0
    with_images: bool = True
    snapshot_height: int = 48
    snapshot_width: int = 48
    slot_height: int = 12
    slot_width: int = 18

    def __post_init__(self):
        counts = {
            "n_webpages": self.n_webpages,
            "slots_per_page": self.slots_per_page,
            "n_ads": self.n_ads,
            "n_advertisers": self.n_advertisers,
            "n_companies": self.n_companies,
            "bidders_per_slot": self.bidders_per_slot,
            "n_requests": self.n_requests,
            "n_topics": self.n_topics,
        }
        for name, value in counts.items():
            if value < 1:
                raise InvalidSpec(f"{name} must be at least 1, got {value}")
        if self.n_advertisers > self.n_ads:
            raise InvalidSpec("n_advertisers cannot exceed n_ads")
        if self.n_companies > self.n_advertisers:
            raise InvalidSpec("n_companies cannot exceed n_advertisers")
        if not 0.0 <= self.bid_ctr_anticorrelation <= 1.0:
            raise InvalidSpec("bid_ctr_anticorrelation must lie in [0, 1]")
        if not 0.0 <= self.ctr_saliency_correlation <= 1.0:
            raise InvalidSpec("ctr_saliency_correlation must lie in [0, 1]")
        for name, value in (
            ("ctr_alpha", self.ctr_alpha),
            ("ctr_beta", self.ctr_beta),
            ("memorability_alpha", self.memorability_alpha),
            ("memorability_beta", self.memorability_beta),
            ("bid_sigma", self.bid_sigma),
        ):
            if value <= 0.0:
                raise InvalidSpec(f"{name} must be positive")
        if self.with_images:
            if 2 + self.slot_width > self.snapshot_width - 6:
                raise InvalidSpec(
                    "slot width does not fit the snapshot next to the anchor block"
                )
            if 2 + self.slots_per_page * (self.slot_height + 4) > self.snapshot_height:
                raise InvalidSpec(
                    f"{self.slots_per_page} slots of height {self.slot_height} "
                    f"do not fit a {self.snapshot_height}px snapshot"
                )

    @property
    def shape_classes(self) -> tuple[tuple[int, int], ...]:
        """(height, width) creative shapes; slots cycle through them."""
        a = (self.slot_height, self.slot_width)
        b = (self.slot_width, self.slot_height)
        return (a,) if a == b else (a, b)


def _quantized_image(
    rng: np.random.Generator, height: int, width: int, contrast: float
) -> GrayImage:
    """Ad creative on the 8-bit grid: brightness (and hence the barrier to
    the mid-gray page) grows with ``contrast`` in [0, 1]."""
    level = 170 + int(round(contrast * 85))
    levels = level + rng.integers(-3, 4, size=(height, width))
    return GrayImage.from_array(np.clip(levels, 0, 255).astype(np.float64) / 255.0)


def _snapshot(rng: np.random.Generator, height: int, width: int) -> GrayImage:
    """Page snapshot: soft gradient plus a dark anchor block near the top
    right. The anchor pins the min-max normalization of the distance map,
    so ad saliency scales with the ad's own contrast."""
    gradient = np.linspace(80, 170, height)[:, None]
    levels = np.clip(np.rint(gradient + rng.integers(-10, 11, size=(height, width))), 0, 255)
    levels[2:6, width - 6 : width - 2] = 0.0
    return GrayImage.from_array(levels / 255.0)


def generate_synthetic(spec: SynthSpec, seed: int) -> Dataset:
    """Deterministically generate a dataset from (spec, seed)."""
    rng = np.random.default_rng(seed)
    shapes = spec.shape_classes

    topic_pools = [
        [f"t{t}word{j}" for j in range(24)] for t in range(spec.n_topics)
    ]
    shared_pool = [f"shared{j}" for j in range(12)]

    companies = [f"company{c}.example.com" for c in range(spec.n_companies)]
    advertiser_company = {
        f"adv{a}": companies[a % spec.n_companies] for a in range(spec.n_advertisers)
    }
    advertiser_ids = sorted(advertiser_company)

    ctrs = rng.beta(spec.ctr_alpha, spec.ctr_beta, size=spec.n_ads)
    memorabilities = rng.beta(
        spec.memorability_alpha, spec.memorability_beta, size=spec.n_ads
    )
    ctr_ranks = np.argsort(np.argsort(ctrs)) / max(1, spec.n_ads - 1)

    ads: dict[str, Ad] = {}
    topic_labels: dict[str, int] = {}
    ad_shapes: dict[str, tuple[int, int]] = {}
    for i in range(spec.n_ads):
        advertiser = advertiser_ids[i % spec.n_advertisers]
        # consecutive ads share a topic across shape classes, so competitive
        # pairs can actually co-occur within one multi-slot request
        topic = (i // len(shapes)) % spec.n_topics
        shape = shapes[i % len(shapes)]
        words = list(rng.choice(topic_pools[topic], size=12, replace=True))
        words += list(rng.choice(shared_pool, size=2, replace=True))
        image = None
        if spec.with_images:
            rho = spec.ctr_saliency_correlation
            contrast = (1.0 - rho) * float(rng.uniform()) + rho * float(ctr_ranks[i])
            image = _quantized_image(rng, shape[0], shape[1], contrast)
        ad = Ad(
            id=f"ad{i}",
            advertiser_id=advertiser,
            company_domain=advertiser_company[advertiser],
            landing_text=" ".join(words),
            memorability=float(memorabilities[i]),
            ctr=float(ctrs[i]),
            image=image,
        )
        ads[ad.id] = ad
        topic_labels[ad.id] = topic
        ad_shapes[ad.id] = shape

    by_shape: dict[tuple[int, int], list[str]] = {s: [] for s in shapes}
    for ad_id, shape in ad_shapes.items():
        by_shape[shape].append(ad_id)
    for shape, pool in by_shape.items():
        distinct_advertisers = {ads[a].advertiser_id for a in pool}
        if len(distinct_advertisers) < spec.bidders_per_slot:
            raise InvalidSpec(
                f"shape {shape} has {len(distinct_advertisers)} advertisers, "
                f"need {spec.bidders_per_slot} bidders per slot"
            )

    webpages: dict[str, Webpage] = {}
    for w in range(spec.n_webpages):
        page_topic = w % spec.n_topics
        words = list(rng.choice(topic_pools[page_topic], size=20, replace=True))
        words += list(rng.choice(shared_pool, size=6, replace=True))
        slots = []
        y = 2
        for s in range(spec.slots_per_page):
            shape = shapes[s % len(shapes)]
            slots.append(
                AdSlot(id=f"w{w}s{s}", rect=Rect(x=2, y=y, w=shape[1], h=shape[0]))
            )
            y += shape[0] + 4
        snapshot = None
        if spec.with_images:
            snapshot = _snapshot(rng, spec.snapshot_height, spec.snapshot_width)
        webpages[f"w{w}"] = Webpage(
            id=f"w{w}",
            url=f"https://pub.example.com/w{w}",
            title=" ".join(words[:4]),
            keywords=" ".join(words[4:8]),
            description=" ".join(words[8:12]),
            content=" ".join(words[12:]),
            slots=tuple(slots),
            snapshot=snapshot,
        )

    requests: list[AuctionRequest] = []
    for r in range(spec.n_requests):
        page = webpages[f"w{r % spec.n_webpages}"]
        per_slot = []
        for slot in page.slots:
            shape = (slot.rect.h, slot.rect.w)
            pool = by_shape[shape]
            candidates: list[str] = []
            seen_advertisers: set[str] = set()
            for ad_id in rng.permutation(pool):
                advertiser = ads[ad_id].advertiser_id
                if advertiser in seen_advertisers:
                    continue
                seen_advertisers.add(advertiser)
                candidates.append(str(ad_id))
                if len(candidates) == spec.bidders_per_slot:
                    break
            bids = rng.lognormal(spec.bid_mu, spec.bid_sigma, size=len(candidates))
            top = float(bids.max())
            if np.sum(bids == top) > 1:  # enforce a strict ground-truth winner
                bids[int(np.argmax(bids))] = top * (1.0 + 1e-9)
            if rng.random() < spec.bid_ctr_anticorrelation:
                # highest bid goes to the lowest-ctr candidate
                order_by_ctr = sorted(
                    range(len(candidates)), key=lambda j: ads[candidates[j]].ctr
                )
                descending = np.sort(bids)[::-1]
                assigned = np.empty(len(candidates))
                for rank, j in enumerate(order_by_ctr):
                    assigned[j] = descending[rank]
                bids = assigned
            else:
                rng.shuffle(bids)
            per_slot.append(
                tuple(
                    BidEntry(
                        ad_id=a,
                        advertiser_id=ads[a].advertiser_id,
                        bid=float(b),
                        value=float(b),
                    )
                    for a, b in zip(candidates, bids)
                )
            )
        requests.append(
            AuctionRequest(
                id=f"req{r}", webpage_id=page.id, per_slot_bids=tuple(per_slot)
            )
        )

    relation = build_competitor_relation(list(ads.values()), topic_labels)
    return Dataset(
        webpages=webpages,
        ads=ads,
        requests=requests,
        topic_labels=topic_labels,
        relation=relation,
        provenance=f"synthetic(seed={seed})",
    )
