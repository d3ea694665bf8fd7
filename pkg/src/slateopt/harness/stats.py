"""Dataset-level statistics: multi-slot placement scenarios and metric
distribution histograms.

Scenario flags are computed over the baseline (highest-bid) selections of
multi-slot requests and are not mutually exclusive:

  same_landing  two slots show ads with the same landing page
  same_company  two slots show ads of the same company (implied by
                same_landing)
  competitive   two slots show ads of competing advertisers
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..metrics import DEFAULT_NEUTRAL_SALIENCY
from ..saliency import slot_saliency
from ..selection import baseline_row
from ..text import EMPTY_RELATION, CompetitorRelation, cosine_similarity, tfidf_vector, tokenize
from .dataset import Dataset
from .examples import dataset_vocabulary


@dataclass(frozen=True)
class ScenarioCounts:
    n_requests: int
    multi_slot_requests: int
    same_landing: int
    same_company: int
    competitive: int


def scenario_stats(
    dataset: Dataset, relation: Optional[CompetitorRelation] = None
) -> ScenarioCounts:
    """Count requests whose baseline placements hit each scenario.

    Landing-page identity is approximated by equal (company domain,
    landing text); single-slot requests can hit no scenario.
    """
    if relation is None:
        relation = dataset.relation if dataset.relation is not None else EMPTY_RELATION
    same_landing = same_company = competitive = multi = 0
    for request in dataset.requests:
        if len(request.per_slot_bids) < 2:
            continue
        multi += 1
        ads = [dataset.ads[p.ad_id] for p in baseline_row(request).picks]
        hit_landing = hit_company = hit_competitive = False
        for i in range(len(ads)):
            for j in range(i + 1, len(ads)):
                a, b = ads[i], ads[j]
                if a.company_domain == b.company_domain:
                    hit_company = True
                    if a.landing_text == b.landing_text:
                        hit_landing = True
                if relation.competitive(a.advertiser_id, b.advertiser_id):
                    hit_competitive = True
        same_landing += hit_landing
        same_company += hit_company
        competitive += hit_competitive
    return ScenarioCounts(
        n_requests=len(dataset.requests),
        multi_slot_requests=multi,
        same_landing=same_landing,
        same_company=same_company,
        competitive=competitive,
    )


def metric_histograms(
    dataset: Dataset,
    bins: int = 10,
    mbd_passes: int = 3,
    neutral_saliency: float = DEFAULT_NEUTRAL_SALIENCY,
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Histograms of memorability, relevance and saliency over all distinct
    (webpage, candidate ad) pairs, binned uniformly on [0, 1].

    Saliency uses the first slot (in webpage slot order) where the ad bids;
    pairs without both images score the neutral constant. Returns
    ``{metric: (counts, bin_edges)}``.
    """
    if bins < 2:
        raise ValueError("bins must be at least 2")
    vocab = dataset_vocabulary(dataset)
    page_vectors = {
        page.id: tfidf_vector(tokenize(page.text), vocab)
        for page in dataset.webpages.values()
    }
    ad_vectors = {
        ad.id: tfidf_vector(tokenize(ad.landing_text), vocab)
        for ad in dataset.ads.values()
    }
    first_slot: dict[tuple[str, str], int] = {}
    for request in dataset.requests:
        for slot_index, bids in enumerate(request.per_slot_bids):
            for entry in bids:
                key = (request.webpage_id, entry.ad_id)
                if key not in first_slot or slot_index < first_slot[key]:
                    first_slot[key] = slot_index

    memorability, relevance, saliency = [], [], []
    for (webpage_id, ad_id), slot_index in first_slot.items():
        page = dataset.webpages[webpage_id]
        ad = dataset.ads[ad_id]
        memorability.append(ad.memorability)
        relevance.append(cosine_similarity(page_vectors[webpage_id], ad_vectors[ad_id]))
        if page.snapshot is None or ad.image is None:
            saliency.append(neutral_saliency)
        else:
            saliency.append(
                slot_saliency(
                    page.snapshot, ad.image, page.slots[slot_index].rect, passes=mbd_passes
                )
            )
    out = {}
    for name, values in (
        ("memorability", memorability),
        ("relevance", relevance),
        ("saliency", saliency),
    ):
        counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
        out[name] = (counts, edges)
    return out


def histograms_to_csv(histograms: dict[str, tuple[np.ndarray, np.ndarray]]) -> str:
    lines = ["metric,bin_start,bin_end,count"]
    for name, (counts, edges) in histograms.items():
        for i, count in enumerate(counts):
            lines.append(f"{name},{edges[i]!r},{edges[i + 1]!r},{int(count)}")
    return "\n".join(lines) + "\n"
