"""Bridges a dataset to per-request metric contexts and training examples.

The builder caches everything that is shared across requests: the corpus
vocabulary, per-document tf-idf vectors, and per (webpage, slot, ad)
saliency scores. Examples are the replayable unit consumed by weight
search, cross-validation and prediction.
"""
from __future__ import annotations

from typing import Optional, Sequence

from ..metrics import DEFAULT_NEUTRAL_SALIENCY, MetricContext, build_metric_context
from ..model import AuctionRequest
from ..selection import DEFAULT_BUDGET, EnumerationBudget
from ..text import (
    CompetitorRelation,
    EMPTY_RELATION,
    SparseVector,
    Vocabulary,
    build_vocabulary,
    tfidf_vector,
    tokenize,
)
from ..weights import TrainingExample, build_training_example
from .dataset import Dataset


def dataset_vocabulary(dataset: Dataset) -> Vocabulary:
    """Vocabulary over all webpage texts and ad landing texts."""
    corpus = [tokenize(page.text) for page in dataset.webpages.values()]
    corpus += [tokenize(ad.landing_text) for ad in dataset.ads.values()]
    return build_vocabulary(corpus)


class ExampleBuilder:
    def __init__(
        self,
        dataset: Dataset,
        relation: Optional[CompetitorRelation] = None,
        reserve_price: float = 0.0,
        mbd_passes: int = 3,
        neutral_saliency: float = DEFAULT_NEUTRAL_SALIENCY,
        budget: EnumerationBudget = DEFAULT_BUDGET,
    ):
        self.dataset = dataset
        if relation is not None:
            self.relation = relation
        elif dataset.relation is not None:
            self.relation = dataset.relation
        else:
            self.relation = EMPTY_RELATION
        self.reserve_price = reserve_price
        self.mbd_passes = mbd_passes
        self.neutral_saliency = neutral_saliency
        self.budget = budget
        self.vocabulary = dataset_vocabulary(dataset)
        self._page_vectors: dict[str, SparseVector] = {}
        self._ad_vectors = {
            ad.id: tfidf_vector(tokenize(ad.landing_text), self.vocabulary)
            for ad in dataset.ads.values()
        }
        self._saliency_cache: dict = {}
        self._contexts: dict[str, MetricContext] = {}
        self._examples: dict[str, TrainingExample] = {}

    def _page_vector(self, webpage_id: str) -> SparseVector:
        vec = self._page_vectors.get(webpage_id)
        if vec is None:
            page = self.dataset.webpages[webpage_id]
            vec = tfidf_vector(tokenize(page.text), self.vocabulary)
            self._page_vectors[webpage_id] = vec
        return vec

    def context(self, request: AuctionRequest) -> MetricContext:
        ctx = self._contexts.get(request.id)
        if ctx is None:
            ctx = build_metric_context(
                webpage=self.dataset.webpage_of(request),
                request=request,
                ads_by_id=self.dataset.ads,
                webpage_vector=self._page_vector(request.webpage_id),
                ad_vectors=self._ad_vectors,
                reserve_price=self.reserve_price,
                mbd_passes=self.mbd_passes,
                neutral_saliency=self.neutral_saliency,
                saliency_cache=self._saliency_cache,
            )
            self._contexts[request.id] = ctx
        return ctx

    def example(self, request: AuctionRequest) -> TrainingExample:
        ex = self._examples.get(request.id)
        if ex is None:
            ex = build_training_example(
                request, self.context(request), self.relation, self.budget
            )
            self._examples[request.id] = ex
        return ex

    def examples(
        self, requests: Optional[Sequence[AuctionRequest]] = None
    ) -> list[TrainingExample]:
        if requests is None:
            requests = self.dataset.requests
        return [self.example(r) for r in requests]
