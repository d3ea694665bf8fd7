"""Text processing: tokenization, TF-IDF, cosine similarity, k-means topic
clustering, and the competitive-advertiser relation.

Tokenization is deliberately simple and fully reproducible: lowercase,
split on any non-alphanumeric character, drop tokens shorter than two
characters, drop the 50 stopwords shipped in ``resources/stopwords.txt``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources as _importlib_resources
from typing import Hashable, Iterable, Mapping, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import EmptyCorpus, TooFewDistinctVectors, UnclusteredAd
from .model import Ad

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

RESERVED_EMPTY_TOPIC = -1  # ads with no usable landing text never induce competition


def _load_stopwords() -> frozenset[str]:
    text = (
        _importlib_resources.files("slateopt.resources")
        .joinpath("stopwords.txt")
        .read_text(encoding="utf-8")
    )
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


STOPWORDS = _load_stopwords()


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop short tokens and stopwords."""
    return [
        t
        for t in _TOKEN_RE.findall(text.lower())
        if len(t) >= 2 and t not in STOPWORDS
    ]


@dataclass(frozen=True)
class Vocabulary:
    """Term dictionary with smoothed idf weights.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1, with N the corpus size. Term
    indices follow first appearance in the corpus.
    """

    terms: Mapping[str, tuple[int, float]]
    document_count: int

    def __len__(self) -> int:
        return len(self.terms)

    def index(self, term: str) -> Optional[int]:
        entry = self.terms.get(term)
        return None if entry is None else entry[0]

    def idf(self, term: str) -> Optional[float]:
        entry = self.terms.get(term)
        return None if entry is None else entry[1]


def build_vocabulary(corpus: Sequence[Sequence[str]]) -> Vocabulary:
    """Build a vocabulary over tokenized documents."""
    if not corpus:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    order: dict[str, int] = {}
    df: dict[str, int] = {}
    for tokens in corpus:
        seen = set()
        for t in tokens:
            if t not in order:
                order[t] = len(order)
            if t not in seen:
                seen.add(t)
                df[t] = df.get(t, 0) + 1
    n = len(corpus)
    terms = {
        t: (idx, math.log((1 + n) / (1 + df[t])) + 1.0) for t, idx in order.items()
    }
    return Vocabulary(terms=terms, document_count=n)


@dataclass(frozen=True)
class SparseVector:
    """Sorted (index, weight) pairs without explicit zeros."""

    indices: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        vals = tuple(float(v) for v in self.values)
        if len(idx) != len(vals):
            raise ValueError("indices and values must have equal length")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing")
        if any(not math.isfinite(v) for v in vals):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @property
    def is_zero(self) -> bool:
        return not self.indices

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.values))

    def dot(self, other: "SparseVector") -> float:
        total = 0.0
        i = j = 0
        a_idx, a_val = self.indices, self.values
        b_idx, b_val = other.indices, other.values
        while i < len(a_idx) and j < len(b_idx):
            if a_idx[i] == b_idx[j]:
                total += a_val[i] * b_val[j]
                i += 1
                j += 1
            elif a_idx[i] < b_idx[j]:
                i += 1
            else:
                j += 1
        return total

    def to_dense(self, size: int) -> np.ndarray:
        dense = np.zeros(size, dtype=np.float64)
        if self.indices:
            dense[list(self.indices)] = self.values
        return dense


_ZERO_VECTOR = SparseVector(indices=(), values=())


def tfidf_vector(tokens: Iterable[str], vocab: Vocabulary) -> SparseVector:
    """L2-normalized tf-idf vector; out-of-vocabulary tokens are ignored."""
    counts: dict[int, float] = {}
    for t in tokens:
        entry = vocab.terms.get(t)
        if entry is None:
            continue
        idx, idf = entry
        counts[idx] = counts.get(idx, 0.0) + idf
    if not counts:
        return _ZERO_VECTOR
    indices = tuple(sorted(counts))
    weights = [counts[i] for i in indices]
    norm = math.sqrt(sum(w * w for w in weights))
    return SparseVector(indices=indices, values=tuple(w / norm for w in weights))


def cosine_similarity(u: SparseVector, v: SparseVector) -> float:
    """Cosine of two non-negative vectors, clamped to [0, 1]; 0 if either is zero."""
    nu, nv = u.norm(), v.norm()
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return min(1.0, max(0.0, u.dot(v) / (nu * nv)))


@dataclass(frozen=True)
class TopicAssignment:
    """Topic label per clustered item plus the cluster centroids.

    Labels are cluster indices 0..k-1, or RESERVED_EMPTY_TOPIC for items
    that carried no usable text.
    """

    topics: Mapping[Hashable, int]
    centroids: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.centroids, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "centroids", arr)

    def topic_of(self, item_id: Hashable) -> Optional[int]:
        return self.topics.get(item_id)


def _lloyd(
    dense: np.ndarray, k: int, rng: np.random.Generator, max_iters: int
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Lloyd iterations with k-means++ seeding on row vectors.

    Nearest-centroid ties break toward the lowest centroid index; empty
    clusters keep their previous centroid. Returns (labels, centroids,
    per-iteration objective values).
    """
    n = dense.shape[0]
    # k-means++ seeding
    centers = np.empty((k, dense.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = dense[first]
    d2 = np.sum((dense - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            choice = int(rng.integers(n))
        else:
            choice = int(rng.choice(n, p=d2 / total))
        centers[c] = dense[choice]
        d2 = np.minimum(d2, np.sum((dense - centers[c]) ** 2, axis=1))

    labels = np.full(n, -1, dtype=np.int64)
    objective_path: list[float] = []
    for _ in range(max_iters):
        dists = (
            np.sum(dense * dense, axis=1)[:, None]
            - 2.0 * dense @ centers.T
            + np.sum(centers * centers, axis=1)[None, :]
        )
        new_labels = np.argmin(dists, axis=1)  # argmin takes the lowest index on ties
        objective_path.append(float(np.sum((dense - centers[new_labels]) ** 2)))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            members = dense[labels == c]
            if len(members):
                centers[c] = members.mean(axis=0)
    return labels, centers, objective_path


def kmeans_cluster(
    vectors: Sequence[SparseVector],
    k: int,
    seed: int,
    max_iters: int = 100,
    ids: Optional[Sequence[Hashable]] = None,
) -> TopicAssignment:
    """Cluster L2-normalized vectors into k topics with seeded k-means++.

    Deterministic for fixed (vectors, k, seed). ``ids`` keys the resulting
    assignment; positional indices are used when omitted.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not vectors:
        raise TooFewDistinctVectors("no vectors to cluster")
    if ids is None:
        ids = list(range(len(vectors)))
    if len(ids) != len(vectors):
        raise ValueError("ids and vectors must have equal length")
    distinct = {(v.indices, v.values) for v in vectors}
    if k > len(distinct):
        raise TooFewDistinctVectors(
            f"k={k} exceeds the {len(distinct)} distinct vectors"
        )
    size = max((v.indices[-1] + 1 for v in vectors if v.indices), default=0)
    dense = np.stack([v.to_dense(size) for v in vectors]) if size else np.zeros(
        (len(vectors), 1)
    )
    labels, centers, _ = _lloyd(dense, k, np.random.default_rng(seed), max_iters)
    return TopicAssignment(
        topics={i: int(t) for i, t in zip(ids, labels)}, centroids=centers
    )


@dataclass(frozen=True)
class CompetitorRelation:
    """Symmetric, irreflexive set of competing advertiser pairs."""

    pairs: frozenset[tuple[str, str]]

    def __post_init__(self):
        normalized = set()
        for p, q in self.pairs:
            if p == q:
                raise ValueError("competitor relation must be irreflexive")
            normalized.add((p, q) if p <= q else (q, p))
        object.__setattr__(self, "pairs", frozenset(normalized))

    def competitive(self, p: str, q: str) -> bool:
        if p == q:
            return False
        return ((p, q) if p <= q else (q, p)) in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)


EMPTY_RELATION = CompetitorRelation(pairs=frozenset())


def build_competitor_relation(
    ads: Sequence[Ad], topics: TopicAssignment | Mapping[Hashable, int]
) -> CompetitorRelation:
    """Advertisers compete when some of their ads share a topic and they do
    not share a company domain."""
    labels = topics.topics if isinstance(topics, TopicAssignment) else topics
    domains: dict[str, set[str]] = {}
    topic_advertisers: dict[int, set[str]] = {}
    for ad in ads:
        topic = labels.get(ad.id)
        if topic is None:
            raise UnclusteredAd(f"ad {ad.id!r} has no topic assignment")
        domains.setdefault(ad.advertiser_id, set()).add(ad.company_domain)
        if topic != RESERVED_EMPTY_TOPIC:
            topic_advertisers.setdefault(int(topic), set()).add(ad.advertiser_id)
    pairs = set()
    for members in topic_advertisers.values():
        ordered = sorted(members)
        for i, p in enumerate(ordered):
            for q in ordered[i + 1 :]:
                if domains[p].isdisjoint(domains[q]):
                    pairs.add((p, q))
    return CompetitorRelation(pairs=frozenset(pairs))


class TopicClusterer(BaseEstimator):
    """Clusters ads into topics from their landing-page text.

    Ads whose landing text tokenizes to nothing get the reserved topic -1
    and never induce competition.

    Parameters
    ----------
    n_topics : number of clusters (24 matches the coarse content taxonomy
        commonly used for web inventory).
    seed : seed for the k-means++ initialization.
    max_iters : Lloyd iteration cap.
    """

    def __init__(self, n_topics: int = 24, seed: int = 0, max_iters: int = 100):
        self.n_topics = n_topics
        self.seed = seed
        self.max_iters = max_iters

    def fit(self, X: Sequence[Ad], y=None) -> "TopicClusterer":
        ads = list(X)
        token_lists = [tokenize(ad.landing_text) for ad in ads]
        non_empty = [(ad, toks) for ad, toks in zip(ads, token_lists) if toks]
        if not non_empty:
            raise EmptyCorpus("no ad has usable landing text")
        self.vocabulary_ = build_vocabulary([toks for _, toks in non_empty])
        vectors = [tfidf_vector(toks, self.vocabulary_) for _, toks in non_empty]
        assignment = kmeans_cluster(
            vectors,
            k=self.n_topics,
            seed=self.seed,
            max_iters=self.max_iters,
            ids=[ad.id for ad, _ in non_empty],
        )
        labels = dict(assignment.topics)
        for ad, toks in zip(ads, token_lists):
            if not toks:
                labels[ad.id] = RESERVED_EMPTY_TOPIC
        self.assignment_ = TopicAssignment(topics=labels, centroids=assignment.centroids)
        return self

    def _check_fitted(self):
        if not hasattr(self, "assignment_"):
            raise NotFittedError("TopicClusterer is not fitted")

    def transform(self, texts: Sequence[str]) -> list[SparseVector]:
        self._check_fitted()
        return [tfidf_vector(tokenize(t), self.vocabulary_) for t in texts]

    def predict(self, X: Sequence[Ad]) -> list[int]:
        """Topic labels for already-fitted ads."""
        self._check_fitted()
        out = []
        for ad in X:
            topic = self.assignment_.topic_of(ad.id)
            if topic is None:
                raise UnclusteredAd(f"ad {ad.id!r} was not part of fit()")
            out.append(topic)
        return out

    def competitor_relation(self, ads: Sequence[Ad]) -> CompetitorRelation:
        self._check_fitted()
        return build_competitor_relation(ads, self.assignment_)
