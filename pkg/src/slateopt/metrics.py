"""Per-request metric computation.

A ``MetricContext`` holds one six-component contribution vector per
(slot, advertiser): GSP payment, utility (value - payment), memorability,
ctr, contextual relevance, and slot saliency. A candidate row's raw metric
vector is the slot-wise sum of its picks' contributions, every slot
weighted equally. Normalization is min-max over the full joint-assignment
space, which is computed separably per slot rather than by enumeration.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import MissingMetricEntry, UnknownAdvertiser
from .model import (
    Ad,
    AuctionRequest,
    BidEntry,
    CandidateRow,
    MetricVector,
    N_METRICS,
    Webpage,
)
from .saliency import slot_saliency
from .text import SparseVector, cosine_similarity

DEFAULT_NEUTRAL_SALIENCY = 0.5


def gsp_payment(
    slot_bids: Sequence[BidEntry], selected: str, reserve: float = 0.0
) -> float:
    """Potential payment of an advertiser under the slot's GSP ordering.

    Bids sort descending (ties broken by advertiser id ascending); the
    bidder at position p pays the bid at position p+1, the last one pays
    the reserve.
    """
    ordered = sorted(slot_bids, key=lambda b: (-b.bid, b.advertiser_id))
    for pos, entry in enumerate(ordered):
        if entry.advertiser_id == selected:
            if pos + 1 < len(ordered):
                return ordered[pos + 1].bid
            return reserve
    raise UnknownAdvertiser(f"advertiser {selected!r} does not bid in this slot")


@dataclass(frozen=True)
class Extrema:
    """Componentwise (min, max) of the raw metric columns over all joint rows."""

    mins: np.ndarray = field(repr=False)
    maxs: np.ndarray = field(repr=False)

    def __post_init__(self):
        mins = np.ascontiguousarray(np.asarray(self.mins, dtype=np.float64))
        maxs = np.ascontiguousarray(np.asarray(self.maxs, dtype=np.float64))
        mins.flags.writeable = False
        maxs.flags.writeable = False
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)


@dataclass(frozen=True)
class MetricContext:
    """Precomputed per-slot metric contributions for one request.

    ``slot_entries[s][advertiser_id]`` is the 6-vector a pick of that
    advertiser adds to a row's raw metrics. Immutable once built.
    """

    slot_entries: tuple[Mapping[str, np.ndarray], ...]
    reserve_price: float = 0.0
    neutral_saliency_slots: int = 0  # (slot, ad) pairs scored without images

    def entry(self, slot_index: int, advertiser_id: str) -> np.ndarray:
        table = self.slot_entries[slot_index]
        entry = table.get(advertiser_id)
        if entry is None:
            raise MissingMetricEntry(
                f"no metric entry for advertiser {advertiser_id!r} in slot {slot_index}"
            )
        return entry


def build_metric_context(
    webpage: Webpage,
    request: AuctionRequest,
    ads_by_id: Mapping[str, Ad],
    webpage_vector: SparseVector,
    ad_vectors: Mapping[str, SparseVector],
    reserve_price: float = 0.0,
    mbd_passes: int = 3,
    neutral_saliency: float = DEFAULT_NEUTRAL_SALIENCY,
    saliency_cache: Optional[dict] = None,
) -> MetricContext:
    """Build the per-slot metric tables for one validated request.

    Saliency is evaluated per slot with only that slot's ad composited,
    other slots left as in the snapshot. Pairs without both images fall
    back to ``neutral_saliency``. ``saliency_cache`` (keyed by webpage,
    slot and ad id) lets callers share scores across requests.
    """
    tables = []
    neutral_used = 0
    for slot, bids in zip(webpage.slots, request.per_slot_bids):
        table: dict[str, np.ndarray] = {}
        for entry in bids:
            ad = ads_by_id.get(entry.ad_id)
            if ad is None:
                raise MissingMetricEntry(f"unknown ad {entry.ad_id!r} in request {request.id!r}")
            payment = gsp_payment(bids, entry.advertiser_id, reserve=reserve_price)
            relevance = cosine_similarity(webpage_vector, ad_vectors[ad.id])
            if webpage.snapshot is None or ad.image is None:
                sal = neutral_saliency
                neutral_used += 1
            else:
                key = (webpage.id, slot.id, ad.id, mbd_passes)
                if saliency_cache is not None and key in saliency_cache:
                    sal = saliency_cache[key]
                else:
                    sal = slot_saliency(
                        webpage.snapshot, ad.image, slot.rect, passes=mbd_passes
                    )
                    if saliency_cache is not None:
                        saliency_cache[key] = sal
            vec = np.array(
                [
                    payment,
                    entry.value - payment,
                    ad.memorability,
                    ad.ctr,
                    relevance,
                    sal,
                ],
                dtype=np.float64,
            )
            vec.flags.writeable = False
            table[entry.advertiser_id] = vec
        tables.append(table)
    return MetricContext(
        slot_entries=tuple(tables),
        reserve_price=reserve_price,
        neutral_saliency_slots=neutral_used,
    )


def compute_metric_vector(row: CandidateRow, ctx: MetricContext) -> MetricVector:
    """Raw six-metric vector of a row: slot-wise sum of its picks' entries."""
    total = np.zeros(N_METRICS, dtype=np.float64)
    for slot_index, pick in enumerate(row.picks):
        total += ctx.entry(slot_index, pick.advertiser_id)
    return MetricVector.from_array(total)


def column_extrema(request: AuctionRequest, ctx: MetricContext) -> Extrema:
    """Componentwise extrema of raw metrics over all joint assignments.

    Row metrics are sums of independent per-slot terms, so the minimum of
    a column over the full cartesian space is the sum of per-slot minima
    (and likewise for maxima): O(total bidders), no enumeration.
    """
    mins = np.zeros(N_METRICS, dtype=np.float64)
    maxs = np.zeros(N_METRICS, dtype=np.float64)
    for slot_index, bids in enumerate(request.per_slot_bids):
        entries = np.stack(
            [ctx.entry(slot_index, b.advertiser_id) for b in bids]
        )
        mins += entries.min(axis=0)
        maxs += entries.max(axis=0)
    return Extrema(mins=mins, maxs=maxs)


def normalize(x: MetricVector, extrema: Extrema) -> MetricVector:
    """Min-max normalize a raw vector; constant columns map to 0."""
    return MetricVector.from_array(normalize_array(x.as_array(), extrema))


def normalize_array(raw: np.ndarray, extrema: Extrema) -> np.ndarray:
    """Array form of :func:`normalize`; accepts (6,) or (n, 6) inputs."""
    span = extrema.maxs - extrema.mins
    safe = np.where(span > 0.0, span, 1.0)
    out = (raw - extrema.mins) / safe
    return np.where(span > 0.0, out, 0.0)
