"""Shared builders for compact auction instances."""
from __future__ import annotations

import numpy as np
import pytest

from slateopt import (
    AdSlot,
    AuctionRequest,
    BidEntry,
    MetricContext,
    Rect,
    Webpage,
    gsp_payment,
)


def make_bid(advertiser: str, bid: float, value: float | None = None) -> BidEntry:
    return BidEntry(
        ad_id=f"{advertiser}_ad",
        advertiser_id=advertiser,
        bid=float(bid),
        value=float(bid if value is None else value),
    )


def make_request(bid_lists, request_id="r0", webpage_id="w0") -> AuctionRequest:
    """bid_lists: per slot, a list of (advertiser, bid) pairs or bare bids."""
    per_slot = []
    for bids in bid_lists:
        entries = []
        for j, b in enumerate(bids):
            if isinstance(b, tuple):
                advertiser, bid = b
            else:
                advertiser, bid = f"a{j}", b
            entries.append(make_bid(advertiser, bid))
        per_slot.append(tuple(entries))
    return AuctionRequest(
        id=request_id, webpage_id=webpage_id, per_slot_bids=tuple(per_slot)
    )


def make_webpage(n_slots: int, webpage_id="w0") -> Webpage:
    slots = tuple(
        AdSlot(id=f"s{i}", rect=Rect(x=0, y=8 * i, w=8, h=8)) for i in range(n_slots)
    )
    return Webpage(
        id=webpage_id,
        url="https://example.com",
        title="title",
        keywords="keywords",
        description="description",
        content="content",
        slots=slots,
    )


def context_for(
    request: AuctionRequest,
    rng: np.random.Generator | None = None,
    reserve: float = 0.0,
) -> MetricContext:
    """Realistic context: GSP payments and utilities from the bids, the four
    quality metrics drawn uniformly (or 0.5 without an rng)."""
    tables = []
    for bids in request.per_slot_bids:
        table = {}
        for entry in bids:
            payment = gsp_payment(bids, entry.advertiser_id, reserve=reserve)
            quality = rng.uniform(0.0, 1.0, size=4) if rng is not None else np.full(4, 0.5)
            vec = np.array(
                [payment, entry.value - payment, *quality], dtype=np.float64
            )
            vec.flags.writeable = False
            table[entry.advertiser_id] = vec
        tables.append(table)
    return MetricContext(slot_entries=tuple(tables), reserve_price=reserve)


def random_request(
    rng: np.random.Generator,
    max_slots: int = 4,
    max_bidders: int = 5,
    request_id: str = "r0",
) -> AuctionRequest:
    n_slots = int(rng.integers(1, max_slots + 1))
    per_slot = []
    for s in range(n_slots):
        n_bidders = int(rng.integers(1, max_bidders + 1))
        advertisers = rng.permutation(max_bidders * 2)[:n_bidders]
        per_slot.append(
            [
                (f"adv{int(a)}", float(rng.lognormal(0.0, 1.0)))
                for a in advertisers
            ]
        )
    return make_request(per_slot, request_id=request_id)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
