"""Hand-built datasets with known properties."""
from __future__ import annotations

from slateopt import Ad, AdSlot, AuctionRequest, BidEntry, Rect, Webpage
from slateopt.harness import Dataset
from slateopt.text import build_competitor_relation


def _ad(ad_id, advertiser, domain, text) -> Ad:
    return Ad(
        id=ad_id,
        advertiser_id=advertiser,
        company_domain=domain,
        landing_text=text,
        memorability=0.8,
        ctr=0.1,
    )


def _bid(ad: Ad, bid: float) -> BidEntry:
    return BidEntry(ad_id=ad.id, advertiser_id=ad.advertiser_id, bid=bid, value=bid)


def scenario_fixture() -> tuple[Dataset, dict[str, int]]:
    """Twelve requests with hand-counted placement scenarios.

    Baseline (highest bid per slot) placements:
      req0..req2   same ad in both slots        -> same_landing + same_company
      req3..req4   same company, different page -> same_company only
      req5..req7   competitive pair             -> competitive
      req8..req9   unrelated ads                -> nothing
      req10..req11 single slot                  -> nothing
    Expected: same_landing=3, same_company=5, competitive=3, multi_slot=10.
    """
    ads = {
        "apple_a": _ad("apple_a", "advA", "apple.example.com", "phone deals phone"),
        "apple_b": _ad("apple_b", "advB", "apple.example.com", "tablet deals tablet"),
        "galaxy": _ad("galaxy", "advC", "samsung.example.com", "phone offers phone"),
        "pixel": _ad("pixel", "advD", "google.example.com", "phone discount phone"),
        "bank": _ad("bank", "advE", "bank.example.com", "savings account rates"),
        "travel": _ad("travel", "advF", "travel.example.com", "holiday flights hotels"),
    }
    # galaxy and pixel share the phone topic across different companies;
    # apple_a shares it too but apple_b does not
    topic_labels = {
        "apple_a": 0,
        "galaxy": 0,
        "pixel": 0,
        "apple_b": 1,
        "bank": 2,
        "travel": 3,
    }
    two_slots = tuple(
        AdSlot(id=f"s{i}", rect=Rect(x=0, y=10 * i, w=8, h=8)) for i in range(2)
    )
    one_slot = (AdSlot(id="s0", rect=Rect(x=0, y=0, w=8, h=8)),)

    webpages = {}
    for i in range(12):
        slots = two_slots if i < 10 else one_slot
        webpages[f"w{i}"] = Webpage(
            id=f"w{i}",
            url=f"https://pub.example.com/{i}",
            title="news",
            keywords="news",
            description="daily news",
            content="articles and stories",
            slots=slots,
        )

    def request(i, slot_ads):
        per_slot = []
        for winner, decoy in slot_ads:
            entries = [_bid(ads[winner], 5.0)]
            if decoy is not None:
                entries.append(_bid(ads[decoy], 1.0))
            per_slot.append(tuple(entries))
        return AuctionRequest(
            id=f"req{i}", webpage_id=f"w{i}", per_slot_bids=tuple(per_slot)
        )

    requests = []
    for i in range(3):  # same ad twice
        requests.append(request(i, [("apple_a", "bank"), ("apple_a", "travel")]))
    for i in range(3, 5):  # same company, different landing pages
        requests.append(request(i, [("apple_a", "bank"), ("apple_b", "travel")]))
    for i in range(5, 8):  # competitive advertisers
        requests.append(request(i, [("galaxy", "bank"), ("pixel", "travel")]))
    for i in range(8, 10):  # unrelated
        requests.append(request(i, [("bank", None), ("travel", None)]))
    for i in range(10, 12):  # single slot
        requests.append(
            AuctionRequest(
                id=f"req{i}",
                webpage_id=f"w{i}",
                per_slot_bids=((_bid(ads["galaxy"], 5.0), _bid(ads["pixel"], 1.0)),),
            )
        )

    relation = build_competitor_relation(list(ads.values()), topic_labels)
    dataset = Dataset(
        webpages=webpages,
        ads=ads,
        requests=requests,
        topic_labels=topic_labels,
        relation=relation,
        provenance="fixture",
    )
    expected = {
        "n_requests": 12,
        "multi_slot_requests": 10,
        "same_landing": 3,
        "same_company": 5,
        "competitive": 3,
    }
    return dataset, expected
