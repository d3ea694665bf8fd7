"""Dataset container and JSONL file IO.

On disk a dataset root holds:

  webpages.jsonl  {id, url, title, keywords, description, content,
                   snapshot (relative PGM path or null),
                   slots: [{id, x, y, w, h}, ...]}
  ads.jsonl       {id, advertiser_id, company_domain, landing_title,
                   landing_keywords, landing_description,
                   image (relative PGM path or null),
                   memorability, ctr, value (optional)}
  auctions.jsonl  {id, webpage_id, slots: [[{ad_id, bid}, ...], ...]}
                  with slot arrays aligned to the webpage slot order
  topics.jsonl    {ad_id, topic}   (optional; written by the topics command)

Bid entries resolve their advertiser from the ad record and default their
private value to the ad's ``value`` field, or the bid itself when absent.
Loading validates referential integrity and every request's invariants.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

from ..errors import DanglingReference, ImageLoadError, ParseError, ValidationError
from ..model import Ad, AdSlot, AuctionRequest, BidEntry, Rect, Webpage, validate_request
from ..saliency import read_pgm, write_pgm
from ..text import CompetitorRelation, build_competitor_relation


@dataclass
class Dataset:
    """In-memory dataset with referential integrity already checked."""

    webpages: dict[str, Webpage]
    ads: dict[str, Ad]
    requests: list[AuctionRequest]
    topic_labels: Optional[dict[str, int]] = None
    relation: Optional[CompetitorRelation] = None
    provenance: str = "loaded"

    def webpage_of(self, request: AuctionRequest) -> Webpage:
        return self.webpages[request.webpage_id]


def _read_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ParseError(f"{path}:{lineno}: expected an object")
            yield lineno, obj


def _field(obj: dict, name: str, path: Path, lineno: int):
    if name not in obj:
        raise ParseError(f"{path}:{lineno}: missing field {name!r}")
    return obj[name]


def _load_image(root: Path, rel: Optional[str], path: Path, lineno: int):
    if rel is None:
        return None
    try:
        return read_pgm(root / rel)
    except OSError as exc:
        raise ImageLoadError(f"{path}:{lineno}: cannot read image {rel!r}: {exc}") from exc


def load_dataset(root) -> Dataset:
    """Load and validate a dataset directory."""
    root = Path(root)
    wp_path = root / "webpages.jsonl"
    ads_path = root / "ads.jsonl"
    auct_path = root / "auctions.jsonl"
    for p in (wp_path, ads_path, auct_path):
        if not p.exists():
            raise ParseError(f"{p}: file not found")

    webpages: dict[str, Webpage] = {}
    for lineno, obj in _read_jsonl(wp_path):
        slots = []
        for s in _field(obj, "slots", wp_path, lineno):
            slots.append(
                AdSlot(
                    id=str(_field(s, "id", wp_path, lineno)),
                    rect=Rect(
                        x=int(_field(s, "x", wp_path, lineno)),
                        y=int(_field(s, "y", wp_path, lineno)),
                        w=int(_field(s, "w", wp_path, lineno)),
                        h=int(_field(s, "h", wp_path, lineno)),
                    ),
                )
            )
        try:
            page = Webpage(
                id=str(_field(obj, "id", wp_path, lineno)),
                url=str(_field(obj, "url", wp_path, lineno)),
                title=str(_field(obj, "title", wp_path, lineno)),
                keywords=str(_field(obj, "keywords", wp_path, lineno)),
                description=str(_field(obj, "description", wp_path, lineno)),
                content=str(_field(obj, "content", wp_path, lineno)),
                slots=tuple(slots),
                snapshot=_load_image(root, obj.get("snapshot"), wp_path, lineno),
            )
        except ValidationError as exc:
            raise ParseError(f"{wp_path}:{lineno}: {exc}") from exc
        if page.id in webpages:
            raise ParseError(f"{wp_path}:{lineno}: duplicate webpage id {page.id!r}")
        webpages[page.id] = page

    ads: dict[str, Ad] = {}
    for lineno, obj in _read_jsonl(ads_path):
        parts = [
            str(_field(obj, "landing_title", ads_path, lineno)),
            str(_field(obj, "landing_keywords", ads_path, lineno)),
            str(_field(obj, "landing_description", ads_path, lineno)),
        ]
        try:
            ad = Ad(
                id=str(_field(obj, "id", ads_path, lineno)),
                advertiser_id=str(_field(obj, "advertiser_id", ads_path, lineno)),
                company_domain=str(_field(obj, "company_domain", ads_path, lineno)),
                landing_text=" ".join(p for p in parts if p),
                memorability=float(_field(obj, "memorability", ads_path, lineno)),
                ctr=float(_field(obj, "ctr", ads_path, lineno)),
                image=_load_image(root, obj.get("image"), ads_path, lineno),
                value=float(obj["value"]) if obj.get("value") is not None else None,
            )
        except ValidationError as exc:
            raise ParseError(f"{ads_path}:{lineno}: {exc}") from exc
        if ad.id in ads:
            raise ParseError(f"{ads_path}:{lineno}: duplicate ad id {ad.id!r}")
        ads[ad.id] = ad

    requests: list[AuctionRequest] = []
    for lineno, obj in _read_jsonl(auct_path):
        webpage_id = str(_field(obj, "webpage_id", auct_path, lineno))
        page = webpages.get(webpage_id)
        if page is None:
            raise DanglingReference(
                f"{auct_path}:{lineno}: unknown webpage {webpage_id!r}"
            )
        per_slot = []
        for slot_bids in _field(obj, "slots", auct_path, lineno):
            entries = []
            for b in slot_bids:
                ad_id = str(_field(b, "ad_id", auct_path, lineno))
                ad = ads.get(ad_id)
                if ad is None:
                    raise DanglingReference(
                        f"{auct_path}:{lineno}: unknown ad {ad_id!r}"
                    )
                bid = float(_field(b, "bid", auct_path, lineno))
                entries.append(
                    BidEntry(
                        ad_id=ad_id,
                        advertiser_id=ad.advertiser_id,
                        bid=bid,
                        value=ad.value if ad.value is not None else bid,
                    )
                )
            per_slot.append(tuple(entries))
        request = AuctionRequest(
            id=str(_field(obj, "id", auct_path, lineno)),
            webpage_id=webpage_id,
            per_slot_bids=tuple(per_slot),
        )
        validate_request(request, page)
        requests.append(request)

    topic_labels = None
    relation = None
    topics_path = root / "topics.jsonl"
    if topics_path.exists():
        topic_labels = {}
        for lineno, obj in _read_jsonl(topics_path):
            ad_id = str(_field(obj, "ad_id", topics_path, lineno))
            if ad_id not in ads:
                raise DanglingReference(
                    f"{topics_path}:{lineno}: unknown ad {ad_id!r}"
                )
            topic_labels[ad_id] = int(_field(obj, "topic", topics_path, lineno))
        relation = build_competitor_relation(list(ads.values()), topic_labels)

    return Dataset(
        webpages=webpages,
        ads=ads,
        requests=requests,
        topic_labels=topic_labels,
        relation=relation,
        provenance="loaded",
    )


def save_dataset(dataset: Dataset, root) -> None:
    """Write a dataset directory that :func:`load_dataset` reproduces.

    Images are written as 8-bit PGM; intensities already on the 8-bit grid
    round-trip exactly. Landing text is stored in ``landing_title``.
    """
    root = Path(root)
    os.makedirs(root / "images", exist_ok=True)

    with open(root / "webpages.jsonl", "w", encoding="utf-8") as f:
        for i, page in enumerate(dataset.webpages.values()):
            snapshot_rel = None
            if page.snapshot is not None:
                snapshot_rel = f"images/wp_{i}.pgm"
                write_pgm(page.snapshot, root / snapshot_rel)
            f.write(
                json.dumps(
                    {
                        "id": page.id,
                        "url": page.url,
                        "title": page.title,
                        "keywords": page.keywords,
                        "description": page.description,
                        "content": page.content,
                        "snapshot": snapshot_rel,
                        "slots": [
                            {
                                "id": s.id,
                                "x": s.rect.x,
                                "y": s.rect.y,
                                "w": s.rect.w,
                                "h": s.rect.h,
                            }
                            for s in page.slots
                        ],
                    }
                )
                + "\n"
            )

    with open(root / "ads.jsonl", "w", encoding="utf-8") as f:
        for i, ad in enumerate(dataset.ads.values()):
            image_rel = None
            if ad.image is not None:
                image_rel = f"images/ad_{i}.pgm"
                write_pgm(ad.image, root / image_rel)
            record = {
                "id": ad.id,
                "advertiser_id": ad.advertiser_id,
                "company_domain": ad.company_domain,
                "landing_title": ad.landing_text,
                "landing_keywords": "",
                "landing_description": "",
                "image": image_rel,
                "memorability": ad.memorability,
                "ctr": ad.ctr,
            }
            if ad.value is not None:
                record["value"] = ad.value
            f.write(json.dumps(record) + "\n")

    with open(root / "auctions.jsonl", "w", encoding="utf-8") as f:
        for request in dataset.requests:
            f.write(
                json.dumps(
                    {
                        "id": request.id,
                        "webpage_id": request.webpage_id,
                        "slots": [
                            [{"ad_id": b.ad_id, "bid": b.bid} for b in bids]
                            for bids in request.per_slot_bids
                        ],
                    }
                )
                + "\n"
            )

    if dataset.topic_labels is not None:
        with open(root / "topics.jsonl", "w", encoding="utf-8") as f:
            for ad_id, topic in dataset.topic_labels.items():
                f.write(json.dumps({"ad_id": ad_id, "topic": topic}) + "\n")
