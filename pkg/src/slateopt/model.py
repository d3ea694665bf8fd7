"""Domain types shared by all modules.

Everything here is an immutable value object; validation happens in the
constructors so downstream code can assume the invariants hold. The six
stakeholder metrics use one fixed index order everywhere:

    0 revenue, 1 utility, 2 memorability, 3 ctr, 4 relevance, 5 saliency
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DuplicateAdvertiserInSlot,
    EmptySlotBids,
    SlotMismatch,
    ValidationError,
)

N_METRICS = 6
METRIC_NAMES = ("revenue", "utility", "memorability", "ctr", "relevance", "saliency")


def _as_readonly(data, shape=None, dtype=np.float64) -> np.ndarray:
    arr = np.asarray(data, dtype=dtype)
    if shape is not None:
        arr = arr.reshape(shape)
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GrayImage:
    """Grayscale raster, intensities in [0, 1], row-major."""

    width: int
    height: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValidationError("image dimensions must be positive")
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.size != self.width * self.height:
            raise ValidationError(
                f"image data has {arr.size} values, expected {self.width * self.height}"
            )
        arr = _as_readonly(arr, (self.height, self.width))
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValidationError("image intensities must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, arr) -> "GrayImage":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError("expected a 2-d intensity array")
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr)

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.width, self.height, self.data.tobytes()))


@dataclass(frozen=True)
class Rect:
    """Pixel rectangle, origin top-left."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(f"rect must have positive size, got {self.w}x{self.h}")
        if self.x < 0 or self.y < 0:
            raise ValidationError("rect coordinates must be non-negative")


@dataclass(frozen=True)
class AdSlot:
    id: str
    rect: Rect


@dataclass(frozen=True)
class Webpage:
    id: str
    url: str
    title: str
    keywords: str
    description: str
    content: str
    slots: tuple[AdSlot, ...]
    snapshot: Optional[GrayImage] = None

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        if not self.slots:
            raise ValidationError(f"webpage {self.id!r} has no slots")
        ids = [s.id for s in self.slots]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"webpage {self.id!r} has duplicate slot ids")
        if self.snapshot is not None:
            for s in self.slots:
                r = s.rect
                if r.x + r.w > self.snapshot.width or r.y + r.h > self.snapshot.height:
                    raise ValidationError(
                        f"slot {s.id!r} exceeds snapshot bounds on webpage {self.id!r}"
                    )

    @property
    def text(self) -> str:
        """Full textual content used for contextual relevance."""
        return " ".join(
            part for part in (self.title, self.keywords, self.description, self.content) if part
        )


@dataclass(frozen=True)
class Ad:
    id: str
    advertiser_id: str
    company_domain: str
    landing_text: str
    memorability: float
    ctr: float
    image: Optional[GrayImage] = None
    value: Optional[float] = None  # dataset-level private value; bids default to it

    def __post_init__(self):
        if not self.company_domain:
            raise ValidationError(f"ad {self.id!r} has an empty company domain")
        if not 0.0 <= self.memorability <= 1.0:
            raise ValidationError(f"ad {self.id!r}: memorability outside [0, 1]")
        if not 0.0 <= self.ctr <= 1.0:
            raise ValidationError(f"ad {self.id!r}: ctr outside [0, 1]")
        if self.value is not None and self.value < 0.0:
            raise ValidationError(f"ad {self.id!r}: negative value")


@dataclass(frozen=True)
class BidEntry:
    ad_id: str
    advertiser_id: str
    bid: float
    value: float

    def __post_init__(self):
        if self.bid < 0.0:
            raise ValidationError(f"negative bid for ad {self.ad_id!r}")
        if self.value < 0.0:
            raise ValidationError(f"negative value for ad {self.ad_id!r}")


@dataclass(frozen=True)
class AuctionRequest:
    """One user visit to a multi-slot webpage, with per-slot bid lists.

    Carries data only; invariants against the referenced webpage are
    enforced by :func:`validate_request`.
    """

    id: str
    webpage_id: str
    per_slot_bids: tuple[tuple[BidEntry, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "per_slot_bids", tuple(tuple(bids) for bids in self.per_slot_bids)
        )


@dataclass(frozen=True)
class CandidateRow:
    """One joint assignment: a bid pick per slot, in slot order."""

    picks: tuple[BidEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "picks", tuple(self.picks))

    @property
    def advertiser_ids(self) -> tuple[str, ...]:
        return tuple(p.advertiser_id for p in self.picks)


@dataclass(frozen=True)
class MetricVector:
    """Six stakeholder metrics in the fixed index order (see module docstring)."""

    x: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.x)
        if len(vals) != N_METRICS:
            raise ValidationError(f"metric vector needs {N_METRICS} components")
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("metric vector components must be finite")
        object.__setattr__(self, "x", vals)

    @classmethod
    def from_array(cls, arr) -> "MetricVector":
        return cls(tuple(float(v) for v in arr))

    def as_array(self) -> np.ndarray:
        return np.array(self.x, dtype=np.float64)


@dataclass(frozen=True)
class WeightVector:
    """Point on the 6-simplex: metric weights gamma."""

    gamma: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.gamma)
        if len(vals) != N_METRICS:
            raise ValidationError(f"weight vector needs {N_METRICS} components")
        if any(v < 0.0 or v > 1.0 for v in vals):
            raise ValidationError("weights must lie in [0, 1]")
        if abs(sum(vals) - 1.0) > 1e-9:
            raise ValidationError(f"weights must sum to 1, got {sum(vals)!r}")
        object.__setattr__(self, "gamma", vals)

    def as_array(self) -> np.ndarray:
        return np.array(self.gamma, dtype=np.float64)


@dataclass(frozen=True)
class ThresholdVector:
    """Per-metric change bounds: theta[0] <= 0 bounds revenue loss,
    theta[1:] >= 0 demand minimum gains."""

    theta: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.theta)
        if len(vals) != N_METRICS:
            raise ValidationError(f"threshold vector needs {N_METRICS} components")
        if vals[0] > 0.0:
            raise ValidationError("revenue threshold theta[0] must be non-positive")
        if any(v < 0.0 for v in vals[1:]):
            raise ValidationError("thresholds theta[1:] must be non-negative")
        object.__setattr__(self, "theta", vals)

    def as_array(self) -> np.ndarray:
        return np.array(self.theta, dtype=np.float64)


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of selecting one joint assignment for a request."""

    request_id: str
    row: CandidateRow
    rank_score: float
    raw_metrics: MetricVector
    is_fallback: bool

    def __post_init__(self):
        if not math.isfinite(self.rank_score):
            raise ValidationError("rank score must be finite")


@dataclass(frozen=True)
class ChangeReport:
    """Relative changes of the six summed raw metrics versus baseline.

    ``undefined[k]`` marks a metric whose baseline sum is zero while the
    optimized sum differs; such metrics are excluded from constraint checks.
    """

    xi: tuple[float, ...]
    n: int
    undefined: tuple[bool, ...] = (False,) * N_METRICS

    def __post_init__(self):
        vals = tuple(float(v) for v in self.xi)
        flags = tuple(bool(b) for b in self.undefined)
        if len(vals) != N_METRICS or len(flags) != N_METRICS:
            raise ValidationError(f"change report needs {N_METRICS} components")
        if self.n < 1:
            raise ValidationError("change report needs n >= 1 requests")
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("change components must be finite")
        object.__setattr__(self, "xi", vals)
        object.__setattr__(self, "undefined", flags)

    def as_array(self) -> np.ndarray:
        return np.array(self.xi, dtype=np.float64)


def validate_request(request: AuctionRequest, webpage: Webpage) -> AuctionRequest:
    """Check a request against its webpage and return it unchanged.

    Deterministic and side-effect-free; raises on the first violation.
    """
    if request.webpage_id != webpage.id:
        raise ValidationError(
            f"request {request.id!r} references webpage {request.webpage_id!r}, "
            f"got {webpage.id!r}"
        )
    if len(request.per_slot_bids) != len(webpage.slots):
        raise SlotMismatch(
            f"request {request.id!r} has {len(request.per_slot_bids)} bid lists "
            f"for {len(webpage.slots)} slots"
        )
    for slot, bids in zip(webpage.slots, request.per_slot_bids):
        if not bids:
            raise EmptySlotBids(f"request {request.id!r}: slot {slot.id!r} has no bids")
        advertisers = [b.advertiser_id for b in bids]
        if len(set(advertisers)) != len(advertisers):
            raise DuplicateAdvertiserInSlot(
                f"request {request.id!r}: duplicate advertiser in slot {slot.id!r}"
            )
    return request
