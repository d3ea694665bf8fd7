"""Visual saliency via the minimum barrier distance (MBD).

An ad creative is composited into its slot, the barrier-distance transform
is run from the image border (background seed prior), the distance map is
min-max normalized, and the slot's mean saliency is the score. The
transform uses the raster-scan approximation: alternating forward and
backward passes, each relaxing every pixel from its two causal neighbors
while tracking the running path maximum and minimum.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateImage, SlotOutOfBounds, UnsupportedFormat
from .model import GrayImage, Rect

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, kept soft for debugging
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

DEFAULT_PASSES = 3


@dataclass(frozen=True)
class SaliencyMap:
    width: int
    height: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if arr.shape != (self.height, self.width):
            raise ValueError("saliency map shape must be (height, width)")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("saliency values must lie in [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)


def composite(page: GrayImage, ad: GrayImage, slot: Rect) -> GrayImage:
    """Paste the ad into the slot rectangle, nearest-neighbor scaled."""
    if slot.x + slot.w > page.width or slot.y + slot.h > page.height:
        raise SlotOutOfBounds(
            f"slot {slot} exceeds page bounds {page.width}x{page.height}"
        )
    ys = (np.arange(slot.h) * ad.height) // slot.h
    xs = (np.arange(slot.w) * ad.width) // slot.w
    out = page.data.copy()
    out[slot.y : slot.y + slot.h, slot.x : slot.x + slot.w] = ad.data[np.ix_(ys, xs)]
    return GrayImage.from_array(out)


@njit(cache=True)
def _raster_passes(img, dist, hi, lo, passes):  # pragma: no cover - exercised via mbd_transform
    h, w = img.shape
    for p in range(passes):
        if p % 2 == 0:
            y = 0
            while y < h:
                x = 0
                while x < w:
                    v = img[y, x]
                    if y > 0:
                        u2 = hi[y - 1, x] if hi[y - 1, x] > v else v
                        l2 = lo[y - 1, x] if lo[y - 1, x] < v else v
                        b = u2 - l2
                        if b < dist[y, x]:
                            dist[y, x] = b
                            hi[y, x] = u2
                            lo[y, x] = l2
                    if x > 0:
                        u2 = hi[y, x - 1] if hi[y, x - 1] > v else v
                        l2 = lo[y, x - 1] if lo[y, x - 1] < v else v
                        b = u2 - l2
                        if b < dist[y, x]:
                            dist[y, x] = b
                            hi[y, x] = u2
                            lo[y, x] = l2
                    x += 1
                y += 1
        else:
            y = h - 1
            while y >= 0:
                x = w - 1
                while x >= 0:
                    v = img[y, x]
                    if y < h - 1:
                        u2 = hi[y + 1, x] if hi[y + 1, x] > v else v
                        l2 = lo[y + 1, x] if lo[y + 1, x] < v else v
                        b = u2 - l2
                        if b < dist[y, x]:
                            dist[y, x] = b
                            hi[y, x] = u2
                            lo[y, x] = l2
                    if x < w - 1:
                        u2 = hi[y, x + 1] if hi[y, x + 1] > v else v
                        l2 = lo[y, x + 1] if lo[y, x + 1] < v else v
                        b = u2 - l2
                        if b < dist[y, x]:
                            dist[y, x] = b
                            hi[y, x] = u2
                            lo[y, x] = l2
                    x -= 1
                y -= 1


def mbd_transform(img: GrayImage, passes: int = DEFAULT_PASSES) -> np.ndarray:
    """Approximate minimum barrier distance from the image border.

    Border pixels are seeds with distance 0. Interior distances approximate
    the minimum over 4-connected paths of (path max - path min). Additional
    passes only lower the estimates.
    """
    if passes < 1:
        raise ValueError("passes must be at least 1")
    if img.width < 2 or img.height < 2:
        raise DegenerateImage(
            f"barrier transform needs at least 2x2 pixels, got {img.width}x{img.height}"
        )
    data = np.ascontiguousarray(img.data)
    dist = np.full(data.shape, np.inf)
    dist[0, :] = 0.0
    dist[-1, :] = 0.0
    dist[:, 0] = 0.0
    dist[:, -1] = 0.0
    hi = data.copy()
    lo = data.copy()
    _raster_passes(data, dist, hi, lo, passes)
    return dist


def to_saliency(dist: np.ndarray) -> SaliencyMap:
    """Min-max normalize a distance map into [0, 1]; a flat map becomes zeros."""
    dist = np.asarray(dist, dtype=np.float64)
    lo, hi = float(dist.min()), float(dist.max())
    if hi == lo:
        values = np.zeros_like(dist)
    else:
        values = (dist - lo) / (hi - lo)
    return SaliencyMap(width=dist.shape[1], height=dist.shape[0], values=values)


def slot_saliency(
    page: GrayImage, ad: GrayImage, slot: Rect, passes: int = DEFAULT_PASSES
) -> float:
    """Mean normalized saliency over the slot after compositing the ad into it."""
    combined = composite(page, ad, slot)
    sal = to_saliency(mbd_transform(combined, passes=passes))
    region = sal.values[slot.y : slot.y + slot.h, slot.x : slot.x + slot.w]
    return float(region.mean())


# -- PGM IO -------------------------------------------------------------------

def read_pgm(path) -> GrayImage:
    """Read a P2 (ASCII) or P5 (binary) PGM with maxval 255, mapped to [0, 1]."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:2] not in (b"P2", b"P5"):
        raise UnsupportedFormat(f"{path}: not a P2/P5 PGM file")
    binary = raw[:2] == b"P5"

    # header tokens: magic, width, height, maxval; '#' comments run to EOL
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4 and pos < len(raw):
        c = raw[pos : pos + 1]
        if c == b"#":
            eol = raw.find(b"\n", pos)
            pos = len(raw) if eol < 0 else eol + 1
        elif c.isspace():
            pos += 1
        else:
            end = pos
            while end < len(raw) and not raw[end : end + 1].isspace():
                end += 1
            tokens.append(raw[pos:end])
            pos = end
    if len(tokens) < 4:
        raise UnsupportedFormat(f"{path}: truncated PGM header")
    try:
        width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError as exc:
        raise UnsupportedFormat(f"{path}: malformed PGM header") from exc
    if maxval != 255:
        raise UnsupportedFormat(f"{path}: only maxval 255 is supported, got {maxval}")
    if binary:
        pos += 1  # single whitespace after maxval
        if len(raw) - pos < width * height:
            raise UnsupportedFormat(f"{path}: truncated PGM pixel data")
        pixels = np.frombuffer(raw, dtype=np.uint8, count=width * height, offset=pos)
    else:
        values = raw[pos:].split()
        if len(values) < width * height:
            raise UnsupportedFormat(f"{path}: truncated PGM pixel data")
        pixels = np.array(values[: width * height], dtype=np.uint8)
    data = pixels.astype(np.float64).reshape(height, width) / 255.0
    return GrayImage(width=width, height=height, data=data)


def write_pgm(img: GrayImage, path) -> None:
    """Write a binary (P5) PGM, quantizing intensities to 8 bits."""
    pixels = np.rint(img.data * 255.0).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{img.width} {img.height}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())
