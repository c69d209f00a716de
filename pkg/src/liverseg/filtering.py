"""Binary median filter and binary morphology."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidWindow
from .imgio import BinaryMask

MEDIAN_WINDOWS = (3, 5, 7, 9)


@dataclass(frozen=True)
class StructuringElement:
    shape: str = "square"
    radius: int = 2

    def __post_init__(self):
        if self.shape not in ("square", "cross"):
            raise ValueError(f"unknown structuring element shape {self.shape!r}")
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")

    def offsets(self) -> list[tuple[int, int]]:
        """(dy, dx) offsets of the element cells, origin at the center."""
        r = self.radius
        if self.shape == "square":
            return [(dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1)]
        return [(dy, 0) for dy in range(-r, r + 1)] + [(0, dx) for dx in range(-r, r + 1) if dx]

    def footprint(self) -> np.ndarray:
        r = self.radius
        fp = np.zeros((2 * r + 1, 2 * r + 1), dtype=bool)
        for dy, dx in self.offsets():
            fp[dy + r, dx + r] = True
        return fp


DEFAULT_ELEMENT = StructuringElement("square", 2)


def median_filter(mask: BinaryMask, window: int = 3) -> BinaryMask:
    """Majority vote over a window x window neighbourhood, replicate padding."""
    if window not in MEDIAN_WINDOWS:
        raise InvalidWindow(f"window must be one of {MEDIAN_WINDOWS}, got {window}")
    r = window // 2
    padded = np.pad(mask.bits, r, mode="edge").astype(np.int32)
    # summed-area table gives every window sum in O(1)
    sat = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int32)
    sat[1:, 1:] = padded.cumsum(0).cumsum(1)
    h, w = mask.shape
    sums = (
        sat[window:window + h, window:window + w]
        - sat[:h, window:window + w]
        - sat[window:window + h, :w]
        + sat[:h, :w]
    )
    return BinaryMask(sums > (window * window) // 2)


def _shifted_stack(bits: np.ndarray, se: StructuringElement, fill: int) -> np.ndarray:
    r = se.radius
    padded = np.pad(bits, r, mode="constant", constant_values=fill)
    windows = sliding_window_view(padded, (2 * r + 1, 2 * r + 1))
    return windows[..., se.footprint()]


def dilate(mask: BinaryMask, se: StructuringElement = DEFAULT_ELEMENT) -> BinaryMask:
    # out-of-bounds cells contribute nothing: pad with background
    return BinaryMask(_shifted_stack(mask.bits, se, 0).any(axis=-1))


def erode(mask: BinaryMask, se: StructuringElement = DEFAULT_ELEMENT) -> BinaryMask:
    # out-of-bounds cells are ignored: pad with foreground
    return BinaryMask(_shifted_stack(mask.bits, se, 1).all(axis=-1))


def close(mask: BinaryMask, se: StructuringElement = DEFAULT_ELEMENT) -> BinaryMask:
    return erode(dilate(mask, se), se)
