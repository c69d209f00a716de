"""Sobel gradient, contour extraction and the red contour overlay."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .imgio import BinaryMask, GrayImage, mask_to_image

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.int64)
SOBEL_Y = SOBEL_X.T

CONTOUR_RGB = (255, 0, 0)


@dataclass(frozen=True, eq=False)
class Overlay:
    """RGB raster of shape (height, width, 3), uint8."""

    rgb: np.ndarray

    @property
    def width(self) -> int:
        return self.rgb.shape[1]

    @property
    def height(self) -> int:
        return self.rgb.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Overlay):
            return NotImplemented
        return np.array_equal(self.rgb, other.rgb)

    __hash__ = None


def _correlate3(padded: np.ndarray, kernel: np.ndarray, h: int, w: int) -> np.ndarray:
    out = np.zeros((h, w), dtype=np.int64)
    for ky in range(3):
        for kx in range(3):
            k = kernel[ky, kx]
            if k:
                out += k * padded[ky:ky + h, kx:kx + w]
    return out


def sobel_magnitude(img: GrayImage) -> np.ndarray:
    """L1 gradient magnitude |Gx| + |Gy| with replicate padding, int64 array."""
    h, w = img.shape
    padded = np.pad(img.pixels.astype(np.int64), 1, mode="edge")
    gx = _correlate3(padded, SOBEL_X, h, w)
    gy = _correlate3(padded, SOBEL_Y, h, w)
    return np.abs(gx) + np.abs(gy)


def extract_contour(mask: BinaryMask) -> BinaryMask:
    """Inner contour: foreground pixels where the Sobel response is nonzero."""
    magnitude = sobel_magnitude(mask_to_image(mask))
    return BinaryMask((magnitude > 0) & (mask.bits == 1))


def overlay(original: GrayImage, contour: BinaryMask) -> Overlay:
    if original.shape != contour.shape:
        raise DimensionMismatch(f"image {original.shape} vs contour {contour.shape}")
    gray = original.pixels.astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    rgb[contour.bits == 1] = CONTOUR_RGB
    return Overlay(rgb)


def write_ppm(o: Overlay) -> bytes:
    header = f"P6\n{o.width} {o.height}\n255\n".encode("ascii")
    return header + o.rgb.astype(np.uint8).tobytes()
