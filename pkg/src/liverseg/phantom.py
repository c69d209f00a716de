"""Seeded synthetic abdominal slices with a known liver mask.

Layout follows a radiological axial view: the liver is a large blob in the
left half of the image, a smaller in-band "spleen" sits in the right half, and
a few out-of-band structures (body wall, vertebra, kidneys, stomach) fill the
rest.  Noise-free phantoms are built so that the default pipeline recovers
the truth mask exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .components import greatest_component
from .errors import InvalidBand, TooSmall
from .filtering import DEFAULT_ELEMENT, StructuringElement, close, dilate, median_filter
from .histogram import DEFAULT_THRESHOLDS, ThresholdPair
from .imgio import BinaryMask, GrayImage

MIN_SIZE = 64

# Band-free margin kept around the liver so no other in-band blob can be
# bridged to it by the median window or the closing element.
_SEPARATION = StructuringElement("square", 6)


@dataclass(frozen=True, eq=False)
class Phantom:
    image: GrayImage
    truth: BinaryMask
    seed: int
    noise_sigma: float
    distractor: BinaryMask

    def __eq__(self, other):
        if not isinstance(other, Phantom):
            return NotImplemented
        return (
            self.image == other.image
            and self.truth == other.truth
            and self.distractor == other.distractor
            and self.seed == other.seed
            and self.noise_sigma == other.noise_sigma
        )

    __hash__ = None


def _blob(rng, shape, center, axes, wobble: float) -> np.ndarray:
    """Ellipse whose radius is modulated by a few low-order harmonics."""
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    dy = (yy + 0.5 - center[0]) / axes[0]
    dx = (xx + 0.5 - center[1]) / axes[1]
    theta = np.arctan2(dy, dx)
    radius = np.ones_like(theta)
    for k in (2, 3, 4):
        radius += rng.uniform(0, wobble) * np.cos(k * theta + rng.uniform(0, 2 * np.pi))
    return np.hypot(dx, dy) <= radius


def _ellipse(shape, center, axes) -> np.ndarray:
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    return ((yy + 0.5 - center[0]) / axes[0]) ** 2 + ((xx + 0.5 - center[1]) / axes[1]) ** 2 <= 1


def stabilize(region: np.ndarray, window: int = 3, se: StructuringElement = DEFAULT_ELEMENT) -> BinaryMask:
    """Iterate median filtering and closing to a common fixed point.

    The result is a single 4-connected component that both filters leave
    untouched, which is what lets a noise-free phantom survive the pipeline
    bit-exactly.
    """
    mask = greatest_component(BinaryMask(region))
    for _ in range(100):
        if median_filter(mask, window) == mask and close(mask, se) == mask:
            return mask
        mask = greatest_component(close(median_filter(mask, window), se))
    raise RuntimeError("blob did not converge to a filter-stable shape")


def _outside_levels(band: ThresholdPair) -> tuple[int, int, int]:
    """(air, soft tissue, dense tissue) intensities, all strictly outside the band."""
    below = list(range(0, band.s1))
    above = list(range(band.s2 + 1, 256))
    if not below and not above:
        raise InvalidBand("band covers every intensity; nothing can lie outside it")
    if below:
        air = 0
        soft = max(0, band.s1 - 35)
    else:
        air = 255
        soft = min(255, band.s2 + 35)
    dense = min(255, band.s2 + 60) if above else max(0, band.s1 - 15)
    return air, soft, dense


def make_phantom(
    width: int = 512,
    height: int = 512,
    seed: int = 1,
    noise_sigma: float = 0.0,
    band: ThresholdPair = DEFAULT_THRESHOLDS,
) -> Phantom:
    if width < MIN_SIZE or height < MIN_SIZE:
        raise TooSmall(f"phantom must be at least {MIN_SIZE}x{MIN_SIZE}, got {width}x{height}")
    if not isinstance(band, ThresholdPair):
        band = ThresholdPair(*band)
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    if seed < 0:
        raise ValueError("seed must be an unsigned integer")

    rng = np.random.default_rng(seed)
    shape = (height, width)
    air, soft, dense = _outside_levels(band)

    # Geometry, in fractions of the image size.
    liver_c = (height * rng.uniform(0.40, 0.50), width * rng.uniform(0.28, 0.32))
    liver_ax = (height * rng.uniform(0.20, 0.24), width * rng.uniform(0.14, 0.16))
    spleen_c = (height * rng.uniform(0.36, 0.44), width * rng.uniform(0.74, 0.78))
    spleen_ax = (height * rng.uniform(0.08, 0.11), width * rng.uniform(0.06, 0.08))

    liver = stabilize(_blob(rng, shape, liver_c, liver_ax, 0.06))
    spleen_raw = _blob(rng, shape, spleen_c, spleen_ax, 0.06)
    spleen_raw &= ~dilate(liver, _SEPARATION).bits.astype(bool)
    spleen = stabilize(spleen_raw)
    if spleen.count() >= liver.count():
        raise RuntimeError("distractor is not smaller than the liver")

    img = np.full(shape, air, dtype=np.float64)
    img[_ellipse(shape, (height * 0.5, width * 0.5), (height * 0.42, width * 0.47))] = soft
    # vertebra and kidneys: dense, out of band
    img[_ellipse(shape, (height * 0.78, width * 0.5), (height * 0.06, width * 0.06))] = dense
    img[_ellipse(shape, (height * 0.68, width * 0.32), (height * 0.07, width * 0.05))] = dense
    img[_ellipse(shape, (height * 0.68, width * 0.68), (height * 0.07, width * 0.05))] = dense
    # stomach: gas-filled, air-like
    img[_ellipse(shape, (height * 0.62, width * 0.55), (height * 0.05, width * 0.06))] = air

    liver_bits = liver.bits.astype(bool)
    spleen_bits = spleen.bits.astype(bool)
    img[liver_bits] = rng.integers(band.s1, band.s2 + 1, size=int(liver_bits.sum()))
    img[spleen_bits] = rng.integers(band.s1, band.s2 + 1, size=int(spleen_bits.sum()))

    if noise_sigma > 0:
        img = img + rng.normal(0.0, noise_sigma, size=shape)
    pixels = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    return Phantom(GrayImage(pixels, 255), liver, int(seed), float(noise_sigma), spleen)
