"""Intensity histogram, two-sided band thresholding and threshold calibration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySampleSet, InvalidBand
from .imgio import BinaryMask, GrayImage

N_BINS = 256


@dataclass(frozen=True)
class ThresholdPair:
    """Inclusive intensity interval [s1, s2] selecting liver pixels."""

    s1: int
    s2: int

    def __post_init__(self):
        if not (0 <= self.s1 <= 255 and 0 <= self.s2 <= 255):
            raise InvalidBand(f"thresholds must lie in [0, 255], got ({self.s1}, {self.s2})")
        if self.s1 > self.s2:
            raise InvalidBand("s1 must be ≤ s2")

    def __contains__(self, value) -> bool:
        return self.s1 <= value <= self.s2


# Uncalibrated placeholder for 8-bit soft tissue; use calibrate_thresholds.
DEFAULT_THRESHOLDS = ThresholdPair(90, 150)


@dataclass(frozen=True, eq=False)
class Histogram:
    bins: np.ndarray
    total: int

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return self.total == other.total and np.array_equal(self.bins, other.bins)

    def to_csv(self) -> str:
        return "".join(f"{v},{int(c)}\n" for v, c in enumerate(self.bins))


def compute_histogram(img: GrayImage) -> Histogram:
    if img.max_value > 255:
        raise ValueError("histogram expects an 8-bit image; rescale with to_8bit first")
    bins = np.bincount(img.pixels.ravel(), minlength=N_BINS).astype(np.int64)
    return Histogram(bins, int(img.pixels.size))


def band_threshold(img: GrayImage, t: ThresholdPair) -> BinaryMask:
    """Foreground where s1 <= intensity <= s2.

    The lower bound drops the histogram part left of s1, the upper bound the
    part right of s2.
    """
    p = img.pixels
    return BinaryMask((p >= t.s1) & (p <= t.s2))


def threshold_grid(step: int) -> list[ThresholdPair]:
    """All pairs s1 <= s2 with both bounds on the grid {0, step, 2*step, ...} <= 255."""
    if not 1 <= step <= 64:
        raise ValueError(f"step must be in [1, 64], got {step}")
    levels = range(0, 256, step)
    return [ThresholdPair(a, b) for a in levels for b in levels if b >= a]


def _score_sample(image, truth, pairs, cfg):
    # Import here: the pipeline module depends on this one.
    from .evaluation import dice
    from .errors import LiverNotFound
    from .pipeline import run_from_threshold

    # Many pairs produce the same thresholded mask; the rest of the
    # pipeline is a function of that mask alone.
    cache: dict[bytes, float] = {}
    scores = np.empty(len(pairs))
    for i, pair in enumerate(pairs):
        thresholded = band_threshold(image, pair)
        key = np.packbits(thresholded.bits).tobytes()
        if key not in cache:
            try:
                result = run_from_threshold(image, thresholded, cfg)
                cache[key] = dice(result.liver_mask, truth)
            except LiverNotFound:
                cache[key] = 0.0
        scores[i] = cache[key]
    return scores


def _score_sample_star(args):
    return _score_sample(*args)


def calibrate_thresholds(samples, step: int = 5, cfg=None, jobs: int = 1):
    """Grid-search the band that maximises mean Dice through the full pipeline.

    ``samples`` is a sequence of (GrayImage, BinaryMask) pairs.  Every pair on
    the grid is scored on every sample; ties go to the smaller s1, then the
    smaller s2.  Returns ``(ThresholdPair, mean_dice)``.
    """
    from .pipeline import PipelineConfig

    samples = list(samples)
    if not samples:
        raise EmptySampleSet("calibration needs at least one sample")
    pairs = threshold_grid(step)
    cfg = cfg or PipelineConfig()
    tasks = [(img, truth, pairs, cfg) for img, truth in samples]
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_sample = list(pool.map(_score_sample_star, tasks))
    else:
        per_sample = [_score_sample_star(t) for t in tasks]

    mean = np.mean(np.vstack(per_sample), axis=0)
    # pairs are ordered by (s1, s2), so argmax picks the tie-break winner
    best = int(np.argmax(mean))
    return pairs[best], float(mean[best])
