"""End-to-end liver segmentation of one axial slice.

Stage chain: (a) original, (b) band threshold, (c) median filter, (d) greatest
connected component, (e) morphological closing, (f) Sobel contour, (g) contour
overlaid on the original.
"""

from __future__ import annotations

import json
import os
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .components import component_sizes, label_components, largest_component
from .contour import Overlay, extract_contour, overlay, write_ppm
from .errors import IoFailure, LiverNotFound
from .filtering import MEDIAN_WINDOWS, StructuringElement, close, median_filter
from .histogram import DEFAULT_THRESHOLDS, ThresholdPair, band_threshold
from .imgio import BinaryMask, GrayImage, mask_to_image, write_pgm

STAGE_NAMES = ("a", "b", "c", "d", "e", "f", "g")


@dataclass(frozen=True)
class PipelineConfig:
    thresholds: ThresholdPair = DEFAULT_THRESHOLDS
    median_window: int = 3
    se_shape: str = "square"
    se_radius: int = 2
    min_area_fraction: float = 0.02

    def __post_init__(self):
        if self.median_window not in MEDIAN_WINDOWS:
            raise ValueError(f"median window must be one of {MEDIAN_WINDOWS}")
        StructuringElement(self.se_shape, self.se_radius)
        if not 0 <= self.min_area_fraction < 1:
            raise ValueError("min_area_fraction must be in [0, 1)")

    @property
    def element(self) -> StructuringElement:
        return StructuringElement(self.se_shape, self.se_radius)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["thresholds"] = {"s1": self.thresholds.s1, "s2": self.thresholds.s2}
        return d


@dataclass(frozen=True)
class SegmentationResult:
    stages: tuple = field(repr=False)
    area_pixels: int
    config: PipelineConfig

    @property
    def liver_mask(self) -> BinaryMask:
        return self.stages[4]

    @property
    def contour(self) -> BinaryMask:
        return self.stages[5]

    @property
    def overlay(self) -> Overlay:
        return self.stages[6]


def run_from_threshold(img: GrayImage, thresholded: BinaryMask, cfg: PipelineConfig) -> SegmentationResult:
    """Run stages (c) onwards given the thresholded mask (b)."""
    filtered = median_filter(thresholded, cfg.median_window)
    partial = (img, thresholded, filtered)
    labels, count = label_components(filtered)
    if count == 0:
        raise LiverNotFound("no foreground left after median filtering", partial)
    gcc = largest_component(labels, component_sizes(labels))
    area = gcc.count()
    if area < cfg.min_area_fraction * img.width * img.height:
        raise LiverNotFound(
            f"largest component has {area} pixels, below "
            f"{cfg.min_area_fraction:g} of the slice area",
            partial,
        )
    closed = close(gcc, cfg.element)
    contour = extract_contour(closed)
    final = overlay(img, contour)
    return SegmentationResult((img, thresholded, filtered, gcc, closed, contour, final), area, cfg)


def run_pipeline(img: GrayImage, cfg: PipelineConfig | None = None) -> SegmentationResult:
    cfg = cfg or PipelineConfig()
    if img.max_value > 255:
        raise ValueError("pipeline expects an 8-bit image; rescale with to_8bit first")
    return run_from_threshold(img, band_threshold(img, cfg.thresholds), cfg)


def _stage_file(index: int, stage) -> tuple[str, bytes, bytes]:
    """(file name, file bytes, raw raster buffer) for one stage image."""
    name = STAGE_NAMES[index]
    if isinstance(stage, Overlay):
        return f"stage_{name}.ppm", write_ppm(stage), stage.rgb.tobytes()
    if isinstance(stage, BinaryMask):
        stage = mask_to_image(stage)
    return f"stage_{name}.pgm", write_pgm(stage), stage.pixels.tobytes()


def stage_checksums(stages) -> list[dict]:
    return [
        {"name": f"stage_{STAGE_NAMES[i]}", "crc32": zlib.crc32(_stage_file(i, s)[2])}
        for i, s in enumerate(stages)
    ]


def write_stage_images(stages, directory) -> list[Path]:
    """Write the given stages (a prefix of a..g) into ``directory``."""
    directory = Path(directory)
    paths = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for i, stage in enumerate(stages):
            fname, data, _ = _stage_file(i, stage)
            path = directory / fname
            path.write_bytes(data)
            paths.append(path)
    except OSError as exc:
        raise IoFailure(f"cannot write stages to {directory}: {exc}") from exc
    return paths


def result_json(result: SegmentationResult) -> str:
    doc = {
        "area_pixels": result.area_pixels,
        "config": result.config.as_dict(),
        "stages": stage_checksums(result.stages),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def dump_stages(result: SegmentationResult, directory) -> list[Path]:
    """Write stage_a.pgm .. stage_f.pgm, stage_g.ppm and result.json.

    result.json is written last and atomically, so a failed dump never leaves
    a checksum file behind.
    """
    paths = write_stage_images(result.stages, directory)
    target = Path(directory) / "result.json"
    tmp = target.with_name(".result.json.tmp")
    try:
        tmp.write_text(result_json(result))
        os.replace(tmp, target)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise IoFailure(f"cannot write {target}: {exc}") from exc
    return paths
