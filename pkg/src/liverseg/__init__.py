"""Automatic liver segmentation of axial abdominal CT slices.

Band thresholding, median filtering, greatest-connected-component
extraction, morphological closing and Sobel contour overlay.
"""

__version__ = "0.1.0"

from .components import component_sizes, label_components, largest_component
from .contour import extract_contour, overlay, sobel_magnitude, write_ppm
from .evaluation import dice, evaluate_corpus, jaccard
from .filtering import StructuringElement, close, dilate, erode, median_filter
from .histogram import ThresholdPair, band_threshold, calibrate_thresholds, compute_histogram
from .imgio import BinaryMask, GrayImage, mask_to_image, read_pgm, write_pgm
from .phantom import make_phantom
from .pipeline import PipelineConfig, dump_stages, run_pipeline

__all__ = [
    "BinaryMask", "GrayImage", "PipelineConfig", "StructuringElement", "ThresholdPair",
    "band_threshold", "calibrate_thresholds", "close", "component_sizes", "compute_histogram",
    "dice", "dilate", "dump_stages", "erode", "evaluate_corpus", "extract_contour", "jaccard",
    "label_components", "largest_component", "make_phantom", "mask_to_image", "median_filter",
    "overlay", "read_pgm", "run_pipeline", "sobel_magnitude", "write_pgm", "write_ppm",
]
