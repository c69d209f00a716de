"""Overlap metrics and corpus evaluation against expert masks."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyCorpus, LiverNotFound
from .imgio import BinaryMask

GOOD_DICE = 0.9
AVERAGE_DICE = 0.7

ROW_FIELDS = ("id", "dice", "jaccard", "area_auto", "area_truth", "verdict")


def _overlap(a: BinaryMask, b: BinaryMask) -> tuple[int, int, int]:
    if a.shape != b.shape:
        raise DimensionMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")
    inter = int(np.count_nonzero(a.bits & b.bits))
    return inter, a.count(), b.count()


def dice(a: BinaryMask, b: BinaryMask) -> float:
    """2|A∩B| / (|A| + |B|); two empty masks score 1.0."""
    inter, na, nb = _overlap(a, b)
    if na + nb == 0:
        return 1.0
    return 2 * inter / (na + nb)


def jaccard(a: BinaryMask, b: BinaryMask) -> float:
    inter, na, nb = _overlap(a, b)
    union = na + nb - inter
    if union == 0:
        return 1.0
    return inter / union


def verdict(dice_score: float) -> str:
    if dice_score >= GOOD_DICE:
        return "good"
    if dice_score >= AVERAGE_DICE:
        return "average"
    return "failed"


@dataclass(frozen=True)
class EvalRow:
    id: str
    dice: float
    jaccard: float
    area_auto: int
    area_truth: int
    verdict: str


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalRow, ...]
    mean_dice: float
    mean_jaccard: float
    n_failed: int

    def to_json(self) -> str:
        doc = {
            "rows": [asdict(r) for r in self.rows],
            "aggregate": {
                "mean_dice": self.mean_dice,
                "mean_jaccard": self.mean_jaccard,
                "n_failed": self.n_failed,
            },
        }
        return json.dumps(doc, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(ROW_FIELDS)
        for r in self.rows:
            writer.writerow([r.id, f"{r.dice:.6f}", f"{r.jaccard:.6f}", r.area_auto, r.area_truth, r.verdict])
        return buf.getvalue()

    def summary(self) -> str:
        return f"mean_dice={self.mean_dice:.3f} n_failed={self.n_failed}"


def evaluate_one(image_id: str, image, truth: BinaryMask, cfg, stage_dir=None):
    """Run the pipeline on one image and score it.

    Returns ``(row, result)``; ``result`` is None when the liver was not found.
    With ``stage_dir`` set, the stages are dumped to ``stage_dir/image_id``.
    """
    from .pipeline import dump_stages, run_pipeline, write_stage_images

    area_truth = truth.count()
    try:
        result = run_pipeline(image, cfg)
    except LiverNotFound as exc:
        if stage_dir is not None:
            write_stage_images(exc.stages, Path(stage_dir) / image_id)
        return EvalRow(image_id, 0.0, 0.0, 0, area_truth, "failed"), None
    mask = result.liver_mask
    d = dice(mask, truth)
    row = EvalRow(image_id, d, jaccard(mask, truth), mask.count(), area_truth, verdict(d))
    if stage_dir is not None:
        dump_stages(result, Path(stage_dir) / image_id)
    return row, result


def _evaluate_star(args):
    return evaluate_one(*args)[0]


def build_report(rows) -> EvalReport:
    rows = tuple(rows)
    return EvalReport(
        rows=rows,
        mean_dice=float(np.mean([r.dice for r in rows])),
        mean_jaccard=float(np.mean([r.jaccard for r in rows])),
        # LiverNotFound rows are the only ones with no automatic area
        n_failed=sum(1 for r in rows if r.area_auto == 0),
    )


def evaluate_corpus(pairs, cfg=None, ids=None, jobs: int = 1, stage_dir=None) -> EvalReport:
    """Segment every (image, truth) pair and aggregate the scores in input order."""
    from .pipeline import PipelineConfig

    pairs = list(pairs)
    if not pairs:
        raise EmptyCorpus("corpus is empty")
    cfg = cfg or PipelineConfig()
    ids = [str(i) for i in range(len(pairs))] if ids is None else [str(i) for i in ids]
    tasks = [(i, img, truth, cfg, stage_dir) for i, (img, truth) in zip(ids, pairs)]
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_evaluate_star, tasks))
    else:
        rows = [_evaluate_star(t) for t in tasks]
    return build_report(rows)
