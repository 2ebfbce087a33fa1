"""Overlap metrics between a segmentation mask and a reference mask."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid_ops
from .errors import ParameterError

CSV_HEADER = "dice,jaccard,precision,recall"


@dataclass(frozen=True)
class MetricReport:
    dice: float
    jaccard: float
    precision: float
    recall: float

    def as_dict(self) -> dict:
        return {
            "dice": self.dice,
            "jaccard": self.jaccard,
            "precision": self.precision,
            "recall": self.recall,
        }

    def csv_row(self) -> str:
        return f"{self.dice:.6f},{self.jaccard:.6f},{self.precision:.6f},{self.recall:.6f}"


def mask_from_field(phi) -> np.ndarray:
    """Foreground is the strictly positive phase of the field."""
    return np.asarray(phi, dtype=np.float64) > 0.0


def evaluate(segmentation, ground_truth) -> MetricReport:
    """Dice, Jaccard, precision and recall from pixel counts.

    An empty segmentation yields all-zero metrics (precision included, by
    the 0/0 := 0 convention). An empty ground truth is a caller error.
    """
    seg = grid_ops.as_mask(segmentation)
    gt = grid_ops.as_mask(ground_truth, like=seg)
    n_gt = int(gt.sum())
    if n_gt == 0:
        raise ParameterError("ground-truth mask is empty")
    n_seg = int(seg.sum())
    n_inter = int((seg & gt).sum())
    n_union = n_seg + n_gt - n_inter
    dice = 2.0 * n_inter / (n_seg + n_gt)
    jaccard = n_inter / n_union
    precision = n_inter / n_seg if n_seg > 0 else 0.0
    recall = n_inter / n_gt
    return MetricReport(dice=dice, jaccard=jaccard, precision=precision, recall=recall)
