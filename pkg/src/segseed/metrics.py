"""Segmentation error against a reference label map."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from segseed.image import CLASS_NAMES, TISSUE_CLASSES, LabelMap, check_same_shape


@dataclass(frozen=True)
class EvalReport:
    rms_overall: float
    rms_per_class: dict[int, float]
    dice_per_class: dict[int, float]
    pixel_count: int

    CSV_HEADER = ("rms_overall,rms_csf,rms_gm,rms_wm,dice_csf,dice_gm,dice_wm,pixel_count")

    def csv_row(self) -> str:
        fields = [self.rms_overall]
        fields += [self.rms_per_class[c] for c in TISSUE_CLASSES]
        fields += [self.dice_per_class[c] for c in TISSUE_CLASSES]
        return ",".join(f"{v:.6f}" for v in fields) + f",{self.pixel_count}"

    def to_text(self) -> str:
        lines = [f"pixels        {self.pixel_count}", f"RMS overall   {self.rms_overall:.4f}"]
        for c in TISSUE_CLASSES:
            lines.append(
                f"{CLASS_NAMES[c]:<4} rms {self.rms_per_class[c]:.4f}  dice {self.dice_per_class[c]:.4f}"
            )
        return "\n".join(lines) + "\n"


def rms_error(produced: LabelMap, reference: LabelMap) -> EvalReport:
    """Root-mean-square mask difference per class and pooled over the three classes.

    Dice is 1 for a class absent from both maps.
    """
    check_same_shape(produced, reference, "produced and reference label maps")
    p_all = produced.pixels
    g_all = reference.pixels
    n = p_all.size
    rms, dice = {}, {}
    total = 0
    for c in TISSUE_CLASSES:
        p = p_all == c
        g = g_all == c
        wrong = int(np.count_nonzero(p != g))
        total += wrong
        rms[c] = math.sqrt(wrong / n)
        size = int(p.sum()) + int(g.sum())
        dice[c] = 1.0 if size == 0 else 2.0 * int(np.count_nonzero(p & g)) / size
    return EvalReport(math.sqrt(total / (3 * n)), rms, dice, n)
