"""Synthetic brain-like phantoms with exact ground truth.

Two layouts are available: ``concentric`` (WM core inside a GM ring inside a
CSF ring, on background) and ``blobs`` (three disjoint ellipses, one per
class).  Intensities are the class mean plus Gaussian noise, rounded and
clamped to 8 bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from segseed.errors import ConfigError
from segseed.image import BACKGROUND, CSF, GM, TISSUE_CLASSES, WM, Image2D, LabelMap

GEOMETRIES = ("concentric", "blobs")
MIN_SIZE = 16
MIN_CLASS_FRACTION = 0.01


@dataclass(frozen=True)
class PhantomSpec:
    width: int = 128
    height: int = 128
    class_means: tuple[float, float, float] = (40.0, 120.0, 220.0)
    noise_std: float = 0.0
    geometry: str = "concentric"
    rng_seed: int = 0
    background_mean: float = 0.0
    separable: bool = False

    def __post_init__(self):
        if self.width < MIN_SIZE or self.height < MIN_SIZE:
            raise ConfigError(
                f"phantom must be at least {MIN_SIZE}x{MIN_SIZE} to hold three classes, "
                f"got {self.width}x{self.height}"
            )
        if self.geometry not in GEOMETRIES:
            raise ConfigError(f"geometry must be one of {GEOMETRIES}, got {self.geometry!r}")
        if len(self.class_means) != 3:
            raise ConfigError("class_means needs one value per class (CSF, GM, WM)")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be >= 0")
        if self.separable:
            m = sorted(self.class_means)
            gap = min(m[1] - m[0], m[2] - m[1])
            if gap < 4 * self.noise_std:
                raise ConfigError(
                    f"class means {self.class_means} are not separated by 4*noise_std "
                    f"({4 * self.noise_std})"
                )

    def to_lines(self) -> list[str]:
        return [
            f"width={self.width}",
            f"height={self.height}",
            "class_means=" + ",".join(f"{m:g}" for m in self.class_means),
            f"noise_std={self.noise_std:g}",
            f"geometry={self.geometry}",
            f"rng_seed={self.rng_seed}",
            f"background_mean={self.background_mean:g}",
        ]


def _concentric(h, w):
    y, x = np.mgrid[0:h, 0:w].astype(float)
    cy, cx = (h - 1) / 2, (w - 1) / 2
    r = np.hypot((x - cx) / (0.46 * w), (y - cy) / (0.42 * h))
    labels = np.full((h, w), BACKGROUND, dtype=np.uint8)
    labels[r <= 1.0] = CSF
    labels[r <= 0.75] = GM
    labels[r <= 0.5] = WM
    return labels


def _blobs(h, w, rng, max_tries=2000):
    y, x = np.mgrid[0:h, 0:w].astype(float)
    side = min(h, w)
    labels = np.full((h, w), BACKGROUND, dtype=np.uint8)
    # occupied pixels grown by one, so blobs never touch even diagonally
    blocked = np.zeros((h, w), dtype=bool)
    for c in TISSUE_CLASSES:
        for _ in range(max_tries):
            ax, ay = rng.uniform(0.12, 0.22, size=2) * side
            cx = rng.uniform(ax, w - 1 - ax)
            cy = rng.uniform(ay, h - 1 - ay)
            inside = ((x - cx) / ax) ** 2 + ((y - cy) / ay) ** 2 <= 1.0
            if not (inside & blocked).any() and inside.mean() >= MIN_CLASS_FRACTION:
                break
        else:
            raise ConfigError(f"could not place three disjoint blobs in {w}x{h}")
        labels[inside] = c
        grown = inside.copy()
        grown[1:, :] |= inside[:-1, :]
        grown[:-1, :] |= inside[1:, :]
        grown[:, 1:] |= grown[:, :-1].copy()
        grown[:, :-1] |= grown[:, 1:].copy()
        blocked |= grown
    return labels


def generate(spec: PhantomSpec) -> tuple[Image2D, LabelMap]:
    rng = np.random.default_rng(spec.rng_seed)
    h, w = spec.height, spec.width
    if spec.geometry == "concentric":
        labels = _concentric(h, w)
    else:
        labels = _blobs(h, w, rng)
    means = np.array([spec.background_mean, *spec.class_means], dtype=float)
    values = means[labels]
    if spec.noise_std > 0:
        values = values + rng.normal(0.0, spec.noise_std, size=values.shape)
    image = np.clip(np.rint(values), 0, 255).astype(np.uint8)
    return Image2D(image), LabelMap(labels)


# BrainWeb crisp label volumes use 0 background, 1 CSF, 2 grey matter,
# 3 white matter and 4..9 for fat, muscle, skin, skull, glial matter and
# connective tissue.
def labels_from_brainweb(crisp_slice) -> LabelMap:
    """Convert one 2-D slice of a BrainWeb crisp label volume to a LabelMap.

    To use real data, export a T1 slice as an 8-bit P5 PGM and write the
    result of this function with ``save_pgm``; both files then feed the CLI
    as ``--input`` and ``--reference``.  Non-brain tissues become background.
    """
    crisp = np.asarray(crisp_slice)
    if crisp.ndim != 2:
        raise ConfigError("expected a 2-D label slice")
    out = np.where(np.isin(crisp, (CSF, GM, WM)), crisp, BACKGROUND)
    return LabelMap(out.astype(np.uint8))
