"""Baseline seed selection: threshold candidate pools, random draws, histogram peaks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.signal import find_peaks

from segseed.errors import (
    ConfigError,
    EmptyPoolError,
    InsufficientPeaksError,
    InvalidBandError,
    InvalidClassError,
)
from segseed.image import CLASS_NAMES, CSF, GM, TISSUE_CLASSES, WM, Image2D, Point

SeedList = list[tuple[int, Point]]


@dataclass(frozen=True)
class ThresholdBands:
    """Inclusive intensity interval per tissue class."""

    csf: tuple[int, int] = (0, 84)
    gm: tuple[int, int] = (85, 169)
    wm: tuple[int, int] = (170, 255)

    def __post_init__(self):
        for name in ("csf", "gm", "wm"):
            band = getattr(self, name)
            if len(band) != 2:
                raise InvalidBandError(f"{name} band must be a (lo, hi) pair")
            lo, hi = int(band[0]), int(band[1])
            if not 0 <= lo <= hi <= 255:
                raise InvalidBandError(f"{name.upper()} band [{lo}, {hi}] violates 0 <= lo <= hi <= 255")
            object.__setattr__(self, name, (lo, hi))
        ordered = sorted((self.csf, self.gm, self.wm))
        for (_, hi), (lo, _) in zip(ordered, ordered[1:]):
            if lo <= hi:
                raise InvalidBandError("threshold bands overlap")

    def band(self, class_code: int) -> tuple[int, int]:
        try:
            return {CSF: self.csf, GM: self.gm, WM: self.wm}[class_code]
        except KeyError:
            raise InvalidClassError(f"no band for class {class_code!r}") from None

    @classmethod
    def parse(cls, text: str) -> "ThresholdBands":
        """Six integers ``csf_lo,csf_hi,gm_lo,gm_hi,wm_lo,wm_hi``."""
        parts = [p for p in text.replace(";", ",").replace(" ", ",").split(",") if p]
        if len(parts) != 6:
            raise ConfigError(f"bands need six integers, got {len(parts)}: {text!r}")
        try:
            v = [int(p) for p in parts]
        except ValueError:
            raise ConfigError(f"bands must be integers: {text!r}") from None
        return cls((v[0], v[1]), (v[2], v[3]), (v[4], v[5]))

    def __str__(self):
        return ",".join(str(v) for band in (self.csf, self.gm, self.wm) for v in band)


@dataclass(frozen=True)
class CandidatePool:
    """Candidate seed positions per class, in row-major order."""

    candidates: Mapping[int, tuple[Point, ...]]

    def __post_init__(self):
        object.__setattr__(
            self, "candidates",
            {c: tuple(Point(*p) for p in self.candidates.get(c, ())) for c in TISSUE_CLASSES},
        )

    def __getitem__(self, class_code: int) -> tuple[Point, ...]:
        return self.candidates[class_code]

    def sizes(self) -> tuple[int, int, int]:
        return tuple(len(self.candidates[c]) for c in TISSUE_CLASSES)

    def require_nonempty(self) -> None:
        for c in TISSUE_CLASSES:
            if not self.candidates[c]:
                raise EmptyPoolError(CLASS_NAMES[c])


def pool_from_thresholds(image: Image2D, bands: ThresholdBands = ThresholdBands()) -> CandidatePool:
    pix = image.pixels
    candidates = {}
    for c in TISSUE_CLASSES:
        lo, hi = bands.band(c)
        ys, xs = np.nonzero((pix >= lo) & (pix <= hi))
        candidates[c] = tuple(Point(int(x), int(y)) for y, x in zip(ys, xs))
    pool = CandidatePool(candidates)
    pool.require_nonempty()
    return pool


def random_seeds(pool: CandidatePool, rng_seed: int) -> SeedList:
    """One uniformly drawn candidate per class, ordered CSF, GM, WM."""
    pool.require_nonempty()
    rng = np.random.default_rng(rng_seed)
    return [(c, pool[c][int(rng.integers(len(pool[c])))]) for c in TISSUE_CLASSES]


def window_sums(image: Image2D, window: int = 5) -> np.ndarray:
    """Integer moving sums of the 256-bin histogram, zero padded.

    Bin i sums bins i - (window - 1) // 2 .. i + window // 2.  Kept integral
    so plateaus compare exactly.
    """
    if window < 1:
        raise ConfigError(f"smoothing window must be >= 1, got {window}")
    hist = np.bincount(image.pixels.ravel(), minlength=256).astype(np.int64)
    padded = np.concatenate((np.zeros(window, dtype=np.int64), np.cumsum(hist),
                             np.full(window, hist.sum(), dtype=np.int64)))
    lo = np.arange(256) - (window - 1) // 2 - 1 + window
    hi = np.arange(256) + window // 2 + window
    return padded[hi] - padded[lo]


def smoothed_histogram(image: Image2D, window: int = 5) -> np.ndarray:
    """256-bin histogram smoothed by a centred moving average."""
    return window_sums(image, window) / window


def histogram_peak_seeds(image: Image2D, smoothing_window: int = 5, num_classes: int = 3) -> SeedList:
    """Seeds at the three tallest peaks of the smoothed histogram.

    Peaks are assigned to CSF, GM, WM in ascending intensity order.  Each seed
    is the first row-major pixel whose intensity equals the peak bin; if that
    bin holds no pixel the nearest present intensity is used (lower on ties).
    """
    if num_classes != 3:
        raise ConfigError("exactly three classes are supported")
    smooth = window_sums(image, smoothing_window)
    # pad so that maxima at bins 0 and 255 count; plateaus report their middle bin
    peaks, _ = find_peaks(np.concatenate(([-1], smooth, [-1])))
    peaks = peaks - 1
    if len(peaks) < num_classes:
        raise InsufficientPeaksError(
            f"histogram has {len(peaks)} local maxima after smoothing, need {num_classes}"
        )
    tallest = sorted(peaks.tolist(), key=lambda b: (-smooth[b], b))[:num_classes]
    present = np.flatnonzero(np.bincount(image.pixels.ravel(), minlength=256))
    flat = image.pixels.ravel()
    seeds = []
    for c, b in zip(TISSUE_CLASSES, sorted(tallest)):
        value = int(present[np.argmin(np.abs(present - b))])
        idx = int(np.flatnonzero(flat == value)[0])
        seeds.append((c, Point(idx % image.width, idx // image.width)))
    return seeds


def parse_seeds(text: str) -> SeedList:
    """Parse ``"c:x,y;c:x,y;..."`` into (class, Point) pairs."""
    seeds = []
    for item in filter(None, (s.strip() for s in text.split(";"))):
        try:
            cls_part, xy = item.split(":")
            x, y = xy.split(",")
            seeds.append((int(cls_part), Point(int(x), int(y))))
        except ValueError:
            raise ConfigError(f"malformed seed {item!r}; expected class:x,y") from None
    return seeds


def format_seeds(seeds: SeedList) -> str:
    return ";".join(f"{c}:{p.x},{p.y}" for c, p in seeds)


def in_growth_order(seeds: SeedList, order=(GM, WM, CSF)) -> SeedList:
    """Reorder a per-class seed list into the sequence regions are grown in."""
    rank = {c: i for i, c in enumerate(order)}
    return sorted(seeds, key=lambda s: rank.get(s[0], len(rank)))
