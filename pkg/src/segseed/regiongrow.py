"""Seeded region growing with running mean / standard deviation.

A region starts from one seed pixel with the seed intensity as its mean and a
standard deviation of zero.  Neighbours are visited breadth-first; each one is
tested against the statistics as they stand at that moment and, if accepted,
folded into the statistics straight away.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from segseed.errors import ConfigError, InvalidClassError, SeedRejectedError
from segseed.image import TISSUE_CLASSES, Image2D, LabelMap, Point

EXACT = "exact"
PAPER_LITERAL = "paper-literal"
STATS_MODES = (EXACT, PAPER_LITERAL)


class RegionStats(NamedTuple):
    """Running statistics of a region.

    ``total`` and ``total_sq`` are the exact integer sum and sum of squares of
    the accepted intensities.  They are None for hand-built statistics.
    """

    count: int
    mean: float
    std: float
    total: int | None = None
    total_sq: int | None = None

    @classmethod
    def from_seed(cls, intensity) -> "RegionStats":
        v = _as_int(intensity)
        return cls(1, float(v), 0.0, v, v * v)


def _as_int(intensity) -> int:
    v = int(intensity)
    if v != intensity:
        raise ValueError(f"intensity must be an integer, got {intensity!r}")
    return v


def stats_update(stats: RegionStats, intensity, mode: str = EXACT) -> RegionStats:
    """Fold one accepted intensity into ``stats``.

    Exact mode gives the population mean and standard deviation of everything
    accepted so far, from exact integer sums (n*sum_sq - sum^2 is the
    mean-centred second moment scaled by n^2, so nothing cancels).
    The ``paper-literal`` mode uses ``V_N = sqrt(((N-2) V_{N-1}^2 + I_N^2) / N)`` as
    written, which is not a variance recurrence; it exists for comparison runs.
    """
    n = stats.count + 1
    v = _as_int(intensity)
    if mode == EXACT:
        if stats.total is None:
            raise ValueError("exact mode needs statistics built with RegionStats.from_seed")
        s = stats.total + v
        q = stats.total_sq + v * v
        return RegionStats(n, s / n, math.sqrt(n * q - s * s) / n, s, q)
    if mode == PAPER_LITERAL:
        mean = ((n - 1) * stats.mean + v) / n
        std = math.sqrt(((n - 2) * stats.std * stats.std + v * v) / n)
        s = None if stats.total is None else stats.total + v
        q = None if stats.total_sq is None else stats.total_sq + v * v
        return RegionStats(n, mean, std, s, q)
    raise ConfigError(f"unknown stats mode {mode!r}")


class Neighborhood(enum.Enum):
    FOUR = "4"
    DIAGONAL_FOUR = "diag4"
    EIGHT = "8"

    @property
    def offsets(self) -> tuple[tuple[int, int], ...]:
        """(dx, dy) pairs in visiting order: N, S, W, E, then NW, NE, SW, SE."""
        return _OFFSETS[self]

    @classmethod
    def parse(cls, text) -> "Neighborhood":
        if isinstance(text, cls):
            return text
        aliases = {"4": cls.FOUR, "four": cls.FOUR, "diag4": cls.DIAGONAL_FOUR,
                   "diagonal-four": cls.DIAGONAL_FOUR, "8": cls.EIGHT, "eight": cls.EIGHT}
        try:
            return aliases[str(text).lower()]
        except KeyError:
            raise ConfigError(f"unknown neighborhood {text!r}; use 4, diag4 or 8") from None


_AXIAL = ((0, -1), (0, 1), (-1, 0), (1, 0))
_DIAGONAL = ((-1, -1), (1, -1), (-1, 1), (1, 1))
_OFFSETS = {
    Neighborhood.FOUR: _AXIAL,
    Neighborhood.DIAGONAL_FOUR: _DIAGONAL,
    Neighborhood.EIGHT: _AXIAL + _DIAGONAL,
}


@dataclass(frozen=True)
class GrowthCriterion:
    k: float = 2.5
    sigma_floor: float = 5.0
    stats_mode: str = EXACT

    def __post_init__(self):
        if not self.k > 0:
            raise ConfigError(f"k must be > 0, got {self.k}")
        if not self.sigma_floor > 0:
            raise ConfigError(f"sigma_floor must be > 0, got {self.sigma_floor}")
        if self.stats_mode not in STATS_MODES:
            raise ConfigError(f"stats_mode must be one of {STATS_MODES}, got {self.stats_mode!r}")


def accepts(criterion: GrowthCriterion, stats: RegionStats, intensity) -> bool:
    """``|intensity - mean| <= k * max(std, sigma_floor)``.

    With exact integer sums available the comparison is done on squared,
    n^2-scaled quantities so boundary ties resolve the same way everywhere.
    """
    k, floor = criterion.k, criterion.sigma_floor
    if stats.total is None or int(intensity) != intensity:
        return abs(intensity - stats.mean) <= k * max(stats.std, floor)
    n, s, v = stats.count, stats.total, int(intensity)
    if criterion.stats_mode == EXACT:
        spread = max(n * stats.total_sq - s * s, n * n * floor * floor)
    else:
        spread = n * n * max(stats.std * stats.std, floor * floor)
    return (n * v - s) ** 2 <= k * k * spread


def _grow(values, width, height, seed_index, taken, criterion, offsets):
    """Core BFS over a flat list of integer intensities.

    ``taken`` is a bytearray; nonzero entries are unavailable.  It is updated
    in place: accepted pixels become 1, pixels tested and rejected during this
    growth are marked 2 and reset to 0 before returning.
    Returns (accepted flat indices in acceptance order, final RegionStats).
    The arithmetic is an inlined copy of ``accepts`` and ``stats_update``.
    """
    k2 = criterion.k * criterion.k
    f2 = criterion.sigma_floor * criterion.sigma_floor
    exact = criterion.stats_mode == EXACT

    v0 = values[seed_index]
    n, s, q = 1, v0, v0 * v0
    mean, std = float(v0), 0.0
    taken[seed_index] = 1
    region = [seed_index]
    rejected = []
    queue = deque(region)
    pop = queue.popleft
    push = queue.append
    while queue:
        idx = pop()
        py, px = divmod(idx, width)
        for dx, dy in offsets:
            nx = px + dx
            ny = py + dy
            if nx < 0 or ny < 0 or nx >= width or ny >= height:
                continue
            j = ny * width + nx
            if taken[j]:
                continue
            v = values[j]
            d = n * v - s
            if exact:
                spread = n * q - s * s
                floor_n2 = n * n * f2
                ok = d * d <= k2 * (spread if spread > floor_n2 else floor_n2)
            else:
                var = std * std
                ok = d * d <= k2 * n * n * (var if var > f2 else f2)
            if ok:
                n += 1
                s += v
                q += v * v
                if exact:
                    std = math.sqrt(n * q - s * s) / n
                else:
                    mean = ((n - 1) * mean + v) / n
                    std = math.sqrt(((n - 2) * std * std + v * v) / n)
                taken[j] = 1
                region.append(j)
                push(j)
            else:
                taken[j] = 2
                rejected.append(j)
    for j in rejected:
        taken[j] = 0
    if exact:
        mean = s / n
    return region, RegionStats(n, mean, std, s, q)


def grow_region(
    image: Image2D,
    seed: Point,
    criterion: GrowthCriterion = GrowthCriterion(),
    nbhd: Neighborhood = Neighborhood.EIGHT,
    claimable=None,
) -> tuple[frozenset[Point], RegionStats]:
    """Grow one region from ``seed``.

    ``claimable`` is an optional boolean array of the image's shape; pixels
    where it is False are never visited.  Every pixel is tested at most once,
    when first reached; a rejection is final for this growth.
    """
    seed = Point(*seed)
    if not image.contains(seed):
        raise SeedRejectedError(f"seed {seed} lies outside the {image.width}x{image.height} image")
    if claimable is None:
        taken = bytearray(image.width * image.height)
    else:
        claimable = np.asarray(claimable, dtype=bool)
        if claimable.shape != image.shape:
            raise ConfigError("claimable mask shape does not match the image")
        taken = bytearray((~claimable).astype(np.uint8).ravel().tobytes())
    seed_index = seed.y * image.width + seed.x
    if taken[seed_index]:
        raise SeedRejectedError(f"seed {seed} is not claimable")
    region, stats = _grow(image.data, image.width, image.height, seed_index, taken,
                          criterion, Neighborhood.parse(nbhd).offsets)
    w = image.width
    return frozenset(Point(i % w, i // w) for i in region), stats


def check_seeds(image: Image2D, seeds: Sequence[tuple[int, Point]]) -> None:
    seen = {}
    for class_code, p in seeds:
        if class_code not in TISSUE_CLASSES:
            raise InvalidClassError(f"invalid class code {class_code!r} in seed list")
        p = Point(*p)
        if not image.contains(p):
            raise SeedRejectedError(
                f"class {class_code} seed {p} lies outside the {image.width}x{image.height} image",
                class_code,
            )
        if p in seen:
            raise ConfigError(f"seed {p} given for both class {seen[p]} and class {class_code}")
        seen[p] = class_code


def segment(
    image: Image2D,
    seeds: Sequence[tuple[int, Point]],
    criterion: GrowthCriterion = GrowthCriterion(),
    nbhd: Neighborhood = Neighborhood.EIGHT,
) -> LabelMap:
    """Grow one region per (class, seed) pair, in list order.

    Later regions cannot claim pixels owned by earlier ones.  Unclaimed
    pixels stay background (0).
    """
    check_seeds(image, seeds)
    offsets = Neighborhood.parse(nbhd).offsets
    w, h = image.width, image.height
    values = image.data
    taken = bytearray(w * h)
    labels = np.zeros(w * h, dtype=np.uint8)
    for class_code, p in seeds:
        idx = p[1] * w + p[0]
        if taken[idx]:
            raise SeedRejectedError(
                f"class {class_code} seed {Point(*p)} is on a pixel already claimed "
                f"by class {int(labels[idx])}",
                class_code,
            )
        region, _ = _grow(values, w, h, idx, taken, criterion, offsets)
        labels[region] = class_code
    return LabelMap(labels.reshape(h, w))
