import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from segseed.errors import ConfigError, EmptyPoolError, InsufficientPeaksError, InvalidBandError
from segseed.image import Image2D, Point
from segseed.seeding import (
    CandidatePool,
    ThresholdBands,
    format_seeds,
    histogram_peak_seeds,
    in_growth_order,
    parse_seeds,
    pool_from_thresholds,
    random_seeds,
    smoothed_histogram,
)


def test_default_bands():
    b = ThresholdBands()
    assert (b.csf, b.gm, b.wm) == ((0, 84), (85, 169), (170, 255))
    assert str(b) == "0,84,85,169,170,255"
    assert ThresholdBands.parse(str(b)) == b


@pytest.mark.parametrize(
    "kwargs",
    [dict(gm=(100, 90)), dict(csf=(-1, 10)), dict(wm=(170, 256)), dict(csf=(0, 90))],
)
def test_invalid_bands(kwargs):
    with pytest.raises(InvalidBandError):
        ThresholdBands(**kwargs)


def test_band_parse_errors():
    with pytest.raises(ConfigError):
        ThresholdBands.parse("1,2,3")
    with pytest.raises(ConfigError):
        ThresholdBands.parse("a,b,c,d,e,f")


def test_constant_image_leaves_gm_empty():
    img = Image2D(np.full((3, 3), 50))
    with pytest.raises(EmptyPoolError) as info:
        pool_from_thresholds(img, ThresholdBands(csf=(40, 60), gm=(61, 150), wm=(151, 255)))
    assert "GM" in str(info.value)


def test_pool_sizes_on_2x2():
    img = Image2D.from_values(2, 2, [10, 100, 200, 100])
    pool = pool_from_thresholds(img, ThresholdBands((0, 50), (51, 150), (151, 255)))
    assert pool.sizes() == (1, 2, 1)
    assert pool[1] == (Point(0, 0),)
    assert pool[2] == (Point(1, 0), Point(1, 1))
    assert pool[3] == (Point(0, 1),)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pool_members_lie_in_their_band(seed):
    rng = np.random.default_rng(seed)
    img = Image2D(rng.integers(0, 256, size=(9, 11)))
    bands = ThresholdBands()
    pool = pool_from_thresholds(img, bands)
    assert sum(pool.sizes()) == 99
    for c in (1, 2, 3):
        lo, hi = bands.band(c)
        assert all(lo <= img[p] <= hi for p in pool[c])
    for c, p in random_seeds(pool, seed):
        lo, hi = bands.band(c)
        assert lo <= img[p] <= hi


def test_random_seeds_forced_choice():
    pool = CandidatePool({1: [(0, 0)], 2: [(1, 0)], 3: [(2, 0)]})
    for rng_seed in range(5):
        assert random_seeds(pool, rng_seed) == [(1, Point(0, 0)), (2, Point(1, 0)), (3, Point(2, 0))]


def test_random_seeds_deterministic():
    pool = CandidatePool({c: [(i, c) for i in range(50)] for c in (1, 2, 3)})
    assert random_seeds(pool, 9) == random_seeds(pool, 9)
    assert [c for c, _ in random_seeds(pool, 9)] == [1, 2, 3]


def test_random_seeds_empty_pool():
    with pytest.raises(EmptyPoolError):
        random_seeds(CandidatePool({1: [(0, 0)], 2: [(1, 1)]}), 0)


def test_random_seeds_uniform():
    pool = CandidatePool({c: [(i, c) for i in range(100)] for c in (1, 2, 3)})
    counts = {c: np.zeros(100, dtype=int) for c in (1, 2, 3)}
    for draw in range(10_000):
        for c, p in random_seeds(pool, draw):
            counts[c][p.x] += 1
    for c in (1, 2, 3):
        stat = chisquare(counts[c]).statistic
        # chi-square with 99 degrees of freedom: mean 99, sd sqrt(198)
        assert abs(stat - 99) <= 3 * np.sqrt(198)


def trimodal(shape=(30, 40), modes=(40, 120, 220), seed=0, spread=3):
    rng = np.random.default_rng(seed)
    arr = rng.choice(modes, size=shape, p=[0.3, 0.4, 0.3])
    arr = arr + rng.integers(-spread, spread + 1, size=shape)
    return Image2D(np.clip(arr, 0, 255))


def independent_peak_scan(img, window=5):
    hist = [0] * 256
    for v in img.data:
        hist[v] += 1
    half = window // 2
    smooth = [sum(hist[j] for j in range(i - half, i + half + 1) if 0 <= j < 256) / window
              for i in range(256)]
    peaks = []
    i = 0
    while i < 256:
        j = i
        while j + 1 < 256 and smooth[j + 1] == smooth[i]:
            j += 1
        left = smooth[i - 1] if i > 0 else -1
        right = smooth[j + 1] if j < 255 else -1
        if left < smooth[i] > right:
            peaks.append((i + j) // 2)
        i = j + 1
    peaks.sort(key=lambda b: (-smooth[b], b))
    return sorted(peaks[:3])


def test_histogram_peaks_on_trimodal_image():
    img = trimodal(spread=0)
    seeds = histogram_peak_seeds(img)
    assert [img[p] for _, p in seeds] == [40, 120, 220]
    assert [c for c, _ in seeds] == [1, 2, 3]
    assert independent_peak_scan(img) == [40, 120, 220]


def test_histogram_peaks_first_row_major_pixel():
    img = trimodal(spread=0, seed=4)
    flat = img.data
    for (_, p), v in zip(histogram_peak_seeds(img), (40, 120, 220)):
        first = flat.index(v)
        assert p == Point(first % img.width, first // img.width)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_histogram_peaks_match_independent_scan(seed):
    img = trimodal(seed=seed)
    seeds = histogram_peak_seeds(img)
    bins = independent_peak_scan(img)
    present = sorted(set(img.data))
    for (_, p), b in zip(seeds, bins):
        nearest = min(present, key=lambda v: (abs(v - b), v))
        assert img[p] == nearest


def test_histogram_even_window_smoothing():
    img = Image2D(np.array([[10, 10, 11]]))
    h = smoothed_histogram(img, 2)
    # bin i averages bins i and i + 1
    assert (h[9], h[10], h[11], h[12]) == (1.0, 1.5, 0.5, 0.0)


def test_histogram_invariant_under_pixel_permutation():
    img = trimodal(seed=2)
    rng = np.random.default_rng(7)
    shuffled = Image2D(rng.permutation(img.pixels.ravel()).reshape(img.shape))
    a = [img[p] for _, p in histogram_peak_seeds(img)]
    b = [shuffled[p] for _, p in histogram_peak_seeds(shuffled)]
    assert a == b


def test_histogram_constant_image():
    with pytest.raises(InsufficientPeaksError):
        histogram_peak_seeds(Image2D(np.full((8, 8), 90)))


def test_histogram_bimodal_image():
    arr = np.where(np.arange(64).reshape(8, 8) % 2, 30, 200)
    with pytest.raises(InsufficientPeaksError):
        histogram_peak_seeds(Image2D(arr))


def test_seed_text_round_trip():
    seeds = parse_seeds("1:3,4; 2:0,0;3:10,2")
    assert seeds == [(1, Point(3, 4)), (2, Point(0, 0)), (3, Point(10, 2))]
    assert parse_seeds(format_seeds(seeds)) == seeds
    with pytest.raises(ConfigError):
        parse_seeds("1:3;2:4,4")


def test_growth_order():
    seeds = [(1, Point(0, 0)), (2, Point(1, 1)), (3, Point(2, 2))]
    assert [c for c, _ in in_growth_order(seeds)] == [2, 3, 1]
    assert [c for c, _ in in_growth_order(seeds, (1, 2, 3))] == [1, 2, 3]
