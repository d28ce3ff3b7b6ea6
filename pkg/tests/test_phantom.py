import numpy as np
import pytest

from oracles import connected
from segseed.errors import ConfigError
from segseed.image import Point
from segseed.metrics import rms_error
from segseed.phantom import PhantomSpec, generate, labels_from_brainweb
from segseed.regiongrow import GrowthCriterion, segment


@pytest.mark.parametrize("geometry", ["concentric", "blobs"])
def test_noiseless_intensities_equal_means(geometry):
    image, labels = generate(PhantomSpec(64, 48, (40, 120, 220), 0.0, geometry, 3))
    lut = np.array([0, 40, 120, 220])
    assert np.array_equal(image.pixels, lut[labels.pixels])


@pytest.mark.parametrize("geometry", ["concentric", "blobs"])
def test_deterministic(geometry):
    spec = PhantomSpec(40, 40, noise_std=7, geometry=geometry, rng_seed=11)
    a, b = generate(spec), generate(spec)
    assert a[0] == b[0] and a[1] == b[1]
    c = generate(PhantomSpec(40, 40, noise_std=7, geometry=geometry, rng_seed=12))
    assert c[0] != a[0]


def test_noisy_class_means():
    image, labels = generate(PhantomSpec(128, 128, (40, 120, 220), 10.0, "concentric", 5))
    for c, mean in zip((1, 2, 3), (40, 120, 220)):
        values = image.pixels[labels.pixels == c].astype(float)
        assert values.size >= 160
        assert abs(values.mean() - mean) <= 1.0


@pytest.mark.parametrize("geometry", ["concentric", "blobs"])
@pytest.mark.parametrize("size", [(16, 16), (17, 31), (64, 64), (128, 96)])
def test_class_coverage_and_connectivity(geometry, size):
    for seed in range(5):
        _, labels = generate(PhantomSpec(*size, geometry=geometry, rng_seed=seed))
        n = labels.pixels.size
        for c in (1, 2, 3):
            mask = labels.pixels == c
            assert mask.sum() >= 0.01 * n
            assert connected(mask, "8")


def test_too_small():
    with pytest.raises(ConfigError):
        PhantomSpec(15, 40)
    with pytest.raises(ConfigError):
        PhantomSpec(40, 8)


def test_spec_validation():
    with pytest.raises(ConfigError):
        PhantomSpec(geometry="spiral")
    with pytest.raises(ConfigError):
        PhantomSpec(noise_std=-1)
    with pytest.raises(ConfigError):
        PhantomSpec(class_means=(40, 60, 220), noise_std=10, separable=True)
    PhantomSpec(class_means=(40, 80, 220), noise_std=10, separable=True)


@pytest.mark.parametrize("geometry", ["concentric", "blobs"])
def test_noiseless_phantom_is_segmentable(geometry):
    image, truth = generate(PhantomSpec(48, 48, geometry=geometry, rng_seed=2))
    rng = np.random.default_rng(0)
    for _ in range(5):
        seeds = []
        for c in (2, 3, 1):
            ys, xs = np.nonzero(truth.pixels == c)
            i = rng.integers(len(xs))
            seeds.append((c, Point(int(xs[i]), int(ys[i]))))
        grown = segment(image, seeds, GrowthCriterion(2.5, 5.0))
        assert rms_error(grown, truth).rms_overall == 0.0


def test_brainweb_label_conversion():
    crisp = np.array([[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]])
    assert labels_from_brainweb(crisp).data == [0, 1, 2, 3, 0, 0, 0, 0, 0, 0]
    with pytest.raises(ConfigError):
        labels_from_brainweb(np.zeros(4))


def test_spec_lines():
    lines = PhantomSpec(32, 20, noise_std=2.5).to_lines()
    assert "noise_std=2.5" in lines and "width=32" in lines
