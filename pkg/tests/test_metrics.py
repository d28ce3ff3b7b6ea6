import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from segseed.errors import DimensionMismatchError
from segseed.image import LabelMap
from segseed.metrics import EvalReport, rms_error


def labels(rows):
    return LabelMap(np.array(rows))


def test_identical_maps():
    a = labels([[0, 1], [2, 3]])
    r = rms_error(a, a)
    assert r.rms_overall == 0.0
    assert r.dice_per_class == {1: 1.0, 2: 1.0, 3: 1.0}
    assert r.pixel_count == 4


def test_all_gm_vs_background():
    r = rms_error(labels([[0, 0], [0, 0]]), labels([[2, 2], [2, 2]]))
    assert r.rms_per_class[2] == 1.0
    assert r.dice_per_class[2] == 0.0
    assert r.rms_per_class[1] == r.rms_per_class[3] == 0.0
    # dice of classes absent from both maps
    assert r.dice_per_class[1] == r.dice_per_class[3] == 1.0
    assert r.rms_overall == pytest.approx(math.sqrt(4 / 12))


def test_hand_computed_mixture():
    produced = labels([[1, 1, 2], [3, 0, 2]])
    reference = labels([[1, 2, 2], [3, 3, 0]])
    r = rms_error(produced, reference)
    # class 1: disagree at (1,0) -> 1/6; class 2: (1,0),(2,1) -> 2/6; class 3: (1,1) -> 1/6
    assert r.rms_per_class[1] == pytest.approx(math.sqrt(1 / 6))
    assert r.rms_per_class[2] == pytest.approx(math.sqrt(2 / 6))
    assert r.rms_per_class[3] == pytest.approx(math.sqrt(1 / 6))
    assert r.rms_overall == pytest.approx(math.sqrt(4 / 18))
    assert r.dice_per_class[1] == pytest.approx(2 * 1 / 3)
    assert r.dice_per_class[2] == pytest.approx(2 * 1 / 4)
    assert r.dice_per_class[3] == pytest.approx(2 * 1 / 3)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        rms_error(LabelMap.blank(2, 3), LabelMap.blank(3, 2))


def test_csv_and_text():
    r = rms_error(labels([[0, 0], [0, 0]]), labels([[2, 2], [2, 2]]))
    assert EvalReport.CSV_HEADER.count(",") == r.csv_row().count(",")
    assert r.csv_row() == "0.577350,0.000000,1.000000,0.000000,1.000000,0.000000,1.000000,4"
    assert "RMS overall   0.5774" in r.to_text()


maps = st.integers(1, 6).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 3), min_size=n * n, max_size=n * n),
        st.lists(st.integers(0, 3), min_size=n * n, max_size=n * n),
        st.just(n),
    )
)


@settings(max_examples=200, deadline=None)
@given(maps)
def test_properties(data):
    a_vals, b_vals, n = data
    a = LabelMap(np.array(a_vals).reshape(n, n))
    b = LabelMap(np.array(b_vals).reshape(n, n))
    ab, ba = rms_error(a, b), rms_error(b, a)
    assert ab.rms_overall == ba.rms_overall
    assert (ab.rms_overall == 0) == (a == b)
    for c in (1, 2, 3):
        assert 0.0 <= ab.rms_per_class[c] <= 1.0
        assert 0.0 <= ab.dice_per_class[c] <= 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=9, max_size=9), st.integers(1, 3), st.data())
def test_one_more_disagreement_increases_rms(vals, c, data):
    ref = LabelMap(np.array(vals).reshape(3, 3))
    agree = [i for i in range(9) if vals[i] != c]
    if not agree:
        return
    produced = np.array(vals)
    before = rms_error(LabelMap(produced.reshape(3, 3)), ref).rms_per_class[c]
    i = data.draw(st.sampled_from(agree))
    produced[i] = c
    after = rms_error(LabelMap(produced.reshape(3, 3)), ref).rms_per_class[c]
    assert after > before
