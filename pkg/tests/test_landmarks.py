import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from tubesynth import ClavicleMask, LandmarkExtractionError, ValidationError, extract_landmarks

from conftest import squares_mask


def as_mask(pixels, source_id="fixture"):
    return ClavicleMask(pixels=pixels, source_id=source_id)


def test_two_squares_fixture():
    marks = extract_landmarks(as_mask(squares_mask()))
    assert (marks.mid_x, marks.low_y) == (110, 80)


def test_single_blob_raises_with_source_id():
    mask = np.zeros((224, 224), dtype=np.uint8)
    mask[50:80, 100:130] = 1
    with pytest.raises(LandmarkExtractionError, match="case42"):
        extract_landmarks(as_mask(mask, "case42"))


def test_speckle_below_area_threshold_is_ignored():
    mask = squares_mask()
    mask[5:8, 5:8] = 1  # 9 px blob must not become a clavicle
    marks = extract_landmarks(as_mask(mask))
    assert (marks.mid_x, marks.low_y) == (110, 80)


def test_speckle_only_companion_raises():
    mask = np.zeros((224, 224), dtype=np.uint8)
    mask[50:80, 100:130] = 1
    mask[5:9, 5:9] = 1  # 16 px < minimum area
    with pytest.raises(LandmarkExtractionError, match="area"):
        extract_landmarks(as_mask(mask))


def test_diagonally_touching_blobs_stay_separate():
    # 4-connectivity: corner contact does not merge components
    mask = np.zeros((64, 64), dtype=np.uint8)
    mask[10:20, 10:20] = 1
    mask[20:30, 20:30] = 1
    marks = extract_landmarks(as_mask(mask))
    assert marks.low_y == 29


def test_horizontal_flip_equivariance_integer_midpoint():
    # 11 px wide blobs give integer centroids 60 / 160
    mask = np.zeros((224, 224), dtype=np.uint8)
    mask[71:81, 55:66] = 1
    mask[71:81, 155:166] = 1
    marks = extract_landmarks(as_mask(mask))
    flipped = extract_landmarks(as_mask(mask[:, ::-1]))
    assert marks.mid_x == 110
    assert flipped.mid_x == 224 - 1 - marks.mid_x
    assert flipped.low_y == marks.low_y


def test_translation_equivariance():
    base = squares_mask()
    shifted = np.zeros_like(base)
    shifted[7:, 5:] = base[:-7, :-5]
    m0 = extract_landmarks(as_mask(base))
    m1 = extract_landmarks(as_mask(shifted))
    assert (m1.mid_x, m1.low_y) == (m0.mid_x + 5, m0.low_y + 7)


def test_determinism():
    mask = squares_mask()
    a = extract_landmarks(as_mask(mask))
    b = extract_landmarks(as_mask(mask.copy()))
    assert a == b


def test_rejects_non_binary_mask():
    with pytest.raises(ValidationError, match="binary"):
        ClavicleMask(pixels=np.full((8, 8), 3, dtype=np.uint8), source_id="x")


rects = st.tuples(
    st.integers(5, 40),  # height
    st.integers(5, 40),  # width
    st.integers(0, 80),  # top
    st.integers(0, 22),  # left offset within its half
)


@given(left=rects, right=rects)
@settings(max_examples=60, deadline=None)
def test_flip_and_translation_properties(left, right):
    w = 128
    mask = np.zeros((128, w), dtype=np.uint8)
    lh, lw, lt, ll = left
    rh, rw, rt, rl = right
    mask[lt : lt + lh, ll : ll + lw] = 1
    mask[rt : rt + rh, 64 + rl : min(64 + rl + rw, w)] = 1

    marks = extract_landmarks(as_mask(mask))
    assert 0 <= marks.mid_x < w and 0 <= marks.low_y < 128
    assert marks.low_y == max(lt + lh, rt + rh) - 1

    # rounding of an exact half-integer midpoint cannot mirror exactly
    lcx = ll + (lw - 1) / 2
    rcx = 64 + rl + (min(64 + rl + rw, w) - (64 + rl) - 1) / 2
    assume((lcx + rcx) % 2 != 1)
    flipped = extract_landmarks(as_mask(mask[:, ::-1]))
    assert flipped.mid_x == w - 1 - marks.mid_x
    assert flipped.low_y == marks.low_y
