import numpy as np
import pytest
from hypothesis import given, strategies as st
from shapely.geometry import Polygon

from collabsim.geometry import (box_corners, box_footprint, cell_of, intersection_area, iou_matrix, rotated_iou,
                                segments_cross_box, wrap_angle)

box = st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.2, 6), st.floats(0.2, 6),
                st.floats(-np.pi, np.pi))


def shapely_iou(a, b):
    pa, pb = Polygon(box_corners(a)), Polygon(box_corners(b))
    inter = pa.intersection(pb).area
    return inter / (pa.area + pb.area - inter)


@given(box, box)
def test_rotated_iou_matches_shapely(a, b):
    assert rotated_iou(np.array(a), np.array(b)) == pytest.approx(shapely_iou(a, b), abs=1e-9)


@given(box)
def test_self_iou_is_one(a):
    assert rotated_iou(np.array(a), np.array(a)) == pytest.approx(1.0, abs=1e-9)


def test_axis_aligned_half_overlap():
    a = np.array([0.0, 0.0, 2.0, 2.0, 0.0])
    b = np.array([1.0, 0.0, 2.0, 2.0, 0.0])
    assert intersection_area(a, b) == pytest.approx(2.0)
    assert rotated_iou(a, b) == pytest.approx(2.0 / 6.0)


def test_iou_matrix_matches_elementwise(rng):
    a = np.column_stack([rng.uniform(0, 6, 7), rng.uniform(0, 6, 7), rng.uniform(1, 4, 7), rng.uniform(1, 3, 7),
                         rng.uniform(-3, 3, 7)])
    b = a[::-1] + np.array([0.3, -0.2, 0, 0, 0.1])
    m = iou_matrix(a, b)
    for i in range(len(a)):
        for j in range(len(b)):
            assert m[i, j] == pytest.approx(float(rotated_iou(a[i], b[j])), abs=1e-12)
    assert iou_matrix(a, np.zeros((0, 5))).shape == (7, 0)


def test_corners_counter_clockwise():
    c = box_corners(np.array([0.0, 0.0, 4.0, 2.0, 0.0]))
    assert np.allclose(c, [[2, 1], [-2, 1], [-2, -1], [2, -1]])


def test_footprint_counts_cell_centres():
    mask = box_footprint((2.0, 2.0, 2.0, 2.0, 0.0), 8, 8, 0.5)
    assert mask.sum() == 16
    assert cell_of(2.1, 0.4, 0.5) == (0, 4)


def test_segment_crossing():
    ends = np.array([[10.0, 0.0], [0.0, 10.0]])
    hit = segments_cross_box((0.0, 0.0), ends, (5.0, 0.0, 1.0, 1.0, 0.0))
    assert hit.tolist() == [True, False]


def test_wrap_angle_range():
    a = wrap_angle(np.array([np.pi, -np.pi, 3 * np.pi, 0.5]))
    assert np.all(a >= -np.pi) and np.all(a < np.pi)
    assert a[3] == pytest.approx(0.5)
