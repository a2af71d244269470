"""Test geometry primitives"""
import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from app.classes.exceptions import GeometryError
from app.classes.geometry import CandidateSet, Point, distance, midpoint, sigma
from app.services.instances import instance_simplex


coordinate = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
points3 = st.tuples(coordinate, coordinate, coordinate).map(Point)


# --------
# distance
# --------


@pytest.mark.parametrize("p, q, expected", [
    ((0,), (0,), 0.0),
    ((-2,), (2,), 4.0),
    ((1, 0, 0), (0, 1, 0), math.sqrt(2)),
])
def test_distance_examples(p, q, expected):
    assert distance(Point(p), Point(q)) == pytest.approx(expected)


def test_distance_dimension_mismatch():
    with pytest.raises(GeometryError):
        distance(Point.of(0.0), Point.of(0.0, 1.0))


@pytest.mark.parametrize("coords", [(), (math.nan,), (0.0, math.inf)])
def test_point_rejects_invalid_coordinates(coords):
    with pytest.raises(GeometryError):
        Point(coords)


@settings(max_examples=200)
@given(points3, points3, points3)
def test_triangle_inequality(p, q, r):
    assert distance(p, r) <= distance(p, q) + distance(q, r) + 1e-9


@given(points3, points3)
def test_distance_symmetric(p, q):
    assert distance(p, q) == pytest.approx(distance(q, p))


# --------
# midpoint
# --------


def test_midpoint_examples():
    assert midpoint(Point.of(-2), Point.of(0)) == Point.of(-1)
    assert midpoint(Point.of(1, 0, 0), Point.of(0, 1, 0)) == Point.of(0.5, 0.5, 0)
    assert midpoint(Point.of(3.5), Point.of(3.5)) == Point.of(3.5)


@given(points3, points3)
def test_midpoint_equidistant(p, q):
    c = midpoint(p, q)
    assert abs(distance(c, p) - distance(c, q)) <= 1e-9 * max(1.0, distance(p, q))


# -------------
# candidate set
# -------------


def test_sigma_examples():
    assert sigma(CandidateSet([-2, 0, 2])) == pytest.approx(2.0)
    assert sigma(CandidateSet([0, 1])) == pytest.approx(1.0)
    assert sigma(instance_simplex(4, 5.0)) == pytest.approx(math.sqrt(33))


def test_candidate_set_validation():
    with pytest.raises(GeometryError):
        CandidateSet([1.0, 1.0])
    with pytest.raises(GeometryError):
        CandidateSet([0.0])
    with pytest.raises(GeometryError):
        CandidateSet([(0.0,), (1.0, 2.0)])


def test_line_candidates_sorted():
    cs = CandidateSet([2, -2, 0])
    assert [p.coords[0] for p in cs] == [-2.0, 0.0, 2.0]
    assert cs[1] == Point.of(-2)
    assert cs.pairs() == [(1, 2), (1, 3), (2, 3)]
    with pytest.raises(IndexError):
        cs[0]


def test_distances_from(multi4):
    matrix = multi4.distances_from([multi4[1], multi4[4]])
    assert matrix.shape == (2, 4)
    assert matrix[0, 0] == 0.0
    assert matrix[0, 1] == pytest.approx(math.sqrt(2))
    assert matrix[1, 0] == pytest.approx(math.sqrt(22))


planar = st.tuples(
    st.floats(min_value=-50, max_value=50, allow_nan=False),
    st.floats(min_value=-50, max_value=50, allow_nan=False),
)


@settings(max_examples=100)
@given(
    st.lists(planar, min_size=3, max_size=5, unique=True),
    planar,
    st.floats(min_value=0.1, max_value=10),
    st.floats(min_value=0, max_value=2 * math.pi),
)
def test_sigma_invariant_under_similarity(coords, shift, scale, angle):
    assume(min(math.dist(a, b) for i, a in enumerate(coords) for b in coords[i + 1:]) > 0.1)
    cs = CandidateSet(coords)
    cos, sin = math.cos(angle), math.sin(angle)
    moved = CandidateSet([
        (scale * (cos * x - sin * y) + shift[0], scale * (sin * x + cos * y) + shift[1])
        for x, y in coords
    ])
    assert cs.sigma >= 1.0
    assert moved.sigma == pytest.approx(cs.sigma, rel=1e-9)
