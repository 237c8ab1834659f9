import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import Point, box

from torusmix.errors import DomainError, PrecisionError
from torusmix.geometry import (Ball, IndicatorField, ScalarField, TorusPoint, ball_cell_count,
                               ball_fraction, ball_fractions, cell_centers, check_ball_resolution,
                               integrate, periodic_delta, read_field_csv, torus_dist, wrap,
                               write_field_csv)
from torusmix.mixing import reference_indicator

coord = st.floats(-5.0, 5.0, allow_nan=False)


def test_wrap_and_point_domain():
    p = wrap((1.25, -0.25))
    assert (p.x1, p.x2) == (0.25, 0.75)
    assert wrap((-1e-20, 0.0)).x1 < 1.0
    with pytest.raises(DomainError):
        TorusPoint(1.0, 0.5)
    with pytest.raises(DomainError):
        wrap((math.nan, 0.0))


@given(coord, coord)
def test_wrap_idempotent(a, b):
    p = wrap((a, b))
    assert 0.0 <= p.x1 < 1.0 and 0.0 <= p.x2 < 1.0
    assert wrap((p.x1, p.x2)) == p


@given(coord, coord, coord, coord, coord, coord)
def test_torus_metric(a1, a2, b1, b2, c1, c2):
    p, q, r = wrap((a1, a2)), wrap((b1, b2)), wrap((c1, c2))
    d = torus_dist(p, q)
    assert d == torus_dist(q, p)
    assert 0.0 <= d <= math.sqrt(0.5) + 1e-15
    assert torus_dist(p, r) <= d + torus_dist(q, r) + 1e-12


def test_periodic_delta_range():
    d = periodic_delta(np.array([0.4, 0.6, -0.6, 1.5, -0.5]))
    assert np.all(np.abs(d) <= 0.5)
    np.testing.assert_allclose(d, [0.4, -0.4, 0.4, -0.5, -0.5])


def test_ball_radius_domain():
    with pytest.raises(DomainError):
        Ball(TorusPoint(0.0, 0.0), 0.3)
    with pytest.raises(DomainError):
        Ball(TorusPoint(0.0, 0.0), 0.0)


def test_cell_centers_layout():
    c1, c2 = cell_centers(4, 2)
    assert c1.shape == (4, 2)
    assert c1[1, 0] == 0.375 and c2[0, 1] == 0.75


def test_resolution_guard():
    with pytest.raises(PrecisionError):
        check_ball_resolution((64, 64), 0.01)
    check_ball_resolution((1024, 1024), 0.01)


@pytest.mark.parametrize("eps", [0.02, 0.1, 0.25])
def test_ball_cell_count_matches_area(eps):
    n = 1024
    count = ball_cell_count((n, n), Ball(TorusPoint(0.3, 0.7), eps))
    assert abs(count / n ** 2 - math.pi * eps ** 2) < 4 * eps / n


def _shapely_fraction(c1, c2, eps):
    # area of the ball inside the band {x2 < 1/2}, over the three periodic copies
    disk = Point(c1, c2).buffer(eps, quad_segs=512)
    inside = sum(disk.intersection(box(-1, k, 2, k + 0.5)).area for k in (-1, 0, 1))
    return inside / disk.area


@pytest.mark.parametrize("center,eps", [((0.3, 0.5), 0.1), ((0.7, 0.02), 0.05),
                                        ((0.1, 0.9), 0.25), ((0.5, 0.25), 0.2),
                                        ((0.05, 0.43), 0.07)])
def test_ball_fraction_against_polygon_oracle(center, eps):
    n = 1024
    fld = reference_indicator(n)
    got = ball_fraction(fld, Ball(TorusPoint(*center), eps))
    assert abs(got - _shapely_fraction(*center, eps)) <= 10.0 / n


def test_complement_fractions_exact(rng):
    fld = IndicatorField(rng.random((128, 128)) < 0.3)
    c1, c2 = rng.random(50), rng.random(50)
    f, _ = ball_fractions(fld, c1, c2, 0.1)
    g, _ = ball_fractions(fld.complement(), c1, c2, 0.1)
    assert np.array_equal(f + g, np.ones_like(f))


def test_integrate_constant_and_linear():
    assert integrate(ScalarField(np.full((64, 32), 2.5))) == 2.5
    c1, _ = cell_centers(100, 100)
    assert abs(integrate(ScalarField(c1)) - 0.5) < 1e-15


def test_scalar_field_rejects_nonfinite():
    with pytest.raises(DomainError):
        ScalarField(np.array([[1.0, math.inf]]))


@settings(max_examples=20, deadline=None)
@given(n1=st.integers(1, 9), n2=st.integers(1, 9), seed=st.integers(0, 2 ** 31))
def test_field_csv_roundtrip(tmp_path_factory, n1, n2, seed):
    r = np.random.default_rng(seed)
    path = tmp_path_factory.mktemp("csv") / "f.csv"
    ind = IndicatorField(r.random((n1, n2)) < 0.5)
    write_field_csv(ind, path)
    assert read_field_csv(path, indicator=True) == ind
    sc = ScalarField(r.normal(size=(n1, n2)))
    write_field_csv(sc, path)
    back = read_field_csv(path)
    assert np.array_equal(back.samples, sc.samples)
