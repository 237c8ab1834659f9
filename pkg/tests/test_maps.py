import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torusmix.config import map_from_toml, map_to_toml
from torusmix.errors import ConfigError, DomainError
from torusmix.geometry import TorusPoint, periodic_delta
from torusmix.maps import (HorizontalSineShear, IntegerLinear, MapDescriptor, VerticalLinearShear,
                           apply, inverse, jacobian, jacobian_numeric, jacobian_numeric_arrays,
                           membership_in_image, vshear, zoo)

ZOO = zoo()


@pytest.mark.parametrize("name", sorted(ZOO))
def test_roundtrip(name, rng):
    m = ZOO[name]
    x1, x2 = rng.random(1000), rng.random(1000)
    y1, y2 = m.forward(x1, x2)
    assert np.all((0 <= y1) & (y1 < 1) & (0 <= y2) & (y2 < 1))
    z1, z2 = m.backward(y1, y2)
    assert np.abs(periodic_delta(z1 - x1)).max() < 1e-12
    assert np.abs(periodic_delta(z2 - x2)).max() < 1e-12


@pytest.mark.parametrize("name", sorted(ZOO))
def test_jacobian_matches_differences(name, rng):
    m = ZOO[name]
    x1, x2 = rng.random(100), rng.random(100)
    exact = np.array(m.jacobian_arrays(x1, x2))
    approx = np.array(jacobian_numeric_arrays(m, x1, x2, h=1e-5))
    assert np.abs(exact - approx).max() < 1e-6


@pytest.mark.parametrize("name", sorted(ZOO))
def test_area_preserving(name, rng):
    m = ZOO[name]
    d11, d12, d21, d22 = m.jacobian_arrays(rng.random(200), rng.random(200))
    assert np.abs(np.abs(d11 * d22 - d12 * d21) - 1).max() < 1e-12
    assert m.area_preserving


def test_orientation_flag():
    assert ZOO["flip"].orientation_reversing
    assert not ZOO["cat"].orientation_reversing


def test_linear_stage_validation():
    with pytest.raises(DomainError):
        IntegerLinear(((2, 0), (0, 1)))
    with pytest.raises(DomainError):
        HorizontalSineShear(0.1, 0)


def test_point_api():
    p = TorusPoint(0.3, 0.2)
    m = vshear(10)
    q = apply(m, p)
    assert math.isclose(q.x2, (0.2 + 3.0) % 1.0, abs_tol=1e-15)
    r = inverse(m, q)
    assert abs(r.x1 - p.x1) < 1e-15 and abs(r.x2 - p.x2) < 1e-12
    j = jacobian(m, p)
    assert j.as_tuple() == (1.0, 0.0, 10.0, 1.0) and j.det == 1.0
    jn = jacobian_numeric(m, p)
    assert abs(jn.d21 - 10.0) < 1e-6
    with pytest.raises(DomainError):
        jacobian_numeric(m, p, h=0.1)


@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_membership_is_preimage_test(a, b):
    # image of A under x2 <- x2 + 10 x1 is {(x2 - 10 x1) mod 1 < 1/2}
    m = MapDescriptor((VerticalLinearShear(10),))
    pre = (b - 10.0 * a) % 1.0
    if abs(pre - 0.5) > 1e-9 and min(pre, 1 - pre) > 1e-9:
        assert membership_in_image(m, TorusPoint(a, b)) == (pre < 0.5)


@pytest.mark.parametrize("name", sorted(ZOO))
def test_config_roundtrip(name):
    m = ZOO[name]
    assert MapDescriptor.from_config(m.to_config()) == m
    assert map_from_toml(map_to_toml(m)) == m


def test_config_strict():
    with pytest.raises(ConfigError):
        MapDescriptor.from_config([{"kind": "vshear", "n": 2, "extra": 1}])
    with pytest.raises(ConfigError):
        MapDescriptor.from_config([{"kind": "twist"}])
    with pytest.raises(ConfigError):
        MapDescriptor.from_config([{"kind": "linear", "matrix": [[1, 1], [1, 1]]}])


@pytest.mark.parametrize("name", sorted(ZOO))
def test_image_has_half_area(name):
    from torusmix.mixing import build_image_indicator
    from torusmix.maps import membership_array
    n = 256
    fld = build_image_indicator(lambda a, b: membership_array(ZOO[name], a, b), n)
    assert abs(fld.fraction() - 0.5) <= 2.0 / n
