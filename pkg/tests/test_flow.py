import math

import numpy as np
import pytest

from torusmix.errors import ConfigError, DomainError, IntegrationError
from torusmix.flow import (AlternatingSineShear, Constant, FlowSpec, SteadySineShearX,
                           SteadySineShearY, advance, check_near_incompressible, det_floor,
                           flow_arrays, flow_membership_in_image, gronwall_check,
                           gronwall_residuals, integrate_flow, integrated_gronwall_margins,
                           time1_map, trajectory_trace, write_trace_csv, zoo)
from torusmix.geometry import TorusPoint, periodic_delta
from torusmix.maps import alternating_sine

ZOO = zoo()


def _close_mod1(a, b, tol):
    return np.abs(periodic_delta(np.asarray(a) - np.asarray(b))).max() < tol


def test_zero_and_constant(rng):
    x1, x2 = rng.random(100), rng.random(100)
    y1, y2, _ = flow_arrays(ZOO["zero"], x1, x2)
    assert np.array_equal(y1, x1) and np.array_equal(y2, x2)
    y1, y2, _ = flow_arrays(ZOO["constant"], x1, x2)
    assert _close_mod1(y1, x1 + 0.3, 1e-12) and _close_mod1(y2, x2 + 0.4, 1e-12)


def test_steady_shear_closed_form(rng):
    # x1(1) = x1 + u sin(2 pi k x2), grad = [[1, 2 pi k u cos], [0, 1]]
    u, k = 1.0, 1
    x1, x2 = rng.random(200), rng.random(200)
    y1, y2, g = flow_arrays(FlowSpec(SteadySineShearX(u, k)), x1, x2, with_grad=True)
    assert _close_mod1(y1, x1 + u * np.sin(2 * np.pi * k * x2), 1e-12)
    assert np.array_equal(y2, x2)
    np.testing.assert_allclose(g[:, 1], 2 * np.pi * k * u * np.cos(2 * np.pi * k * x2), atol=1e-12)
    assert np.all(g[:, 0] == 1.0) and np.all(g[:, 2] == 0.0)


@pytest.mark.parametrize("u", [0.2, 0.4, 2.0])
def test_alternating_flow_equals_shear_composition(u, rng):
    # pieces of duration 1/8 alternate, each a sine shear of amplitude u / 8
    spec = FlowSpec(AlternatingSineShear(u, 1, 0.25), steps=200)
    m = alternating_sine(u / 8, 1, rounds=4)
    x1, x2 = rng.random(300), rng.random(300)
    y1, y2, g = flow_arrays(spec, x1, x2, with_grad=True)
    z1, z2 = m.forward(x1, x2)
    assert _close_mod1(y1, z1, 1e-11) and _close_mod1(y2, z2, 1e-11)
    jac = np.stack(m.jacobian_arrays(x1, x2), axis=1)
    assert np.abs(g - jac).max() < 1e-9 * max(1.0, np.abs(jac).max())


@pytest.mark.parametrize("name", sorted(ZOO))
def test_reverse_flow_inverts(name, rng):
    fm = time1_map(ZOO[name])
    x1, x2 = rng.random(100), rng.random(100)
    assert fm.roundtrip_error(x1, x2) < 1e-12


@pytest.mark.parametrize("name", sorted(ZOO))
def test_variational_against_differences(name, rng):
    spec = ZOO[name]
    x1, x2 = rng.random(20), rng.random(20)
    _, _, g = flow_arrays(spec, x1, x2, with_grad=True)
    h = 1e-5
    cols = []
    for d1, d2 in ((h, 0.0), (0.0, h)):
        p1, p2, _ = flow_arrays(spec, x1 + d1, x2 + d2)
        m1, m2, _ = flow_arrays(spec, x1 - d1, x2 - d2)
        cols.append((periodic_delta(p1 - m1) / (2 * h), periodic_delta(p2 - m2) / (2 * h)))
    fd = np.stack([cols[0][0], cols[1][0], cols[0][1], cols[1][1]], axis=1)
    assert np.abs(fd - g).max() < 1e-5


@pytest.mark.parametrize("name", sorted(ZOO))
def test_incompressible(name):
    lo, hi = check_near_incompressible(ZOO[name], 32, 10)
    assert 1 - 1e-6 < lo <= hi < 1 + 1e-6


def test_det_floor_scales_with_size():
    assert det_floor(1.0, 1.0) == pytest.approx(1.0, abs=1e-10)
    assert det_floor(1.0, 1e8) < det_floor(1.0, 1.0)


def test_point_api_and_membership():
    spec = FlowSpec(Constant(0.0, 0.25))
    st = integrate_flow(spec, TorusPoint(0.1, 0.1))
    assert st.t == 1.0 and abs(st.pos.x2 - 0.35) < 1e-12 and st.detJ == 1.0
    # image of A is {1/4 <= x2 < 3/4}
    assert flow_membership_in_image(spec, TorusPoint(0.5, 0.5))
    assert not flow_membership_in_image(spec, TorusPoint(0.5, 0.1))


@pytest.mark.parametrize("name", sorted(ZOO))
def test_groenwall(name, rng):
    spec = ZOO[name]
    x1, x2 = rng.random(100), rng.random(100)
    assert gronwall_residuals(spec, x1, x2).max() <= 1e-6
    assert integrated_gronwall_margins(spec, x1, x2).min() >= -1e-9
    assert gronwall_check(spec, TorusPoint(0.2, 0.7)) <= 1e-6


def test_trace_columns(tmp_path):
    spec = FlowSpec(SteadySineShearY(0.5, 2), steps=40)
    rec = trajectory_trace(spec, [0.1, 0.2], [0.3, 0.4])
    assert rec["t"].shape == (41, 2)
    assert np.allclose(rec["detJ"], 1.0, atol=1e-12)
    assert np.all(rec["e"] >= np.abs(rec["detJ"]) - 1e-12)
    write_trace_csv(rec, tmp_path / "trace.csv")
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert len(lines) == 42 and lines[0].startswith("t,x1,x2")


def test_nonfinite_raises():
    x1, x2 = np.array([math.nan]), np.array([0.1])
    with pytest.raises(IntegrationError):
        advance(FlowSpec(SteadySineShearX(1.0, 1)), x1, x2)


def test_spec_validation_and_config():
    with pytest.raises(DomainError):
        FlowSpec(SteadySineShearX(1.0, 1), steps=4)
    spec = FlowSpec(AlternatingSineShear(0.4, 1, 0.25), steps=100)
    assert FlowSpec.from_config(spec.to_config()) == spec
    with pytest.raises(ConfigError):
        FlowSpec.from_config({"kind": "alternating", "u": 1, "k": 1, "period": 0.25, "x": 0})
    with pytest.raises(ConfigError):
        FlowSpec.from_config({"kind": "vortex"})


def test_steady_shear_special_point():
    st = integrate_flow(FlowSpec(SteadySineShearX(1.0, 1)), TorusPoint(0.0, 0.25))
    assert abs(periodic_delta(st.pos.x1 - 0.0)) < 1e-12 and st.pos.x2 == 0.25
    assert np.allclose(st.grad.as_tuple(), (1.0, 0.0, 0.0, 1.0), atol=1e-12)


@pytest.mark.parametrize("u,k", [(1.0, 1), (0.3, 3)])
def test_steady_shear_is_sine_map(u, k, rng):
    from torusmix.maps import hsine, membership_array
    spec = FlowSpec(SteadySineShearX(u, k))
    x1, x2 = rng.random(100), rng.random(100)
    y1, y2, _ = flow_arrays(spec, x1, x2)
    z1, z2 = hsine(u, k).forward(x1, x2)
    assert _close_mod1(y1, z1, 1e-10) and _close_mod1(y2, z2, 1e-10)
    p1, p2 = rng.random(1000), rng.random(1000)
    from torusmix.flow import flow_membership_array
    got = flow_membership_array(spec, p1, p2)
    want = membership_array(hsine(u, k), p1, p2)
    _, pre2 = hsine(u, k).backward(p1, p2)
    far = np.minimum(np.abs(pre2 - 0.5), np.minimum(pre2, 1 - pre2)) > 1e-6
    assert np.array_equal(got[far], want[far])


def test_groenwall_example_point():
    assert gronwall_check(FlowSpec(SteadySineShearX(1.0, 1)), TorusPoint(0.1, 0.1)) <= 1e-6
