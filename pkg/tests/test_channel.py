import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vlczone.channel import (LinkGeometry, RateModel, Receiver, achievable_rate,
                             channel_gain, concentrator_gain, gain_at_distance,
                             lambertian_order, rate_per_subcarrier, sinr, snr)
from vlczone.zoning import _closed_snr, lambda_param

from conftest import D_V, make_ap


@pytest.mark.parametrize("theta_deg, expected", [
    (60.0, 1.0),
    (45.0, 2.0),
    # mpmath, 40 digits: -1/log2(cos 30 deg)
    (30.0, 4.818841679306418),
])
def test_lambertian_order(theta_deg, expected):
    assert lambertian_order(math.radians(theta_deg)) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("theta", [0.0, -0.1, math.pi / 2, 2.0])
def test_lambertian_order_rejects_out_of_range(theta):
    with pytest.raises(ValueError):
        lambertian_order(theta)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 89.0))
def test_lambertian_order_matches_mpmath(theta_deg):
    mp.mp.dps = 30
    ref = -1 / mp.log(mp.cos(mp.radians(theta_deg)), 2)
    assert lambertian_order(math.radians(theta_deg)) == pytest.approx(float(ref), rel=1e-11)


@pytest.mark.parametrize("psi_deg, fov_deg, expected", [
    (0.0, 90.0, 2.25),
    (30.0, 90.0, 2.25),
    (80.0, 60.0, 0.0),
    (45.0, 60.0, 1.5 ** 2 / math.sin(math.radians(60)) ** 2),
    (60.0, 60.0, 3.0),
])
def test_concentrator_gain(psi_deg, fov_deg, expected):
    g = concentrator_gain(math.radians(psi_deg), 1.5, math.radians(fov_deg))
    assert g == pytest.approx(expected, rel=1e-12)


def test_concentrator_gain_vectorised():
    psi = np.radians([0.0, 50.0, 70.0])
    g = concentrator_gain(psi, 1.5, math.radians(60))
    np.testing.assert_allclose(g, [3.0, 3.0, 0.0])


def _gain_oracle(r, d_v, m, area=1e-4, n=1.5, fov=math.pi / 2):
    # Scalar re-derivation with explicit cos terms.
    d = math.sqrt(r * r + d_v * d_v)
    cos_phi = d_v / d
    psi = math.acos(cos_phi)
    g = n * n / math.sin(fov) ** 2 if psi <= fov else 0.0
    return (m + 1) * area / (2 * math.pi * d * d) * cos_phi ** m * g * cos_phi


@pytest.mark.parametrize("r, expected", [
    (0.0, 5.846508113579829e-06),   # mpmath
    (2.0, 3.322477155196490e-06),   # mpmath
])
def test_channel_gain_frozen(rx, r, expected):
    ap = make_ap(60.0)
    assert channel_gain(ap, rx, LinkGeometry(r, D_V)) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(r=st.floats(0.0, 20.0), d_v=st.floats(0.5, 6.0), theta=st.floats(5.0, 85.0),
       fov=st.floats(10.0, 90.0))
def test_channel_gain_against_oracle(r, d_v, theta, fov):
    m = lambertian_order(math.radians(theta))
    rx = Receiver(fov=math.radians(fov))
    got = gain_at_distance(r, d_v, m, rx)
    want = _gain_oracle(r, d_v, m, fov=math.radians(fov))
    if want == 0.0 or got == 0.0:
        # Only the FOV boundary may disagree, within round-off of the angle.
        assert abs(math.atan2(r, d_v) - math.radians(fov)) < 1e-9 or got == want
    else:
        assert got == pytest.approx(want, rel=1e-10)


def test_gain_decreases_with_distance(rx):
    r = np.linspace(0, 10, 200)
    h = gain_at_distance(r, D_V, 1.0, rx)
    assert np.all(np.diff(h) < 0)


def test_gain_zero_outside_fov():
    rx = Receiver(fov=math.radians(40))
    assert gain_at_distance(D_V * math.tan(math.radians(41)), D_V, 1.0, rx) == 0.0


def test_link_geometry():
    g = LinkGeometry(3.0, 4.0)
    assert g.distance == 5.0
    assert g.incidence_angle == pytest.approx(math.atan(0.75))
    with pytest.raises(ValueError):
        LinkGeometry(-1.0, 2.0)
    with pytest.raises(ValueError):
        LinkGeometry(1.0, 0.0)


def test_snr_matches_closed_form_lambda(rx, model):
    rng = np.random.default_rng(7)
    for _ in range(1000):
        theta = rng.uniform(20, 75)
        d_v = rng.uniform(1.0, 5.0)
        power = rng.uniform(0.5, 20)
        ap = make_ap(theta, optical_power=power, position=(0.0, 0.0, d_v))
        r = rng.uniform(0, d_v * math.tan(math.radians(theta)))
        h = gain_at_distance(r, d_v, ap.order, rx)
        direct = snr(ap.subcarrier_power, ap.subcarrier_bandwidth, h, rx, model)
        lam = lambda_param(ap, rx, model, ap.subcarrier_power, ap.subcarrier_bandwidth, d_v)
        assert direct == pytest.approx(_closed_snr(lam, ap.order, d_v, r), rel=1e-12)


def test_sinr_without_interferers_equals_snr(rx, model):
    h = 4e-6
    assert sinr(0.1, 1e5, h, [], rx, model) == snr(0.1, 1e5, h, rx, model)


def test_sinr_interference_lowers_value(rx, model):
    base = sinr(0.1, 1e5, 4e-6, [], rx, model)
    one = sinr(0.1, 1e5, 4e-6, [(0.1, 1e-6)], rx, model)
    two = sinr(0.1, 1e5, 4e-6, [(0.1, 1e-6), (0.1, 2e-6)], rx, model)
    assert base > one > two > 0


def test_sinr_interference_oracle(rx, model):
    p, b, h = 0.2, 3e5, 5e-6
    links = [(0.2, 1e-6), (0.1, 3e-6)]
    noise = model.clipping_ratio * rx.noise_density * b
    inter = rx.oe_efficiency ** 2 * ((0.2e-6) ** 2 + (0.3e-6) ** 2)
    want = (rx.oe_efficiency * p * h) ** 2 / (noise + inter)
    assert sinr(p, b, h, links, rx, model) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("allocs, model, expected", [
    ([(1e6, 1.0)], RateModel(), 0.5e6),
    ([(1e6, 3.0), (1e6, 1.0)], RateModel(), 0.5e6 * (2 + 1)),
    ([(1e6, 3.0)], RateModel(half_factor=False), 2e6),
    ([(1e6, 12.0)], RateModel(rate_constant=0.5), 0.5e6 * 2),
    ([], RateModel(), 0.0),
])
def test_achievable_rate(allocs, model, expected):
    assert achievable_rate(allocs, model) == pytest.approx(expected, rel=1e-14)


def test_achievable_rate_rejects_negative_sinr():
    with pytest.raises(ValueError):
        achievable_rate([(1.0, -0.1)])


def test_rate_per_subcarrier_matches_scalar(model):
    s = np.array([0.0, 1.0, 7.0, 1e4])
    vec = rate_per_subcarrier(2e5, s, model)
    for v, si in zip(vec, s):
        assert v == pytest.approx(achievable_rate([(2e5, si)], model), rel=1e-14)


@pytest.mark.parametrize("kwargs", [
    {"optical_power": 0.0}, {"bandwidth": -1.0}, {"subcarriers": 0},
])
def test_access_point_validation(kwargs):
    with pytest.raises(ValueError):
        make_ap(60.0, **kwargs)


def test_access_point_subcarrier_split():
    ap = make_ap(60.0)
    assert ap.subcarrier_power == pytest.approx(9 / 64)
    assert ap.subcarrier_bandwidth == pytest.approx(20e6 / 64)
    assert ap.order == pytest.approx(1.0)
