import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypiso.ball import mobius_translate, rotation_map
from hypiso.errors import DomainError, TruncationError
from hypiso.families import flat_disk, geodesic_cap, mobius_image
from hypiso.measure import (MonotonicityCurve, boundary_form_check, coarea_check, conversion_check,
                            density, euclidean_volume, ideal_boundary_volume, monotonicity_curve,
                            truncated_volume)


def cap_area_inside(theta, r):
    """Area of the k=2 cap inside B_r from the carrier-sphere geometry.

    A carrier point at angle phi from the point nearest the origin has
    |x|^2 = c^2 + R^2 - 2 c R cos(phi) with c = sec(theta), R = tan(theta).
    """
    if theta == math.pi / 2:
        return math.pi * r * r
    c, big_r = 1 / math.cos(theta), math.tan(theta)
    phi_max = math.pi / 2 - theta
    cos_phi = (c * c + big_r * big_r - r * r) / (2 * c * big_r)
    if cos_phi >= 1:
        return 0.0
    phi = min(math.acos(max(cos_phi, -1.0)), phi_max)
    return 2 * math.pi * big_r**2 * (1 - math.cos(phi))


def image_cap_angle(a):
    """Cap angle of tau_a(equatorial disk): from the distance of -a to the plane."""
    a = np.asarray(a, dtype=float)
    d = math.asinh(2 * abs(a[2]) / (1 - a @ a))
    t = math.tanh(d / 2)  # Euclidean distance of the closest point
    return math.pi / 2 - 2 * math.atan(t)


@pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2])
def test_cap_volume_geometric_oracle(theta):
    rep = euclidean_volume(geodesic_cap(2, 3, theta))
    assert rep.vol_euclidean == pytest.approx(cap_area_inside(theta, 1.0), rel=1e-12)
    assert rep.vol_ideal_boundary == pytest.approx(2 * math.pi * math.sin(theta), rel=1e-12)
    assert rep.conversion_residual < 1e-10


@given(st.floats(0.2, 1.4), st.floats(0.05, 0.99))
@settings(max_examples=15)
def test_cap_truncated_volume(theta, r):
    cap = geodesic_cap(2, 3, theta)
    assert truncated_volume(cap, r) == pytest.approx(cap_area_inside(theta, r), rel=1e-9, abs=1e-12)


@given(st.lists(st.floats(-0.5, 0.5), min_size=3, max_size=3))
@settings(max_examples=10)
def test_mobius_image_of_disk_is_cap(a):
    img = mobius_image(flat_disk(2, 3), mobius_translate(np.array(a)))
    theta = image_cap_angle(a)
    assert euclidean_volume(img).vol_euclidean == pytest.approx(2 * math.pi * math.sin(theta) ** 2
                                                               / (1 + math.sin(theta)), rel=1e-9)
    assert ideal_boundary_volume(img) == pytest.approx(2 * math.pi * math.sin(theta), rel=1e-10)


def test_k3_cap_volume():
    # 4 pi tan^3(t) * int_0^(pi/2 - t) sin, frozen from mpmath
    assert euclidean_volume(geodesic_cap(3, 4, math.pi / 4)).vol_euclidean == pytest.approx(
        1.793209546954886071, rel=1e-10)


def test_rotation_invariance(cap_quarter, rng):
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    rotated = mobius_image(cap_quarter, rotation_map(q))
    assert euclidean_volume(rotated).vol_euclidean == pytest.approx(
        euclidean_volume(cap_quarter).vol_euclidean, rel=1e-12)


def test_truncation_radius(disk):
    rep = euclidean_volume(disk, truncation_radius=0.999)
    # linear extrapolation in 1 - R leaves an O(eps^2) error, covered by the tail estimate
    assert abs(rep.vol_euclidean - math.pi) < rep.tail_estimate
    assert rep.vol_euclidean == pytest.approx(math.pi, rel=1e-6)
    with pytest.raises(TruncationError):
        euclidean_volume(disk, truncation_radius=0.5)
    with pytest.raises(DomainError):
        euclidean_volume(disk, truncation_radius=1.5)
    with pytest.raises(DomainError):
        truncated_volume(disk, 1.0)


def test_catenoid_volume_tail(catenoid_half):
    rep = euclidean_volume(catenoid_half)
    assert 0 < rep.tail_estimate < 1e-3
    # two Richardson levels agree with a direct evaluation at a smaller eps
    assert rep.vol_euclidean == pytest.approx(5.453315606379, rel=1e-9)


def test_monotonicity_disk_constant(disk):
    curve = monotonicity_curve(disk, 20)
    assert np.max(np.abs(curve.ratios - math.pi)) < 1e-8
    with pytest.raises(DomainError):
        monotonicity_curve(disk, 3)


def test_monotonicity_cap_oracle(cap_quarter):
    curve = monotonicity_curve(cap_quarter, 20)
    want = [cap_area_inside(math.pi / 4, r) / r**2 for r in curve.radii]
    assert np.allclose(curve.ratios, want, rtol=1e-9, atol=1e-12)
    assert np.all(np.diff(curve.ratios) >= -1e-12)


def test_curve_csv():
    c = MonotonicityCurve([0.1, 0.2], [1.0, 2.0])
    assert c.to_csv().splitlines()[0] == "r,ratio"
    with pytest.raises(DomainError):
        MonotonicityCurve([0.2, 0.1], [1.0, 2.0])


def test_density_values(disk, cap_quarter, two_disks):
    assert density(two_disks, np.zeros(3)).value == pytest.approx(2.0, abs=1e-8)
    assert density(disk, np.array([0.3, -0.2, 0.0])).value == pytest.approx(1.0, abs=1e-8)
    pole = np.array([0, 0, 1 / math.cos(math.pi / 4) - math.tan(math.pi / 4)])
    assert density(cap_quarter, pole).value == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(DomainError):
        density(disk, np.array([0.0, 0.0, 0.3]))


def test_identity_suites(cap_quarter, catenoid_half):
    assert conversion_check(cap_quarter) < 1e-9
    assert conversion_check(catenoid_half) < 1e-9
    assert boundary_form_check(cap_quarter, 0.8) < 1e-9
    deriv, bound = coarea_check(cap_quarter, 2.0)
    assert np.allclose(deriv, bound, rtol=1e-6)
