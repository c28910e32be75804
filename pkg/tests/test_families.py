import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypiso.ball import hyperbolic_distance, mobius_translate
from hypiso.catenoid import first_integral, ideal_circle_radius, shoot_profile
from hypiso.errors import DomainError
from hypiso.families import (cap_ideal_volume_closed_form, cap_volume_closed_form, catenoid,
                             flat_disk, geodesic_cap, mobius_image, spherical_cap, union,
                             unit_ball_volume)

# t-infinity of catenoid profiles: mpmath quadrature of dt/dsigma at 30 digits
T_INF = {0.3: 0.460240807386150864, 0.5: 0.501128632139905113, 1.0: 0.394275813078418388}


def test_unit_ball_volume():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_cap_closed_form_limits():
    assert cap_volume_closed_form(2, math.pi / 2) == pytest.approx(math.pi)
    assert cap_volume_closed_form(2, math.pi / 6) == pytest.approx(math.pi / 3, rel=1e-14)
    assert cap_ideal_volume_closed_form(2, math.pi / 6) == pytest.approx(math.pi, rel=1e-14)
    with pytest.raises(DomainError):
        cap_volume_closed_form(2, 0.0)


@given(st.floats(0.05, math.pi / 2), st.integers(2, 3))
def test_cap_points_meet_sphere_orthogonally(theta, k):
    cap = geodesic_cap(k, k + 1, theta)
    ideal = cap.ideal_charts[0]
    x = ideal.map(ideal.probe_grid(4))
    assert np.allclose(np.linalg.norm(x, axis=1), 1.0, atol=1e-12)
    inner = cap.interior_charts[0]
    y = inner.map(inner.probe_grid(4))
    assert np.all(np.linalg.norm(y, axis=1) < 1)
    # carrier sphere: centre at 1/cos(theta) on the axis, radius tan(theta)
    if theta < math.pi / 2 - 1e-3:
        c = np.zeros(k + 1)
        c[-1] = 1 / math.cos(theta)
        assert np.allclose(np.linalg.norm(y - c, axis=1), math.tan(theta), rtol=1e-12)


def test_family_flags(disk, cap_quarter, catenoid_half, two_disks):
    assert disk.contains_origin and disk.totally_geodesic
    assert not cap_quarter.contains_origin and cap_quarter.totally_geodesic
    assert not catenoid_half.totally_geodesic and catenoid_half.minimal
    assert two_disks.contains_origin and not two_disks.totally_geodesic
    assert not spherical_cap(2, 3, 0.3, 0.3).minimal


def test_disk_orientation_validation():
    with pytest.raises(DomainError):
        flat_disk(2, 3, orientation=np.ones((3, 2)))
    with pytest.raises(DomainError):
        geodesic_cap(2, 3, 2.0)
    with pytest.raises(DomainError):
        flat_disk(4, 3)


def test_union_candidates_include_origin(two_disks):
    pts = two_disks.candidate_density_points
    assert np.allclose(pts[0], 0.0)
    for p in pts[1:]:
        # every other candidate lies on the intersection line of the two planes
        assert abs(p[1]) < 1e-9 and abs(p[2]) < 1e-9


def test_mobius_image_flags(disk):
    g = mobius_translate(np.array([0.4, 0.0, 0.0]))  # slides the disk along itself
    img = mobius_image(disk, g)
    assert img.contains_origin
    off = mobius_image(disk, mobius_translate(np.array([0.0, 0.0, 0.4])))
    assert not off.contains_origin


@pytest.mark.parametrize("neck", [0.3, 0.5, 1.0])
def test_catenoid_profile(neck):
    prof = shoot_profile(neck)
    assert prof.residual < 1e-10
    k0 = math.sinh(neck) * math.cosh(neck)
    assert np.allclose(first_integral(prof.sigma, prof.psi), k0, rtol=1e-10)
    assert prof.t_inf == pytest.approx(T_INF[neck], rel=1e-10)
    assert prof.s_levels[0] < prof.s_levels[1]


def test_catenoid_geometry(catenoid_half):
    chart = catenoid_half.interior_charts[0]
    u = chart.probe_grid(6)
    x, j = chart.evaluate(u)
    # chart Jacobian agrees with central differences of the point map
    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (chart.map(u + e) - chart.map(u - e)) / (2 * h)
        assert np.allclose(j[:, :, i], fd, atol=1e-7)
    # the neck circle sits at hyperbolic distance `neck` from the origin
    neck = chart.map(np.array([[0.0, 1.0]]))[0]
    assert hyperbolic_distance(neck, np.zeros(3)) == pytest.approx(0.5, rel=1e-12)
    # ideal circles have radius sech(t_inf)
    circ = catenoid_half.ideal_charts[0]
    pts = circ.map(circ.probe_grid(8))
    r = np.linalg.norm(pts[:, :2], axis=1)
    assert np.allclose(r, ideal_circle_radius(T_INF[0.5]), rtol=1e-10)


def test_catenoid_domain():
    with pytest.raises(DomainError):
        catenoid(-1.0)
    with pytest.raises(DomainError):
        catenoid(0.5, n=2)
