import math

import numpy as np
import pytest

from hypiso.errors import DomainError
from hypiso.families import flat_disk, geodesic_cap, spherical_cap
from hypiso.intrinsic import (cap_pole_chart, lemma_bound, lemma_function_derivative,
                              laplacian_radial, laplacian_samples)


def test_lemma_derivative_matches_differences():
    f = lambda rho: (1 + np.cosh(rho)) ** (1 - 3)
    rho = np.linspace(0.2, 3.0, 7)
    h = 1e-6
    assert np.allclose(lemma_function_derivative(3)(rho), (f(rho + h) - f(rho - h)) / (2 * h), rtol=1e-7)
    assert lemma_bound(2, 0.0) == pytest.approx(-0.5)


def test_disk_radial_laplacian_closed_form(disk):
    # on a totally geodesic plane through 0, Delta rho = coth(rho) exactly (H^2 polar coordinates)
    s = laplacian_samples(disk, 40, seed=3)
    assert np.allclose(s.grad_norm, 1.0, atol=1e-12)
    assert np.allclose(s.lap_rho, 1 / np.tanh(s.rho), rtol=1e-5)
    assert np.max(np.abs(s.inequality_gap(2))) < 1e-10


@pytest.mark.parametrize("make", [lambda: geodesic_cap(2, 3, math.pi / 5),
                                  lambda: geodesic_cap(3, 4, math.pi / 4),
                                  lambda: flat_disk(3, 4)])
def test_identity_on_minimal_families(make):
    sigma = make()
    s = laplacian_samples(sigma, 30, seed=1)
    assert np.max(np.abs(s.identity_residual(sigma.k))) < 1e-4
    assert np.max(s.inequality_gap(sigma.k)) < 1e-4


def test_identity_catenoid(catenoid_half):
    s = laplacian_samples(catenoid_half, 30, seed=2)
    assert np.max(np.abs(s.identity_residual(2))) < 1e-4


def test_identity_fails_off_minimal():
    s = laplacian_samples(spherical_cap(2, 3, 0.3, 0.3), 30, seed=0)
    assert np.max(np.abs(s.identity_residual(2))) > 1e-2


def test_pole_chart(cap_quarter):
    chart = cap_pole_chart(cap_quarter)
    s = laplacian_samples(cap_quarter, 1, charts=[chart], params=np.zeros((1, 2)))
    assert s.grad_norm[0] == pytest.approx(0.0, abs=1e-12)
    assert s.inequality_gap(2)[0] < -0.1
    with pytest.raises(DomainError):
        cap_pole_chart(geodesic_cap(2, 3, math.pi / 2))


def test_laplacian_constant_function(disk):
    chart = disk.interior_charts[0]
    u = np.array([[0.5, 1.0]])
    assert laplacian_radial(chart, u, lambda rho: np.zeros_like(rho))[0] == 0.0
