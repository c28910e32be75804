import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypiso.errors import DomainError
from hypiso.families import flat_disk, geodesic_cap, spherical_cap
from hypiso.measure import MonotonicityCurve, monotonicity_curve
from hypiso.verify import (InequalityVerdict, OptimizerConfig, TheoremId,
                           check_classical_isoperimetric, check_laplacian_lemma,
                           check_linear_isoperimetric, check_mobius_boundary,
                           check_mobius_boundary_bound, check_mobius_isoperimetric,
                           check_monotonicity, check_reverse_totally_geodesic,
                           check_volume_lower_bound, laplacian_at_pole, mobius_volume,
                           translation_from_w)

SMALL = OptimizerConfig(restarts=3, max_evaluations=60)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(0, 1))
def test_verdict_pass_iff_slack(lhs, rhs, tol):
    from hypiso.verify import verdict
    v = verdict(TheoremId.LinearIsop, lhs, rhs, rhs - lhs, tol)
    assert v.passed == (v.slack >= -v.tolerance)
    assert set(v.to_dict()) == {"theorem_id", "lhs", "rhs", "slack", "pass", "tolerance",
                                "not_applicable", "notes"}


def test_linear_examples(disk):
    cap = geodesic_cap(2, 3, math.pi / 6)
    v = check_linear_isoperimetric(cap)
    assert v.lhs == pytest.approx(math.pi / 3, rel=1e-12)
    assert v.rhs == pytest.approx(math.pi / 2, rel=1e-12)
    assert v.slack == pytest.approx(math.pi / 6, rel=1e-10) and v.passed
    d = check_linear_isoperimetric(disk)
    assert d.passed and abs(d.slack) < 1e-12


def test_linear_slack_profile():
    # slack = pi s (1 - s) / (1 + s), s = sin(theta): rises, peaks at s = sqrt(2) - 1, then falls to 0
    thetas = np.linspace(0.1, math.pi / 2, 20)
    slack = np.array([check_linear_isoperimetric(geodesic_cap(2, 3, t)).slack for t in thetas])
    s = np.sin(thetas)
    assert np.allclose(slack, math.pi * s * (1 - s) / (1 + s), atol=1e-12)
    past_peak = thetas >= math.asin(math.sqrt(2) - 1)
    assert np.all(np.diff(slack[past_peak]) < 0)
    assert abs(slack[-1]) < 1e-8


def test_negative_control_violates_linear():
    v = check_linear_isoperimetric(spherical_cap(2, 3, 0.3, 0.3))
    assert not v.passed and v.slack < -1


def test_classical_and_reverse(disk):
    cap = geodesic_cap(2, 3, math.pi / 6)
    na = check_classical_isoperimetric(cap)
    assert na.not_applicable and na.passed
    rev = check_reverse_totally_geodesic(cap)
    assert rev.lhs == pytest.approx(4 * math.pi**2 / 3, rel=1e-12)
    assert rev.rhs == pytest.approx(math.pi**2, rel=1e-12)
    eq = check_classical_isoperimetric(disk)
    assert eq.passed and eq.lhs == pytest.approx(4 * math.pi**2, rel=1e-14)
    assert check_reverse_totally_geodesic(disk).passed


def test_reverse_not_applicable(catenoid_half):
    assert check_reverse_totally_geodesic(catenoid_half).not_applicable


def test_volume_lower_bound(disk, two_disks, cap_quarter):
    assert check_volume_lower_bound(disk).passed
    v = check_volume_lower_bound(two_disks)
    assert v.rhs == pytest.approx(2 * math.pi, rel=1e-12) and v.passed
    assert check_volume_lower_bound(cap_quarter).not_applicable


def test_monotonicity_verdicts(cap_quarter, disk):
    assert check_monotonicity(monotonicity_curve(cap_quarter, 20)).passed
    curve = monotonicity_curve(disk, 20)
    assert check_monotonicity(curve).passed
    bad = curve.ratios.copy()
    bad[10] -= 1e-3
    v = check_monotonicity(MonotonicityCurve(curve.radii, bad))
    assert not v.passed and v.lhs > 9e-4


def test_laplacian_lemma_verdicts(disk, cap_quarter, catenoid_half):
    v = check_laplacian_lemma(disk, 50)
    assert v.passed and "unit-gradient samples 50" in v.notes
    assert check_laplacian_lemma(cap_quarter, 50).passed
    assert check_laplacian_lemma(catenoid_half, 50).passed
    assert not check_laplacian_lemma(spherical_cap(2, 3, 0.3, 0.3), 50).passed
    with pytest.raises(DomainError):
        check_laplacian_lemma(flat_disk(1, 2))
    pole = laplacian_at_pole(cap_quarter)
    assert pole.grad_norm[0] < 1e-12 and pole.inequality_gap(2)[0] < 0


def test_translation_reparametrisation():
    assert np.allclose(translation_from_w(np.zeros(3)), 0)
    a = translation_from_w(np.array([50.0, 0, 0]))
    assert np.linalg.norm(a) < 1


def test_mobius_volume_properties(cap_quarter):
    res = mobius_volume(cap_quarter, "boundary", SMALL)
    assert res.value == pytest.approx(2 * math.pi, abs=1e-6)
    # value dominates the identity evaluation (the first history entry)
    assert res.value >= res.history[0][1]
    best = res.best_so_far()
    assert np.all(np.diff(best) >= 0)
    assert res.restarts_used == 3 and res.evaluations == len(res.history)
    with pytest.raises(DomainError):
        mobius_volume(cap_quarter, "sideways", SMALL)


def test_mobius_deterministic(cap_quarter):
    a = mobius_volume(cap_quarter, "boundary", SMALL)
    b = mobius_volume(cap_quarter, "boundary", SMALL)
    assert a.value == b.value
    assert np.array_equal(a.maximizer.translation, b.maximizer.translation)


def test_mobius_threads_agree(cap_quarter, monkeypatch):
    serial = mobius_volume(cap_quarter, "boundary", SMALL)
    monkeypatch.setenv("HYPISO_THREADS", "3")
    threaded = mobius_volume(cap_quarter, "boundary", SMALL)
    assert serial.value == threaded.value


def test_mobius_verdicts(disk, two_disks):
    assert check_mobius_boundary(disk, SMALL).passed
    v = check_mobius_boundary_bound(two_disks, SMALL)
    assert v.lhs == pytest.approx(4 * math.pi, abs=1e-6)
    assert v.rhs >= 4 * math.pi - 1e-4 and v.passed
    iso = check_mobius_isoperimetric(disk, SMALL)
    assert iso.passed and abs(iso.slack) < 1e-4
    assert isinstance(iso, InequalityVerdict)
