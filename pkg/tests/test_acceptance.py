"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest -v tests/test_acceptance.py`` (lines appear in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import time

import numpy as np
import pytest

from hypiso.ball import compose, hyperbolic_distance, inverse, mobius_translate, random_mobius
from hypiso.config import _rotated_disk
from hypiso.families import catenoid, flat_disk, geodesic_cap, mobius_image, spherical_cap, union
from hypiso.intrinsic import laplacian_samples
from hypiso.measure import (boundary_form_check, coarea_check, conversion_check, density,
                            euclidean_volume, monotonicity_curve)
from hypiso.verify import (OptimizerConfig, check_linear_isoperimetric, check_mobius_isoperimetric,
                           check_monotonicity, check_reverse_totally_geodesic,
                           check_volume_lower_bound, mobius_volume)

# k = 2 cap volumes and boundary lengths, mpmath at 30 digits
CAP_ORACLE = {
    math.pi / 6: (1.0471975511965977462, 3.1415926535897932385),
    math.pi / 4: (1.8403023690212202299, 4.442882938158366247),
    math.pi / 3: (2.5253616434307987754, 5.4413980927026535518),
}
DISK_TRANSLATIONS = [
    [0.3, -0.2, 0.4], [0.0, 0.0, 0.6], [-0.5, 0.1, 0.2], [0.2, 0.7, -0.1], [0.05, -0.05, -0.8],
]
RESULTS: list[str] = []


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    RESULTS.append(line)
    print(line)


def sweep_thetas(count: int = 50) -> np.ndarray:
    return 0.5 * math.pi * np.arange(1, count + 1) / count


# ------------------------------------------------------------------ criteria

def criterion_1():
    worst, slowest = 0.0, 0.0
    for theta, (vol, bd) in CAP_ORACLE.items():
        t0 = time.perf_counter()
        rep = euclidean_volume(geodesic_cap(2, 3, theta))
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, abs(rep.vol_euclidean - vol) / vol, abs(rep.vol_ideal_boundary - bd) / bd)
    ok = worst < 1e-7 and slowest < 5.0
    report(1, "cap closed forms", ok, f"max rel error {worst:.2e}, slowest {slowest:.2f}s")
    return ok


def criterion_2():
    t0 = time.perf_counter()
    verdicts = []
    for k in (2, 3):
        verdicts += [check_linear_isoperimetric(geodesic_cap(k, k + 1, t)) for t in sweep_thetas()]
    eq = [check_linear_isoperimetric(geodesic_cap(k, k + 1, math.pi / 2)).slack for k in (2, 3)]
    disk = flat_disk(2, 3)
    verdicts += [check_linear_isoperimetric(mobius_image(disk, mobius_translate(np.array(a)), probe=False))
                 for a in DISK_TRANSLATIONS]
    verdicts += [check_linear_isoperimetric(catenoid(s)) for s in (0.3, 0.5, 1.0)]
    elapsed = time.perf_counter() - t0
    failed = sum(not v.passed for v in verdicts)
    ok = failed == 0 and max(abs(s) for s in eq) < 1e-8 and elapsed < 180
    report(2, "linear isoperimetric inequality", ok,
           f"{len(verdicts)} verdicts, {failed} failed, equality slack {max(map(abs, eq)):.1e}, {elapsed:.1f}s")
    return ok


def criterion_3():
    verdicts = []
    for k in (2, 3):
        verdicts += [check_reverse_totally_geodesic(geodesic_cap(k, k + 1, t)) for t in sweep_thetas()]
    eq = [check_reverse_totally_geodesic(geodesic_cap(k, k + 1, math.pi / 2)) for k in (2, 3)]
    eq_gap = max(abs(v.slack) / v.rhs for v in eq)
    failed = sum(not v.passed for v in verdicts)
    ok = failed == 0 and eq_gap < 1e-7
    report(3, "reverse inequality on totally geodesic caps", ok,
           f"{len(verdicts)} verdicts, {failed} failed, equality rel gap {eq_gap:.1e}")
    return ok


def criterion_4():
    disk = flat_disk(2, 3)
    families = {"disk": disk}
    for t in (math.pi / 6, math.pi / 4, math.pi / 3):
        families[f"cap {t:.3f}"] = geodesic_cap(2, 3, t)
    for a in DISK_TRANSLATIONS[:2]:
        families[f"mobius {a}"] = mobius_image(disk, mobius_translate(np.array(a)), probe=False)
    families["catenoid 0.5"] = catenoid(0.5)
    worst, failed, disk_dev = 0.0, [], None
    for name, sigma in families.items():
        curve = monotonicity_curve(sigma, 100)
        v = check_monotonicity(curve)
        worst = max(worst, v.lhs)
        if not v.passed:
            failed.append(name)
        if name == "disk":
            disk_dev = float(np.max(np.abs(curve.ratios - math.pi)))
    ok = not failed and disk_dev < 1e-8
    report(4, "monotonicity of m(r)", ok,
           f"{len(families)} curves x 100 radii, largest drop {worst:.1e}, disk deviation {disk_dev:.1e}"
           + (f", failed {failed}" if failed else ""))
    return ok


def criterion_5():
    disk = flat_disk(2, 3)
    v_disk = check_volume_lower_bound(disk)
    two = union([_rotated_disk(3, 0.0), _rotated_disk(3, math.pi / 2)])
    v_two = check_volume_lower_bound(two)
    theta = density(two, np.zeros(3)).value
    gap_disk = abs(v_disk.slack)
    gap_two = abs(v_two.rhs - 2 * math.pi)
    ok = v_disk.passed and v_two.passed and gap_disk <= 1e-7 and gap_two < 1e-7 and abs(theta - 2) < 1e-5
    report(5, "volume lower bound and density witness", ok,
           f"disk gap {gap_disk:.1e}, union volume error {gap_two:.1e}, density at origin {theta:.10f}")
    return ok


def criterion_6():
    fams = {"disk": flat_disk(2, 3), "cap": geodesic_cap(2, 3, math.pi / 4),
            "cap k=3": geodesic_cap(3, 4, math.pi / 4),
            "mobius": mobius_image(flat_disk(2, 3), mobius_translate(np.array([0.3, -0.2, 0.4]))),
            "catenoid": catenoid(0.5)}
    worst = {}
    for name, sigma in fams.items():
        s = laplacian_samples(sigma, 100, seed=0)
        worst[name] = float(np.max(np.abs(s.identity_residual(sigma.k))))
        if name == "disk":
            grad_dev = float(np.max(np.abs(s.grad_norm - 1)))
            eq_res = float(np.max(np.abs(s.inequality_gap(2))))
    ok = max(worst.values()) < 1e-4 and grad_dev < 1e-6 and eq_res < 1e-5
    report(6, "discrete Laplacian identity and equality case", ok,
           f"max identity residual {max(worst.values()):.1e}, disk | |grad rho|-1 | {grad_dev:.1e}, "
           f"disk equality residual {eq_res:.1e}")
    return ok


def criterion_7():
    cfg = OptimizerConfig(restarts=16, max_evaluations=200)
    disk, cap = flat_disk(2, 3), geodesic_cap(2, 3, math.pi / 4)
    runs = {}
    for name, sigma, target in (("great circle", disk, "boundary"), ("cap boundary", cap, "boundary"),
                                ("cap", cap, "submanifold"), ("disk", disk, "submanifold")):
        t0 = time.perf_counter()
        runs[name] = (mobius_volume(sigma, target, cfg), time.perf_counter() - t0)
    errs = [abs(runs["great circle"][0].value - 2 * math.pi), abs(runs["cap boundary"][0].value - 2 * math.pi),
            abs(runs["cap"][0].value - math.pi)]
    iso = [check_mobius_isoperimetric(cap, cfg, runs["cap"][0], runs["cap boundary"][0]),
           check_mobius_isoperimetric(disk, cfg, runs["disk"][0], runs["great circle"][0])]
    slowest = max(t for _, t in runs.values())
    ok = max(errs) < 1e-4 and all(abs(v.slack) < 1e-4 for v in iso) and slowest < 120
    report(7, "Mobius volumes", ok,
           f"max error {max(errs):.1e}, equality slack {max(abs(v.slack) for v in iso):.1e}, "
           f"slowest target {slowest:.1f}s")
    return ok


def criterion_8():
    v = check_linear_isoperimetric(spherical_cap(2, 3, 0.3, 0.3))
    ok = not v.passed
    report(8, "negative control detected", ok, f"lhs {v.lhs:.4f} > rhs {v.rhs:.4f}, slack {v.slack:.3f}")
    return ok


def criterion_9():
    cap, cap3, cat = geodesic_cap(2, 3, math.pi / 4), geodesic_cap(3, 4, math.pi / 3), catenoid(0.5)
    conv = max(conversion_check(s) for s in (cap, cap3, cat))
    bform = max(boundary_form_check(cap, 0.8), boundary_form_check(cap3, 0.9))
    deriv, bound = coarea_check(cap, 2.0)
    coarea = float(np.max(np.abs(deriv - bound) / np.abs(bound)))
    rng = np.random.default_rng(2024)
    iso = grp = 0.0
    for _ in range(1000):
        g, h = random_mobius(rng, 3), random_mobius(rng, 3)
        x, y = rng.uniform(-0.5, 0.5, (2, 3))
        iso = max(iso, abs(hyperbolic_distance(g(x), g(y)) - hyperbolic_distance(x, y)))
        grp = max(grp, float(np.max(np.abs(compose(g, h)(x) - g(h(x))))),
                  float(np.max(np.abs(inverse(g)(g(x)) - x))))
    ok = conv < 1e-9 and bform < 1e-9 and coarea < 1e-6 and iso < 1e-10 and grp < 1e-10
    report(9, "internal identity suites", ok,
           f"volume forms {conv:.1e}, boundary forms {bform:.1e}, coarea {coarea:.1e}, "
           f"isometry {iso:.1e}, group {grp:.1e}")
    return ok


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 10)])
def test_acceptance(criterion, capsys):
    with capsys.disabled():
        print()
        ok = criterion()
    assert ok


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria passed")
