"""Euclidean volumes of chart-parametrised submanifolds of the ball.

Volumes clipped to the ball ``|x| < r`` are computed by nested quadrature:
the first chart parameter is integrated over the sub-intervals where the
point lies inside the ball (roots found by sampling plus bisection), the
remaining parameters by adaptive cubature.  For small ``r`` the chart domain
is first shrunk to boxes around the local minima of ``|x|`` so that the
sampled sign test never misses a small inside region.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ball import mobius_translate, radius_to_rho
from .charts import Chart, Submanifold, closest_point, gram_det, local_minima
from .errors import ChartError, DomainError, TruncationError
from .families import unit_ball_volume
from .quadrature import integrate_box, integrate_intervals

__all__ = [
    "VolumeReport", "MonotonicityCurve", "DensityEstimate", "unit_ball_volume",
    "euclidean_volume", "ideal_boundary_volume", "truncated_volume", "monotonicity_curve",
    "density", "chebyshev_radii", "conversion_check", "boundary_form_check", "coarea_check",
    "tangential_radial_gradient",
]

RTOL = 1e-11
SAMPLES = 33
DENSITY_RADII = (1e-2, 5e-3, 2.5e-3)
ON_SURFACE_TOL = 1e-8
TAIL_LIMIT = 0.01

Weight = Callable[[np.ndarray, np.ndarray], np.ndarray]


# ---------------------------------------------------------------- integrands

def _sqrt_gram(j: np.ndarray) -> np.ndarray:
    g = gram_det(j)
    if not np.all(np.isfinite(g)):
        raise ChartError("non-finite Gram determinant")
    return np.sqrt(np.maximum(g, 0.0))


def euclidean_weight(x, j):
    return _sqrt_gram(j)


def hyperbolic_weight(x, j):
    """``dV_H`` density: ``lambda^k sqrt(det J^T J)``."""
    r = np.linalg.norm(x, axis=1)
    lam = 2.0 / ((1.0 - r) * (1.0 + r))
    return lam ** j.shape[-1] * _sqrt_gram(j)


def _conversion_weight(x, j):
    # direct Euclidean density and the hyperbolic one scaled back by ((1 - r^2)/2)^k
    k = j.shape[-1]
    r = np.linalg.norm(x, axis=1)
    h = hyperbolic_weight(x, j)
    return np.column_stack([_sqrt_gram(j), h * ((1.0 - r) * (1.0 + r) / 2.0) ** k])


def tangential_radial_gradient(x, j) -> np.ndarray:
    """``|grad_Sigma rho|``: length of the projection of ``x/|x|`` onto the tangent space.

    The hyperbolic gradient of ``rho`` has unit hyperbolic length and points
    along ``x``; conformality makes the projection purely Euclidean.
    """
    r = np.linalg.norm(x, axis=1, keepdims=True)
    xhat = x / np.where(r > 0, r, 1.0)
    q, _ = np.linalg.qr(j)
    proj = np.einsum("mnk,mn->mk", q, xhat)
    return np.linalg.norm(proj, axis=1)


# ------------------------------------------------------------ clip geometry

def _hessian_sq_norm(chart: Chart, u: np.ndarray) -> np.ndarray:
    """Hessian of ``|x(u)|^2`` from the Jacobian and a difference of Jacobians."""
    k = chart.k
    x, j = (a[0] for a in chart.evaluate(u[None]))
    h = 1e-5 * max(1.0, float(np.max(chart.hi - chart.lo)))
    second = np.zeros((k, k))
    for l in range(k):
        e = np.zeros(k)
        e[l] = h
        dj = (chart.jacobian((u + e)[None])[0] - chart.jacobian((u - e)[None])[0]) / (2 * h)
        second[:, l] = x @ dj
    second = 0.5 * (second + second.T)
    return 2.0 * (j.T @ j + second)


def _faces_outside(chart: Chart, lo, hi, r: float) -> bool:
    """True when ``|x| > r`` on every box face that is not a chart domain face."""
    k = chart.k
    per_face = 1 if k == 1 else int(min(33, max(5, round(1100 ** (1.0 / (k - 1))))))
    for i in range(k):
        for side, val in ((0, lo[i]), (1, hi[i])):
            if not chart.periodic[i]:
                edge = chart.lo[i] if side == 0 else chart.hi[i]
                if val == edge:
                    continue
            elif hi[i] - lo[i] >= chart.hi[i] - chart.lo[i]:
                continue
            others = [np.linspace(lo[d], hi[d], per_face) for d in range(k) if d != i]
            if others:
                mesh = np.meshgrid(*others, indexing="ij")
                pts = np.stack([m.ravel() for m in mesh], -1)
                pts = np.insert(pts, i, val, axis=1)
            else:
                pts = np.array([[val]])
            if np.any(np.linalg.norm(chart.map(pts), axis=1) <= r):
                return False
    return True


def _box_around(chart: Chart, u, d, r):
    width = chart.hi - chart.lo
    try:
        hess = _hessian_sq_norm(chart, u)
        reg = 1e-14 * max(np.trace(np.abs(hess)), 1e-300)
        inv_diag = np.diag(np.linalg.inv(hess + reg * np.eye(chart.k)))
        hw = 2.0 * np.sqrt(2.0 * (r * r - d * d) * np.where(inv_diag > 0, inv_diag, np.inf))
    except np.linalg.LinAlgError:
        hw = width.copy()
    hw = np.where(np.isfinite(hw), hw, width)
    hw = np.clip(hw, 1e-12 * np.maximum(width, 1.0), width)
    for _ in range(64):
        lo, hi = u - hw, u + hw
        for i in range(chart.k):
            if chart.periodic[i]:
                if 2 * hw[i] >= width[i]:
                    lo[i], hi[i] = chart.lo[i], chart.hi[i]
            else:
                lo[i], hi[i] = max(lo[i], chart.lo[i]), min(hi[i], chart.hi[i])
        full = np.all(lo <= chart.lo) and np.all(hi >= chart.hi)
        if full or _faces_outside(chart, lo, hi, r):
            return lo, hi
        hw = np.minimum(2.0 * hw, width)
    return chart.lo.copy(), chart.hi.copy()


def _wrap(chart: Chart, lo, hi):
    """Split boxes that cross a periodic seam into in-domain pieces."""
    boxes = [(lo.copy(), hi.copy())]
    for i in range(chart.k):
        if not chart.periodic[i]:
            continue
        period = chart.hi[i] - chart.lo[i]
        out = []
        for a, b in boxes:
            if a[i] < chart.lo[i]:
                a2, b2 = a.copy(), b.copy()
                a2[i], b2[i] = a[i] + period, chart.hi[i]
                a3 = a.copy()
                a3[i] = chart.lo[i]
                out += [(a2, b2), (a3, b.copy())]
            elif b[i] > chart.hi[i]:
                a2, b2 = a.copy(), b.copy()
                a2[i], b2[i] = chart.lo[i], b[i] - period
                b3 = b.copy()
                b3[i] = chart.hi[i]
                out += [(a2, b2), (a.copy(), b3)]
            else:
                out.append((a, b))
        boxes = out
    return boxes


def _merge(boxes):
    boxes = [(a.copy(), b.copy()) for a, b in boxes]
    changed = True
    while changed:
        changed = False
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                (a1, b1), (a2, b2) = boxes[i], boxes[j]
                if np.all(a1 < b2) and np.all(a2 < b1):
                    boxes[i] = (np.minimum(a1, a2), np.maximum(b1, b2))
                    del boxes[j]
                    changed = True
                    break
            if changed:
                break
    boxes.sort(key=lambda ab: tuple(ab[0]) + tuple(ab[1]))
    return boxes


@dataclass
class ClipPlan:
    """Local minima of ``|x|`` on each chart, reused across clip radii."""

    minima: list = field(default_factory=list)  # per chart: list of (u, |x(u)|)

    @classmethod
    def build(cls, charts, seeds=()) -> "ClipPlan":
        mins = []
        for idx, c in enumerate(charts):
            found = local_minima(c)
            found += [(np.asarray(u, float), float(np.linalg.norm(c.map(np.asarray(u, float)[None])[0])))
                      for ci, u in seeds if ci == idx]
            mins.append(found)
        return cls(mins)

    def boxes(self, chart_index: int, chart: Chart, r: float):
        out = []
        for u, d in self.minima[chart_index]:
            if d < r:
                lo, hi = _box_around(chart, np.asarray(u, float), d, r)
                out += _wrap(chart, lo, hi)
        return _merge(out)


# ---------------------------------------------------------------- quadrature

def _sq_excess(chart: Chart, r: float, t: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.sum(chart.map(np.column_stack([t, v])) ** 2, axis=1) - r * r


def _dip_min(chart: Chart, r: float, a, b, t0, v, steps: int = 12):
    """Minimiser of ``|x(t, v)|^2`` on ``[a, b]`` by secant iteration on the derivative."""

    def slope(t):
        x, j = chart.evaluate(np.column_stack([t, v]))
        return 2.0 * np.einsum("mn,mn->m", x, j[:, :, 0])

    t_prev, t = 0.5 * (a + b), np.clip(t0, a, b)
    d_prev, d = slope(t_prev), slope(t)
    for _ in range(steps):
        denom = d - d_prev
        ok = denom != 0
        tn = np.where(ok, t - d * (t - t_prev) / np.where(ok, denom, 1.0), t)
        tn = np.clip(tn, a, b)
        if np.all(np.abs(tn - t) <= 1e-15 * (1.0 + np.abs(t))):
            return tn
        t_prev, d_prev = t, d
        t, d = tn, slope(tn)
    return t


def _bracketed_roots(chart: Chart, r: float, a, b, a_in, v, bisect: int = 4, newton: int = 10):
    """Shrink sign-change brackets to the root: bisection, then safeguarded Newton."""
    for _ in range(bisect):
        mid = 0.5 * (a + b)
        same = (_sq_excess(chart, r, mid, v) < 0) == a_in
        a, b = np.where(same, mid, a), np.where(same, b, mid)
    t = 0.5 * (a + b)
    was_bad = np.zeros(t.shape, bool)
    for _ in range(newton):
        if not t.size:
            break
        x, j = chart.evaluate(np.column_stack([t, v]))
        h = np.sum(x * x, axis=1) - r * r
        dh = 2.0 * np.einsum("mn,mn->m", x, j[:, :, 0])
        same = (h < 0) == a_in
        a, b = np.where(same, t, a), np.where(same, b, t)
        step = np.where(dh != 0, h / np.where(dh != 0, dh, 1.0), np.inf)
        tn = t - step
        bad = ~((tn >= a) & (tn <= b))
        # a first overshoot is clipped (the root may sit on a bracket end);
        # a repeated one falls back to bisection
        tn = np.where(bad, np.where(was_bad, 0.5 * (a + b), np.clip(tn, a, b)), tn)
        was_bad = bad
        if np.all(np.abs(tn - t) <= 1e-15 * (1.0 + np.abs(t))):
            t = tn
            break
        t = tn
    return t


def _line_roots(chart: Chart, r: float, v: np.ndarray, lo0: float, hi0: float):
    """Roots of ``|x(t, v)| = r`` in the first parameter for each row of ``v``.

    Returns ``(rows, roots, inside_at_start)`` with roots sorted within rows.
    Sign changes between samples are bisected; sampled minima whose parabola
    dips near zero are refined by ternary search so that short inside runs
    between two samples are not lost.
    """
    m = v.shape[0]
    ts = lo0 + (hi0 - lo0) * np.linspace(0.0, 1.0, SAMPLES)
    h = _sq_excess(chart, r, np.tile(ts, m), np.repeat(v, SAMPLES, axis=0)).reshape(m, SAMPLES)
    inside = h < 0
    row, col = np.nonzero(inside[:, 1:] != inside[:, :-1])
    a, b, a_in = ts[col], ts[col + 1], inside[row, col]

    # hidden dips: discrete local minima, all three samples outside
    hl, hc, hr = h[:, :-2], h[:, 1:-1], h[:, 2:]
    curv = 0.5 * (hl + hr) - hc
    pred = hc - (hr - hl) ** 2 / (16.0 * np.maximum(curv, 1e-300))
    dip = (hc <= hl) & (hc <= hr) & (hl > 0) & (hc > 0) & (hr > 0) & (pred < 2.0 * curv)
    drow, dcol = np.nonzero(dip)
    if drow.size:
        # start from the vertex of the parabola through the three samples
        step = ts[1] - ts[0]
        t0 = ts[dcol + 1] - step * (hr - hl)[drow, dcol] / (4.0 * np.maximum(curv[drow, dcol], 1e-300))
        tmin = _dip_min(chart, r, ts[dcol], ts[dcol + 2], t0, v[drow])
        neg = _sq_excess(chart, r, tmin, v[drow]) < 0
        drow, dcol, tmin = drow[neg], dcol[neg], tmin[neg]
        row = np.concatenate([row, drow, drow])
        a = np.concatenate([a, ts[dcol], tmin])
        b = np.concatenate([b, tmin, ts[dcol + 2]])
        a_in = np.concatenate([a_in, np.zeros(drow.size, bool), np.ones(drow.size, bool)])

    roots = _bracketed_roots(chart, r, a, b, a_in, v[row])
    order = np.lexsort((roots, row))
    return row[order], roots[order], inside[:, 0]


def _clipped_inner(chart: Chart, weight: Weight, r: float, lo0: float, hi0: float, rtol: float):
    """Outer integrand: integral over the first parameter of the inside part."""

    def outer(v):
        m = v.shape[0]
        row, roots, start_in = _line_roots(chart, r, v, lo0, hi0)
        # breakpoints per row: start, roots, end; segments alternate in/out
        rows = np.concatenate([np.arange(m), row, np.arange(m)])
        vals = np.concatenate([np.full(m, lo0), roots, np.full(m, hi0)])
        key = np.concatenate([np.zeros(m), np.arange(1, row.size + 1), np.full(m, row.size + 1.0)])
        order = np.lexsort((key, rows))
        rows, vals = rows[order], vals[order]
        starts = np.flatnonzero(rows[1:] == rows[:-1])
        rank = starts - np.searchsorted(rows, rows[starts])
        seg_rows = rows[starts]
        seg_in = start_in[seg_rows] ^ (rank % 2 == 1)
        seg_a, seg_b = vals[starts], vals[starts + 1]
        keep = seg_in & (seg_b > seg_a)
        seg_a, seg_b, seg_rows = seg_a[keep], seg_b[keep], seg_rows[keep]

        def inner(owner, t):
            x, j = chart.evaluate(np.column_stack([t, v[owner]]))
            return weight(x, j)

        res = integrate_intervals(inner, seg_a, seg_b, seg_rows, m, rtol=min(1e-13, rtol), atol=1e-300)
        return res.values

    return outer


def _integrate_chart(chart: Chart, weight: Weight, r: float | None, rtol: float,
                     boxes=None):
    """Integral of ``weight`` over the chart (clipped to ``|x| < r`` when given).

    Returns ``(value (p,), error)``.
    """
    if r is None:
        res = integrate_box(lambda u: weight(*chart.evaluate(u)), chart.lo, chart.hi,
                            rtol=rtol, atol=1e-300, initial_splits=2 if chart.k else 1)
        return np.atleast_1d(res.value), res.error
    total, err = None, 0.0
    for lo, hi in (boxes if boxes is not None else [(chart.lo, chart.hi)]):
        outer = _clipped_inner(chart, weight, r, lo[0], hi[0], rtol)
        res = integrate_box(outer, lo[1:], hi[1:], rtol=rtol, atol=1e-300,
                            initial_splits=2 if chart.k > 1 else 1, support_edges=True)
        v = np.atleast_1d(res.value)
        total = v if total is None else total + v
        err += res.error
    if total is None:
        probe = weight(*chart.evaluate(0.5 * (chart.lo + chart.hi)[None]))
        total = np.zeros(np.atleast_2d(probe.reshape(1, -1)).shape[1])
    return total, err


def _clipped_total(charts, weight, r, rtol, plan: ClipPlan | None = None):
    if plan is None:
        plan = ClipPlan.build(charts)
    total, err = 0.0, 0.0
    for idx, c in enumerate(charts):
        boxes = plan.boxes(idx, c, r)
        if not boxes:
            continue
        v, e = _integrate_chart(c, weight, r, rtol, boxes)
        total = total + v
        err += e
    return total, err


def _full_total(charts, weight, rtol):
    """Whole-chart integrals; charts with tail levels are Richardson-extrapolated."""
    total, err, tail = 0.0, 0.0, 0.0
    for c in charts:
        if c.tail_levels:
            coarse, fine = c.tail_levels[0], c.tail_levels[-1]
            v_coarse, e1 = _integrate_chart(c.restricted(coarse.lo, coarse.hi), weight, None, rtol)
            v_fine, e2 = _integrate_chart(c.restricted(fine.lo, fine.hi), weight, None, rtol)
            # remainder linear in eps: V(eps) = V - C eps
            extra = (v_fine - v_coarse) * fine.eps / (coarse.eps - fine.eps)
            total = total + v_fine + extra
            tail += float(np.max(np.abs(extra)))
            err += e1 + e2
        else:
            v, e = _integrate_chart(c, weight, None, rtol)
            total = total + v
            err += e
    return total, err, tail


# ------------------------------------------------------------------- reports

@dataclass
class VolumeReport:
    vol_euclidean: float
    vol_ideal_boundary: float
    truncation_radius: float
    tail_estimate: float
    quadrature_error: float
    conversion_residual: float = 0.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class MonotonicityCurve:
    radii: np.ndarray
    ratios: np.ndarray
    errors: np.ndarray | None = None

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.ratios = np.asarray(self.ratios, dtype=float)
        if self.radii.shape != self.ratios.shape:
            raise DomainError("radii and ratios differ in length")
        if np.any(np.diff(self.radii) <= 0):
            raise DomainError("radii must be strictly increasing")

    def to_dict(self) -> dict:
        return {"radii": self.radii.tolist(), "ratios": self.ratios.tolist()}

    def to_csv(self) -> str:
        lines = ["r,ratio"] + [f"{r:.17g},{m:.17g}" for r, m in zip(self.radii, self.ratios)]
        return "\n".join(lines) + "\n"


@dataclass
class DensityEstimate:
    point: np.ndarray
    value: float
    radii_used: tuple
    extrapolation_error: float

    def to_dict(self) -> dict:
        return {"point": np.asarray(self.point).tolist(), "value": self.value,
                "radii_used": list(self.radii_used), "extrapolation_error": self.extrapolation_error}


def ideal_boundary_volume(sigma: Submanifold, rtol: float = RTOL) -> float:
    """(k-1)-dimensional Euclidean volume of the ideal boundary charts."""
    if not sigma.ideal_charts:
        raise DomainError("submanifold has no ideal boundary charts")
    total = 0.0
    for c in sigma.ideal_charts:
        v, _ = _integrate_chart(c, euclidean_weight, None, rtol)
        total += float(v[0])
    return total


def euclidean_volume(sigma: Submanifold, truncation_radius: float = 1.0,
                     rtol: float = RTOL, with_boundary: bool = True) -> VolumeReport:
    """Euclidean k-volume of ``sigma`` with a tail estimate.

    With ``truncation_radius < 1`` the volume inside that radius and inside
    ``1 - (1 - R)/10`` are combined by Richardson extrapolation in ``1 - R``.
    With ``truncation_radius = 1`` only charts stopping short of the sphere
    (catenoids) are extrapolated, using their own two truncation levels.
    The hyperbolic density scaled by ``((1 - r^2)/2)^k`` is integrated
    alongside and must reproduce the Euclidean value.
    """
    if not 0 < truncation_radius <= 1:
        raise DomainError(f"truncation radius must lie in (0, 1], got {truncation_radius}")
    charts = sigma.interior_charts
    if truncation_radius < 1:
        eps = 1.0 - truncation_radius
        plan = ClipPlan.build(charts)
        v1, e1 = _clipped_total(charts, _conversion_weight, truncation_radius, rtol, plan)
        v2, e2 = _clipped_total(charts, _conversion_weight, 1.0 - eps / 10.0, rtol, plan)
        extra = (v2 - v1) / 9.0
        value, err, tail = v2 + extra, e1 + e2, float(abs(extra[0]) + abs(v2[0] - v1[0]))
    else:
        value, err, tail = _full_total(charts, _conversion_weight, rtol)
    vol = float(value[0])
    residual = abs(float(value[1]) - vol) / max(abs(vol), 1e-300)
    if tail > TAIL_LIMIT * max(vol, 1e-300):
        raise TruncationError(f"tail estimate {tail:.3e} exceeds 1% of volume {vol:.3e}")
    vb = ideal_boundary_volume(sigma, rtol) if with_boundary else float("nan")
    return VolumeReport(vol, vb, truncation_radius, tail, err, residual)


def volume_only(sigma: Submanifold, rtol: float = 1e-9) -> float:
    """Cheap Euclidean volume (no cross-check, no boundary); used by the optimiser."""
    value, _, _ = _full_total(sigma.interior_charts, euclidean_weight, rtol)
    return float(value[0])


def truncated_volume(sigma: Submanifold, r: float, rtol: float = RTOL,
                     plan: ClipPlan | None = None, with_error: bool = False):
    """``Vol(Sigma cap B_r)`` for ``0 < r < 1``."""
    if not 0 < r < 1:
        raise DomainError(f"r must lie in (0, 1), got {r}")
    v, e = _clipped_total(sigma.interior_charts, euclidean_weight, r, rtol, plan)
    v = float(np.atleast_1d(v)[0])
    return (v, e) if with_error else v


def chebyshev_radii(grid_size: int, lo: float = 1e-3, hi: float = 1.0 - 1e-6) -> np.ndarray:
    """Chebyshev-Lobatto points on ``[lo, hi]`` in increasing order."""
    j = np.arange(grid_size)
    x = -np.cos(np.pi * j / (grid_size - 1))
    r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
    r[0], r[-1] = lo, hi
    return r


def monotonicity_curve(sigma: Submanifold, grid_size: int = 100, rtol: float = RTOL,
                       radii=None) -> MonotonicityCurve:
    """``m(r) = Vol(Sigma cap B_r) / r^k`` on Chebyshev-spaced radii."""
    if radii is None:
        if grid_size < 10:
            raise DomainError("grid_size must be >= 10")
        radii = chebyshev_radii(grid_size)
    radii = np.asarray(radii, dtype=float)
    plan = ClipPlan.build(sigma.interior_charts)
    vals, errs = [], []
    for r in radii:
        v, e = truncated_volume(sigma, float(r), rtol, plan, with_error=True)
        vals.append(v / r**sigma.k)
        errs.append(e / r**sigma.k)
    return MonotonicityCurve(radii, np.array(vals), np.array(errs))


def _locate(sigma: Submanifold, p):
    best = None
    for idx, c in enumerate(sigma.interior_charts):
        u, dist = closest_point(c, p)
        if best is None or dist < best[2]:
            best = (idx, u, dist)
    return best


def density(sigma: Submanifold, p, radii=DENSITY_RADII, rtol: float = 1e-12) -> DensityEstimate:
    """Density of ``sigma`` at ``p`` after moving ``p`` to the origin.

    ``m(r) / omega_k`` is fitted linearly in ``r^2`` and the intercept
    returned; the fit residual (plus quadrature error) is the error estimate.
    """
    p = np.asarray(p, dtype=float)
    if not np.linalg.norm(p) < 1:
        raise DomainError("p must lie in the open ball")
    g = mobius_translate(-p)
    charts = [c.compose(g) for c in sigma.interior_charts]
    seeds = []
    for idx, c in enumerate(sigma.interior_charts):
        u, dist = closest_point(c, p)
        if dist < ON_SURFACE_TOL:
            seeds.append((idx, u))
    if not seeds:
        raise DomainError(f"point {p} is not on the submanifold")
    plan = ClipPlan.build(charts, seeds)
    omega = unit_ball_volume(sigma.k)
    ratios, qerr = [], 0.0
    for r in radii:
        v, e = _clipped_total(charts, euclidean_weight, r, rtol, plan)
        ratios.append(float(np.atleast_1d(v)[0]) / (omega * r**sigma.k))
        qerr = max(qerr, e / (omega * r**sigma.k))
    r2 = np.asarray(radii, dtype=float) ** 2
    design = np.column_stack([np.ones_like(r2), r2])
    coef, *_ = np.linalg.lstsq(design, np.array(ratios), rcond=None)
    resid = float(np.max(np.abs(design @ coef - ratios)))
    return DensityEstimate(p, float(coef[0]), tuple(radii), resid + qerr)


# -------------------------------------------------------- identity checks

def conversion_check(sigma: Submanifold, rtol: float = 1e-10) -> float:
    """Largest cell-wise relative gap between ``dV_R`` and ``((1-r^2)/2)^k dV_H``."""
    worst = 0.0
    for c in sigma.interior_charts:
        chart = c.restricted(c.tail_levels[-1].lo, c.tail_levels[-1].hi) if c.tail_levels else c
        res = integrate_box(lambda u: _conversion_weight(*chart.evaluate(u)), chart.lo, chart.hi,
                            rtol=rtol, atol=1e-300, initial_splits=2)
        cv = res.cell_values
        scale = np.maximum(np.abs(cv[:, 0]), 1e-300)
        worst = max(worst, float(np.max(np.abs(cv[:, 0] - cv[:, 1]) / scale)))
    return worst


def _boundary_tangents(chart: Chart, u: np.ndarray):
    """Tangent frame ``(m, n, k-1)`` of the level set ``|x| = const`` through ``u``."""
    x, j = chart.evaluate(u)
    hu = 2.0 * np.einsum("mn,mnk->mk", x, j)
    if np.any(np.abs(hu[:, 0]) < 1e-14):
        raise ChartError("clip boundary is tangent to the first chart direction")
    dt = -hu[:, 1:] / hu[:, :1]
    return x, j[:, :, :1] * dt[:, None, :] + j[:, :, 1:]


def _boundary_roots(chart: Chart, r: float, v: np.ndarray, lo0: float, hi0: float):
    """Parameter points on ``|x| = r`` along first-parameter lines; ``(rows, u)``."""
    row, roots, _ = _line_roots(chart, r, v, lo0, hi0)
    return row, np.column_stack([roots, v[row]])


def boundary_form_check(sigma: Submanifold, r: float, rtol: float = 1e-11) -> float:
    """Cell-wise relative gap between ``dsigma_H`` and ``(sinh rho / r)^(k-1) dsigma_R``.

    ``dsigma_H`` uses the conformal factor at the computed boundary points,
    the right side uses the clip radius only.
    """
    k = sigma.k
    if k < 2:
        raise DomainError("boundary forms need k >= 2")
    scale_r = (math.sinh(radius_to_rho(r)) / r) ** (k - 1)
    plan = ClipPlan.build(sigma.interior_charts)
    worst = 0.0
    for idx, c in enumerate(sigma.interior_charts):
        for lo, hi in plan.boxes(idx, c, r):
            def integrand(v, c=c, lo=lo, hi=hi):
                row, u = _boundary_roots(c, r, v, lo[0], hi[0])
                out = np.zeros((v.shape[0], 2))
                if row.size:
                    x, t = _boundary_tangents(c, u)
                    ds_r = _sqrt_gram(t)
                    rr = np.linalg.norm(x, axis=1)
                    lam = 2.0 / ((1.0 - rr) * (1.0 + rr))
                    ds_h = np.sqrt(np.maximum(gram_det(lam[:, None, None] * t), 0.0))
                    np.add.at(out, row, np.column_stack([ds_h, scale_r * ds_r]))
                return out

            res = integrate_box(integrand, lo[1:], hi[1:], rtol=rtol, atol=1e-300, initial_splits=4)
            cv = res.cell_values
            scale = np.maximum(np.abs(cv[:, 0]), 1e-300)
            nz = np.abs(cv[:, 0]) > 1e-14 * np.max(np.abs(cv[:, 0]) + 1e-300)
            if np.any(nz):
                worst = max(worst, float(np.max(np.abs(cv[nz, 0] - cv[nz, 1]) / scale[nz])))
    return worst


def _coarea_weight(k):
    def weight(x, j):
        r = np.linalg.norm(x, axis=1)
        rho = 2.0 * np.arctanh(r)
        w = (1.0 + np.cosh(rho)) ** (-k)
        grad = tangential_radial_gradient(x, j)
        dv = hyperbolic_weight(x, j)
        return np.column_stack([w * grad * grad * dv, w * grad * dv])
    return weight


def coarea_check(sigma: Submanifold, rho: float, delta: float = 1e-3, rtol: float = 1e-13):
    """Coarea identities for ``w = (1 + cosh rho)^-k`` at hyperbolic radius ``rho``.

    Returns ``(derivative (2,), boundary (2,))``: finite-difference
    ``d/drho`` of ``int_{B_rho} w |grad rho|^2 dV_H`` and of
    ``int_{B_rho} w |grad rho| dV_H`` against the boundary integrals of
    ``w |grad rho|`` and ``w``.
    """
    k = sigma.k
    charts = sigma.interior_charts
    plan = ClipPlan.build(charts)
    weight = _coarea_weight(k)
    vals = []
    for step in (-2, -1, 1, 2):
        r = math.tanh(0.5 * (rho + step * delta))
        v, _ = _clipped_total(charts, weight, r, rtol, plan)
        vals.append(np.atleast_1d(v))
    deriv = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * delta)

    r = math.tanh(0.5 * rho)
    w = (1.0 + math.cosh(rho)) ** (-k)
    bound = np.zeros(2)
    for idx, c in enumerate(charts):
        for lo, hi in plan.boxes(idx, c, r):
            def integrand(v, c=c, lo=lo, hi=hi):
                row, u = _boundary_roots(c, r, v, lo[0], hi[0])
                out = np.zeros((v.shape[0], 2))
                if row.size:
                    x, t = _boundary_tangents(c, u)
                    _, j = c.evaluate(u)
                    rr = np.linalg.norm(x, axis=1)
                    lam = 2.0 / ((1.0 - rr) * (1.0 + rr))
                    ds_h = lam ** (k - 1) * _sqrt_gram(t)
                    grad = tangential_radial_gradient(x, j)
                    np.add.at(out, row, np.column_stack([w * grad * ds_h, w * ds_h]))
                return out

            res = integrate_box(integrand, lo[1:], hi[1:], rtol=1e-12, atol=1e-300, initial_splits=4)
            bound += np.atleast_1d(res.value)
    return deriv, bound
