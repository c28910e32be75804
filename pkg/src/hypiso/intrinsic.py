"""Intrinsic Laplacians of radial functions on chart-parametrised submanifolds.

The induced hyperbolic metric in chart coordinates is
``g_ij = lambda^2 <J_i, J_j>`` with ``lambda = 2 / (1 - |x|^2)``.  For a
function ``F = psi(rho)`` of the distance to the origin the coordinate
gradient is exact (``d rho / dx = lambda x / |x|``) and the Laplacian

    Delta F = g^-1/2 d_i (g^1/2 g^ij d_j F)

is formed by central differences of the flux ``g^1/2 g^ij d_j F``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .charts import Chart, Submanifold, orthonormal_frame
from .errors import DomainError
from .families import cap_carrier
from .measure import tangential_radial_gradient

FD_STEP = 1e-4
RADIUS_WINDOW = (0.05, 0.95)


def _flux(chart: Chart, u: np.ndarray, dpsi):
    """``sqrt(g) g^ij d_j F`` and ``sqrt(g)`` at parameters ``u``."""
    x, j = chart.evaluate(u)
    r = np.linalg.norm(x, axis=1)
    lam = 2.0 / ((1.0 - r) * (1.0 + r))
    rho = 2.0 * np.arctanh(r)
    g = lam[:, None, None] ** 2 * np.einsum("mni,mnj->mij", j, j)
    ginv = np.linalg.inv(g)
    sqrt_g = np.sqrt(np.linalg.det(g))
    drho = lam[:, None] * np.einsum("mn,mnk->mk", x / r[:, None], j)
    grad = dpsi(rho)[:, None] * drho
    return sqrt_g[:, None] * np.einsum("mij,mj->mi", ginv, grad), sqrt_g


def laplacian_radial(chart: Chart, u: np.ndarray, dpsi, h: float = FD_STEP) -> np.ndarray:
    """``Delta_Sigma psi(rho)`` at chart parameters ``u``; ``dpsi`` is ``psi'``."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    k = chart.k
    _, sqrt_g = _flux(chart, u, dpsi)
    div = np.zeros(u.shape[0])
    for i in range(k):
        e = np.zeros(k)
        e[i] = h
        fp, _ = _flux(chart, u + e, dpsi)
        fm, _ = _flux(chart, u - e, dpsi)
        div += (fp[:, i] - fm[:, i]) / (2.0 * h)
    return div / sqrt_g


def lemma_function_derivative(k: int):
    """``psi'`` for ``psi(rho) = (1 + cosh rho)^(1 - k)``."""
    return lambda rho: (1.0 - k) * np.sinh(rho) * (1.0 + np.cosh(rho)) ** (-k)


def lemma_bound(k: int, rho) -> np.ndarray:
    """``-k (k - 1) / (1 + cosh rho)^k``."""
    return -k * (k - 1) * (1.0 + np.cosh(rho)) ** (-k)


@dataclass
class LaplacianSamples:
    points: np.ndarray
    rho: np.ndarray
    grad_norm: np.ndarray  # |grad_Sigma rho|
    lap_rho: np.ndarray
    lap_f: np.ndarray  # Laplacian of (1 + cosh rho)^(1 - k)

    def identity_residual(self, k: int) -> np.ndarray:
        """``Delta rho - coth rho (k - |grad rho|^2)``."""
        return self.lap_rho - (k - self.grad_norm**2) / np.tanh(self.rho)

    def inequality_gap(self, k: int) -> np.ndarray:
        """``Delta f - bound``; the inequality says this is <= 0."""
        return self.lap_f - lemma_bound(k, self.rho)


def sample_parameters(chart: Chart, count: int, rng: np.random.Generator,
                      margin: float = 0.05, window=RADIUS_WINDOW, max_tries: int = 200) -> np.ndarray:
    """Random chart parameters away from domain faces, degenerate points and the origin."""
    out = []
    width = chart.hi - chart.lo
    lo = chart.lo + np.where(chart.periodic, 0.0, margin * width)
    hi = chart.hi - np.where(chart.periodic, 0.0, margin * width)
    for _ in range(max_tries):
        u = lo + (hi - lo) * rng.random((4 * count, chart.k))
        x, j = chart.evaluate(u)
        r = np.linalg.norm(x, axis=1)
        sv = np.linalg.svd(j, compute_uv=False)
        ok = (r > window[0]) & (r < window[1]) & (sv[:, -1] > 1e-3 * sv[:, 0])
        out.extend(u[ok])
        if len(out) >= count:
            return np.array(out[:count])
    raise DomainError("could not find enough admissible sample points on the chart")


def laplacian_samples(sigma: Submanifold, count: int, seed: int = 0, charts=None,
                      params=None) -> LaplacianSamples:
    """Evaluate both radial Laplacians at ``count`` points spread over the charts."""
    rng = np.random.default_rng(seed)
    charts = list(charts if charts is not None else sigma.interior_charts)
    k = sigma.k
    per = [count // len(charts) + (1 if i < count % len(charts) else 0) for i in range(len(charts))]
    pts, rho, grad, lap_rho, lap_f = [], [], [], [], []
    for chart, m in zip(charts, per):
        if m == 0:
            continue
        u = params if params is not None else sample_parameters(chart, m, rng)
        x, j = chart.evaluate(u)
        r = np.linalg.norm(x, axis=1)
        pts.append(x)
        rho.append(2.0 * np.arctanh(r))
        grad.append(tangential_radial_gradient(x, j))
        lap_rho.append(laplacian_radial(chart, u, lambda p: np.ones_like(p)))
        lap_f.append(laplacian_radial(chart, u, lemma_function_derivative(k)))
    cat = np.concatenate
    return LaplacianSamples(cat(pts), cat(rho), cat(grad), cat(lap_rho), cat(lap_f))


def cap_pole_chart(sigma: Submanifold, half_width: float = 0.3) -> Chart:
    """Graph chart of a geodesic cap over its tangent plane at the pole.

    Regular at the pole, unlike the polar chart used for volumes.
    """
    if sigma.kind != "cap" or sigma.params.get("theta", math.pi / 2) >= math.pi / 2:
        raise DomainError("pole charts exist for caps with theta < pi/2")
    k, theta = sigma.k, sigma.params["theta"]
    axis = np.asarray(sigma.params["axis"], dtype=float)
    frame = orthonormal_frame(axis, k)
    center, radius = cap_carrier(theta)

    def fn(y):
        s = np.sqrt(1.0 - np.sum(y * y, axis=1))
        x = center * axis + radius * (-s[:, None] * axis + y @ frame.T)
        j = radius * (frame[None, :, :] + axis[None, :, None] * (y / s[:, None])[:, None, :])
        return x, j

    return Chart(np.full(k, -half_width), np.full(k, half_width), fn, axis.size)
