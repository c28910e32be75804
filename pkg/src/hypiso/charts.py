"""Parametrised pieces of submanifolds of the ball and their Jacobians."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .ball import MobiusMap
from .errors import DomainError

FD_STEP = 1e-6


@dataclass(frozen=True)
class TailLevel:
    """Chart domain truncated where the underlying surface reaches ``|x| = 1 - eps``."""

    eps: float
    lo: np.ndarray
    hi: np.ndarray


@dataclass(frozen=True)
class Chart:
    """Smooth map from a box ``[lo, hi]`` in R^k into R^n.

    ``fn(u)`` maps ``(m, k)`` parameters to ``(points (m, n), Jacobian
    (m, n, k))``.  With ``has_jacobian=False`` it returns points only and the
    Jacobian falls back to central differences.  Charts of
    surfaces that stop short of the ideal boundary carry two ``tail_levels``
    used for Richardson extrapolation of the missing collar.  An optional
    ``points`` callable returns the points alone and speeds up root finding.
    """

    lo: np.ndarray
    hi: np.ndarray
    fn: Callable
    n: int
    periodic: tuple = ()
    tail_levels: tuple = ()
    has_jacobian: bool = True
    points: Callable | None = None

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or np.any(hi < lo):
            raise DomainError("invalid chart domain")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        per = tuple(self.periodic) or (False,) * lo.size
        object.__setattr__(self, "periodic", per)

    @property
    def k(self) -> int:
        return self.lo.size

    def map(self, u) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if self.points is not None:
            return self.points(u)
        if not self.has_jacobian:
            return self.fn(u)
        return self.fn(u)[0]

    def jacobian(self, u) -> np.ndarray:
        return self.evaluate(u)[1]

    def evaluate(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if self.has_jacobian:
            return self.fn(u)
        x = self.fn(u)
        cols = []
        for i in range(self.k):
            e = np.zeros(self.k)
            e[i] = FD_STEP
            cols.append((self.fn(u + e) - self.fn(u - e)) / (2 * FD_STEP))
        return x, np.stack(cols, axis=-1)

    def compose(self, g: MobiusMap) -> "Chart":
        """The chart ``g o self``; the Jacobian picks up ``dg``."""
        base = self

        def fn(u):
            x, j = base.evaluate(u)
            return g(x), g.jacobian(x) @ j

        def points(u):
            return g(base.map(u))

        return replace(self, fn=fn, has_jacobian=True, points=points)

    def restricted(self, lo, hi) -> "Chart":
        return replace(self, lo=np.asarray(lo, float), hi=np.asarray(hi, float), tail_levels=())

    def probe_grid(self, per_dim: int = 10) -> np.ndarray:
        """Interior probe points, avoiding the domain faces."""
        if self.k == 0:
            return np.zeros((1, 0))
        axes = [lo + (hi - lo) * (np.arange(per_dim) + 0.5) / per_dim
                for lo, hi in zip(self.lo, self.hi)]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=-1)


def gram_det(j: np.ndarray) -> np.ndarray:
    """``det(J^T J)`` for a stack of ``(n, k)`` Jacobians; 1 when ``k = 0``."""
    if j.shape[-1] == 0:
        return np.ones(j.shape[0])
    g = np.einsum("mni,mnj->mij", j, j)
    return np.linalg.det(g)


def sphere_param(angles: np.ndarray, k: int):
    """Hyperspherical coordinates on S^{k-1} and their derivatives.

    ``angles`` has ``k - 1`` columns: the first ``k - 2`` in ``[0, pi]`` and
    the last in ``[0, 2 pi]``.  Returns ``omega (m, k)`` and
    ``d omega (m, k, k - 1)``.
    """
    m = angles.shape[0]
    if k == 1:
        raise DomainError("S^0 has no angular chart")
    s, c = np.sin(angles), np.cos(angles)
    d = k - 1
    omega = np.empty((m, k))
    domega = np.zeros((m, k, d))
    for j in range(k):
        # omega_j = prod_{i<j} sin a_i * (cos a_j if j < d else 1)
        n_sin = min(j, d)
        factors = [s[:, i] for i in range(n_sin)]
        last = c[:, j] if j < d else np.ones(m)
        val = last.copy()
        for f in factors:
            val = val * f
        omega[:, j] = val
        for l in range(d):
            if l < n_sin:
                t = last.copy()
                for i in range(n_sin):
                    t = t * (c[:, i] if i == l else s[:, i])
                domega[:, j, l] = t
            elif l == j and j < d:
                t = -s[:, j]
                for f in factors:
                    t = t * f
                domega[:, j, l] = t
    return omega, domega


def sphere_box(k: int):
    """Parameter box of :func:`sphere_param` for S^{k-1}."""
    lo = np.zeros(k - 1)
    hi = np.full(k - 1, np.pi)
    hi[-1] = 2 * np.pi
    per = (False,) * (k - 2) + (True,)
    return lo, hi, per


def orthonormal_frame(axis: np.ndarray, count: int) -> np.ndarray:
    """``count`` orthonormal vectors perpendicular to ``axis`` (deterministic)."""
    n = axis.size
    m = np.column_stack([axis, np.eye(n)])
    q, _ = np.linalg.qr(m)
    q = q[:, 1:]
    # align each column with the closest standard basis vector for readability
    for i in range(q.shape[1]):
        j = np.argmax(np.abs(q[:, i]))
        if q[j, i] < 0:
            q[:, i] = -q[:, i]
    return q[:, :count]


def point_chart(p: np.ndarray) -> Chart:
    """A zero-dimensional chart: a single point."""
    p = np.asarray(p, dtype=float)

    def fn(u):
        m = u.shape[0]
        return np.tile(p, (m, 1)), np.zeros((m, p.size, 0))

    return Chart(np.zeros(0), np.zeros(0), fn, p.size)


@dataclass(frozen=True)
class Submanifold:
    """A k-dimensional submanifold of B^n given by charts.

    ``ideal_charts`` are (k-1)-dimensional charts of the ideal boundary on
    the unit sphere.  ``params`` records how the family was built (used for
    closed forms and serialisation).
    """

    k: int
    n: int
    interior_charts: tuple
    ideal_charts: tuple
    contains_origin: bool = False
    totally_geodesic: bool = False
    candidate_density_points: tuple = ()
    minimal: bool = True
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise DomainError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        for c in self.interior_charts:
            if c.k != self.k or c.n != self.n:
                raise DomainError("interior chart has the wrong dimensions")
        for c in self.ideal_charts:
            if c.k != self.k - 1 or c.n != self.n:
                raise DomainError("ideal chart has the wrong dimensions")
        pts = tuple(np.asarray(p, dtype=float) for p in self.candidate_density_points)
        object.__setattr__(self, "interior_charts", tuple(self.interior_charts))
        object.__setattr__(self, "ideal_charts", tuple(self.ideal_charts))
        object.__setattr__(self, "candidate_density_points", pts)


def _refine(chart: Chart, p: np.ndarray, u0: np.ndarray):
    from scipy.optimize import least_squares

    if chart.k == 0:
        return u0, float(np.linalg.norm(chart.map(u0[None])[0] - p))

    def res(u):
        return chart.map(u[None])[0] - p

    def jac(u):
        return chart.jacobian(u[None])[0]

    lo, hi = chart.lo, chart.hi
    u0 = np.clip(u0, lo, hi)
    sol = least_squares(res, u0, jac=jac, bounds=(lo, hi), method="trf",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
    return sol.x, float(np.linalg.norm(res(sol.x)))


def closest_point(chart: Chart, p, per_dim: int = 12, seeds: int = 4):
    """Parameter of the chart point nearest ``p`` and the Euclidean distance."""
    p = np.asarray(p, dtype=float)
    if chart.k == 0:
        u = np.zeros(0)
        return u, float(np.linalg.norm(chart.map(u[None])[0] - p))
    axes = [np.linspace(lo, hi, per_dim) for lo, hi in zip(chart.lo, chart.hi)]
    grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], -1)
    d = np.linalg.norm(chart.map(grid) - p, axis=1)
    best = None
    for i in np.argsort(d, kind="stable")[:seeds]:
        u, dist = _refine(chart, p, grid[i])
        if best is None or dist < best[1]:
            best = (u, dist)
    return best


def local_minima(chart: Chart, p=None, per_dim: int = 24):
    """Local minimisers of ``|x(u) - p|`` over the chart domain.

    Grid local minima (periodic axes wrap) are refined by bounded least
    squares and de-duplicated.  Returns a list of ``(u, distance)``.
    """
    p = np.zeros(chart.n) if p is None else np.asarray(p, dtype=float)
    k = chart.k
    if k == 0:
        u = np.zeros(0)
        return [(u, float(np.linalg.norm(chart.map(u[None])[0] - p)))]
    axes = []
    for i in range(k):
        if chart.periodic[i]:
            axes.append(np.linspace(chart.lo[i], chart.hi[i], per_dim, endpoint=False))
        else:
            axes.append(np.linspace(chart.lo[i], chart.hi[i], per_dim))
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([g.ravel() for g in mesh], -1)
    f = np.sum((chart.map(grid) - p) ** 2, axis=1).reshape((per_dim,) * k)
    is_min = np.ones(f.shape, dtype=bool)
    for shift in np.ndindex(*(3,) * k):
        off = np.array(shift) - 1
        if not off.any():
            continue
        g = f
        valid = np.ones(f.shape, dtype=bool)
        for ax in range(k):
            g = np.roll(g, -off[ax], axis=ax)
            if not chart.periodic[ax] and off[ax] != 0:
                v = np.ones(per_dim, dtype=bool)
                if off[ax] > 0:
                    v[-1] = False
                else:
                    v[0] = False
                shape = [1] * k
                shape[ax] = per_dim
                valid &= v.reshape(shape)
        is_min &= ~valid | (f <= g)
    found = []
    for flat in np.flatnonzero(is_min.ravel()):
        u, dist = _refine(chart, p, grid[flat])
        x = chart.map(u[None])[0]
        if any(np.linalg.norm(x - chart.map(v[None])[0]) < 1e-9 and abs(dist - dd) < 1e-12
               and np.linalg.norm(u - v) < 1e-3 * np.linalg.norm(chart.hi - chart.lo)
               for v, dd in found):
            continue
        found.append((u, dist))
    return found
