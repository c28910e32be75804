"""Spherical catenoids in H^3 about a geodesic axis.

In Fermi coordinates ``(t, sigma, phi)`` around the axis the metric is
``cosh^2 sigma dt^2 + dsigma^2 + sinh^2 sigma dphi^2`` and a surface of
revolution ``sigma = sigma(t)`` has area density
``sinh sigma * sqrt(cosh^2 sigma + sigma'^2)``.  The generating curve is
integrated in hyperbolic arclength ``s`` with the tangent angle ``alpha``
measured from the ``t`` direction:

    t' = cos(alpha) / cosh(sigma),  sigma' = sin(alpha),
    alpha' = 2 cos(alpha) coth(2 sigma).

This is the Euler-Lagrange equation of the area density rewritten in
arclength; the Beltrami first integral becomes
``sinh(sigma) cosh(sigma) cos(alpha) = sinh(sigma0) cosh(sigma0)``.

Far out ``cos(alpha)`` decays like ``exp(-2 sigma)``, so the solver state
uses the complementary angle ``psi = pi/2 - alpha`` under a purely relative
error control; integrating ``alpha`` itself loses all digits of ``cos(alpha)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .ball import mobius_add, mobius_add_dparam, mobius_add_jacobian, radius_to_rho
from .charts import Chart, Submanifold, TailLevel
from .errors import ConvergenceError, DomainError

BOUNDARY_EPS = (1e-5, 1e-6)
RTOL = 1e-12
ATOL = 1e-14
STEP_BUDGET = 10**6
FIRST_INTEGRAL_TOL = 1e-8


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2 * x)) - math.log(2.0)


def profile_rhs(s, y):
    """Right-hand side in the state ``(t, sigma, psi)``, ``psi = pi/2 - alpha``."""
    t, sigma, psi = y
    return [math.sin(psi) / math.cosh(sigma), math.cos(psi),
            -2.0 * math.sin(psi) / math.tanh(2.0 * sigma)]


def first_integral(sigma, psi):
    """``sinh(sigma) cosh(sigma) cos(alpha)`` in terms of ``psi``."""
    return 0.5 * np.sinh(2.0 * sigma) * np.sin(psi)


def distance_from_origin(t, sigma):
    """Hyperbolic distance from the origin of the Fermi point ``(t, sigma)``."""
    # cosh d = cosh t cosh sigma (right-angled triangle)
    lc = _log_cosh(t) + _log_cosh(sigma)
    return np.arccosh(np.exp(np.minimum(lc, 700.0))) if np.ndim(lc) else float(
        math.acosh(math.exp(min(lc, 700.0))))


@dataclass(frozen=True)
class CatenoidProfile:
    neck: float
    s: np.ndarray
    t: np.ndarray
    sigma: np.ndarray
    psi: np.ndarray  # pi/2 - tangent angle
    residual: float
    s_levels: tuple  # arclengths where |x| = 1 - eps for eps in BOUNDARY_EPS
    t_inf: float
    solution: object

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.sigma.tolist()))

    @property
    def alpha(self) -> np.ndarray:
        return 0.5 * np.pi - self.psi

    def state(self, s):
        """``(t, sigma, dt/ds, dsigma/ds)`` at signed arclength ``s``.

        The profile is symmetric about the neck: ``t`` is odd in ``s`` and
        ``sigma`` is even.
        """
        s = np.asarray(s, dtype=float)
        t, sigma, psi = self.solution(np.abs(s))
        sign = np.where(s < 0, -1.0, 1.0)
        return sign * t, sigma, np.sin(psi) / np.cosh(sigma), sign * np.cos(psi)

    @property
    def first_integral(self) -> float:
        return math.sinh(self.neck) * math.cosh(self.neck)


def shoot_profile(neck: float, boundary_eps=BOUNDARY_EPS, s_max: float = 200.0) -> CatenoidProfile:
    """Integrate the generating curve from the neck until ``|x| > 1 - eps``."""
    if not neck > 0:
        raise DomainError(f"neck must be > 0, got {neck}")
    targets = [radius_to_rho(1.0 - e) for e in boundary_eps]
    log_targets = [float(_log_cosh(d)) for d in targets]

    def make_event(lt, terminal):
        def ev(s, y):
            return float(_log_cosh(y[0]) + _log_cosh(y[1])) - lt
        ev.terminal = terminal
        ev.direction = 1
        return ev

    events = [make_event(lt, i == len(targets) - 1) for i, lt in enumerate(log_targets)]
    # psi shrinks to ~1e-12 at the collar: control its error relatively only
    atol = np.array([ATOL, ATOL, 1e-300])
    sol = integrate.solve_ivp(profile_rhs, (0.0, s_max), [0.0, neck, 0.5 * np.pi], method="DOP853",
                              rtol=RTOL, atol=atol, dense_output=True, events=events)
    if sol.status != 1 or len(sol.t) > STEP_BUDGET:
        raise ConvergenceError(f"profile did not reach the boundary collar (status {sol.status})")
    s_levels = tuple(float(e[0]) for e in sol.t_events)
    s_fine = np.linspace(0.0, s_levels[-1], 4001)
    y = sol.sol(s_fine)
    k0 = math.sinh(neck) * math.cosh(neck)
    drift = np.abs(first_integral(y[1], y[2]) - k0) / k0
    drift_steps = np.abs(first_integral(sol.y[1], sol.y[2]) - k0) / k0
    residual = float(max(drift.max(), drift_steps.max()))
    if residual > FIRST_INTEGRAL_TOL:
        raise ConvergenceError(f"first integral drifted by {residual:.3e}")
    t_end, sig_end = sol.y[0, -1], sol.y[1, -1]

    def dt_dsigma(sig):
        # K / (cosh * sqrt(sinh^2 cosh^2 - K^2)) written to avoid overflow
        e = math.exp(-2.0 * sig)
        sc = 0.25 * (1.0 - e * e) / e  # sinh cosh
        if not math.isfinite(sc) or sc > 1e150:
            return 0.0
        return k0 / (math.cosh(sig) * math.sqrt(sc * sc - k0 * k0))

    tail, _ = integrate.quad(dt_dsigma, sig_end, np.inf, epsabs=1e-16, epsrel=1e-12, limit=200)
    return CatenoidProfile(neck, sol.t, sol.y[0], sol.y[1], sol.y[2], residual, s_levels,
                           float(t_end + tail), sol.sol)


def catenoid_surface(neck: float, n: int = 3, profile: CatenoidProfile | None = None) -> Submanifold:
    """Catenoid about the diameter through ``e_3`` with neck at distance ``neck``."""
    if n < 3:
        raise DomainError("catenoids need n >= 3")
    prof = profile or shoot_profile(neck)
    e1, e2, e3 = np.eye(n)[:3]

    def fn(u):
        s, phi = u[:, 0], u[:, 1]
        t, sigma, dt, dsig = prof.state(s)
        cp, sp = np.cos(phi)[:, None], np.sin(phi)[:, None]
        radial = cp * e1 + sp * e2
        beta = np.tanh(0.5 * t)[:, None]
        rq = np.tanh(0.5 * sigma)[:, None]
        b = beta * e3
        q = rq * radial
        x = mobius_add(b, q)
        dx = mobius_add_jacobian(b, q)
        da = mobius_add_dparam(b, q)
        dt, dsig = dt[:, None], dsig[:, None]
        db = 0.5 * (1.0 - beta**2) * dt * e3
        dq = 0.5 * (1.0 - rq**2) * dsig * radial
        dq_phi = rq * (-sp * e1 + cp * e2)
        j = np.empty((u.shape[0], n, 2))
        j[:, :, 0] = np.einsum("mij,mj->mi", da, db) + np.einsum("mij,mj->mi", dx, dq)
        j[:, :, 1] = np.einsum("mij,mj->mi", dx, dq_phi)
        return x, j

    def points(u):
        t, sigma, _, _ = prof.state(u[:, 0])
        radial = np.cos(u[:, 1])[:, None] * e1 + np.sin(u[:, 1])[:, None] * e2
        return mobius_add(np.tanh(0.5 * t)[:, None] * e3, np.tanh(0.5 * sigma)[:, None] * radial)

    s5, s6 = prof.s_levels
    tails = tuple(TailLevel(eps, np.array([-s, 0.0]), np.array([s, 2 * np.pi]))
                  for eps, s in zip(BOUNDARY_EPS, (s5, s6)))
    interior = Chart([-s6, 0.0], [s6, 2 * np.pi], fn, n, periodic=(False, True), tail_levels=tails,
                     points=points)

    def circle(sign):
        beta = math.tanh(0.5 * prof.t_inf) * sign

        def cfn(u):
            phi = u[:, 0]
            cp, sp = np.cos(phi)[:, None], np.sin(phi)[:, None]
            q = cp * e1 + sp * e2
            b = beta * e3
            dx = mobius_add_jacobian(b, q)
            return mobius_add(b, q), np.einsum("mij,mj->mi", dx, -sp * e1 + cp * e2)[:, :, None]

        return Chart([0.0], [2 * np.pi], cfn, n, periodic=(True,))

    neck_point = math.tanh(0.5 * neck) * e1
    return Submanifold(2, n, [interior], [circle(1.0), circle(-1.0)], contains_origin=False,
                       totally_geodesic=False, candidate_density_points=(neck_point,),
                       kind="catenoid", params={"neck": neck, "n": n, "t_inf": prof.t_inf,
                                                "residual": prof.residual})


def ideal_circle_radius(t_inf: float) -> float:
    """Euclidean radius ``sech t_inf`` of each boundary circle."""
    return 1.0 / math.cosh(t_inf)
