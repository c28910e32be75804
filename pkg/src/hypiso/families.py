"""Concrete complete proper minimal submanifolds of the ball.

Totally geodesic caps, flat disks through the origin, Mobius images, finite
unions and (in :mod:`hypiso.catenoid`) spherical catenoids.  Also the exact
cap volumes used as oracles for the quadrature.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.special import gamma

from .ball import MobiusMap
from .charts import (Chart, Submanifold, closest_point, orthonormal_frame, point_chart,
                     sphere_box, sphere_param)
from .errors import DomainError

ORIGIN_PROBE = 1e-8


def unit_ball_volume(k: int) -> float:
    """Volume of the unit k-ball, ``pi^(k/2) / Gamma(k/2 + 1)``."""
    if k < 1:
        raise DomainError("k must be >= 1")
    return math.pi ** (k / 2) / gamma(k / 2 + 1)


def _unit(axis, n: int) -> np.ndarray:
    a = np.zeros(n) if axis is None else np.asarray(axis, dtype=float)
    if axis is None:
        a[-1] = 1.0
    if a.shape != (n,) or abs(np.linalg.norm(a) - 1.0) > 1e-12:
        raise DomainError("axis must be a unit n-vector")
    return a


def _sphere_piece_chart(center: float, radius: float, phi_max: float, axis, frame, k: int) -> Chart:
    """Piece of the k-sphere of given radius centred at ``center * axis``.

    Geodesic polar coordinates about the point nearest the origin: polar
    angle ``phi`` in ``[0, phi_max]`` followed by the angles of S^{k-1} in
    the span of ``frame``.
    """
    n = axis.size
    s_lo, s_hi, s_per = sphere_box(k)

    def fn(u):
        phi = u[:, 0]
        w, dw = sphere_param(u[:, 1:], k)
        ew = w @ frame.T
        cphi, sphi = np.cos(phi)[:, None], np.sin(phi)[:, None]
        x = center * axis + radius * (-cphi * axis + sphi * ew)
        j = np.empty((u.shape[0], n, k))
        j[:, :, 0] = radius * (sphi * axis + cphi * ew)
        j[:, :, 1:] = radius * sphi[:, :, None] * np.einsum("nk,mkd->mnd", frame, dw)
        return x, j

    return Chart(np.concatenate([[0.0], s_lo]), np.concatenate([[phi_max], s_hi]), fn, n,
                 periodic=(False,) + s_per)


def _small_sphere_chart(height: float, radius: float, axis, frame, k: int) -> Chart:
    """(k-1)-sphere ``height * axis + radius * frame @ omega`` on S^{n-1}."""
    n = axis.size
    if k == 1:
        raise DomainError("no angular chart for k = 1")
    lo, hi, per = sphere_box(k)

    def fn(u):
        w, dw = sphere_param(u, k)
        x = height * axis + radius * (w @ frame.T)
        return x, radius * np.einsum("nk,mkd->mnd", frame, dw)

    return Chart(lo, hi, fn, n, periodic=per)


def cap_carrier(theta: float):
    """Centre distance ``sec theta`` and radius ``tan theta`` of the carrier sphere."""
    return 1.0 / math.cos(theta), math.tan(theta)


def flat_disk(k: int, n: int, orientation=None) -> Submanifold:
    """Unit k-disk through the origin in the k-plane spanned by ``orientation``.

    ``orientation`` is an ``(n, k)`` matrix with orthonormal columns; defaults
    to the first k coordinate axes.
    """
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    e = np.eye(n)[:, :k] if orientation is None else np.asarray(orientation, dtype=float)
    if e.shape != (n, k) or not np.allclose(e.T @ e, np.eye(k), atol=1e-12):
        raise DomainError("orientation must have orthonormal columns")
    if k == 1:
        v = e[:, 0]

        def fn1(u):
            return u[:, :1] * v, np.broadcast_to(v[None, :, None], (u.shape[0], n, 1)).copy()

        interior = [Chart([-1.0], [1.0], fn1, n)]
        ideal = [point_chart(v), point_chart(-v)]
    else:
        s_lo, s_hi, s_per = sphere_box(k)

        def fn(u):
            s = u[:, :1]
            w, dw = sphere_param(u[:, 1:], k)
            ew = w @ e.T
            j = np.empty((u.shape[0], n, k))
            j[:, :, 0] = ew
            j[:, :, 1:] = s[:, :, None] * np.einsum("nk,mkd->mnd", e, dw)
            return s * ew, j

        interior = [Chart(np.concatenate([[0.0], s_lo]), np.concatenate([[1.0], s_hi]), fn, n,
                          periodic=(False,) + s_per)]
        ideal = [_small_sphere_chart(0.0, 1.0, np.zeros(n), e, k)]
    return Submanifold(k, n, interior, ideal, contains_origin=True, totally_geodesic=True,
                       candidate_density_points=(np.zeros(n),), kind="disk",
                       params={"k": k, "n": n, "orientation": e.tolist()})


def geodesic_cap(k: int, n: int, theta: float, axis=None) -> Submanifold:
    """Totally geodesic k-cap whose ideal boundary makes angle ``theta`` with ``axis``.

    For ``theta < pi/2`` the cap lies on the sphere of radius ``tan theta``
    centred at ``sec theta * axis``; at ``theta = pi/2`` it is the flat disk
    perpendicular to ``axis``.
    """
    if not 2 <= k <= n:
        raise DomainError(f"need 2 <= k <= n, got k={k}, n={n}")
    if not 0 < theta <= math.pi / 2:
        raise DomainError(f"theta must lie in (0, pi/2], got {theta}")
    axis = _unit(axis, n)
    if theta == math.pi / 2:
        frame = orthonormal_frame(axis, k) if k < n else np.eye(n)
        disk = flat_disk(k, n, frame)
        return Submanifold(k, n, disk.interior_charts, disk.ideal_charts, contains_origin=True,
                           totally_geodesic=True, candidate_density_points=(np.zeros(n),),
                           kind="cap", params={"k": k, "n": n, "theta": theta, "axis": axis.tolist()})
    if k >= n:
        raise DomainError("a cap with theta < pi/2 needs k < n")
    frame = orthonormal_frame(axis, k)
    center, radius = cap_carrier(theta)
    interior = _sphere_piece_chart(center, radius, math.pi / 2 - theta, axis, frame, k)
    ideal = _small_sphere_chart(math.cos(theta), math.sin(theta), axis, frame, k)
    pole = (center - radius) * axis
    return Submanifold(k, n, [interior], [ideal], contains_origin=False, totally_geodesic=True,
                       candidate_density_points=(pole,), kind="cap",
                       params={"k": k, "n": n, "theta": theta, "axis": axis.tolist()})


def spherical_cap(k: int, n: int, center_height: float, boundary_angle: float, axis=None) -> Submanifold:
    """Non-minimal comparison surface: the part inside B^n of a round k-sphere.

    The sphere is centred at ``center_height * axis`` and meets the unit
    sphere along the (k-1)-sphere at angle ``boundary_angle`` from ``axis``.
    It does not meet the unit sphere orthogonally unless it is a geodesic cap.
    """
    if not 2 <= k < n:
        raise DomainError("need 2 <= k < n")
    axis = _unit(axis, n)
    beta = boundary_angle
    if not 0 < beta < math.pi / 2:
        raise DomainError("boundary_angle must lie in (0, pi/2)")
    radius = math.hypot(math.sin(beta), math.cos(beta) - center_height)
    if center_height - radius <= -1:
        raise DomainError("sphere leaves the ball on the far side")
    phi_max = math.atan2(math.sin(beta), center_height - math.cos(beta))
    frame = orthonormal_frame(axis, k)
    interior = _sphere_piece_chart(center_height, radius, phi_max, axis, frame, k)
    ideal = _small_sphere_chart(math.cos(beta), math.sin(beta), axis, frame, k)
    return Submanifold(k, n, [interior], [ideal], minimal=False, kind="spherical-cap",
                       candidate_density_points=((center_height - radius) * axis,),
                       params={"k": k, "n": n, "center_height": center_height,
                               "boundary_angle": beta, "axis": axis.tolist()})


def cap_ideal_volume_closed_form(k: int, theta: float) -> float:
    """``k omega_k sin^(k-1) theta``."""
    if not 0 < theta <= math.pi / 2:
        raise DomainError(f"theta must lie in (0, pi/2], got {theta}")
    return k * unit_ball_volume(k) * math.sin(theta) ** (k - 1)


def cap_volume_closed_form(k: int, theta: float) -> float:
    """``k omega_k tan^k theta * int_0^(pi/2 - theta) sin^(k-1)``; ``omega_k`` at pi/2."""
    if not 0 < theta <= math.pi / 2:
        raise DomainError(f"theta must lie in (0, pi/2], got {theta}")
    if theta == math.pi / 2:
        return unit_ball_volume(k)
    if k == 2:
        s = math.sin(theta)
        return 2 * math.pi * s * s / (1 + s)
    val, _ = integrate.quad(lambda p: math.sin(p) ** (k - 1), 0.0, math.pi / 2 - theta,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return k * unit_ball_volume(k) * math.tan(theta) ** k * val


def _contains_point(sigma_charts, p, tol=ORIGIN_PROBE) -> bool:
    return any(closest_point(c, p)[1] < tol for c in sigma_charts)


def mobius_image(sigma: Submanifold, g: MobiusMap, probe: bool = True) -> Submanifold:
    """The image ``g(sigma)``; charts are composed with ``g``.

    With ``probe`` the origin flag is recomputed by locating ``g^-1(0)`` on
    the original charts.
    """
    if g.n != sigma.n:
        raise DomainError("dimension mismatch")
    interior = [c.compose(g) for c in sigma.interior_charts]
    ideal = [c.compose(g) for c in sigma.ideal_charts]
    if probe:
        from .ball import inverse
        pre = inverse(g)(np.zeros(sigma.n))
        contains = _contains_point(sigma.interior_charts, pre)
    else:
        contains = sigma.contains_origin and g.is_identity
    pts = tuple(g(p) for p in sigma.candidate_density_points)
    params = {"base": sigma.kind, "base_params": sigma.params,
              "rotation": g.rotation.tolist(), "translation": g.translation.tolist()}
    return Submanifold(sigma.k, sigma.n, interior, ideal, contains_origin=contains,
                       totally_geodesic=sigma.totally_geodesic, candidate_density_points=pts,
                       minimal=sigma.minimal, kind="mobius-image", params=params)


def _chart_intersections(c1: Chart, c2: Chart, rng, seeds: int = 50):
    """Transverse intersection points of two charts by damped Gauss-Newton."""
    found = []
    k1, k2 = c1.k, c2.k
    for _ in range(seeds):
        u = c1.lo + (c1.hi - c1.lo) * rng.random(k1)
        v = c2.lo + (c2.hi - c2.lo) * rng.random(k2)
        x1, j1 = (a[0] for a in c1.evaluate(u))
        x2, j2 = (a[0] for a in c2.evaluate(v))
        f = x1 - x2
        for _ in range(60):
            if np.linalg.norm(f) < 1e-13:
                break
            jac = np.hstack([j1, -j2])
            step = -np.linalg.lstsq(jac, f, rcond=None)[0]
            lam = 1.0
            while lam > 1e-6:
                un = np.clip(u + lam * step[:k1], c1.lo, c1.hi)
                vn = np.clip(v + lam * step[k1:], c2.lo, c2.hi)
                y1, i1 = (a[0] for a in c1.evaluate(un))
                y2, i2 = (a[0] for a in c2.evaluate(vn))
                if np.linalg.norm(y1 - y2) < np.linalg.norm(f):
                    u, v, x1, j1, x2, j2 = un, vn, y1, i1, y2, i2
                    f = x1 - x2
                    break
                lam *= 0.5
            else:
                break
        if np.linalg.norm(f) > 1e-11 or np.linalg.norm(x1) >= 1 - 1e-9:
            continue
        q1, _ = np.linalg.qr(j1)
        q2, _ = np.linalg.qr(j2)
        sv = np.linalg.svd(np.hstack([q1, q2]), compute_uv=False)
        rank = int(np.sum(sv > 1e-6))
        if rank < min(c1.n, k1 + k2):
            continue
        if not any(np.linalg.norm(x1 - p) < 1e-6 for p in found):
            found.append(x1)
    return found


def union(parts, seed: int = 0, max_points: int = 8) -> Submanifold:
    """Finite union of submanifolds of equal dimensions.

    Candidate density points include each part's own candidates and transverse
    intersection points between charts of different parts.
    """
    parts = list(parts)
    if not parts:
        raise DomainError("union of nothing")
    k, n = parts[0].k, parts[0].n
    if any(p.k != k or p.n != n for p in parts):
        raise DomainError("all parts must share k and n")
    if len(parts) == 1:
        return parts[0]
    rng = np.random.default_rng(seed)
    points = []
    origin_count = sum(p.contains_origin for p in parts)
    if origin_count >= 2:
        points.append(np.zeros(n))
    crossings = []
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            for c1 in parts[i].interior_charts:
                for c2 in parts[j].interior_charts:
                    crossings.extend(_chart_intersections(c1, c2, rng))
    crossings.sort(key=lambda p: (round(float(np.linalg.norm(p)), 9), tuple(np.round(p, 9))))
    for p in crossings:
        if not any(np.linalg.norm(p - q) < 1e-6 for q in points):
            points.append(p)
        if len(points) >= max_points:
            break
    for part in parts:
        for p in part.candidate_density_points:
            if not any(np.linalg.norm(p - q) < 1e-9 for q in points):
                points.append(p)
    return Submanifold(
        k, n,
        [c for p in parts for c in p.interior_charts],
        [c for p in parts for c in p.ideal_charts],
        contains_origin=origin_count > 0,
        # each piece may be totally geodesic, but the union is not a single one
        totally_geodesic=False,
        candidate_density_points=tuple(points),
        minimal=all(p.minimal for p in parts),
        kind="union",
        params={"parts": [{"kind": p.kind, "params": p.params} for p in parts]},
    )


def catenoid(neck: float, n: int = 3, **kwargs) -> Submanifold:
    """Spherical catenoid of neck radius ``neck`` about a diameter; see :mod:`hypiso.catenoid`."""
    from .catenoid import catenoid_surface

    return catenoid_surface(neck, n=n, **kwargs)
