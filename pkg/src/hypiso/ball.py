"""Poincare ball model of hyperbolic space.

Points are plain numpy arrays of shape ``(..., n)``; the light wrappers
:class:`BallPoint` and :class:`IdealPoint` exist for validated single points.
Isometries are stored as ``g = R o tau_a`` where ``tau_a`` is the Mobius
translation sending the origin to ``a`` and ``R`` is orthogonal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, DomainError

ORTHO_TOL = 1e-10
IDEAL_TOL = 1e-12


def _one_minus_sq(r):
    # (1 - r)(1 + r) keeps precision when r -> 1
    return (1.0 - r) * (1.0 + r)


def radius_to_rho(r):
    """Hyperbolic distance from the origin of a point at Euclidean radius ``r``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r >= 1):
        raise DomainError(f"radius must lie in [0, 1), got {r}")
    out = 2.0 * np.arctanh(r)
    return float(out) if out.ndim == 0 else out


def rho_to_radius(rho):
    """Euclidean radius of the hyperbolic sphere of radius ``rho`` about 0."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError(f"hyperbolic radius must be >= 0, got {rho}")
    out = np.tanh(0.5 * rho)
    return float(out) if out.ndim == 0 else out


def conformal_factor(x):
    """Length scale ``2 / (1 - |x|^2)`` of the hyperbolic metric at ``x``."""
    x = _coords(x)
    r = np.linalg.norm(x, axis=-1)
    out = 2.0 / _one_minus_sq(r)
    return float(out) if out.ndim == 0 else out


def hyperbolic_distance(x, y):
    x, y = _coords(x), _coords(y)
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    if np.any(nx >= 1) or np.any(ny >= 1):
        raise DomainError("points must lie in the open unit ball")
    s = np.linalg.norm(x - y, axis=-1) / np.sqrt(_one_minus_sq(nx) * _one_minus_sq(ny))
    out = 2.0 * np.arcsinh(s)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BallPoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise DomainError("a ball point needs n >= 2 coordinates")
        if not np.linalg.norm(c) < 1:
            raise DomainError(f"|x| = {np.linalg.norm(c)} is not < 1")
        object.__setattr__(self, "coords", c)

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.coords))

    @property
    def rho(self) -> float:
        return radius_to_rho(self.r)


@dataclass(frozen=True)
class IdealPoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise DomainError("an ideal point needs n >= 2 coordinates")
        if abs(np.linalg.norm(c) - 1.0) > IDEAL_TOL:
            raise DomainError(f"|u| = {np.linalg.norm(c)} is not 1")
        object.__setattr__(self, "coords", c)


def _coords(x):
    if isinstance(x, (BallPoint, IdealPoint)):
        return x.coords
    return np.asarray(x, dtype=float)


def mobius_add(a, x):
    """Mobius addition ``a (+) x``; the translation ``tau_a`` applied to ``x``.

    Broadcasts over leading axes of both arguments.  Valid on the closed ball.
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    ax = np.sum(a * x, axis=-1, keepdims=True)
    aa = np.sum(a * a, axis=-1, keepdims=True)
    xx = np.sum(x * x, axis=-1, keepdims=True)
    num = (1.0 + 2.0 * ax + xx) * a + (1.0 - aa) * x
    den = 1.0 + 2.0 * ax + aa * xx
    return num / den


def mobius_add_jacobian(a, x):
    """Derivative of ``x -> a (+) x``, shape ``(..., n, n)``."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    a, x = np.broadcast_arrays(a, x)
    n = x.shape[-1]
    ax = np.sum(a * x, axis=-1)[..., None, None]
    aa = np.sum(a * a, axis=-1)[..., None, None]
    xx = np.sum(x * x, axis=-1)[..., None, None]
    num = (1.0 + 2.0 * ax[..., 0] + xx[..., 0]) * a + (1.0 - aa[..., 0]) * x
    den = 1.0 + 2.0 * ax + aa * xx
    eye = np.eye(n)
    dnum = 2.0 * a[..., :, None] * (a + x)[..., None, :] + (1.0 - aa) * eye
    dden = 2.0 * a + 2.0 * aa[..., 0] * x
    return dnum / den - num[..., :, None] * dden[..., None, :] / den**2


def mobius_add_dparam(a, x):
    """Derivative of ``a (+) x`` with respect to the translation ``a``."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    a, x = np.broadcast_arrays(a, x)
    n = x.shape[-1]
    ax = np.sum(a * x, axis=-1)[..., None, None]
    aa = np.sum(a * a, axis=-1)[..., None, None]
    xx = np.sum(x * x, axis=-1)[..., None, None]
    num = (1.0 + 2.0 * ax[..., 0] + xx[..., 0]) * a + (1.0 - aa[..., 0]) * x
    den = 1.0 + 2.0 * ax + aa * xx
    eye = np.eye(n)
    dnum = (1.0 + 2.0 * ax + xx) * eye + 2.0 * a[..., :, None] * x[..., None, :] \
        - 2.0 * x[..., :, None] * a[..., None, :]
    dden = 2.0 * x + 2.0 * xx[..., 0] * a
    return dnum / den - num[..., :, None] * dden[..., None, :] / den**2


def _repair_rotation(q: np.ndarray) -> np.ndarray:
    dev = np.max(np.abs(q.T @ q - np.eye(q.shape[0])))
    if dev <= ORTHO_TOL:
        return q
    u, _, vt = np.linalg.svd(q)
    return u @ vt


@dataclass(frozen=True)
class MobiusMap:
    """Isometry ``x -> rotation @ tau_translation(x)`` of the ball."""

    rotation: np.ndarray
    translation: np.ndarray = field(default=None)

    def __post_init__(self):
        q = np.array(self.rotation, dtype=float)
        n = q.shape[0]
        if q.shape != (n, n):
            raise DomainError("rotation must be square")
        a = np.zeros(n) if self.translation is None else np.array(self.translation, dtype=float)
        if a.shape != (n,):
            raise DomainError("translation has the wrong dimension")
        if not np.linalg.norm(a) < 1:
            raise DomainError(f"|translation| = {np.linalg.norm(a)} is not < 1")
        if np.max(np.abs(q.T @ q - np.eye(n))) > 1e-8:
            raise DomainError("rotation is not orthogonal")
        q = _repair_rotation(q)
        q.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "translation", a)

    @property
    def n(self) -> int:
        return self.rotation.shape[0]

    @classmethod
    def identity(cls, n: int) -> "MobiusMap":
        return cls(np.eye(n), np.zeros(n))

    def __call__(self, x):
        return mobius_add(self.translation, np.asarray(x, dtype=float)) @ self.rotation.T

    def jacobian(self, x):
        return self.rotation @ mobius_add_jacobian(self.translation, x)

    def stretch(self, x):
        """Conformal stretch ``|dg(x)|``; ``g`` is a similarity to first order."""
        x = np.asarray(x, dtype=float)
        a = self.translation
        aa = a @ a
        return (1.0 - aa) / (1.0 + 2.0 * (x @ a) + aa * np.sum(x * x, axis=-1))

    @property
    def is_identity(self) -> bool:
        return bool(np.allclose(self.rotation, np.eye(self.n), atol=1e-14)
                    and np.allclose(self.translation, 0.0, atol=1e-14))


def mobius_translate(a) -> MobiusMap:
    """The translation ``tau_a`` with ``tau_a(0) = a``."""
    a = np.asarray(a, dtype=float)
    if not np.linalg.norm(a) < 1:
        raise DomainError(f"|a| = {np.linalg.norm(a)} is not < 1")
    return MobiusMap(np.eye(a.size), a)


def rotation_map(q) -> MobiusMap:
    q = np.asarray(q, dtype=float)
    return MobiusMap(q, np.zeros(q.shape[0]))


def apply(g: MobiusMap, x):
    """Apply ``g`` to a point; ideal points stay ideal, interior stay interior."""
    if isinstance(x, BallPoint):
        y = g(x.coords)
        if not np.linalg.norm(y) < 1:
            raise ConditioningError("interior point mapped onto the unit sphere")
        return BallPoint(y)
    if isinstance(x, IdealPoint):
        y = g(x.coords)
        return IdealPoint(y / np.linalg.norm(y))
    x = np.asarray(x, dtype=float)
    y = g(x)
    # points within IDEAL_TOL of the sphere count as ideal
    inside = np.linalg.norm(x, axis=-1) < 1 - IDEAL_TOL
    if np.any(np.linalg.norm(y, axis=-1)[inside] >= 1):
        raise ConditioningError("interior point mapped onto the unit sphere")
    return y


def inverse(g: MobiusMap) -> MobiusMap:
    # (R o tau_a)^-1 = tau_{-a} o R^T = R^T o tau_{-R a}
    q = g.rotation
    return MobiusMap(q.T, -(q @ g.translation))


def compose(g: MobiusMap, h: MobiusMap) -> MobiusMap:
    """Canonical form of ``g o h``.

    The image ``c`` of the origin fixes the translation part; the map
    ``tau_{-c} o g o h`` fixes 0 and is therefore linear, so its derivative at
    0 is the rotation.
    """
    if g.n != h.n:
        raise DomainError("dimension mismatch")
    zero = np.zeros(g.n)
    h0 = h(zero)
    c = g(h0)
    if not np.linalg.norm(c) < 1:
        raise ConditioningError("composition pushed the origin onto the sphere")
    m = mobius_add_jacobian(-c, c) @ g.jacobian(h0) @ h.jacobian(zero)
    if not np.all(np.isfinite(m)):
        raise ConditioningError("non-finite rotation in composition")
    m = _repair_rotation(m)
    return MobiusMap(m, m.T @ c)


def random_mobius(rng: np.random.Generator, n: int, max_radius: float = 0.9) -> MobiusMap:
    """Random isometry: Haar-ish rotation and a translation of bounded size."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    v = rng.standard_normal(n)
    v *= max_radius * rng.random() / np.linalg.norm(v)
    return MobiusMap(q, v)
