"""Adaptive Gauss-Kronrod (7/15) quadrature, vectorised for numpy integrands.

Two drivers are provided:

* :func:`integrate_box` -- globally adaptive tensor-product cubature on an
  axis-aligned box of any dimension (including 0).
* :func:`integrate_intervals` -- many independent 1-d integrals at once; each
  interval belongs to an ``owner`` and results are summed per owner.

Integrands may be vector valued: they return ``(m,)`` or ``(m, p)`` arrays.
Sums are always formed in a fixed cell order so results are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError

# Kronrod nodes on [0, 1] of the reference interval [-1, 1] (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
W_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
W_GAUSS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5, 7 from the ends)
W_GAUSS[[1, 3, 5, 7, 9, 11, 13]] = [_WG[0], _WG[1], _WG[2], _WG[3], _WG[2], _WG[1], _WG[0]]


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


@dataclass
class BoxResult:
    value: np.ndarray | float
    error: float
    n_cells: int
    n_evals: int
    cell_lo: np.ndarray
    cell_hi: np.ndarray
    cell_values: np.ndarray


def _as2d(v: np.ndarray, m: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v.reshape(m, -1)


def _tensor_nodes(lo: np.ndarray, hi: np.ndarray, nodes: np.ndarray = NODES) -> np.ndarray:
    """All ``len(nodes)^d`` nodes of every cell; shape ``(cells * len(nodes)^d, d)``."""
    c, d = lo.shape
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    grids = np.meshgrid(*([nodes] * d), indexing="ij")
    ref = np.stack([g.ravel() for g in grids], axis=-1)  # (15^d, d)
    pts = mid[:, None, :] + half[:, None, :] * ref[None, :, :]
    return pts.reshape(-1, d)


def _cell_rules(vals: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Kronrod estimate, Gauss-difference error, and per-dimension error."""
    c, d = lo.shape
    p = vals.shape[-1]
    v = vals.reshape((c,) + (15,) * d + (p,))
    vol = np.prod(0.5 * (hi - lo), axis=1)

    def contract(weights):
        t = v
        for w in weights:
            t = np.tensordot(t, w, axes=([1], [0]))
        return t

    kron = contract([W_KRONROD] * d)
    est = kron * vol[:, None]
    dim_err = np.zeros((c, d))
    gauss_all = contract([W_GAUSS] * d)
    for j in range(d):
        t = contract([W_GAUSS if i == j else W_KRONROD for i in range(d)])
        dim_err[:, j] = np.max(np.abs(t - kron), axis=-1) * vol
    err = np.abs(gauss_all - kron) * vol[:, None]
    return est, err, dim_err


def integrate_box(
    func: Callable[[np.ndarray], np.ndarray],
    lo,
    hi,
    rtol: float = 1e-11,
    atol: float = 1e-15,
    initial_splits: int | tuple = 1,
    max_cells: int = 40000,
    max_rounds: int = 80,
    support_edges: bool = False,
) -> BoxResult:
    """Adaptive cubature of ``func`` over the box ``[lo, hi]``.

    ``func`` receives an ``(m, d)`` array of points and returns ``(m,)`` or
    ``(m, p)`` values.  Refinement stops once every component satisfies
    ``error <= max(atol, rtol * |value|)``.

    With ``support_edges`` the integrand is assumed to vanish identically
    outside its support (clipped integrals).  A cell whose nodes mix exact
    zeros and nonzeros straddles the support edge, where the Gauss-Kronrod
    error estimate is unreliable; its error is raised to its full estimate so
    it keeps being split.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    d = lo.size
    if d == 0:
        vals = _as2d(func(np.zeros((1, 0))), 1)
        value = vals[0] if vals.shape[1] > 1 else float(vals[0, 0])
        return BoxResult(value, 0.0, 1, 1, np.zeros((1, 0)), np.zeros((1, 0)), vals)

    splits = np.broadcast_to(np.asarray(initial_splits, dtype=int), (d,))
    edges = [np.linspace(lo[i], hi[i], splits[i] + 1) for i in range(d)]
    idx = np.stack(np.meshgrid(*[np.arange(s) for s in splits], indexing="ij"), -1).reshape(-1, d)
    c_lo = np.stack([edges[i][idx[:, i]] for i in range(d)], axis=-1)
    c_hi = np.stack([edges[i][idx[:, i] + 1] for i in range(d)], axis=-1)

    # support mode also samples the cell faces, which carry no weight
    nodes = np.concatenate([[-1.0], NODES, [1.0]]) if support_edges else NODES
    q = nodes.size

    def evaluate(cl, ch):
        pts = _tensor_nodes(cl, ch, nodes)
        vals = _as2d(func(pts), pts.shape[0])
        if not support_edges:
            return _cell_rules(vals, cl, ch)
        c, p = cl.shape[0], vals.shape[1]
        full = vals.reshape((c,) + (q,) * d + (p,))
        inner = full[(slice(None),) + (slice(1, -1),) * d]
        est, err, dim_err = _cell_rules(inner.reshape(-1, p), cl, ch)
        nz = np.any(full != 0, axis=-1)
        mixed = nz.reshape(c, -1).any(axis=1) & ~nz.reshape(c, -1).all(axis=1)
        if np.any(mixed):
            # any node value times the cell volume bounds the missed piece
            peak = np.abs(full[mixed]).reshape(int(mixed.sum()), -1).max(axis=1)
            scale = peak * np.prod(ch[mixed] - cl[mixed], axis=1) + 1e-300
            err[mixed] = np.maximum(err[mixed], scale[:, None])
            v = nz[mixed]
            flags = np.zeros((int(mixed.sum()), d))
            for j in range(d):
                other = tuple(i + 1 for i in range(d) if i != j)
                line = v.any(axis=other) if other else v
                flags[:, j] = line.any(axis=1) & ~line.all(axis=1)
            flags[flags.sum(axis=1) == 0] = 1.0
            dim_err[mixed] = np.maximum(dim_err[mixed], flags * scale[:, None])
        return est, err, dim_err

    est, err, dim_err = evaluate(c_lo, c_hi)
    n_evals = c_lo.shape[0] * q**d
    total_vol = float(np.prod(hi - lo))
    for _ in range(max_rounds):
        total = est.sum(axis=0)
        total_err = err.sum(axis=0)
        target = np.maximum(atol, rtol * np.abs(total))
        if np.all(total_err <= target):
            break
        share = np.prod(c_hi - c_lo, axis=1) / total_vol
        ratio = np.max(err / target[None, :], axis=1)
        bad = ratio > share
        if not np.any(bad):
            bad = ratio >= ratio.max()
        if c_lo.shape[0] + bad.sum() > max_cells:
            raise ConvergenceError(
                f"cubature exceeded {max_cells} cells (error {total_err}, target {target})")
        b_lo, b_hi = c_lo[bad], c_hi[bad]
        axis = np.argmax(dim_err[bad], axis=1)
        mid = 0.5 * (b_lo + b_hi)
        rows = np.arange(b_lo.shape[0])
        l_hi = b_hi.copy()
        l_hi[rows, axis] = mid[rows, axis]
        r_lo = b_lo.copy()
        r_lo[rows, axis] = mid[rows, axis]
        n_lo = np.concatenate([b_lo, r_lo])
        n_hi = np.concatenate([l_hi, b_hi])
        n_est, n_err, n_dim = evaluate(n_lo, n_hi)
        n_evals += n_lo.shape[0] * q**d
        # keep children next to each other in a deterministic order
        nb = b_lo.shape[0]
        order = np.empty(2 * nb, dtype=int)
        order[0::2] = np.arange(nb)
        order[1::2] = np.arange(nb) + nb
        good = ~bad
        c_lo = np.concatenate([c_lo[good], n_lo[order]])
        c_hi = np.concatenate([c_hi[good], n_hi[order]])
        est = np.concatenate([est[good], n_est[order]])
        err = np.concatenate([err[good], n_err[order]])
        dim_err = np.concatenate([dim_err[good], n_dim[order]])
    else:
        raise ConvergenceError("cubature did not converge within the round budget")

    order = np.lexsort(c_lo.T[::-1])
    c_lo, c_hi, est, err = c_lo[order], c_hi[order], est[order], err[order]
    value = est.sum(axis=0)
    value = value if value.size > 1 else float(value[0])
    return BoxResult(value, float(np.max(err.sum(axis=0))), c_lo.shape[0], n_evals, c_lo, c_hi, est)


@dataclass
class IntervalResult:
    values: np.ndarray  # (n_owners, p)
    errors: np.ndarray  # (n_owners,)
    n_evals: int


def integrate_intervals(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    a,
    b,
    owners,
    n_owners: int,
    rtol: float = 1e-13,
    atol: float = 1e-17,
    max_rounds: int = 60,
) -> IntervalResult:
    """Adaptive G7/K15 on many intervals; results are summed per owner.

    ``func(owner_idx, t)`` evaluates the integrand of interval owners at
    points ``t`` (both flat arrays of equal length).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    owners = np.asarray(owners, dtype=int)
    if a.size == 0:
        probe = _as2d(func(np.zeros(1, dtype=int), np.zeros(1)), 1) if n_owners else np.zeros((1, 1))
        return IntervalResult(np.zeros((n_owners, probe.shape[1])), np.zeros(n_owners), 0)

    def evaluate(aa, bb, oo):
        half = 0.5 * (bb - aa)
        mid = 0.5 * (bb + aa)
        t = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
        vals = _as2d(func(np.repeat(oo, 15), t), t.size)
        vals = vals.reshape(aa.size, 15, -1)
        kron = np.einsum("ijk,j->ik", vals, W_KRONROD) * half[:, None]
        gauss = np.einsum("ijk,j->ik", vals, W_GAUSS) * half[:, None]
        return kron, np.max(np.abs(kron - gauss), axis=1)

    est, err = evaluate(a, b, owners)
    n_evals = a.size * 15
    owner_len = np.bincount(owners, weights=np.abs(b - a), minlength=n_owners)
    owner_len[owner_len == 0] = 1.0
    done_est = np.zeros((n_owners, est.shape[1]))
    done_err = np.zeros(n_owners)
    for _ in range(max_rounds):
        tot = np.zeros((n_owners, est.shape[1]))
        np.add.at(tot, owners, est)
        tot += done_est
        scale = np.max(np.abs(tot), axis=1)
        allowed = (rtol * scale[owners] + atol) * np.abs(b - a) / owner_len[owners]
        bad = err > allowed
        ok = ~bad
        np.add.at(done_est, owners[ok], est[ok])
        np.add.at(done_err, owners[ok], err[ok])
        if not np.any(bad):
            a = a[:0]
            break
        a, b, owners = a[bad], b[bad], owners[bad]
        m = 0.5 * (a + b)
        a, b, owners = np.concatenate([a, m]), np.concatenate([m, b]), np.concatenate([owners, owners])
        est, err = evaluate(a, b, owners)
        n_evals += a.size * 15
    if a.size:
        # budget exhausted: keep the best estimates and report their error
        np.add.at(done_est, owners, est)
        np.add.at(done_err, owners, err)
    return IntervalResult(done_est, done_err, n_evals)
