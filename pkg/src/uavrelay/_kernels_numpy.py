"""Pure-numpy kernels. Same signatures and tie-breaking as the numba ones."""

import numpy as np

_CHUNK = 1 << 14


def _link(sq, h2, r):
    # integer exponents avoid pow; the numba kernels use the same expressions
    b = h2 + sq
    if r == 2.0:
        return b
    if r == 1.0:
        return np.sqrt(b)
    if r == 3.0:
        return b * np.sqrt(b)
    if r == 4.0:
        return b * b
    return b ** (0.5 * r)


def _sqdist(a, U):
    return ((a[:, None, :] - U[None, :, :]) ** 2).sum(axis=2)


def assign_centralized(x, y, U, lam, h2, r):
    n_pts = x.shape[0]
    idx = np.empty(n_pts, dtype=np.int64)
    gt = np.empty(n_pts)
    uav = np.empty(n_pts)
    for s in range(0, n_pts, _CHUNK):
        e = min(s + _CHUNK, n_pts)
        a = _link(_sqdist(x[s:e], U), h2, r)
        b = _link(_sqdist(y[s:e], U), h2, r)
        k = np.argmin(a + lam * b, axis=1)
        rows = np.arange(e - s)
        idx[s:e] = k
        gt[s:e] = a[rows, k]
        uav[s:e] = b[rows, k]
    return idx, gt, uav


def assign_distributed(x, U, g, lam, h2, r):
    n_pts = x.shape[0]
    idx = np.empty(n_pts, dtype=np.int64)
    gt = np.empty(n_pts)
    for s in range(0, n_pts, _CHUNK):
        e = min(s + _CHUNK, n_pts)
        a = _link(_sqdist(x[s:e], U), h2, r)
        k = np.argmin(a + lam * g[None, :], axis=1)
        idx[s:e] = k
        gt[s:e] = a[np.arange(e - s), k]
    return idx, gt


def weber_value(p, a, u, h2, r):
    sq = ((p - u[None, :]) ** 2).sum(axis=1)
    return float(a @ _link(sq, h2, r))


def weber_derivs(p, a, u, h2, r):
    diff = u[None, :] - p
    base = h2 + (diff**2).sum(axis=1)
    d = p.shape[1]
    if r == 2.0:
        value = float(a @ base)
        grad = 2.0 * (a @ diff)
        hess = 2.0 * a.sum() * np.eye(d)
        return value, grad, hess
    pos = base > 0
    safe = np.where(pos, base, 1.0)
    value = float(a @ np.where(pos, safe ** (0.5 * r), 0.0))
    c1 = np.where(pos, a * r * safe ** (0.5 * r - 1.0), 0.0)
    c2 = np.where(pos, a * r * (r - 2.0) * safe ** (0.5 * r - 2.0), 0.0)
    grad = c1 @ diff
    hess = c1.sum() * np.eye(d) + (diff * c2[:, None]).T @ diff
    return value, grad, hess
