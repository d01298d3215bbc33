"""Numba kernels for the assignment and centroid inner loops."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, inline="always")
def _link(sq, h2, r):
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


@njit(cache=True, nogil=True)
def assign_centralized(x, y, U, lam, h2, r):
    n_pts, d = x.shape
    n = U.shape[0]
    idx = np.empty(n_pts, dtype=np.int64)
    gt = np.empty(n_pts)
    uav = np.empty(n_pts)
    for k in range(n_pts):
        best = np.inf
        bi = 0
        ba = 0.0
        bb = 0.0
        for i in range(n):
            sa = 0.0
            sb = 0.0
            for j in range(d):
                da = x[k, j] - U[i, j]
                db = y[k, j] - U[i, j]
                sa += da * da
                sb += db * db
            a = _link(sa, h2, r)
            b = _link(sb, h2, r)
            c = a + lam * b
            if c < best:
                best = c
                bi = i
                ba = a
                bb = b
        idx[k] = bi
        gt[k] = ba
        uav[k] = bb
    return idx, gt, uav


@njit(cache=True, nogil=True)
def assign_distributed(x, U, g, lam, h2, r):
    n_pts, d = x.shape
    n = U.shape[0]
    idx = np.empty(n_pts, dtype=np.int64)
    gt = np.empty(n_pts)
    for k in range(n_pts):
        best = np.inf
        bi = 0
        ba = 0.0
        for i in range(n):
            sa = 0.0
            for j in range(d):
                da = x[k, j] - U[i, j]
                sa += da * da
            a = _link(sa, h2, r)
            c = a + lam * g[i]
            if c < best:
                best = c
                bi = i
                ba = a
        idx[k] = bi
        gt[k] = ba
    return idx, gt


@njit(cache=True, nogil=True)
def weber_value(p, a, u, h2, r):
    m, d = p.shape
    total = 0.0
    for k in range(m):
        s = 0.0
        for j in range(d):
            t = u[j] - p[k, j]
            s += t * t
        total += a[k] * _link(s, h2, r)
    return total


@njit(cache=True, nogil=True)
def weber_derivs(p, a, u, h2, r):
    m, d = p.shape
    value = 0.0
    grad = np.zeros(d)
    hess = np.zeros((d, d))
    diff = np.empty(d)
    for k in range(m):
        base = h2
        for j in range(d):
            diff[j] = u[j] - p[k, j]
            base += diff[j] * diff[j]
        if r == 2.0:
            value += a[k] * base
            c1 = 2.0 * a[k]
            c2 = 0.0
        elif r == 3.0 and base > 0.0:
            s = np.sqrt(base)
            value += a[k] * base * s
            c1 = 3.0 * a[k] * s
            c2 = 3.0 * a[k] / s
        elif base > 0.0:
            value += a[k] * base ** (0.5 * r)
            c1 = a[k] * r * base ** (0.5 * r - 1.0)
            c2 = a[k] * r * (r - 2.0) * base ** (0.5 * r - 2.0)
        else:
            continue
        for j in range(d):
            grad[j] += c1 * diff[j]
            hess[j, j] += c1
            for l in range(d):
                hess[j, l] += c2 * diff[j] * diff[l]
    return value, grad, hess
