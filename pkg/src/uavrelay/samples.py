"""Weighted (GT, GR) pair sets used for integration.

Every integral over the joint density is a weighted sum over a
:class:`SampleSet`: Monte-Carlo pairs with equal weights, or a tensor
product of composite Gauss-Legendre nodes (1-D only). Fixing one set and
reusing it is how comparisons are made noise-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .density import Density, sample
from .errors import UsageError

# Philox stream ids, keyed together with the user seed.
EVAL_STREAMS = (0, 1)
_LLOYD_BASE = 16


def lloyd_streams(restart: int) -> tuple[int, int, int, int]:
    """Streams for (train X, train Y, init X, init Y) of one Lloyd restart."""
    b = _LLOYD_BASE + 4 * restart
    return b, b + 1, b + 2, b + 3


@dataclass(frozen=True, eq=False)
class SampleSet:
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    method: str

    def __post_init__(self):
        for name in ("x", "y", "w"):
            a = np.ascontiguousarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.x.shape != self.y.shape or self.x.shape[0] != self.w.shape[0]:
            raise UsageError("sample arrays disagree in shape")

    @property
    def size(self) -> int:
        return self.w.shape[0]

    @property
    def dimension(self) -> int:
        return self.x.shape[1]


@lru_cache(maxsize=None)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _panel_nodes(lo: float, hi: float, panels: int, order: int):
    t, gw = _leggauss(order)
    e = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(e)
    mid = 0.5 * (e[1:] + e[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * gw[None, :]).ravel() / (hi - lo)
    return nodes, weights


def gauss_legendre(density: Density, count: int, order: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule for ``density`` with roughly ``count`` nodes.

    Returns ``(nodes, weights)`` of shapes ``(m, d)`` and ``(m,)``; the weights
    sum to one and integrate polynomials of degree ``2*order-1`` exactly on
    every panel.
    """
    k = len(density.weights)
    d = density.dimension
    nodes, weights = [], []
    if d == 1:
        panels = max(1, count // (order * k))
        for wk, lo, hi in zip(density.weights, density.lo[:, 0], density.hi[:, 0]):
            z, v = _panel_nodes(lo, hi, panels, order)
            nodes.append(z[:, None])
            weights.append(wk * v)
    else:
        panels = max(1, int(np.sqrt(count / k)) // order)
        for wk, lo, hi in zip(density.weights, density.lo, density.hi):
            z0, v0 = _panel_nodes(lo[0], hi[0], panels, order)
            z1, v1 = _panel_nodes(lo[1], hi[1], panels, order)
            g0, g1 = np.meshgrid(z0, z1, indexing="ij")
            nodes.append(np.stack([g0.ravel(), g1.ravel()], axis=1))
            weights.append(wk * np.outer(v0, v1).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def quadrature_pairs(fX: Density, fY: Density, count: int, order: int = 4) -> SampleSet:
    """Tensor-product rule over (x, y) with about ``count`` pairs (d=1 only)."""
    if fX.dimension != 1 or fY.dimension != 1:
        raise UsageError("tensor quadrature is available for d=1 only; use monte_carlo")
    per_axis = int(np.ceil(np.sqrt(count)))
    xn, xw = gauss_legendre(fX, per_axis, order)
    yn, yw = gauss_legendre(fY, per_axis, order)
    x = np.repeat(xn, len(yn), axis=0)
    y = np.tile(yn, (len(xn), 1))
    return SampleSet(x, y, np.outer(xw, yw).ravel(), "quadrature")


def monte_carlo_pairs(fX: Density, fY: Density, seed: int, count: int, streams=EVAL_STREAMS) -> SampleSet:
    """Independent pairs drawn from the counter-based generator."""
    x = sample(fX, seed, count, stream=streams[0])
    y = sample(fY, seed, count, stream=streams[1])
    return SampleSet(x, y, np.full(count, 1.0 / count), "monte_carlo")


def build_pairs(fX: Density, fY: Density, method: str, count: int, seed: int = 0,
                streams=EVAL_STREAMS, order: int = 4) -> SampleSet:
    """Resolve ``method`` (``auto`` picks quadrature for d=1) and build the set."""
    if count < 1:
        raise UsageError("sample count must be positive")
    if method == "auto":
        method = "quadrature" if fX.dimension == 1 else "monte_carlo"
    if method == "quadrature":
        return quadrature_pairs(fX, fY, count, order)
    if method == "monte_carlo":
        return monte_carlo_pairs(fX, fY, seed, count, streams)
    raise UsageError(f"unknown integration method {method!r}")
