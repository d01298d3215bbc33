"""Ground-terminal densities: uniform-box mixtures, grid densities, moments.

A :class:`Density` is a finite mixture of uniform distributions on
axis-aligned boxes in one or two dimensions. Its pdf is piecewise constant
on the rectilinear grid spanned by the box edges, so moments and p-norms are
available in closed form. Arbitrary densities (the convolved density of the
combined variable, point densities) are carried as a :class:`GridDensity`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import UnsupportedFeatureError, UsageError

WEIGHT_TOL = 1e-12
GRID_MASS_TOL = 1e-9


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Density:
    """Mixture of uniform boxes.

    Parameters
    ----------
    weights : (K,) array
        Mixture weights, strictly positive, summing to one.
    lo, hi : (K, d) arrays
        Lower and upper box corners with ``hi > lo`` componentwise.
    """

    weights: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.ndim == 1:
            lo = lo[:, None]
        if hi.ndim == 1:
            hi = hi[:, None]
        if w.ndim != 1 or lo.shape != hi.shape or lo.shape[0] != w.shape[0]:
            raise UsageError("weights, lo and hi must describe the same components")
        if w.size == 0:
            raise UsageError("a density needs at least one component")
        if lo.shape[1] not in (1, 2):
            raise UsageError(f"dimension must be 1 or 2, got {lo.shape[1]}")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(np.isfinite(w))):
            raise UsageError("density parameters must be finite")
        if np.any(w <= 0):
            raise UsageError("mixture weights must be strictly positive")
        total = float(np.sum(w))
        if abs(total - 1.0) > WEIGHT_TOL:
            raise UsageError(f"weights sum {total:.12g}, expected 1")
        if np.any(hi <= lo):
            k = int(np.argmax(np.any(hi <= lo, axis=1)))
            raise UsageError(f"component {k} has zero or negative volume (lo >= hi)")
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "lo", _frozen(lo))
        object.__setattr__(self, "hi", _frozen(hi))

    @classmethod
    def uniform(cls, lo, hi) -> "Density":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        return cls(np.ones(1), lo[None, :], hi[None, :])

    @classmethod
    def mixture(cls, components: Iterable[tuple]) -> "Density":
        """Build from ``(weight, lo, hi)`` triples; scalars are 1-D corners."""
        ws, los, his = [], [], []
        for w, lo, hi in components:
            ws.append(float(w))
            los.append(np.atleast_1d(np.asarray(lo, dtype=float)))
            his.append(np.atleast_1d(np.asarray(hi, dtype=float)))
        if not ws:
            raise UsageError("a density needs at least one component")
        if len({a.shape for a in los + his}) != 1:
            raise UsageError("all box corners must share one dimension")
        return cls(np.array(ws), np.array(los), np.array(his))

    def __eq__(self, other):
        if not isinstance(other, Density):
            return NotImplemented
        return (
            np.array_equal(self.weights, other.weights)
            and np.array_equal(self.lo, other.lo)
            and np.array_equal(self.hi, other.hi)
        )

    def __hash__(self):
        return hash((self.weights.tobytes(), self.lo.tobytes(), self.hi.tobytes()))

    def __repr__(self):
        parts = ", ".join(
            f"{w:g}*U({lo.tolist()}, {hi.tolist()})"
            for w, lo, hi in zip(self.weights, self.lo, self.hi)
        )
        return f"Density({parts})"

    @property
    def dimension(self) -> int:
        return self.lo.shape[1]

    @property
    def volumes(self) -> np.ndarray:
        return np.prod(self.hi - self.lo, axis=1)

    @property
    def mean(self) -> np.ndarray:
        return self.weights @ (0.5 * (self.lo + self.hi))

    @property
    def second_moment(self) -> float:
        """E||X||^2."""
        per_axis = (self.lo**2 + self.lo * self.hi + self.hi**2) / 3.0
        return float(self.weights @ per_axis.sum(axis=1))

    @property
    def box_variances(self) -> np.ndarray:
        """Total variance of each uniform component."""
        return ((self.hi - self.lo) ** 2).sum(axis=1) / 12.0

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def spread_about(self, point) -> float:
        """E||X - point||^2, accumulated per component to avoid cancellation."""
        off = self.centers - np.asarray(point, dtype=float)
        return float(self.weights @ (self.box_variances + (off**2).sum(axis=1)))

    @property
    def variance(self) -> float:
        """Total variance E||X - EX||^2."""
        return self.spread_about(self.mean)

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lo.min(axis=0), self.hi.max(axis=0)

    def pdf(self, points) -> np.ndarray:
        pts = _as_points(points, self.dimension)
        inside = np.all(
            (pts[:, None, :] >= self.lo[None]) & (pts[:, None, :] < self.hi[None]), axis=2
        )
        return inside.astype(float) @ (self.weights / self.volumes)

    def affine(self, scale: float, shift) -> "Density":
        """Density of ``scale * X + shift`` for ``scale > 0``."""
        if not scale > 0:
            raise UsageError("affine scale must be positive")
        shift = np.broadcast_to(np.asarray(shift, dtype=float), (self.dimension,))
        return Density(self.weights, scale * self.lo + shift, scale * self.hi + shift)

    def pieces(self) -> tuple[np.ndarray, np.ndarray]:
        """Constant pieces of the pdf as ``(volumes, values)``.

        The pdf is constant on every cell of the grid spanned by the box edges.
        """
        edges = [np.unique(np.concatenate([self.lo[:, a], self.hi[:, a]])) for a in range(self.dimension)]
        widths = [np.diff(e) for e in edges]
        mids = [0.5 * (e[1:] + e[:-1]) for e in edges]
        grids = np.meshgrid(*mids, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        vols = np.prod(np.meshgrid(*widths, indexing="ij"), axis=0).ravel()
        return vols, self.pdf(pts)

    def to_grid(self, resolution: int = 1024) -> "GridDensity":
        """Exact cell averages on a square-cell grid over the bounding box.

        The longest side of the bounding box gets ``resolution`` cells.
        """
        if resolution < 1:
            raise UsageError("resolution must be positive")
        lo, hi = self.bounds
        extent = hi - lo
        cell = float(extent.max()) / resolution
        shape = [max(1, int(np.ceil(e / cell - 1e-9))) for e in extent]
        overlaps = []
        for a, m in enumerate(shape):
            e = lo[a] + cell * np.arange(m + 1)
            ov = np.minimum(self.hi[:, a, None], e[None, 1:]) - np.maximum(self.lo[:, a, None], e[None, :-1])
            overlaps.append(np.clip(ov, 0.0, None))
        coef = self.weights / self.volumes
        if self.dimension == 1:
            mass = coef @ overlaps[0]
        else:
            mass = np.einsum("k,ki,kj->ij", coef, overlaps[0], overlaps[1])
        return GridDensity(lo, cell, mass / cell**self.dimension)


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Piecewise-constant density on a regular grid of square cells.

    ``values[i]`` (or ``values[i, j]``) is the density on the cell whose lower
    corner is ``origin + cell * index``.
    """

    origin: np.ndarray
    cell: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        if values.ndim not in (1, 2) or origin.shape != (values.ndim,):
            raise UsageError("grid origin and values must agree on the dimension (1 or 2)")
        if not self.cell > 0:
            raise UsageError("cell size must be positive")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise UsageError("grid density values must be finite and nonnegative")
        total = float(values.sum()) * self.cell**values.ndim
        if abs(total - 1.0) > GRID_MASS_TOL:
            raise UsageError(f"grid density integrates to {total:.12g}, expected 1")
        object.__setattr__(self, "cell", float(self.cell))
        object.__setattr__(self, "origin", _frozen(origin))
        object.__setattr__(self, "values", _frozen(values))

    @property
    def dimension(self) -> int:
        return self.values.ndim

    @property
    def cell_volume(self) -> float:
        return self.cell**self.dimension

    def edges(self, axis: int = 0) -> np.ndarray:
        return self.origin[axis] + self.cell * np.arange(self.values.shape[axis] + 1)

    def centers(self, axis: int = 0) -> np.ndarray:
        e = self.edges(axis)
        return 0.5 * (e[1:] + e[:-1])

    def pdf(self, points) -> np.ndarray:
        pts = _as_points(points, self.dimension)
        idx = np.floor((pts - self.origin) / self.cell).astype(np.int64)
        shape = np.array(self.values.shape)
        ok = np.all((idx >= 0) & (idx < shape), axis=1)
        out = np.zeros(len(pts))
        out[ok] = self.values[tuple(idx[ok].T)]
        return out


DensityLike = Union[Density, GridDensity]


@dataclass(frozen=True)
class MomentSet:
    """Second-order constants of an independent (GT, GR) pair.

    ``c0 = E||X-Y||^2``, ``c1 = ||EX-EY||^2``, ``c2 = E||X-EY||^2`` and
    ``cX``, ``cY`` the total variances.
    """

    c0: float
    c1: float
    c2: float
    cX: float
    cY: float
    mean_x: tuple
    mean_y: tuple


def _as_points(points, d: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(-1, 1) if d == 1 else pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[1] != d:
        raise UsageError(f"point dimension does not match density dimension {d}")
    return pts


def pdf(density: DensityLike, point):
    """Density value at ``point``; a scalar for one point, an array for many."""
    arr = np.asarray(point, dtype=float)
    out = density.pdf(arr)
    single = arr.ndim == 0 or (arr.ndim == 1 and density.dimension > 1)
    return float(out[0]) if single else out


def _uniform01(raw: np.ndarray) -> np.ndarray:
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def sample(density: Density, seed: int, count: int, stream: int = 0, start: int = 0) -> np.ndarray:
    """Draw points ``start .. start+count-1`` of the stream keyed by ``(seed, stream)``.

    Point ``i`` depends only on ``(seed, stream, i)`` through one Philox
    counter block, so any slice of a stream can be regenerated independently.
    Returns an array of shape ``(count, d)``.
    """
    if count < 1:
        raise UsageError("sample count must be at least 1")
    bitgen = np.random.Philox(key=np.array([seed, stream], dtype=np.uint64))
    if start:
        bitgen.advance(start)
    u = _uniform01(bitgen.random_raw(4 * count).reshape(count, 4))
    cum = np.cumsum(density.weights)
    comp = np.minimum(np.searchsorted(cum, u[:, 0] * cum[-1], side="right"), len(cum) - 1)
    d = density.dimension
    lo, hi = density.lo[comp], density.hi[comp]
    return lo + (hi - lo) * u[:, 1 : 1 + d]


def moments(fX: Density, fY: Density) -> MomentSet:
    """Closed-form second-order constants for independent X ~ fX, Y ~ fY."""
    if fX.dimension != fY.dimension:
        raise UsageError("GT and GR densities must share a dimension")
    mx, my = fX.mean, fY.mean
    # E||A - B||^2 = var A + var B + ||EA - EB||^2 for every pair of boxes
    gap = ((fX.centers[:, None, :] - fY.centers[None, :, :]) ** 2).sum(axis=2)
    pair = fX.box_variances[:, None] + fY.box_variances[None, :] + gap
    diff = mx - my
    return MomentSet(
        c0=float(fX.weights @ pair @ fY.weights),
        c1=float(diff @ diff),
        c2=fX.spread_about(my),
        cX=fX.variance,
        cY=fY.variance,
        mean_x=tuple(mx.tolist()),
        mean_y=tuple(my.tolist()),
    )


def p_norm(density: DensityLike, p: float) -> float:
    """``(integral of f^p)^(1/p)``; exact for box mixtures, cellwise for grids."""
    if not p > 0:
        raise UsageError("p must be positive")
    if isinstance(density, Density):
        vols, vals = density.pieces()
        integral = float(np.sum(vols * vals**p))
    else:
        integral = float(np.sum(density.values**p)) * density.cell_volume
    return integral ** (1.0 / p)


def _sum_cdf(t, a, w1, w2):
    """CDF at ``t`` of U[a1, a1+w1] + U[a2, a2+w2] with ``a = a1 + a2``.

    The sum has a trapezoidal density; ``w1`` may be zero (point mass).
    """
    short = np.minimum(w1, w2)
    long_ = np.maximum(w1, w2)
    s = t - a
    out = np.where(s <= 0, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ramp_up = s**2 / (2.0 * short * long_)
        plateau = (s - 0.5 * short) / long_
        ramp_down = 1.0 - (short + long_ - s) ** 2 / (2.0 * short * long_)
    out = np.where((s > 0) & (s <= short), ramp_up, out)
    out = np.where((s > short) & (s <= long_), plateau, out)
    out = np.where((s > long_) & (s < short + long_), ramp_down, out)
    return out


def combine_z(fX: Density, fY: Density, lam: float, resolution: int = 1024) -> GridDensity:
    """Grid density of ``(X + lam Y) / (1 + lam)`` for independent 1-D X, Y.

    Each cell holds the exact average of the convolved density over the cell,
    computed from the piecewise-quadratic CDF of every pair of scaled boxes.
    """
    if fX.dimension != fY.dimension:
        raise UsageError("GT and GR densities must share a dimension")
    if fX.dimension != 1:
        raise UnsupportedFeatureError("combine_z is implemented for d=1 only")
    if lam < 0:
        raise UsageError("lambda must be nonnegative")
    if resolution < 64:
        raise UsageError("resolution must be at least 64")
    sx, sy = 1.0 / (1.0 + lam), lam / (1.0 + lam)
    ax, wx = sx * fX.lo[:, 0], sx * (fX.hi[:, 0] - fX.lo[:, 0])
    ay, wy = sy * fY.lo[:, 0], sy * (fY.hi[:, 0] - fY.lo[:, 0])
    start = ax[:, None] + ay[None, :]
    w1 = np.broadcast_to(wx[:, None], start.shape)
    w2 = np.broadcast_to(wy[None, :], start.shape)
    lo = float(start.min())
    hi = float((start + w1 + w2).max())
    cell = (hi - lo) / resolution
    edges = lo + cell * np.arange(resolution + 1)
    pair_w = (fX.weights[:, None] * fY.weights[None, :]).ravel()
    cdf = _sum_cdf(edges[None, :], start.ravel()[:, None], w1.ravel()[:, None], w2.ravel()[:, None])
    mass = pair_w @ np.diff(cdf, axis=1)
    mass /= mass.sum()
    return GridDensity(np.array([lo]), cell, mass / cell)


def combine_w(fX: Density, mean_y: Sequence[float], lam: float) -> Density:
    """Exact density of ``(X + lam E[Y]) / (1 + lam)``."""
    if lam < 0:
        raise UsageError("lambda must be nonnegative")
    m = np.asarray(mean_y, dtype=float)
    return fX.affine(1.0 / (1.0 + lam), lam * m / (1.0 + lam))
