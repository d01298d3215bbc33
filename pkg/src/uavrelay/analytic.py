"""Closed-form tradeoffs and high-resolution deployments for r = 2.

Everything here is stated for h = 0; a positive altitude adds ``h**2`` to
both powers and leaves the optimal positions unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .cost import Deployment, Scenario, check_mode
from .density import Density, GridDensity, MomentSet, combine_w, combine_z, p_norm
from .errors import DomainError, UnsupportedFeatureError, UsageError

# Normalized second moments of the interval and the regular hexagon.
KAPPA = {(2, 1): 1.0 / 12.0, (2, 2): 5.0 / (18.0 * math.sqrt(3.0))}

_ENDPOINT_SLACK = 1e-12


@dataclass(frozen=True)
class TradeoffPoint:
    lam: float
    p_uav: float
    p_gt: float


@dataclass(frozen=True)
class TradeoffCurve:
    mode: str
    points: tuple
    domain: tuple

    def arrays(self):
        """``(lam, p_uav, p_gt)`` as numpy arrays."""
        a = np.array([(p.lam, p.p_uav, p.p_gt) for p in self.points], dtype=float).reshape(-1, 3)
        return a[:, 0], a[:, 1], a[:, 2]


@dataclass(frozen=True)
class PointDensityFn:
    """Normalized relay point density carried on a grid."""

    grid: GridDensity

    def cdf_at_edges(self) -> np.ndarray:
        if self.grid.dimension != 1:
            raise UnsupportedFeatureError("cumulative point density is defined for d=1 only")
        mass = self.grid.values * self.grid.cell
        cdf = np.concatenate([[0.0], np.cumsum(mass)])
        return cdf / cdf[-1]

    def quantile(self, q) -> np.ndarray:
        """Inverse CDF, linear within grid cells."""
        q = np.asarray(q, dtype=float)
        if np.any((q < 0) | (q > 1)):
            raise UsageError("quantile levels must lie in [0, 1]")
        cdf = self.cdf_at_edges()
        edges = self.grid.edges(0)
        k = np.clip(np.searchsorted(cdf, q, side="left") - 1, 0, len(cdf) - 2)
        span = cdf[k + 1] - cdf[k]
        frac = np.where(span > 0, (q - cdf[k]) / np.where(span > 0, span, 1.0), 0.0)
        return edges[k] + frac * self.grid.cell


def _check_lam(lam):
    if not lam >= 0:
        raise UsageError("lambda must be >= 0")


def _in_domain(p, lo, hi, what):
    slack = _ENDPOINT_SLACK * max(1.0, abs(hi))
    if not (lo - slack <= p <= hi + slack):
        raise DomainError(f"{what}: p={p:.12g} outside [{lo:.12g}, {hi:.12g}]")
    return min(max(p, lo), hi)


def single_uav_point(m: MomentSet, lam: float, h: float = 0.0):
    """Optimal single-relay ``(p_uav, p_gt, u1)`` at multiplier ``lam``."""
    _check_lam(lam)
    s = 1.0 + lam
    p_uav = m.cY + m.c1 / s**2 + h * h
    p_gt = m.cX + m.c1 * lam**2 / s**2 + h * h
    u1 = (np.asarray(m.mean_x) + lam * np.asarray(m.mean_y)) / s
    return p_uav, p_gt, u1


def single_uav_pgt(m: MomentSet, p: float, h: float = 0.0) -> float:
    """Least GT power with one relay whose power is at most ``p``."""
    p = _in_domain(p - h * h, m.cY, m.cY + m.c1, "single-relay UAV power")
    return m.cX + (math.sqrt(m.c1) - math.sqrt(p - m.cY)) ** 2 + h * h


def asymptotic_tradeoff(m: MomentSet, lam: float, mode: str, h: float = 0.0):
    """Many-relay limit of ``(p_uav, p_gt)`` at multiplier ``lam``."""
    _check_lam(lam)
    s2 = (1.0 + lam) ** 2
    if check_mode(mode) == "centralized":
        return m.c0 / s2 + h * h, m.c0 * lam**2 / s2 + h * h
    return m.cY + m.c2 / s2 + h * h, m.c2 * lam**2 / s2 + h * h


def asymptotic_pgt(m: MomentSet, p: float, mode: str, h: float = 0.0) -> float:
    """Many-relay limit of the least GT power at UAV power ``p``."""
    p = p - h * h
    if check_mode(mode) == "centralized":
        p = _in_domain(p, 0.0, m.c0, "centralized UAV power")
        return (math.sqrt(m.c0) - math.sqrt(p)) ** 2 + h * h
    p = _in_domain(p, m.cY, m.cY + m.c2, "distributed UAV power")
    return (math.sqrt(m.c2) - math.sqrt(p - m.cY)) ** 2 + h * h


def curve_domain(m: MomentSet, mode: str, single: bool = False, h: float = 0.0) -> tuple:
    if single:
        lo, hi = m.cY, m.cY + m.c1
    elif check_mode(mode) == "centralized":
        lo, hi = 0.0, m.c0
    else:
        lo, hi = m.cY, m.cY + m.c2
    return lo + h * h, hi + h * h


def tradeoff_curve(m: MomentSet, mode: str, points: int = 101, single: bool = False,
                   h: float = 0.0) -> TradeoffCurve:
    """Closed-form curve sampled at ``points`` equispaced UAV powers.

    ``single=True`` gives the one-relay curve (identical for both modes);
    otherwise the many-relay limit for ``mode``. The multiplier that reaches
    each point is recorded, ``inf`` at the lower end of the domain.
    """
    check_mode(mode)
    if points < 2:
        raise UsageError("a curve needs at least two points")
    lo, hi = curve_domain(m, mode, single, h)
    if single:
        base, spread, fn = m.cY, m.c1, lambda p: single_uav_pgt(m, p, h)
    elif mode == "centralized":
        base, spread, fn = 0.0, m.c0, lambda p: asymptotic_pgt(m, p, mode, h)
    else:
        base, spread, fn = m.cY, m.c2, lambda p: asymptotic_pgt(m, p, mode, h)
    out = []
    for p in np.linspace(lo, hi, points):
        excess = p - h * h - base
        lam = math.sqrt(spread / excess) - 1.0 if excess > 0 else math.inf
        out.append(TradeoffPoint(max(lam, 0.0), float(p), fn(float(p))))
    return TradeoffCurve("single_relay" if single else mode, tuple(out), (lo, hi))


def optimal_density(scenario: Scenario, lam: float, mode: str, resolution: int = 1024):
    """Density whose quantizer the relays should follow: Z (centralized) or W."""
    _check_lam(lam)
    if check_mode(mode) == "centralized":
        return combine_z(scenario.fX, scenario.fY, lam, resolution)
    return combine_w(scenario.fX, scenario.fY.mean, lam)


def point_density(f: Union[Density, GridDensity], r: float = 2.0, d: Optional[int] = None,
                  resolution: int = 1024) -> PointDensityFn:
    """High-resolution relay point density, proportional to ``f ** (d / (d + r))``."""
    grid = f.to_grid(resolution) if isinstance(f, Density) else f
    d = grid.dimension if d is None else d
    vals = grid.values ** (d / (d + r))
    vals = vals / (vals.sum() * grid.cell_volume)
    return PointDensityFn(GridDensity(grid.origin, grid.cell, vals))


def inverse_transform_deployment(ell: PointDensityFn, n: int) -> Deployment:
    """Relays at the ``(2i-1)/(2n)`` quantiles of the point density (d=1)."""
    if ell.grid.dimension != 1:
        raise UnsupportedFeatureError("inverse-transform deployment is implemented for d=1 only")
    if n < 1:
        raise UsageError("n must be >= 1")
    q = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    return Deployment(ell.quantile(q)[:, None])


def zador_distortion(f: Union[Density, GridDensity], n: int, r: float = 2.0, d: Optional[int] = None,
                     kappa: Optional[float] = None) -> float:
    """Leading-order distortion of the best ``n``-point quantizer of ``f``."""
    d = f.dimension if d is None else d
    if kappa is None:
        key = (int(r), d) if float(r).is_integer() else None
        if key not in KAPPA:
            raise UsageError(f"no built-in quantizer constant for r={r}, d={d}; pass kappa")
        kappa = KAPPA[key]
    if n < 1:
        raise UsageError("n must be >= 1")
    return kappa * n ** (-r / d) * p_norm(f, d / (d + r))


def asymptotic_lagrangian(m: MomentSet, f: Union[Density, GridDensity], lam: float, n: int,
                          mode: str = "centralized") -> float:
    """Finite-``n`` approximation of the optimal Lagrangian cost (r = 2).

    ``f`` is the density of Z for centralized selection and of W for
    distributed selection (see :func:`optimal_density`).
    """
    _check_lam(lam)
    if check_mode(mode) == "centralized":
        const = lam * m.c0 / (1.0 + lam)
    else:
        const = (m.c0 * lam + m.cY * lam**2) / (1.0 + lam)
    return const + (1.0 + lam) * zador_distortion(f, n, 2.0)
