"""Link costs, relay selection and the average power functionals.

With path-loss exponent ``r`` and relay altitude ``h``, sending from ground
point ``a`` to the relay projected at ``b`` costs ``(h^2 + |a-b|^2)^(r/2)``
(per unit of the rate factor ``2^rho - 1``). A GT-GR pair routed through
relay ``i`` pays that cost on each hop: the GT pays the first, the relay the
second.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import kernels
from .density import Density, MomentSet, moments
from .errors import UsageError
from .samples import SampleSet, build_pairs, gauss_legendre

MODES = ("centralized", "distributed")


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


@dataclass(frozen=True)
class Scenario:
    """GT density, GR density, altitude, path-loss exponent, rate, relay count."""

    fX: Density
    fY: Density
    h: float = 0.0
    r: float = 2.0
    rho: float = 1.0
    n: int = 1

    def __post_init__(self):
        if self.fX.dimension != self.fY.dimension:
            raise UsageError("GT and GR densities must share a dimension")
        if not (np.isfinite(self.h) and self.h >= 0):
            raise UsageError("altitude h must be finite and >= 0")
        if not (np.isfinite(self.r) and self.r >= 1):
            raise UsageError("path-loss exponent r must be >= 1")
        if not (np.isfinite(self.rho) and self.rho >= 0):
            raise UsageError("rate rho must be >= 0")
        if int(self.n) != self.n or self.n < 1:
            raise UsageError("relay count n must be a positive integer")
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "n", int(self.n))

    @property
    def d(self) -> int:
        return self.fX.dimension

    @property
    def power_scale(self) -> float:
        """Multiplier ``2^rho - 1`` turning path loss into transmit power."""
        return 2.0**self.rho - 1.0

    def moments(self) -> MomentSet:
        return moments(self.fX, self.fY)


@dataclass(frozen=True, eq=False)
class Deployment:
    """Projected relay positions, shape ``(n, d)``."""

    positions: np.ndarray

    def __post_init__(self):
        p = np.array(self.positions, dtype=float)
        if p.ndim == 1:
            p = p[:, None]
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] not in (1, 2):
            raise UsageError("a deployment is a nonempty (n, d) array with d in {1, 2}")
        if not np.all(np.isfinite(p)):
            raise UsageError("relay positions must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "positions", p)

    def __len__(self):
        return self.positions.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Deployment):
            return NotImplemented
        return np.array_equal(self.positions, other.positions)

    def __repr__(self):
        return f"Deployment({self.positions.tolist()})"

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def d(self) -> int:
        return self.positions.shape[1]

    def sorted(self) -> "Deployment":
        """Lexicographically sorted copy (ascending order in 1-D)."""
        order = np.lexsort(self.positions.T[::-1])
        return Deployment(self.positions[order])


def as_deployment(U) -> Deployment:
    return U if isinstance(U, Deployment) else Deployment(U)


@dataclass(frozen=True, eq=False)
class SelectionRule:
    """How a GT-GR pair picks its relay.

    ``centralized`` minimizes ``d(x,u_i) + lam d(u_i,y)``; ``distributed``
    replaces the second hop by the precomputed expected GR-side cost of each
    relay and therefore ignores ``y``.
    """

    mode: str
    lam: float
    gr_side_costs: Optional[np.ndarray] = None

    def __post_init__(self):
        check_mode(self.mode)
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise UsageError("lambda must be finite and >= 0")
        object.__setattr__(self, "lam", float(self.lam))
        if self.gr_side_costs is not None:
            g = np.array(self.gr_side_costs, dtype=float).ravel()
            g.setflags(write=False)
            object.__setattr__(self, "gr_side_costs", g)

    @classmethod
    def centralized(cls, lam: float) -> "SelectionRule":
        return cls("centralized", lam)

    @classmethod
    def distributed(cls, lam: float, U, scenario: Scenario) -> "SelectionRule":
        U = as_deployment(U)
        g = gr_side_cost(U.positions, scenario.fY, scenario.h, scenario.r)
        return cls("distributed", lam, g)

    @classmethod
    def for_mode(cls, mode: str, lam: float, U, scenario: Scenario) -> "SelectionRule":
        if check_mode(mode) == "centralized":
            return cls.centralized(lam)
        return cls.distributed(lam, U, scenario)

    def costs_for(self, n: int) -> np.ndarray:
        if self.gr_side_costs is None:
            raise UsageError("distributed selection needs gr_side_costs")
        if self.gr_side_costs.shape[0] != n:
            raise UsageError(f"gr_side_costs has {self.gr_side_costs.shape[0]} entries for {n} relays")
        return self.gr_side_costs


@dataclass(frozen=True)
class PowerEstimate:
    p_gt: float
    p_uav: float
    lagrangian: float
    std_error_gt: float = 0.0
    std_error_uav: float = 0.0


@dataclass(frozen=True)
class EvalConfig:
    """Integration settings; ``auto`` uses quadrature for d=1, Monte Carlo for d=2."""

    method: str = "auto"
    sample_count: int = 1 << 18
    seed: int = 0
    order: int = field(default=4, repr=False)

    def __post_init__(self):
        if self.method not in ("auto", "quadrature", "monte_carlo"):
            raise UsageError(f"unknown evaluation method {self.method!r}")
        if self.sample_count < 1000:
            raise UsageError("evaluation needs at least 1000 samples")

    def pairs(self, scenario: Scenario) -> SampleSet:
        return build_pairs(scenario.fX, scenario.fY, self.method, self.sample_count, self.seed, order=self.order)


def link_cost(a, b, h: float, r: float):
    """``(h^2 + |a-b|^2)^(r/2)`` along the last axis; scalar in, scalar out."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 0 and b.ndim == 0:
        sq = (a - b) ** 2
    else:
        sq = np.sum((np.atleast_1d(a) - np.atleast_1d(b)) ** 2, axis=-1)
    out = (h * h + sq) ** (0.5 * r) if r != 2 else h * h + sq
    return float(out) if np.ndim(out) == 0 else out


def select(rule: SelectionRule, U, x, y, scenario: Scenario) -> int:
    """Relay index for one GT-GR pair; ties go to the lowest index."""
    U = as_deployment(U)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    first = link_cost(x[None, :], U.positions, scenario.h, scenario.r)
    if rule.mode == "centralized":
        y = np.atleast_1d(np.asarray(y, dtype=float))
        second = link_cost(U.positions, y[None, :], scenario.h, scenario.r)
    else:
        second = rule.costs_for(U.n)
    return int(np.argmin(first + rule.lam * second))


@lru_cache(maxsize=64)
def _gr_nodes(fY: Density, count: int):
    return gauss_legendre(fY, count, order=8)


def gr_side_cost(u, fY: Density, h: float, r: float, return_error: bool = False):
    """Expected relay-to-GR cost ``E d(u, Y)`` for one position or an ``(n, d)`` array.

    Closed form for ``r == 2``; otherwise a composite Gauss-Legendre rule,
    whose error is estimated against a rule of half the size.
    """
    u = np.asarray(u, dtype=float)
    single = u.ndim == 0 or (u.ndim == 1 and fY.dimension > 1) or (u.ndim == 1 and u.size == 1)
    pts = u.reshape(-1, fY.dimension)
    if r == 2:
        diff = pts - fY.mean
        out = h * h + (diff**2).sum(axis=1) + fY.variance
        err = np.zeros_like(out)
    else:
        count = 2048
        nodes, wts = _gr_nodes(fY, count)
        out = np.array([wts @ link_cost(p[None, :], nodes, h, r) for p in pts])
        if return_error:
            coarse_nodes, coarse_wts = _gr_nodes(fY, count // 2)
            coarse = np.array([coarse_wts @ link_cost(p[None, :], coarse_nodes, h, r) for p in pts])
            err = np.abs(out - coarse)
    if single:
        out = float(out[0])
        if return_error:
            err = float(err[0])
    return (out, err) if return_error else out


def evaluate(U, rule: SelectionRule, scenario: Scenario, config: Optional[EvalConfig] = None,
             samples: Optional[SampleSet] = None) -> PowerEstimate:
    """Average GT and relay transmit powers of deployment ``U`` under ``rule``.

    Integrates over ``samples`` when given (common random numbers), else over
    the pair set described by ``config``. Powers include the ``2^rho - 1``
    factor.
    """
    U = as_deployment(U)
    if U.d != scenario.d:
        raise UsageError("deployment dimension does not match the scenario")
    if samples is None:
        samples = (config or EvalConfig()).pairs(scenario)
    pos = np.ascontiguousarray(U.positions)
    h2 = scenario.h**2
    if rule.mode == "centralized":
        _, gt, uav = kernels.assign_centralized(samples.x, samples.y, pos, rule.lam, h2, scenario.r)
    else:
        g = np.ascontiguousarray(rule.costs_for(U.n))
        idx, gt = kernels.assign_distributed(samples.x, pos, g, rule.lam, h2, scenario.r)
        uav = link_cost(pos[idx], samples.y, scenario.h, scenario.r)
    scale = scenario.power_scale
    p_gt = scale * float(samples.w @ gt)
    p_uav = scale * float(samples.w @ uav)
    se_gt = se_uav = 0.0
    if samples.method == "monte_carlo":
        root_n = np.sqrt(samples.size)
        se_gt = scale * float(np.std(gt, ddof=1) / root_n)
        se_uav = scale * float(np.std(uav, ddof=1) / root_n)
    return PowerEstimate(p_gt, p_uav, p_gt + rule.lam * p_uav, se_gt, se_uav)
