"""Multiplier sweeps and the time-sharing (lower convex) hull."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cost import Deployment, EvalConfig, Scenario, SelectionRule, check_mode, evaluate
from .errors import UsageError
from .lloyd import LloydConfig, optimize

# Stand-in for an infinite multiplier.
LAMBDA_INF = 1e6


def default_lambda_grid() -> tuple:
    return (0.0,) + tuple(np.logspace(-2, 2, 40).tolist())


@dataclass(frozen=True)
class SweepSpec:
    lambda_grid: tuple = field(default_factory=default_lambda_grid)
    n: Optional[int] = None
    mode: str = "centralized"
    lloyd_config: LloydConfig = field(default_factory=LloydConfig)
    eval_config: EvalConfig = field(default_factory=EvalConfig)
    warm_start: bool = True
    workers: int = 1

    def __post_init__(self):
        check_mode(self.mode)
        grid = tuple(float(v) for v in self.lambda_grid)
        if not grid:
            raise UsageError("lambda grid is empty")
        if any(not (np.isfinite(v) and v >= 0) for v in grid):
            raise UsageError("lambda grid values must be finite and >= 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise UsageError("lambda grid must be sorted ascending without duplicates")
        object.__setattr__(self, "lambda_grid", grid)
        if self.workers < 1:
            raise UsageError("workers must be >= 1")


@dataclass(frozen=True)
class SweepPoint:
    lam: float
    p_uav: float
    p_gt: float
    se_uav: float
    se_gt: float
    deployment: Deployment


@dataclass(frozen=True)
class SweepResult:
    mode: str
    n: int
    raw_points: tuple
    hull_points: tuple


def lower_hull(points: Sequence) -> list:
    """Vertices of the lower-left convex hull in (p_uav, p_gt).

    Accepts ``(p_uav, p_gt)`` tuples or objects with ``p_uav``/``p_gt``
    attributes and returns the surviving inputs sorted by ``p_uav`` with
    ``p_gt`` strictly decreasing.
    """
    items = list(points)
    if not items:
        raise UsageError("lower_hull needs at least one point")

    def xy(p):
        return (p.p_uav, p.p_gt) if hasattr(p, "p_uav") else (float(p[0]), float(p[1]))

    order = sorted(range(len(items)), key=lambda i: (*xy(items[i]), i))
    hull = []
    for i in order:
        x, y = xy(items[i])
        if hull and xy(items[hull[-1]])[0] == x:
            continue  # same p_uav, larger-or-equal p_gt
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = xy(items[hull[-2]]), xy(items[hull[-1]])
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    # keep the strictly decreasing part: stop at the minimum p_gt
    out = [hull[0]]
    for i in hull[1:]:
        if xy(items[i])[1] < xy(items[out[-1]])[1]:
            out.append(i)
        else:
            break
    return [items[i] for i in out]


def _proxy_spread(m, lam, mode):
    """Mean and standard deviation of the variable the relays quantize."""
    s = 1.0 + lam
    mean = (np.asarray(m.mean_x) + lam * np.asarray(m.mean_y)) / s
    var = m.cX + lam * lam * m.cY if mode == "centralized" else m.cX
    return mean, np.sqrt(var) / s


def carry_over(U: Deployment, scenario: Scenario, lam_from: float, lam_to: float, mode: str) -> Deployment:
    """Map a deployment optimized at ``lam_from`` onto the spread expected at ``lam_to``.

    The relays' proxy variable moves and shrinks as the multiplier grows, so
    reusing positions verbatim would strand relays outside the new support.
    """
    m = scenario.moments()
    m0, s0 = _proxy_spread(m, lam_from, mode)
    m1, s1 = _proxy_spread(m, lam_to, mode)
    ratio = s1 / s0 if s0 > 0 else 1.0
    return Deployment(m1 + (U.positions - m0) * ratio)


def _point(scenario, spec, lam, init, samples):
    result = optimize(scenario, lam, spec.mode, spec.lloyd_config, init=init)
    U = result.deployment
    rule = SelectionRule.for_mode(spec.mode, lam, U, scenario)
    est = evaluate(U, rule, scenario, samples=samples)
    return SweepPoint(lam, est.p_uav, est.p_gt, est.std_error_uav, est.std_error_gt, U)


def sweep(scenario: Scenario, spec: Optional[SweepSpec] = None) -> SweepResult:
    """Optimize and evaluate one deployment per multiplier in ``spec.lambda_grid``.

    All evaluations share one pair set. With ``warm_start`` each multiplier
    starts restart 0 from the previous deployment (see :func:`carry_over`)
    and runs sequentially;
    otherwise grid points are independent and ``workers`` threads may be used.
    Output is identical for a fixed seed either way.
    """
    spec = spec or SweepSpec()
    if spec.n is not None:
        scenario = dataclasses.replace(scenario, n=spec.n)
    samples = spec.eval_config.pairs(scenario)
    if spec.warm_start:
        raw = []
        for lam in spec.lambda_grid:
            init = carry_over(raw[-1].deployment, scenario, raw[-1].lam, lam, spec.mode) if raw else None
            raw.append(_point(scenario, spec, lam, init, samples))
    elif spec.workers > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            raw = list(pool.map(lambda lam: _point(scenario, spec, lam, None, samples), spec.lambda_grid))
    else:
        raw = [_point(scenario, spec, lam, None, samples) for lam in spec.lambda_grid]
    return SweepResult(spec.mode, scenario.n, tuple(raw), tuple(lower_hull(raw)))


def interpolate_hull(hull: Sequence, p_uav) -> np.ndarray:
    """Piecewise-linear hull value at ``p_uav`` (nan outside the hull's span)."""
    xs = np.array([h.p_uav if hasattr(h, "p_uav") else h[0] for h in hull], dtype=float)
    ys = np.array([h.p_gt if hasattr(h, "p_gt") else h[1] for h in hull], dtype=float)
    p = np.asarray(p_uav, dtype=float)
    out = np.interp(p, xs, ys)
    return np.where((p < xs[0]) | (p > xs[-1]), np.nan, out)
