"""Generalized Lloyd algorithm for relay deployments at a fixed multiplier.

The cost of a deployment is the average over (GT, GR) pairs of the cheapest
Lagrangian route ``d(x,u_i) + lam d(u_i,y)`` (centralized) or
``d(x,u_i) + lam E d(u_i,Y)`` (distributed). Each iteration assigns every
pair of a fixed weighted sample set to its cheapest relay and then moves
every relay to the minimizer of the cost of its own cell, so the recorded
cost never increases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .cost import Deployment, Scenario, _gr_nodes, as_deployment, check_mode, gr_side_cost, link_cost
from .errors import EmptyCellError, UsageError
from .samples import SampleSet, build_pairs, lloyd_streams
from .density import sample

log = logging.getLogger(__name__)

_GR_NODE_COUNT = 2048


@dataclass(frozen=True)
class LloydConfig:
    max_iterations: int = 200
    relative_cost_tolerance: float = 1e-7
    sample_count: int = 200_000
    seed: int = 0
    restarts: int = 10
    centroid_solver_tolerance: float = 1e-10
    method: str = "auto"
    max_reseeds: int = 5

    def __post_init__(self):
        if self.max_iterations < 1 or self.restarts < 1 or self.sample_count < 1:
            raise UsageError("max_iterations, restarts and sample_count must be >= 1")
        if not (self.relative_cost_tolerance > 0 and self.centroid_solver_tolerance > 0):
            raise UsageError("tolerances must be positive")
        if self.max_reseeds < 0:
            raise UsageError("max_reseeds must be >= 0")


@dataclass(frozen=True)
class LloydResult:
    deployment: Deployment
    cost_trace: tuple
    converged: bool
    restart_index: int
    cost: float


def _gr_costs(U: np.ndarray, scenario: Scenario) -> np.ndarray:
    return np.ascontiguousarray(gr_side_cost(U, scenario.fY, scenario.h, scenario.r), dtype=float).reshape(-1)


def _assign(U: np.ndarray, scenario: Scenario, lam: float, mode: str, samples: SampleSet):
    """Cheapest relay per pair and the Lagrangian cost it incurs."""
    h2 = scenario.h**2
    if mode == "centralized":
        idx, gt, uav = kernels.assign_centralized(samples.x, samples.y, U, lam, h2, scenario.r)
        return idx, gt + lam * uav
    g = _gr_costs(U, scenario)
    idx, gt = kernels.assign_distributed(samples.x, U, g, lam, h2, scenario.r)
    return idx, gt + lam * g[idx]


def lagrangian_cost(U, scenario: Scenario, lam: float, mode: str, samples: SampleSet) -> float:
    """Average cheapest-route cost of ``U`` over a fixed sample set.

    Per unit of the rate factor ``2^rho - 1``; with ``rho = 1`` it equals the
    ``lagrangian`` field of :func:`uavrelay.cost.evaluate` on the same set
    (exactly for centralized selection and for product quadrature sets).
    """
    check_mode(mode)
    U = np.ascontiguousarray(as_deployment(U).positions)
    _, c = _assign(U, scenario, float(lam), mode, samples)
    return float(samples.w @ c)


def _minimize_weber(points, weights, h2, r, tol, start):
    """Minimize ``sum_k weights_k (h2 + |points_k - u|^2)^(r/2)`` from ``start``.

    Damped Newton with Armijo backtracking; never returns a point worse than
    ``start``. Stops once the gradient norm is below ``tol`` times the total
    weight.
    """
    u = np.array(start, dtype=float)
    total = float(weights.sum())
    f, g, H = kernels.weber_derivs(points, weights, u, h2, r)
    d = u.shape[0]
    for _ in range(200):
        gnorm = float(np.sqrt(g @ g))
        if gnorm <= tol * total:
            break
        step = None
        try:
            step = np.linalg.solve(H, g)
            if not np.all(np.isfinite(step)) or g @ step <= 0:
                step = None
        except np.linalg.LinAlgError:
            pass
        if step is None:
            curv = np.trace(H) / d
            step = g / (curv if curv > 0 else total)
        t = 1.0
        accepted = False
        for _ in range(60):
            cand = u - t * step
            fc = kernels.weber_value(points, weights, cand, h2, r)
            if fc <= f - 1e-4 * t * (g @ step):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        u = cand
        f, g, H = kernels.weber_derivs(points, weights, u, h2, r)
    return u


def _points(a):
    a = np.asarray(a, dtype=float)
    return a.reshape(-1, 1) if a.ndim < 2 else a


def centroid_update(x, y, w, lam: float, h: float = 0.0, r: float = 2.0, tol: float = 1e-10, start=None):
    """Best relay position for one cell of (x, y) pairs with weights ``w``.

    For ``r == 2`` this is the weighted mean of ``(x + lam y) / (1 + lam)``.
    Otherwise the convex cell cost is minimized numerically from ``start``
    (default: that weighted mean). Returns ``None`` for an empty cell so the
    caller can reseed.
    """
    x, y = _points(x), _points(y)
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.size == 0 or w.sum() <= 0:
        return None
    mean = (w @ (x + lam * y)) / ((1.0 + lam) * w.sum())
    if r == 2:
        return mean
    pts = np.ascontiguousarray(np.concatenate([x, y]))
    wts = np.concatenate([w, lam * w])
    return _minimize_weber(pts, wts, h * h, float(r), tol, mean if start is None else start)


def _centroids(U, idx, samples, scenario, lam, mode, tol):
    """Updated positions and a mask of empty cells (left in place)."""
    n, d = U.shape
    mass = np.bincount(idx, weights=samples.w, minlength=n)
    empty = mass <= 0
    new = U.copy()
    if scenario.r == 2:
        sx = np.stack([np.bincount(idx, weights=samples.w * samples.x[:, j], minlength=n) for j in range(d)], axis=1)
        ok = ~empty
        if mode == "centralized":
            sy = np.stack([np.bincount(idx, weights=samples.w * samples.y[:, j], minlength=n) for j in range(d)], axis=1)
            new[ok] = (sx[ok] + lam * sy[ok]) / ((1.0 + lam) * mass[ok, None])
        else:
            new[ok] = (sx[ok] / mass[ok, None] + lam * scenario.fY.mean) / (1.0 + lam)
        return new, empty
    order = np.argsort(idx, kind="stable")
    bounds = np.searchsorted(idx[order], np.arange(n + 1))
    h2 = scenario.h**2
    if mode == "distributed":
        ynodes, yw = _gr_nodes(scenario.fY, _GR_NODE_COUNT)
    for i in np.flatnonzero(~empty):
        sel = order[bounds[i]:bounds[i + 1]]
        w = samples.w[sel]
        if mode == "centralized":
            pts = np.concatenate([samples.x[sel], samples.y[sel]])
            wts = np.concatenate([w, lam * w])
        else:
            pts = np.concatenate([samples.x[sel], ynodes])
            wts = np.concatenate([w, lam * mass[i] * yw])
        new[i] = _minimize_weber(np.ascontiguousarray(pts), wts, h2, scenario.r, tol, U[i])
    return new, empty


def _proxy_points(x, y, scenario, lam, mode):
    """Map pairs to the combined variable that seeds relay positions."""
    if mode == "centralized":
        return (x + lam * y) / (1.0 + lam)
    return (x + lam * scenario.fY.mean) / (1.0 + lam)


def _reseed_order(samples, contrib, scenario, lam, mode):
    """Samples ranked by how much a relay at their own proxy point would save.

    The excess is the current cost minus the cost of routing the pair through
    its proxy point, which for ``r = 2`` is the pair's best possible route.
    Ranking by raw cost instead would favour pairs whose cost is mostly
    unavoidable.
    """
    z = _proxy_points(samples.x, samples.y, scenario, lam, mode)
    first = link_cost(samples.x, z, scenario.h, scenario.r)
    if mode == "centralized":
        second = link_cost(z, samples.y, scenario.h, scenario.r)
    elif scenario.r == 2:
        second = gr_side_cost(z, scenario.fY, scenario.h, 2.0)
    else:
        nodes, wts = _gr_nodes(scenario.fY, 64)
        second = np.array([wts @ link_cost(p[None, :], nodes, scenario.h, scenario.r) for p in z])
    excess = samples.w * (contrib - first - lam * second)
    return np.argsort(-excess, kind="stable"), z


def _run(U0, scenario, lam, mode, samples, config, restart):
    U = np.array(U0, dtype=float)
    trace = []
    reseeds = 0
    converged = False
    for it in range(config.max_iterations):
        idx, contrib = _assign(U, scenario, lam, mode, samples)
        cost = float(samples.w @ contrib)
        trace.append(cost)
        if len(trace) > 1 and trace[-2] - cost <= config.relative_cost_tolerance * abs(cost):
            converged = True
            break
        if it == config.max_iterations - 1:
            break
        new, empty = _centroids(U, idx, samples, scenario, lam, mode, config.centroid_solver_tolerance)
        if empty.any():
            order, z = _reseed_order(samples, contrib, scenario, lam, mode)
            for k, cell in enumerate(np.flatnonzero(empty)):
                if reseeds >= config.max_reseeds:
                    raise EmptyCellError(int(cell), reseeds)
                new[cell] = z[order[k]]
                reseeds += 1
                log.debug("restart %d iteration %d: reseeded relay %d", restart, it, cell)
        U = new
    return U, tuple(trace), converged


def _initial(scenario, lam, mode, n, config, restart):
    _, _, sx, sy = lloyd_streams(restart)
    x = sample(scenario.fX, config.seed, n, stream=sx)
    y = sample(scenario.fY, config.seed, n, stream=sy)
    return _proxy_points(x, y, scenario, lam, mode)


def optimize(scenario: Scenario, lam: float, mode: str = "centralized",
             config: Optional[LloydConfig] = None, init=None) -> LloydResult:
    """Lloyd-optimize ``scenario.n`` relays at multiplier ``lam``.

    ``init`` (a deployment) replaces the random start of restart 0, which is
    how sweeps warm-start from the neighbouring multiplier. The best restart
    is returned; ties go to the lowest restart index. A restart that runs out
    of reseeds is dropped, and :class:`EmptyCellError` is raised only when
    every restart did.
    """
    check_mode(mode)
    config = config or LloydConfig()
    lam = float(lam)
    if not (np.isfinite(lam) and lam >= 0):
        raise UsageError("lambda must be finite and >= 0")
    n = scenario.n
    if n > config.sample_count / 10:
        raise UsageError(f"{n} relays need at least {10 * n} samples")
    if init is not None:
        init = as_deployment(init).positions
        if init.shape != (n, scenario.d):
            raise UsageError(f"initial deployment must have shape ({n}, {scenario.d})")

    shared = None
    runs = []
    failure = None
    for restart in range(config.restarts):
        if shared is None or shared.method == "monte_carlo":
            sx, sy, _, _ = lloyd_streams(restart)
            samples = build_pairs(scenario.fX, scenario.fY, config.method, config.sample_count,
                                  config.seed, streams=(sx, sy))
            if shared is None:
                shared = samples
        else:
            samples = shared
        U0 = init if (restart == 0 and init is not None) else _initial(scenario, lam, mode, n, config, restart)
        try:
            U, trace, converged = _run(U0, scenario, lam, mode, samples, config, restart)
        except EmptyCellError as exc:
            failure = exc
            log.warning("restart %d discarded: %s", restart, exc)
            continue
        score = trace[-1] if samples is shared else lagrangian_cost(U, scenario, lam, mode, shared)
        runs.append((score, restart, U, trace, converged))
        log.debug("restart %d: cost %.12g after %d iterations", restart, trace[-1], len(trace))
    if not runs:
        raise failure
    score, restart, U, trace, converged = min(runs, key=lambda t: (t[0], t[1]))
    return LloydResult(Deployment(U), trace, converged, restart, score)
