import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize as sopt

from uavrelay import (
    Density,
    LloydConfig,
    Scenario,
    SelectionRule,
    centroid_update,
    evaluate,
    lagrangian_cost,
    optimize,
)
from uavrelay.errors import EmptyCellError, UsageError
from uavrelay.samples import build_pairs, lloyd_streams

U01 = Density.uniform(0.0, 1.0)
U23 = Density.uniform(2.0, 3.0)
FAST = LloydConfig(sample_count=40_000, restarts=2)


def two_point_cost(a, b):
    """Mean squared error of the two-point quantizer {a, b} on U[0,1]."""
    a, b = np.minimum(a, b), np.maximum(a, b)
    m = np.clip(0.5 * (a + b), 0.0, 1.0)
    return ((m - a) ** 3 + a**3) / 3 + ((1 - b) ** 3 - (m - b) ** 3) / 3


class TestCentroid:
    def test_single_pair(self):
        assert centroid_update([0.0], [3.0], [1.0], 1.0)[0] == 1.5

    def test_two_pairs(self):
        assert centroid_update([0.0, 1.0], [2.0, 3.0], [0.5, 0.5], 1.0)[0] == pytest.approx(1.5, abs=1e-15)

    def test_symmetric_fourth_power(self):
        u = centroid_update([0.0], [2.0], [1.0], 1.0, h=1.0, r=4.0)
        assert u[0] == pytest.approx(1.0, abs=1e-9)

    def test_empty_cell(self):
        assert centroid_update([], [], [], 1.0) is None

    def test_general_exponent_against_scipy(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(0, 1, (50, 2))
        y = rng.uniform(2, 3, (50, 2))
        w = rng.uniform(0.5, 1.5, 50)
        lam, h, r = 0.6, 0.3, 3.0

        def phi(u):
            a = (h * h + ((x - u) ** 2).sum(1)) ** (r / 2)
            b = (h * h + ((y - u) ** 2).sum(1)) ** (r / 2)
            return w @ (a + lam * b)

        ref = sopt.minimize(phi, np.array([1.0, 1.0]), method="Nelder-Mead",
                            options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000}).x
        u = centroid_update(x, y, w, lam, h, r, tol=1e-12)
        np.testing.assert_allclose(u, ref, atol=1e-6)
        assert phi(u) <= phi(ref) + 1e-9

    def test_linear_exponent_weber_point(self):
        # r=1, h=0: weighted geometric median of the three vertices of a wide triangle
        x = np.array([[0.0, 0.0], [4.0, 0.0]])
        y = np.array([[2.0, 3.0], [2.0, 3.0]])
        u = centroid_update(x, y, [1.0, 1.0], 0.5, h=0.0, r=1.0, tol=1e-9)
        # the Fermat point lies on the symmetry axis with 120-degree angles
        assert u[0] == pytest.approx(2.0, abs=1e-6)
        assert u[1] == pytest.approx(2.0 / np.sqrt(3.0), abs=1e-5)


class TestLagrangianCost:
    def test_single_relay_example(self):
        s = Scenario(U01, U23)
        pairs = build_pairs(U01, U23, "quadrature", 1 << 16)
        oracle = integrate.dblquad(lambda y, x: (x - 1.5) ** 2 + (1.5 - y) ** 2, 0, 1, 2, 3)[0]
        # lam c0 / (1 + lam) + (1 + lam) Var(Z) with Var(Z) = 1/24
        decomposed = 1.0 * (50 / 12) / 2 + 2 * (1 / 24)
        assert oracle == pytest.approx(decomposed, abs=1e-12)
        assert oracle == pytest.approx(26 / 12, abs=1e-12)
        assert lagrangian_cost([1.5], s, 1.0, "centralized", pairs) == pytest.approx(oracle, abs=1e-12)

    def test_relay_at_gt_mean(self):
        s = Scenario(U01, U23)
        pairs = build_pairs(U01, U23, "quadrature", 1 << 14)
        assert lagrangian_cost([0.5], s, 0.0, "centralized", pairs) == pytest.approx(1 / 12, abs=1e-12)

    @pytest.mark.parametrize("mode", ["centralized", "distributed"])
    def test_matches_evaluate(self, mode):
        s = Scenario(U01, U23, n=3)
        pairs = build_pairs(U01, U23, "quadrature", 1 << 14)
        U = [0.3, 1.4, 2.6]
        est = evaluate(U, SelectionRule.for_mode(mode, 2.0, U, s), s, samples=pairs)
        assert lagrangian_cost(U, s, 2.0, mode, pairs) == pytest.approx(est.lagrangian, rel=1e-12)


class TestOptimize:
    def test_single_relay_positions(self):
        s = Scenario(U01, U23)
        for lam in (0.0, 1.0, 3.0):
            res = optimize(s, lam, config=FAST)
            assert res.deployment.positions[0, 0] == pytest.approx((0.5 + 2.5 * lam) / (1 + lam), abs=1e-9)
            assert res.converged

    def test_two_cell_quantizer_against_grid(self):
        grid = np.linspace(0, 1, 200)
        a, b = np.meshgrid(grid, grid, indexing="ij")
        best = two_point_cost(a, b).min()
        res = optimize(Scenario(U01, U01, n=2), 0.0, config=FAST)
        p = res.deployment.sorted().positions[:, 0]
        # any cell boundary inside a gap between quadrature nodes is a fixed point
        np.testing.assert_allclose(p, [0.25, 0.75], atol=5e-3)
        assert two_point_cost(*p) <= best + 1e-5
        assert res.cost == pytest.approx(1 / 48, abs=1e-5)

    def test_large_multiplier_is_uniform_on_gr(self):
        res = optimize(Scenario(U01, U23, n=8), 1e4)
        target = 2 + (2 * np.arange(1, 9) - 1) / 16
        np.testing.assert_allclose(res.deployment.sorted().positions[:, 0], target, atol=1e-2)

    def test_single_relay_fixed_point_monte_carlo(self):
        cfg = LloydConfig(sample_count=20_000, restarts=1, method="monte_carlo", seed=3)
        s = Scenario(U01, U23)
        res = optimize(s, 0.7, config=cfg)
        sx, sy, _, _ = lloyd_streams(0)
        pairs = build_pairs(U01, U23, "monte_carlo", 20_000, seed=3, streams=(sx, sy))
        expected = (pairs.x.mean() + 0.7 * pairs.y.mean()) / 1.7
        assert res.deployment.positions[0, 0] == pytest.approx(expected, abs=1e-12)

    def test_permutation_equivariance(self):
        s = Scenario(U01, U23, n=4)
        init = np.array([[0.3], [1.1], [1.7], [2.4]])
        perm = [2, 0, 3, 1]
        cfg = dataclasses.replace(FAST, restarts=1)
        a = optimize(s, 0.8, config=cfg, init=init).deployment.positions
        b = optimize(s, 0.8, config=cfg, init=init[perm]).deployment.positions
        np.testing.assert_allclose(b, a[perm], atol=1e-12)

    @pytest.mark.parametrize("r", [2.0, 3.0])
    def test_distributed_single_relay_matches_centralized(self, r):
        s = Scenario(U01, U23, r=r)
        c = optimize(s, 1.3, "centralized", FAST).deployment.positions
        d = optimize(s, 1.3, "distributed", FAST).deployment.positions
        np.testing.assert_allclose(d, c, atol=1e-12 if r == 2 else 1e-5)

    def test_deterministic(self):
        s = Scenario(U01, U23, n=3)
        assert optimize(s, 0.5, config=FAST) == optimize(s, 0.5, config=FAST)

    def test_empty_cell_reseeded(self):
        s = Scenario(U01, U23, n=2)
        cfg = dataclasses.replace(FAST, restarts=1)
        res = optimize(s, 1.0, config=cfg, init=[[1.5], [1.5]])
        p = res.deployment.sorted().positions[:, 0]
        assert p[1] - p[0] > 0.1
        assert res.cost < 26 / 12 - 0.05

    def test_empty_cell_error_names_cell(self):
        s = Scenario(U01, U23, n=2)
        cfg = dataclasses.replace(FAST, restarts=1, max_reseeds=0)
        with pytest.raises(EmptyCellError, match="relay 1"):
            optimize(s, 1.0, config=cfg, init=[[1.5], [1.5]])

    def test_failed_restart_discarded(self):
        s = Scenario(U01, U23, n=2)
        cfg = dataclasses.replace(FAST, restarts=2, max_reseeds=0)
        res = optimize(s, 1.0, config=cfg, init=[[1.5], [1.5]])
        assert res.restart_index == 1

    def test_too_few_samples(self):
        with pytest.raises(UsageError):
            optimize(Scenario(U01, U23, n=20), 1.0, config=LloydConfig(sample_count=150))

    def test_bad_init_shape(self):
        with pytest.raises(UsageError):
            optimize(Scenario(U01, U23, n=2), 1.0, config=FAST, init=[[1.0]])

    def test_two_dimensional_monte_carlo(self):
        fx = Density.uniform([0, 0], [1, 1])
        fy = Density.uniform([2, 0], [3, 1])
        s = Scenario(fx, fy, n=4)
        res = optimize(s, 1.0, config=LloydConfig(sample_count=20_000, restarts=2))
        p = res.deployment.positions
        assert p.shape == (4, 2)
        assert np.all((p[:, 0] > 0.9) & (p[:, 0] < 2.1) & (p[:, 1] > 0) & (p[:, 1] < 1))
        assert res.cost < lagrangian_cost([[1.5, 0.5]] * 4, s, 1.0, "centralized",
                                          build_pairs(fx, fy, "monte_carlo", 20_000, streams=(16, 17)))


@st.composite
def lloyd_cases(draw):
    d = draw(st.sampled_from([1, 2]))
    mode = draw(st.sampled_from(["centralized", "distributed"]))
    r = draw(st.sampled_from([2.0, 2.0, 1.5, 3.0]))
    h = draw(st.sampled_from([0.0, 0.5]))
    n = draw(st.integers(1, 5))
    lam = draw(st.floats(0, 10))
    seed = draw(st.integers(0, 1000))
    shift = draw(st.floats(0, 3))
    fx = Density.mixture([(0.6, [0] * d, [1] * d), (0.4, [0.5] * d, [1.5] * d)])
    fy = Density.uniform([shift] * d, [shift + 1] * d)
    return Scenario(fx, fy, h=h, r=r, n=n), lam, mode, seed


@settings(max_examples=25, deadline=None)
@given(lloyd_cases())
def test_cost_trace_monotone(case):
    s, lam, mode, seed = case
    cfg = LloydConfig(sample_count=3000, restarts=1, seed=seed, max_iterations=30)
    res = optimize(s, lam, mode, cfg)
    trace = np.array(res.cost_trace)
    assert np.all(np.diff(trace) <= 1e-12 * np.maximum(1.0, np.abs(trace[:-1])))
