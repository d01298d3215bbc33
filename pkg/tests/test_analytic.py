import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from uavrelay import Density, EvalConfig, LloydConfig, Scenario, SelectionRule, evaluate, moments, optimize
from uavrelay.analytic import (
    KAPPA,
    asymptotic_lagrangian,
    asymptotic_pgt,
    asymptotic_tradeoff,
    inverse_transform_deployment,
    optimal_density,
    point_density,
    single_uav_pgt,
    single_uav_point,
    tradeoff_curve,
    zador_distortion,
)
from uavrelay.density import combine_z
from uavrelay.errors import DomainError, UnsupportedFeatureError, UsageError

U01 = Density.uniform(0.0, 1.0)
U23 = Density.uniform(2.0, 3.0)
M = moments(U01, U23)


class TestSingleRelay:
    def test_balanced_multiplier(self):
        p_uav, p_gt, u = single_uav_point(M, 1.0)
        assert p_uav == pytest.approx(13 / 12, abs=1e-14)
        assert p_gt == pytest.approx(13 / 12, abs=1e-14)
        assert u[0] == pytest.approx(1.5, abs=1e-15)

    def test_zero_multiplier(self):
        p_uav, p_gt, u = single_uav_point(M, 0.0)
        assert (p_uav, p_gt) == pytest.approx((M.cY + M.c1, M.cX), abs=1e-14)
        assert u[0] == pytest.approx(0.5)

    def test_multiplier_three_against_evaluate(self):
        p_uav, p_gt, u = single_uav_point(M, 3.0)
        assert (p_uav, p_gt) == pytest.approx((1 / 3, 7 / 3), abs=1e-14)
        assert u[0] == pytest.approx(2.0, abs=1e-15)
        est = evaluate([2.0], SelectionRule.centralized(3.0), Scenario(U01, U23),
                       EvalConfig(method="monte_carlo", sample_count=400_000, seed=1))
        assert abs(est.p_uav - 1 / 3) < 3 * est.std_error_uav
        assert abs(est.p_gt - 7 / 3) < 3 * est.std_error_gt

    def test_pgt_endpoints(self):
        assert single_uav_pgt(M, 49 / 12) == pytest.approx(1 / 12, abs=1e-12)
        assert single_uav_pgt(M, M.cY) == pytest.approx(M.cX + M.c1, abs=1e-12)
        assert single_uav_pgt(M, 13 / 12) == pytest.approx(13 / 12, abs=1e-12)

    def test_pgt_domain_error(self):
        with pytest.raises(DomainError, match=r"\[0.0833333333333"):
            single_uav_pgt(M, 0.05)
        with pytest.raises(DomainError):
            single_uav_pgt(M, 5.0)

    def test_log_sweep_consistency(self):
        pts = [single_uav_point(M, lam) for lam in np.logspace(-3, 3, 61)]
        p_uav = np.array([p[0] for p in pts])
        p_gt = np.array([p[1] for p in pts])
        assert np.all(np.diff(p_uav) < 0) and np.all(np.diff(p_gt) > 0)
        for a, b in zip(p_uav, p_gt):
            assert single_uav_pgt(M, a) == pytest.approx(b, abs=1e-9)

    def test_altitude_shift(self):
        a = single_uav_point(M, 2.0)
        b = single_uav_point(M, 2.0, h=0.5)
        assert b[0] == pytest.approx(a[0] + 0.25) and b[1] == pytest.approx(a[1] + 0.25)
        assert single_uav_pgt(M, a[0] + 0.25, h=0.5) == pytest.approx(a[1] + 0.25, abs=1e-12)


class TestAsymptotic:
    def test_centralized_balanced(self):
        assert asymptotic_tradeoff(M, 1.0, "centralized") == pytest.approx((50 / 48, 50 / 48), abs=1e-14)

    def test_centralized_zero_multiplier(self):
        assert asymptotic_tradeoff(M, 0.0, "centralized") == pytest.approx((M.c0, 0.0), abs=1e-14)

    def test_distributed_balanced(self):
        assert asymptotic_tradeoff(M, 1.0, "distributed") == pytest.approx((1 / 12 + 49 / 48, 49 / 48), abs=1e-14)

    def test_pgt_examples(self):
        assert asymptotic_pgt(M, 50 / 12, "centralized") == pytest.approx(0.0, abs=1e-14)
        assert asymptotic_pgt(M, 1 / 12, "distributed") == pytest.approx(49 / 12, abs=1e-12)
        oracle = (math.sqrt(50 / 12) - math.sqrt(50 / 48)) ** 2
        assert oracle == pytest.approx(50 / 48, abs=1e-14)
        assert asymptotic_pgt(M, 50 / 48, "centralized") == pytest.approx(oracle, abs=1e-14)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            asymptotic_pgt(M, -0.1, "centralized")
        with pytest.raises(DomainError):
            asymptotic_pgt(M, 0.05, "distributed")
        with pytest.raises(UsageError):
            asymptotic_pgt(M, 1.0, "broadcast")

    def test_centralized_dominates_distributed(self):
        for p in np.linspace(M.cY, M.cY + M.c2, 401):
            assert asymptotic_pgt(M, p, "centralized") <= asymptotic_pgt(M, p, "distributed") + 1e-12

    def test_asymptotic_strictly_below_single_relay(self):
        for p in np.linspace(M.cY, M.cY + M.c1, 50)[1:-1]:
            assert asymptotic_pgt(M, p, "centralized") < single_uav_pgt(M, p) - 1e-6

    def test_coincides_for_point_masses(self):
        # tiny boxes approximate point masses: cX, cY -> 0 and c0 -> c1
        m = moments(Density.uniform(0, 1e-9), Density.uniform(2, 2 + 1e-9))
        for p in np.linspace(0.1, 3.9, 9):
            assert asymptotic_pgt(m, p, "centralized") == pytest.approx(single_uav_pgt(m, p), abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1e4), st.sampled_from(["centralized", "distributed"]))
def test_asymptotic_point_on_curve(lam, mode):
    p_uav, p_gt = asymptotic_tradeoff(M, lam, mode)
    assert asymptotic_pgt(M, p_uav, mode) == pytest.approx(p_gt, abs=1e-9)


class TestCurve:
    @pytest.mark.parametrize("mode,single", [("centralized", False), ("distributed", False), ("centralized", True)])
    def test_monotone_and_on_formula(self, mode, single):
        curve = tradeoff_curve(M, mode, 51, single=single)
        lam, p_uav, p_gt = curve.arrays()
        assert np.all(np.diff(p_gt) <= 1e-15) and np.all(p_gt >= 0) and np.all(p_uav >= 0)
        assert p_uav[0] == curve.domain[0] and p_uav[-1] == curve.domain[-1]
        assert math.isinf(lam[0]) and lam[-1] == pytest.approx(0.0, abs=1e-12)
        for a, b, c in zip(lam[1:], p_uav[1:], p_gt[1:]):
            ref = single_uav_point(M, a)[:2] if single else asymptotic_tradeoff(M, a, mode)
            assert (b, c) == pytest.approx(ref, abs=1e-10)
        assert curve.mode == ("single_relay" if single else mode)

    def test_distributed_curve_formula(self):
        _, p_uav, p_gt = tradeoff_curve(M, "distributed", 21).arrays()
        expected = (np.sqrt(49 / 12) - np.sqrt(p_uav - 1 / 12)) ** 2
        np.testing.assert_allclose(p_gt, expected, atol=1e-12)
        assert p_uav[0] == pytest.approx(1 / 12) and p_uav[-1] == pytest.approx(50 / 12)


def triangle(z):
    return np.clip(2 - 4 * np.abs(z - 1.5), 0, None)


class TestPointDensity:
    def test_uniform_stays_uniform(self):
        ell = point_density(Density.uniform(-1, 3), resolution=256)
        np.testing.assert_allclose(ell.grid.values, 0.25, atol=1e-12)

    def test_large_multiplier_uniform_on_gr(self):
        ell = point_density(combine_z(U01, U23, 1e6, 1024))
        lo, hi = ell.grid.edges()[[0, -1]]
        assert lo == pytest.approx(2.0, abs=1e-5) and hi == pytest.approx(3.0, abs=1e-5)
        np.testing.assert_allclose(ell.grid.values[2:-2], 1.0, atol=1e-3)

    def test_triangle_cube_root(self):
        ell = point_density(combine_z(U01, U23, 1.0, 1024))
        norm = integrate.quad(lambda z: triangle(z) ** (1 / 3), 1, 2, points=[1.5])[0]
        assert norm == pytest.approx(1.5 * 2 ** (-2 / 3), abs=1e-10)
        z = ell.grid.centers()
        away = (np.abs(z - 1.5) > 0.01) & (np.abs(z - 1.5) < 0.49)
        np.testing.assert_allclose(ell.grid.values[away], triangle(z[away]) ** (1 / 3) / norm, rtol=2e-3)
        assert ell.grid.values.sum() * ell.grid.cell == pytest.approx(1.0, abs=1e-12)


class TestInverseTransform:
    def test_uniform_quantiles(self):
        U = inverse_transform_deployment(point_density(U23, resolution=1024), 4)
        np.testing.assert_allclose(U.positions[:, 0], [2.125, 2.375, 2.625, 2.875], atol=1e-12)

    def test_single_relay_is_median(self):
        f = Density.mixture([(0.25, 0, 1), (0.75, 2, 3)])
        U = inverse_transform_deployment(point_density(f, r=1e-9), 1)
        # r -> 0 keeps the point density equal to f; its median is 2 + 1/3
        assert U.positions[0, 0] == pytest.approx(2 + 1 / 3, abs=1e-6)

    def test_triangle_concentrates_near_center(self):
        ell = point_density(combine_z(U01, U23, 1.0))
        p = inverse_transform_deployment(ell, 8).positions[:, 0]
        assert np.all(np.diff(p) > 0)
        assert np.all((p > 1) & (p < 2))
        gaps = np.diff(p)
        assert gaps[3] < gaps[0] and gaps[3] < gaps[-1]
        np.testing.assert_allclose(p, 3 - p[::-1], atol=1e-9)

    def test_interval_fraction(self):
        ell = point_density(combine_z(U01, U23, 0.4))
        n = 40
        p = inverse_transform_deployment(ell, n).positions[:, 0]
        cdf, edges = ell.cdf_at_edges(), ell.grid.edges()
        for a, b in [(0.9, 1.1), (0.5, 1.5), (1.2, 1.3)]:
            mass = np.interp(b, edges, cdf) - np.interp(a, edges, cdf)
            assert abs(np.mean((p >= a) & (p <= b)) - mass) <= 1 / n + 1e-3

    def test_two_dimensional_unsupported(self):
        ell = point_density(Density.uniform([0, 0], [1, 1]), resolution=32)
        with pytest.raises(UnsupportedFeatureError):
            inverse_transform_deployment(ell, 4)

    def test_distributed_density_collapses(self):
        s = Scenario(U01, U23)
        w = optimal_density(s, 1e6, "distributed")
        ell = point_density(w, resolution=256)
        p = inverse_transform_deployment(ell, 8).positions[:, 0]
        np.testing.assert_allclose(p, 2.5, atol=1e-5)


class TestZador:
    @pytest.mark.parametrize("n", [1, 2, 8, 64])
    def test_unit_interval(self, n):
        assert zador_distortion(U01, n) == pytest.approx(1 / (12 * n * n), rel=1e-14)

    def test_wide_interval(self):
        assert zador_distortion(Density.uniform(0, 2), 4) == pytest.approx(1 / 48, rel=1e-12)

    def test_hexagon_constant(self):
        assert KAPPA[(2, 2)] == pytest.approx(5 / (18 * math.sqrt(3)))
        f = Density.uniform([0, 0], [1, 1])
        assert zador_distortion(f, 100) == pytest.approx(KAPPA[(2, 2)] / 100, rel=1e-12)

    def test_unknown_constant(self):
        with pytest.raises(UsageError):
            zador_distortion(U01, 4, r=3.0)
        assert zador_distortion(U01, 4, r=3.0, kappa=1 / 32) == pytest.approx(1 / 32 / 64)


class TestAsymptoticLagrangian:
    def test_limit(self):
        f = combine_z(U01, U23, 1.0)
        assert asymptotic_lagrangian(M, f, 1.0, 10**8) == pytest.approx(25 / 12, abs=1e-12)

    def test_zero_multiplier(self):
        assert asymptotic_lagrangian(M, U01, 0.0, 5) == pytest.approx(zador_distortion(U01, 5), abs=1e-15)

    def test_distributed_constant(self):
        w = optimal_density(Scenario(U01, U23), 1.0, "distributed")
        expected = (M.c0 + M.cY) / 2 + 2 * zador_distortion(w, 8)
        assert asymptotic_lagrangian(M, w, 1.0, 8, "distributed") == pytest.approx(expected, abs=1e-14)

    def test_against_lloyd(self):
        s = Scenario(U01, U23, n=8)
        f = combine_z(U01, U23, 1.0)
        predicted = asymptotic_lagrangian(M, f, 1.0, 8)
        res = optimize(s, 1.0, config=LloydConfig(restarts=3))
        assert res.cost == pytest.approx(predicted, rel=0.03)
