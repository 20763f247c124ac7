"""Weighted space-time norms with singular-cell quadrature, and the A2 estimator."""

import numpy as np
import pytest
from scipy.integrate import nquad

from morawetz_lab import (
    Cube,
    DomainError,
    GridSpec,
    QuadratureConfig,
    WeightSpec,
    a2_product,
    a2_scan,
    weighted_spacetime_norm,
)
from morawetz_lab.weights import (
    LOG_SPATIAL,
    SPACETIME_POWER,
    SPATIAL_POWER,
    a2_scan_max,
    default_cube_family,
    singular_cell_report,
)


def static_gaussian_sampler(grid, width=1.0, center=None):
    if center is None:
        x2 = grid.x_norm() ** 2
    else:
        x2 = sum((grid.x_grids()[i] - center[i]) ** 2 for i in range(grid.dim))
    profile = np.exp(-x2 / (2 * width**2)).astype(complex)
    return lambda t: profile


class TestWeightSpec:
    def test_kind_validation(self):
        with pytest.raises(DomainError):
            WeightSpec("powerlaw", 1.0)
        with pytest.raises(DomainError):
            WeightSpec(SPATIAL_POWER, -0.5)
        with pytest.raises(DomainError):
            WeightSpec(LOG_SPATIAL, epsilon=0.0)

    def test_admissible_range_per_grid(self):
        g = GridSpec(2, 16, 1.0)
        WeightSpec(SPATIAL_POWER, 2.0).validate_for(g)  # boundary allowed
        WeightSpec(SPACETIME_POWER, 3.0).validate_for(g)
        with pytest.raises(DomainError):
            WeightSpec(SPATIAL_POWER, 2.1).validate_for(g)
        with pytest.raises(DomainError):
            WeightSpec(SPACETIME_POWER, 3.1).validate_for(g)

    def test_boundary_flag(self):
        g = GridSpec(2, 16, 1.0)
        assert WeightSpec(SPATIAL_POWER, 2.0).is_boundary(g)
        assert not WeightSpec(SPATIAL_POWER, 1.5).is_boundary(g)


class TestWeightedNorm:
    def test_alpha_zero_is_plain_l2(self):
        g = GridSpec(2, 32, 6.0, time_samples=9, time_horizon=2.0)
        sampler = static_gaussian_sampler(g)
        val = weighted_spacetime_norm(sampler, WeightSpec(SPATIAL_POWER, 0.0), g)
        profile = sampler(0.0)
        closed = np.sqrt(2 * g.time_horizon * g.dx**2 * np.sum(np.abs(profile) ** 2))
        assert val == pytest.approx(closed, rel=1e-10)

    def test_zero_field(self):
        g = GridSpec(2, 16, 2.0, time_samples=5)
        zero = np.zeros(g.shape, dtype=complex)
        for spec in (WeightSpec(SPATIAL_POWER, 1.0), WeightSpec(SPACETIME_POWER, 1.5)):
            assert weighted_spacetime_norm(lambda t: zero, spec, g) == 0.0

    def test_smoothed_indicator_against_refined_grid_oracle(self):
        # static smoothed box indicator; the double-resolution grid is the oracle
        def norm_at(N):
            g = GridSpec(2, N, 4.0, time_samples=5, time_horizon=1.0)
            X = g.x_grids()
            smooth = 1.0
            for i in range(2):
                smooth = smooth * 0.5 * (np.tanh(2 * (X[i] + 1)) - np.tanh(2 * (X[i] - 1)))
            sampler = lambda t: smooth.astype(complex)
            return weighted_spacetime_norm(sampler, WeightSpec(SPATIAL_POWER, 1.0), g)

        coarse, oracle = norm_at(256), norm_at(512)
        assert abs(coarse - oracle) / oracle < 1e-4

    @pytest.mark.parametrize("kind,alpha", [(SPATIAL_POWER, 1.5), (SPACETIME_POWER, 2.0)])
    @pytest.mark.parametrize("lam", [0.5, 2.0])
    def test_substitution_law_on_nested_grids(self, kind, alpha, lam):
        # v(x,t) = u(lam x, lam t) on the (L, T) grid matches u on the
        # (lam L, lam T) grid: norm(v) = lam^{(alpha - n - 1)/2} norm(u)
        n, N, L, T, M, width = 2, 64, 8.0, 2.0, 17, 1.0
        g1 = GridSpec(n, N, L, M, T)
        v = np.exp(-((lam * g1.x_norm()) ** 2) / (2 * width**2)).astype(complex)
        norm_v = weighted_spacetime_norm(lambda t: v, WeightSpec(kind, alpha), g1)
        g2 = GridSpec(n, N, lam * L, M, lam * T)
        u = np.exp(-(g2.x_norm() ** 2) / (2 * width**2)).astype(complex)
        norm_u = weighted_spacetime_norm(lambda t: u, WeightSpec(kind, alpha), g2)
        assert norm_v == pytest.approx(lam ** ((alpha - n - 1) / 2.0) * norm_u, rel=0.01)

    def test_refinement_doubling_stability(self):
        g = GridSpec(2, 32, 4.0, time_samples=9, time_horizon=1.0)
        sampler = static_gaussian_sampler(g, width=0.8)
        tol = 1e-9
        vals = {}
        for refinement in (8, 16):
            quad = QuadratureConfig(singular_cell_refinement=refinement, tolerance=tol)
            vals[refinement] = weighted_spacetime_norm(
                sampler, WeightSpec(SPATIAL_POWER, 1.5), g, quad
            )
        assert abs(vals[16] - vals[8]) < 2 * tol * vals[16]

    def test_boundary_alpha_is_depth_capped(self):
        g = GridSpec(2, 32, 4.0, time_samples=9, time_horizon=1.0)
        report = singular_cell_report(WeightSpec(SPATIAL_POWER, 2.0), g)
        assert report["truncated"] is True
        interior = singular_cell_report(WeightSpec(SPATIAL_POWER, 1.5), g)
        assert interior["truncated"] is False

    def test_log_weight_finite_and_positive(self):
        g = GridSpec(2, 32, 4.0, time_samples=9, time_horizon=1.0)
        sampler = static_gaussian_sampler(g)
        val = weighted_spacetime_norm(sampler, WeightSpec(LOG_SPATIAL, epsilon=0.25), g)
        assert np.isfinite(val) and val > 0

    def test_inadmissible_alpha_rejected(self):
        g = GridSpec(2, 16, 2.0, time_samples=3)
        sampler = static_gaussian_sampler(g)
        with pytest.raises(DomainError):
            weighted_spacetime_norm(sampler, WeightSpec(SPATIAL_POWER, 2.5), g)


class TestA2Product:
    def test_alpha_zero_is_exactly_one(self):
        for d in (2, 3, 4):
            cube = Cube((0.0,) * d, 1.7)
            assert a2_product(0.0, d, cube) == 1.0

    def test_scale_invariance_origin_cubes(self):
        for side in (0.25, 1.0, 4.0):
            val = a2_product(1.5, 3, Cube((0.0, 0.0, 0.0), side))
            ref = a2_product(1.5, 3, Cube((0.0, 0.0, 0.0), 1.0))
            assert val == pytest.approx(ref, rel=1e-6)

    def test_against_dual_method_oracle(self):
        # deterministic oracle: scipy nquad with a singular-point marker;
        # stochastic cross-check: plain Monte Carlo
        alpha, d = 1.5, 3
        val = a2_product(alpha, d, Cube((0.0, 0.0, 0.0), 1.0))

        def w(z0, z1, z2, e):
            return (z0 * z0 + z1 * z1 + z2 * z2) ** (e / 2.0)

        opts = [{"points": [0.0]}] * 3
        neg, err_n = nquad(lambda a, b, c: w(a, b, c, -alpha),
                           [(-0.5, 0.5)] * 3, opts=opts)
        pos, err_p = nquad(lambda a, b, c: w(a, b, c, alpha),
                           [(-0.5, 0.5)] * 3, opts=opts)
        oracle = neg * pos
        assert err_n < 1e-4 and err_p < 1e-6  # nquad's own (conservative) estimates
        assert val == pytest.approx(oracle, rel=1e-3)

        rng = np.random.default_rng(4)
        z = rng.uniform(-0.5, 0.5, size=(400000, 3))
        r = np.linalg.norm(z, axis=1)
        mc = np.mean(r**-alpha) * np.mean(r**alpha)
        assert val == pytest.approx(mc, rel=2e-2)

    def test_at_least_one(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            d = int(rng.integers(2, 5))
            alpha = float(rng.uniform(0.1, d - 0.2))
            center = tuple(rng.uniform(-1, 1, d))
            assert a2_product(alpha, d, Cube(center, float(rng.uniform(0.5, 2)))) >= 1.0 - 1e-9

    def test_inadmissible_alpha(self):
        with pytest.raises(DomainError):
            a2_product(3.0, 3, Cube((0.0, 0.0, 0.0), 1.0))
        with pytest.raises(DomainError):
            a2_product(-3.5, 3, Cube((0.0, 0.0, 0.0), 1.0))

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            a2_product(1.0, 3, Cube((0.0, 0.0), 1.0))


class TestA2Scan:
    def test_alpha_zero_row_all_ones(self):
        rows = [r for r in a2_scan([0.0], 3) if r.alpha == 0.0]
        assert rows and all(r.product == 1.0 for r in rows)

    def test_monotone_in_alpha_origin_cubes(self):
        alphas = [0.0, 1.5, 2.7]
        vals = [a2_product(a, 3, Cube((0.0, 0.0, 0.0), 1.0)) for a in alphas]
        assert vals[0] < vals[1] < vals[2]

    def test_far_offset_cubes_tend_to_one(self):
        fam = default_cube_family(3)
        rows = a2_scan([1.5], 3, fam)
        by_label = {r.label: r.product for r in rows}
        assert by_label["offset-4.0"] < by_label["offset-2.0"] < by_label["origin"]
        assert by_label["offset-4.0"] == pytest.approx(1.0, abs=5e-2)

    def test_scan_max(self):
        rows = a2_scan([0.0, 1.5], 3)
        sup = a2_scan_max(rows)
        assert sup[0.0] == 1.0
        assert sup[1.5] > 1.0


def test_spacetime_norm_even_time_samples():
    # with no t = 0 node there is no singular node; all weights stay finite
    # and the cell treatment is skipped
    g_even = GridSpec(2, 32, 6.0, time_samples=8, time_horizon=1.0)
    g_odd = GridSpec(2, 32, 6.0, time_samples=9, time_horizon=1.0)
    profile = np.exp(-(g_even.x_norm() ** 2)).astype(complex)
    spec = WeightSpec(SPACETIME_POWER, 2.0)
    v_even = weighted_spacetime_norm(lambda t: profile, spec, g_even)
    v_odd = weighted_spacetime_norm(lambda t: profile, spec, g_odd)
    assert np.isfinite(v_even) and v_even > 0
    assert v_even == pytest.approx(v_odd, rel=0.2)  # same quantity, coarser rule
