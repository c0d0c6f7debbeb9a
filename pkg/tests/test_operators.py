"""多重分数最大作用素・多重分数積分のテスト"""

import math

import numpy as np
import pytest

from models.function import Box, ConstantFamily, IndicatorFamily, SampledFunction
from models.lattice import CubeFamily
from models.operator import OperatorSpec
from services.exceptions import GuardError, OperatorSpecError
from services.lattice_service import build_grid
from services.operator_service import (
    TARGET_OFFSET,
    check_integral_guard,
    fractional_integral,
    fractional_maximal_linear,
    integral_work_log2,
    kernel,
    maximal,
    maximal_oracle,
    multilinear_maximal,
    product_of_maximals,
    q_exponent,
)
from services.weight_service import sample_function


def _unit_indicator(grid):
    return sample_function(IndicatorFamily(box=Box(lower=[0.0], upper=[1.0])), grid)


def _half_integral_exact(x):
    """∫_0^1 |x - y|^{-1/2} dy"""
    if x < 0:
        return 2.0 * (math.sqrt(1.0 - x) - math.sqrt(-x))
    return 2.0 * (math.sqrt(x) + math.sqrt(1.0 - x))


class TestMaximal:

    @pytest.mark.parametrize("m, alpha, family", [
        (1, 0.0, CubeFamily.ALL_CUBES),
        (1, 0.5, CubeFamily.ALL_CUBES),
        (2, 1.0, CubeFamily.ALL_CUBES),
        (3, 2.5, CubeFamily.ALL_CUBES),
        (2, 0.5, CubeFamily.SHIFTED_DYADIC),
    ])
    def test_fast_path_matches_oracle_on_line(self, random_function, m, alpha, family):
        grid = build_grid(1, 1.0, 32)
        fs = [random_function(grid) for _ in range(m)]
        spec = OperatorSpec(m=m, alpha=alpha, family=family)
        np.testing.assert_allclose(maximal(fs, spec).values, maximal_oracle(fs, spec).values, rtol=1e-10)

    @pytest.mark.parametrize("m, alpha", [(1, 0.0), (2, 2.0), (2, 3.5)])
    def test_fast_path_matches_oracle_in_plane(self, random_function, plane_grid, m, alpha):
        fs = [random_function(plane_grid) for _ in range(m)]
        spec = OperatorSpec(m=m, alpha=alpha, family=CubeFamily.SHIFTED_DYADIC)
        np.testing.assert_allclose(maximal(fs, spec).values, maximal_oracle(fs, spec).values, rtol=1e-10)

    def test_alpha_zero_is_multilinear_maximal(self, random_function, line_grid):
        fs = [random_function(line_grid), random_function(line_grid)]
        spec = OperatorSpec(m=2, alpha=0.0, family=CubeFamily.SHIFTED_DYADIC)
        np.testing.assert_allclose(
            maximal(fs, spec).values,
            multilinear_maximal(fs, CubeFamily.SHIFTED_DYADIC).values,
            rtol=1e-14,
        )

    def test_bounded_by_product_of_maximals(self, random_function, line_grid):
        fs = [random_function(line_grid) for _ in range(3)]
        lhs = multilinear_maximal(fs, CubeFamily.ALL_CUBES).values
        rhs = product_of_maximals(fs, CubeFamily.ALL_CUBES).values
        assert np.all(lhs <= rhs * (1 + 1e-12))

    def test_dominates_function(self, random_function, line_grid):
        f = random_function(line_grid)
        out = maximal([f], OperatorSpec(m=1, alpha=0.0))
        assert np.all(out.values >= f.values * (1 - 1e-12))

    def test_linear_fractional_maximal(self, random_function, line_grid):
        f = random_function(line_grid)
        spec = OperatorSpec(m=1, alpha=0.5, family=CubeFamily.ALL_CUBES)
        np.testing.assert_allclose(
            fractional_maximal_linear(f, 0.5, CubeFamily.ALL_CUBES).values,
            maximal([f], spec).values,
            rtol=1e-12,
        )

    def test_constant_input(self, line_grid):
        one = sample_function(ConstantFamily(value=2.0), line_grid)
        out = maximal([one, one], OperatorSpec(m=2, alpha=0.0))
        np.testing.assert_allclose(out.values, 4.0, rtol=1e-14)

    @pytest.mark.parametrize("m, alpha", [(1, 1.0), (2, 2.0), (1, -0.1)])
    def test_alpha_out_of_range(self, random_function, line_grid, m, alpha):
        fs = [random_function(line_grid) for _ in range(m)]
        with pytest.raises((OperatorSpecError, ValueError)):
            maximal(fs, OperatorSpec(m=m, alpha=alpha))

    def test_function_count_must_match(self, random_function, line_grid):
        with pytest.raises(OperatorSpecError):
            maximal([random_function(line_grid)], OperatorSpec(m=2, alpha=0.0))

    def test_mismatched_grids(self, random_function):
        f = random_function(build_grid(1, 1.0, 16))
        g = random_function(build_grid(1, 1.0, 32))
        with pytest.raises(OperatorSpecError):
            multilinear_maximal([f, g], CubeFamily.ALL_CUBES)

    def test_oracle_size_limit(self, random_function):
        f = random_function(build_grid(1, 1.0, 512))
        with pytest.raises(GuardError):
            maximal_oracle([f], OperatorSpec(m=1, alpha=0.0))

    def test_q_exponent(self):
        assert q_exponent(2, 1, 1.0) == 1.0
        assert q_exponent(1, 1, 0.0) == 1.0
        assert OperatorSpec(m=2, alpha=0.0).q(2) == 0.5


class TestKernel:

    def test_single_source(self):
        assert kernel([0.0], [[1.0]], 0.5, 1, 1) == 1.0

    def test_sum_of_distances(self):
        assert kernel([0.0], [[1.0], [2.0]], 1.0, 2, 1) == pytest.approx(1.0 / 3.0)

    def test_plane_distance(self):
        assert kernel([0.0, 0.0], [[3.0, 4.0]], 1.0, 1, 2) == pytest.approx(1.0 / 5.0)

    def test_singular_point(self):
        with pytest.raises(OperatorSpecError):
            kernel([0.5], [[0.5], [0.5]], 1.0, 2, 1)


class TestFractionalIntegral:

    def test_work_guard(self):
        grid = build_grid(1, 1.0, 512)
        assert integral_work_log2(grid, 2) == 27.0
        with pytest.raises(GuardError) as excinfo:
            check_integral_guard(grid, 2)
        assert excinfo.value.work_log2 == 27.0
        check_integral_guard(grid, 2, override_guards=True)
        check_integral_guard(build_grid(1, 1.0, 256), 2)

    def test_requires_positive_alpha(self, random_function, line_grid):
        with pytest.raises(OperatorSpecError):
            fractional_integral([random_function(line_grid)], 0.0)

    def test_targets_are_offset(self, random_function, line_grid):
        out = fractional_integral([random_function(line_grid)], 0.5)
        assert out.offset == TARGET_OFFSET

    def test_zero_function(self, line_grid):
        zero = SampledFunction(grid=line_grid, values=np.zeros(line_grid.shape))
        out = fractional_integral([zero, sample_function(ConstantFamily(value=1.0), line_grid)], 1.0)
        assert out.is_zero()

    def test_exterior_point_converges(self):
        errors = []
        for cells in (64, 128, 256):
            grid = build_grid(1, 1.0, cells)
            k = cells // 4
            x = grid.axis_centers(TARGET_OFFSET)[k]
            value = fractional_integral([_unit_indicator(grid)], 0.5).values[k]
            errors.append(abs(value - _half_integral_exact(x)) / _half_integral_exact(x))
        assert errors[0] > errors[1] > errors[2]
        assert max(errors) < 0.02

    def test_interior_point_converges_at_half_order(self):
        """特異点を含む点では誤差が h^{1/2} で減る"""
        errors = []
        for cells in (64, 128, 256):
            grid = build_grid(1, 1.0, cells)
            k = 3 * cells // 4
            x = grid.axis_centers(TARGET_OFFSET)[k]
            value = fractional_integral([_unit_indicator(grid)], 0.5).values[k]
            errors.append(abs(value - _half_integral_exact(x)) / _half_integral_exact(x))
        assert errors[0] > errors[1] > errors[2]
        for coarse, fine in zip(errors, errors[1:]):
            assert 0.6 <= fine / coarse <= 0.8
        assert errors[-1] < 0.03

    def test_edge_of_support_converges_at_half_order(self):
        """x = h/4 は台の端 0 から 1/4 セル、最寄りの源セルが近く誤差は h^{1/2} で減る"""
        errors = []
        for cells in (64, 128, 256):
            grid = build_grid(1, 1.0, cells)
            k = cells // 2
            x = grid.axis_centers(TARGET_OFFSET)[k]
            assert x == pytest.approx(grid.cell_side / 4)
            value = fractional_integral([_unit_indicator(grid)], 0.5).values[k]
            errors.append(abs(value - _half_integral_exact(x)) / _half_integral_exact(x))
        assert errors[0] > errors[1] > errors[2]
        for coarse, fine in zip(errors, errors[1:]):
            assert 0.6 <= fine / coarse <= 0.8
        assert errors[0] < 0.08
        assert errors[-1] < 0.04

    def test_bilinear_constant_near_origin(self):
        """∫∫_{[-1,1]^2} (|y_1| + |y_2|)^{-1} = 8 log 2"""
        exact = 8.0 * math.log(2.0)
        errors = []
        for cells in (64, 128, 256):
            grid = build_grid(1, 1.0, cells)
            one = sample_function(ConstantFamily(value=1.0), grid)
            k = cells // 2 - 1
            assert grid.axis_centers(TARGET_OFFSET)[k] == pytest.approx(-grid.cell_side / 4)
            errors.append(abs(fractional_integral([one, one], 1.0).values[k] - exact) / exact)
        assert errors[0] > errors[1] > errors[2]
        assert errors[-1] < 0.002


class TestOrderProperties:
    """単調性・斉次性・正値性（乱数データで確かめる）"""

    @pytest.fixture
    def grid(self):
        return build_grid(1, 1.0, 32)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("m, alpha", [(1, 0.0), (1, 0.5), (2, 1.0)])
    def test_maximal_is_monotone(self, grid, seed, m, alpha):
        rng = np.random.default_rng(seed)
        small = [SampledFunction(grid=grid, values=rng.uniform(0.0, 1.0, grid.shape)) for _ in range(m)]
        large = [f.with_values(f.values + rng.uniform(0.0, 0.5, grid.shape)) for f in small]
        spec = OperatorSpec(m=m, alpha=alpha, family=CubeFamily.ALL_CUBES)
        assert np.all(maximal(small, spec).values <= maximal(large, spec).values * (1 + 1e-12))

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("family", [CubeFamily.ALL_CUBES, CubeFamily.SHIFTED_DYADIC])
    def test_maximal_is_homogeneous_in_each_slot(self, grid, seed, family):
        rng = np.random.default_rng(seed)
        fs = [SampledFunction(grid=grid, values=rng.uniform(0.0, 1.0, grid.shape)) for _ in range(2)]
        spec = OperatorSpec(m=2, alpha=1.0, family=family)
        base = maximal(fs, spec).values
        scaled = maximal([fs[0].with_values(2.5 * fs[0].values), fs[1]], spec).values
        np.testing.assert_allclose(scaled, 2.5 * base, rtol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("m, alpha", [(1, 0.5), (2, 1.0)])
    def test_integral_is_monotone_and_homogeneous(self, grid, seed, m, alpha):
        rng = np.random.default_rng(seed)
        small = [SampledFunction(grid=grid, values=rng.uniform(0.0, 1.0, grid.shape)) for _ in range(m)]
        large = [f.with_values(f.values + rng.uniform(0.0, 0.5, grid.shape)) for f in small]
        base = fractional_integral(small, alpha).values
        assert np.all(base <= fractional_integral(large, alpha).values * (1 + 1e-12))
        scaled = fractional_integral([small[0].with_values(3.0 * small[0].values)] + small[1:], alpha).values
        np.testing.assert_allclose(scaled, 3.0 * base, rtol=1e-12)

    @pytest.mark.parametrize("m, alpha", [(1, 0.5), (2, 1.0), (3, 2.0)])
    def test_integral_positive_everywhere(self, grid, m, alpha):
        """各 f_i が正の質量を持てば、台から離れた点でも I_α > 0"""
        narrow = sample_function(IndicatorFamily(box=Box(lower=[0.5], upper=[0.625])), grid)
        fs = [narrow] + [sample_function(ConstantFamily(value=1.0), grid) for _ in range(m - 1)]
        assert np.all(fractional_integral(fs, alpha).values > 0)
