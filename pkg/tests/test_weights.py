"""重みの標本化と Muckenhoupt 定数のテスト"""

import numpy as np
import pytest

from models.function import (
    Box,
    ConstantFamily,
    IndicatorFamily,
    Piece,
    PiecewiseFamily,
    PowerFamily,
    ProductFamily,
    RandomFamily,
    SumFamily,
)
from models.lattice import CubeFamily
from models.report import StabilityVerdict
from services.exceptions import SampleError, WeightClassError
from services.lattice_service import build_grid
from services.stability_service import StabilityAssessor, over_grids, refinement_grids
from services.weight_service import (
    a1_constant,
    ainf_proxy,
    ap_constant,
    check_theorem23,
    check_theorem23_refined,
    multilinear_ap_constant,
    nu_weight,
    sample,
    sample_function,
    stable_constant_verdict,
)

CELLS = [64, 128, 256]


def _a1_series(family, cube_family=CubeFamily.ALL_CUBES):
    return [a1_constant(sample(family, grid), cube_family) for grid in refinement_grids(1, 1.0, CELLS)]


class TestSampling:

    def test_power_at_or_below_minus_n_rejected(self, line_grid):
        with pytest.raises(SampleError):
            sample(PowerFamily(exponent=-1.0), line_grid)

    def test_nonintegrable_flag_is_echoed(self, line_grid):
        w = sample(PowerFamily(exponent=-1.0, allow_nonintegrable=True), line_grid)
        assert w.nonintegrable
        assert a1_constant(w, CubeFamily.ALL_CUBES).nonintegrable

    def test_weight_must_be_positive(self, line_grid):
        with pytest.raises(SampleError):
            sample(ConstantFamily(value=0.0), line_grid)

    def test_function_may_vanish(self, line_grid):
        f = sample_function(IndicatorFamily(box=Box(lower=[0.0], upper=[0.5])), line_grid)
        assert f.values.sum() == 16.0

    def test_composite_families(self, line_grid):
        family = SumFamily(terms=[
            ConstantFamily(value=1.0),
            ProductFamily(left=ConstantFamily(value=2.0), right=IndicatorFamily(box=Box(lower=[-1.0], upper=[0.0]))),
        ])
        values = sample(family, line_grid).values
        assert set(np.unique(values).tolist()) == {1.0, 3.0}

    def test_piecewise_first_match_wins(self, line_grid):
        family = PiecewiseFamily(
            pieces=[
                Piece(box=Box(lower=[-1.0], upper=[0.5]), family=ConstantFamily(value=2.0)),
                Piece(box=Box(lower=[0.0], upper=[1.0]), family=ConstantFamily(value=5.0)),
            ],
        )
        values = sample(family, line_grid).values
        assert np.all(values[:48] == 2.0) and np.all(values[48:] == 5.0)

    def test_piecewise_uncovered_without_default(self, line_grid):
        family = PiecewiseFamily(pieces=[Piece(box=Box(lower=[0.0], upper=[1.0]), family=ConstantFamily(value=1.0))])
        with pytest.raises(SampleError):
            sample(family, line_grid)

    def test_random_family_is_seeded(self, line_grid):
        a = sample(RandomFamily(seed=3, low=0.5, high=2.0), line_grid).values
        b = sample(RandomFamily(seed=3, low=0.5, high=2.0), line_grid).values
        np.testing.assert_array_equal(a, b)


class TestMuckenhouptConstants:

    @pytest.mark.parametrize("family", [CubeFamily.ALL_CUBES, CubeFamily.SHIFTED_DYADIC])
    def test_constant_weight_constants_are_one(self, line_grid, family):
        w = sample(ConstantFamily(value=3.0), line_grid)
        assert a1_constant(w, family).constant == pytest.approx(1.0, abs=1e-12)
        assert ap_constant(w, 2.0, family).constant == pytest.approx(1.0, abs=1e-12)
        assert ainf_proxy(w, family).constant == pytest.approx(1.0, abs=1e-12)
        assert multilinear_ap_constant([w, w], [1.0, 1.0], family).constant == pytest.approx(1.0, abs=1e-12)

    def test_attaining_cube_is_in_family(self, line_grid):
        report = a1_constant(sample(PowerFamily(exponent=-0.5), line_grid), CubeFamily.ALL_CUBES)
        assert report.attaining_cube.inside(line_grid)
        assert report.attaining_cube.contains((31,)) or report.attaining_cube.contains((32,))

    def test_ap_bounded_by_a1(self, line_grid):
        w = sample(PowerFamily(exponent=-0.5), line_grid)
        a1 = a1_constant(w, CubeFamily.ALL_CUBES).constant
        for p in (1.5, 2.0, 4.0):
            ap = ap_constant(w, p, CubeFamily.ALL_CUBES).constant
            assert 1.0 - 1e-12 <= ap <= a1 * (1 + 1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_all_cubes_dominate_shifted_dyadic(self, seed):
        w = sample(RandomFamily(seed=seed, low=0.2, high=3.0), build_grid(1, 1.0, 32))
        wide = a1_constant(w, CubeFamily.ALL_CUBES).constant
        assert wide >= a1_constant(w, CubeFamily.SHIFTED_DYADIC).constant * (1 - 1e-12)
        for p in (1.5, 2.0, 4.0):
            wide = ap_constant(w, p, CubeFamily.ALL_CUBES).constant
            assert wide >= ap_constant(w, p, CubeFamily.SHIFTED_DYADIC).constant * (1 - 1e-12)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("family", [CubeFamily.ALL_CUBES, CubeFamily.SHIFTED_DYADIC])
    def test_scale_invariance(self, seed, family):
        w = sample(RandomFamily(seed=seed, low=0.2, high=3.0), build_grid(1, 1.0, 32))
        scaled = w.with_values(7.5 * w.values)
        assert a1_constant(scaled, family).constant == pytest.approx(a1_constant(w, family).constant, rel=1e-12)
        for p in (1.5, 3.0):
            assert ap_constant(scaled, p, family).constant == pytest.approx(
                ap_constant(w, p, family).constant, rel=1e-12
            )

    @pytest.mark.parametrize("seed", range(5))
    def test_ap_non_increasing_in_p(self, seed):
        w = sample(RandomFamily(seed=seed, low=0.2, high=3.0), build_grid(1, 1.0, 32))
        chain = [ap_constant(w, p, CubeFamily.ALL_CUBES).constant for p in (1.25, 1.5, 2.0, 3.0, 8.0)]
        for smaller_p, larger_p in zip(chain[:-1], chain[1:]):
            assert smaller_p >= larger_p * (1 - 1e-12)

    def test_ainf_ladder_records_every_p(self, line_grid):
        report = ainf_proxy(sample(PowerFamily(exponent=0.5), line_grid), CubeFamily.ALL_CUBES)
        assert set(report.ladder) == {"2.0", "4.0", "8.0", "16.0"}
        assert report.constant == pytest.approx(min(report.ladder.values()))

    @pytest.mark.parametrize("ladder", [[], [4.0, 2.0], [1.0, 2.0]])
    def test_invalid_ladder(self, line_grid, ladder):
        with pytest.raises(WeightClassError):
            ainf_proxy(sample(ConstantFamily(value=1.0), line_grid), CubeFamily.ALL_CUBES, ladder)

    def test_ap_requires_p_above_one(self, line_grid):
        with pytest.raises(WeightClassError):
            ap_constant(sample(ConstantFamily(value=1.0), line_grid), 1.0, CubeFamily.ALL_CUBES)

    def test_nu_weight(self, line_grid):
        u = sample(PowerFamily(exponent=-0.5), line_grid)
        one = sample(ConstantFamily(value=1.0), line_grid)
        np.testing.assert_allclose(nu_weight([one, u.power(2.0)], [1.0, 1.0]).values, u.values, rtol=1e-14)


class TestRefinement:

    def test_integrable_power_is_a1_stable(self):
        reports = _a1_series(PowerFamily(exponent=-0.5))
        np.testing.assert_allclose([r.constant for r in reports], [2.216, 2.277, 2.319], rtol=2e-3)
        assert stable_constant_verdict(reports, StabilityAssessor()) == StabilityVerdict.STABLE

    def test_inverse_distance_is_not_a1(self):
        """1/|x| の A_1 定数は倍化ごとに対数的に増え続ける"""
        reports = _a1_series(PowerFamily(exponent=-1.0, allow_nonintegrable=True))
        constants = [r.constant for r in reports]
        np.testing.assert_allclose(constants, [7.684, 8.973, 10.259], rtol=2e-3)
        assert stable_constant_verdict(reports, StabilityAssessor()) == StabilityVerdict.DIVERGENT

    def test_quadratic_power_diverges_fast(self):
        reports = _a1_series(PowerFamily(exponent=2.0))
        ratios = [b.constant / a.constant for a, b in zip(reports, reports[1:])]
        assert min(ratios) >= 1.8
        assert stable_constant_verdict(reports, StabilityAssessor()) == StabilityVerdict.DIVERGENT

    def test_pair_in_multilinear_class_despite_component(self):
        """(1, 1/|x|) は A_(1,1) に入るが、第二成分は A_1 に入らない"""
        weights = [ConstantFamily(value=1.0), PowerFamily(exponent=-1.0, allow_nonintegrable=True)]
        grids = refinement_grids(1, 1.0, CELLS)
        report = check_theorem23_refined(weights, [1.0, 1.0], CubeFamily.ALL_CUBES, grids)
        assert report.avec_p.verdict == StabilityVerdict.STABLE
        assert report.nu_class.verdict == StabilityVerdict.STABLE
        assert [c.verdict for c in report.components] == [StabilityVerdict.STABLE, StabilityVerdict.STABLE]
        assert report.verdicts_agree

        avec = [multilinear_ap_constant([sample(w, g) for w in weights], [1.0, 1.0], CubeFamily.ALL_CUBES).constant
                for g in grids]
        np.testing.assert_allclose(avec, [4.911, 5.186, 5.377], rtol=2e-3)
        assert max(avec) / min(avec) <= 1.5

    def test_characterization_single_grid(self, line_grid):
        w = sample(PowerFamily(exponent=-0.25), line_grid)
        report = check_theorem23([w, w], [2.0, 2.0], CubeFamily.ALL_CUBES)
        assert report.nu_class.weight_class == "Ap"
        assert len(report.components) == 2
        assert report.verdicts_agree is None

    def test_ainf_stable_if_any_ladder_rung_is(self):
        grids = refinement_grids(1, 1.0, CELLS)
        reports = [ainf_proxy(sample(PowerFamily(exponent=1.5), g), CubeFamily.ALL_CUBES) for g in grids]
        assert stable_constant_verdict(reports, StabilityAssessor()) == StabilityVerdict.STABLE


class TestStabilityAssessor:

    @pytest.mark.parametrize("constants, verdict", [
        ([1.0, 1.0], StabilityVerdict.UNASSESSED),
        ([1.0, 1.1, 1.15], StabilityVerdict.STABLE),
        ([1.0, 2.0, 4.0], StabilityVerdict.DIVERGENT),
        ([1.0, 1.3, 1.6], StabilityVerdict.DIVERGENT),
        ([1.0, 1.6, 1.7], StabilityVerdict.INCONCLUSIVE),
        ([0.0, 0.0, 0.0], StabilityVerdict.STABLE),
    ])
    def test_classify(self, constants, verdict):
        assert StabilityAssessor().classify(constants) == verdict

    def test_spread_rule(self):
        assessor = StabilityAssessor()
        assert assessor.classify_spread([1.0, 1.2, 1.45]) == StabilityVerdict.STABLE
        assert assessor.classify_spread([1.0, 1.3, 1.6]) == StabilityVerdict.DIVERGENT

    def test_thresholds_can_be_overridden(self):
        assert StabilityAssessor({"stable_ratio": 1.05}).classify([1.0, 1.1, 1.15]) == StabilityVerdict.INCONCLUSIVE

    def test_series_ratios(self):
        series = StabilityAssessor().series("x", [4, 8, 16], [2.0, 3.0, 3.0])
        assert series.ratios == [1.5, 1.0]

    def test_over_grids_keeps_refinement_order(self):
        grids = refinement_grids(1, 1.0, [32, 8, 16])
        assert over_grids(grids, lambda grid: grid.cells_per_axis) == [8, 16, 32]
