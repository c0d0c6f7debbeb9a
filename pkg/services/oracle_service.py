"""
高速経路とオラクル（素朴な直接計算）の一致検査
累積和テーブル・最大作用素・弱ノルムをランダム入力で比較する
"""
import logging
from typing import List

import numpy as np

from models.function import SampledFunction
from models.lattice import CubeFamily
from models.operator import OperatorSpec
from models.report import OracleCheck
from models.run_config import OracleSettings
from services.lattice_service import PrefixTable, build_grid, family_cubes, naive_cube_min, naive_cube_sum
from services.norm_service import WeightedMeasure, weak_norm, weak_norm_scan
from services.operator_service import maximal, maximal_oracle

logger = logging.getLogger(__name__)

NORM_EXPONENTS = (1.0 / 3.0, 0.5, 1.0, 2.0)


def _relative(fast: np.ndarray, slow: np.ndarray) -> float:
    fast = np.asarray(fast, dtype=np.float64)
    slow = np.asarray(slow, dtype=np.float64)
    scale = np.maximum(np.abs(slow), np.finfo(np.float64).tiny)
    return float(np.max(np.abs(fast - slow) / scale)) if slow.size else 0.0


def _family_for(dim: int, family: CubeFamily) -> CubeFamily:
    """n = 2 のオラクルは ShiftedDyadic のみ"""
    return CubeFamily.SHIFTED_DYADIC if dim == 2 else family


class OracleService:
    """oracle-check の三つの検査（lattice / operators / norms）"""

    def __init__(self, settings: OracleSettings, family: CubeFamily, half_width: float = 1.0):
        self.settings = settings
        self.family = family
        self.half_width = half_width

    def _check(self, suite: str, case: str, discrepancy: float) -> OracleCheck:
        passed = discrepancy <= self.settings.tolerance
        if not passed:
            logger.warning(f"{suite} {case}: 食い違い {discrepancy:.3e} が許容値 {self.settings.tolerance:.1e} を超えました")
        return OracleCheck(
            suite=suite, case=case, max_discrepancy=discrepancy, tolerance=self.settings.tolerance, passed=passed
        )

    def run(self) -> List[OracleCheck]:
        checks: List[OracleCheck] = []
        for m, dim, cells in self.settings.cases:
            checks.extend(self.check_lattice(dim, cells))
            checks.append(self.check_operator(m, dim, cells))
            checks.append(self.check_norms(dim, cells))
        return checks

    def check_lattice(self, dim: int, cells: int) -> List[OracleCheck]:
        """cube_sum / cube_min を全立方体で素朴な走査と比較"""
        grid = build_grid(dim, self.half_width, cells)
        family = _family_for(dim, self.family)
        cubes = family_cubes(grid, family)
        sum_error, min_error = 0.0, 0.0
        for seed in range(self.settings.seeds):
            values = np.random.default_rng(seed).uniform(0.0, 1.0, grid.shape)
            table = PrefixTable.from_array(grid, values)
            if self.settings.inject_fault:
                table = table.corrupted()
            naive_sums = [naive_cube_sum(values, cube) for cube in cubes.cubes()]
            naive_mins = [naive_cube_min(values, cube) for cube in cubes.cubes()]
            sum_error = max(sum_error, _relative(table.cube_sums(cubes), naive_sums))
            min_error = max(min_error, _relative(table.cube_mins(cubes), naive_mins))
        case = f"n={dim},N={cells},family={family.value}"
        return [self._check("lattice", f"cube_sum {case}", sum_error), self._check("lattice", f"cube_min {case}", min_error)]

    def check_operator(self, m: int, dim: int, cells: int) -> OracleCheck:
        """maximal と maximal_oracle をセルごとに比較（α は 0 から mn/2 の範囲で乱択）"""
        grid = build_grid(dim, self.half_width, cells)
        family = _family_for(dim, self.family)
        error = 0.0
        for seed in range(self.settings.seeds):
            rng = np.random.default_rng(seed)
            alpha = float(rng.uniform(0.0, 0.5 * m * dim))
            fs = [SampledFunction(grid=grid, values=rng.uniform(0.0, 1.0, grid.shape)) for _ in range(m)]
            spec = OperatorSpec(m=m, alpha=alpha, family=family)
            error = max(error, _relative(maximal(fs, spec).values, maximal_oracle(fs, spec).values))
        return self._check("operators", f"m={m},n={dim},N={cells},family={family.value}", error)

    def check_norms(self, dim: int, cells: int) -> OracleCheck:
        """weak_norm としきい値走査を比較"""
        grid = build_grid(dim, self.half_width, cells)
        error = 0.0
        for seed in range(self.settings.seeds):
            rng = np.random.default_rng(seed)
            values = rng.uniform(0.0, 1.0, grid.shape)
            measure = WeightedMeasure(grid, rng.uniform(0.5, 2.0, grid.shape))
            q = NORM_EXPONENTS[seed % len(NORM_EXPONENTS)]
            error = max(error, _relative(weak_norm(values, measure, q).value, weak_norm_scan(values, measure, q)))
        return self._check("norms", f"n={dim},N={cells}", error)
