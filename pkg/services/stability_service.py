"""
細分化安定性の判定
N→2N→4N に沿った定数列から stable / divergent / inconclusive を判定する
"""
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, TypeVar

from config.settings import Config
from models.lattice import Grid
from models.report import RefinementSeries, StabilityVerdict
from services.lattice_service import build_grid

logger = logging.getLogger(__name__)

T = TypeVar("T")


class StabilityAssessor:
    """定数列の安定性判定（しきい値は Config から、上書き可能）"""

    def __init__(self, thresholds: Optional[Dict[str, float]] = None):
        values = Config.get_stability_thresholds()
        values.update(thresholds or {})
        self.stable_ratio = values["stable_ratio"]
        self.divergent_ratio = values["divergent_ratio"]
        self.log_growth_ratio = values["log_growth_ratio"]
        self.min_relative_growth = values["min_relative_growth"]

    def classify(self, constants: Sequence[float]) -> StabilityVerdict:
        """
        直近 3 点（2 回の倍化）で判定

        divergent: 比が2回続けて divergent_ratio 以上、または増分が縮まない（対数的増大）
        stable: 比が2回続けて stable_ratio 以下で、divergent でない
        """
        if len(constants) < 3:
            return StabilityVerdict.UNASSESSED
        c1, c2, c3 = (float(c) for c in constants[-3:])
        if not all(math.isfinite(c) for c in (c1, c2, c3)):
            return StabilityVerdict.DIVERGENT
        if c1 <= 0 or c2 <= 0:
            # 0 の列（退化）は動かないので安定とみなす
            return StabilityVerdict.STABLE if c1 == c2 == c3 == 0 else StabilityVerdict.INCONCLUSIVE
        r1, r2 = c2 / c1, c3 / c2
        d1, d2 = c2 - c1, c3 - c2
        if r1 >= self.divergent_ratio and r2 >= self.divergent_ratio:
            return StabilityVerdict.DIVERGENT
        if d1 > self.min_relative_growth * c1 and d2 >= self.log_growth_ratio * d1:
            return StabilityVerdict.DIVERGENT
        if r1 <= self.stable_ratio and r2 <= self.stable_ratio:
            return StabilityVerdict.STABLE
        return StabilityVerdict.INCONCLUSIVE

    def classify_spread(self, constants: Sequence[float]) -> StabilityVerdict:
        """
        経験定数の判定: 列全体の max/min が stable_ratio 以下なら stable

        仮定側の判定（classify）より厳しく、N 全体のばらつきを見る
        """
        if len(constants) < 3:
            return StabilityVerdict.UNASSESSED
        values = [float(c) for c in constants]
        if not all(math.isfinite(c) for c in values):
            return StabilityVerdict.DIVERGENT
        low, high = min(values), max(values)
        if high == 0:
            return StabilityVerdict.STABLE
        if low > 0 and high / low <= self.stable_ratio:
            return StabilityVerdict.STABLE
        if self.classify(values) == StabilityVerdict.DIVERGENT:
            return StabilityVerdict.DIVERGENT
        return StabilityVerdict.INCONCLUSIVE

    def series(
        self,
        label: str,
        cells_per_axis: Sequence[int],
        constants: Sequence[float],
        spread: bool = False,
    ) -> RefinementSeries:
        constants = [float(c) for c in constants]
        ratios = [
            (b / a) if a > 0 else (1.0 if b == a else math.inf)
            for a, b in zip(constants[:-1], constants[1:])
        ]
        verdict = self.classify_spread(constants) if spread else self.classify(constants)
        logger.debug(f"{label}: N={list(cells_per_axis)} 定数={constants} 判定={verdict.value}")
        return RefinementSeries(
            label=label,
            cells_per_axis=list(cells_per_axis),
            constants=constants,
            ratios=ratios,
            verdict=verdict,
        )


def refinement_grids(dim: int, half_width: float, cells_per_axis: Sequence[int]) -> List[Grid]:
    """細分化列の格子を昇順で生成"""
    return [build_grid(dim, half_width, n) for n in sorted(cells_per_axis)]


def over_grids(grids: Sequence[Grid], compute: Callable[[Grid], T]) -> List[T]:
    """各格子で計算を実行（格子ごとに独立）"""
    return [compute(grid) for grid in grids]
