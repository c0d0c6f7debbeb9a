"""
分布関数・弱 Lorentz 準ノルム L^{q,∞}(μ)・重み付き L^p ノルム
区分定数データ上で sup を厳密に計算する
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from models.function import SampledFunction, Weight
from models.lattice import Grid
from models.report import WeakNormResult
from services.exceptions import NormError

logger = logging.getLogger(__name__)


class WeightedMeasure:
    """セルごとの重み付き測度 μ(cell) = density(cell)·セル体積"""

    def __init__(self, grid: Grid, density: np.ndarray):
        density = np.asarray(density, dtype=np.float64)
        if density.shape != grid.shape:
            raise NormError(f"密度の形状 {density.shape} が格子 {grid.shape} と一致しません")
        if not np.all(np.isfinite(density)) or np.any(density <= 0):
            raise NormError("測度の密度は各セルで正の有限値でなければなりません")
        self.grid = grid
        self.density = density
        self.cell_masses = density * grid.cell_measure

    @classmethod
    def lebesgue(cls, grid: Grid) -> "WeightedMeasure":
        return cls(grid, np.ones(grid.shape))

    @classmethod
    def from_weights(cls, weights: Sequence[Weight], powers: Optional[Sequence[float]] = None) -> "WeightedMeasure":
        """Π_j w_j^{t_j} をセルごとに計算した測度（例: ν v^q = Π u_i^q · v^q）"""
        if not weights:
            raise NormError("重みが一つもありません")
        powers = [1.0] * len(weights) if powers is None else list(powers)
        density = np.ones(weights[0].grid.shape)
        for w, t in zip(weights, powers):
            if w.grid != weights[0].grid:
                raise NormError("重みの格子が一致しません")
            density = density * w.values ** t
        return cls(weights[0].grid, density)

    def total(self) -> float:
        return math.fsum(self.cell_masses.ravel().tolist())


def _values(f: Union[SampledFunction, np.ndarray]) -> np.ndarray:
    return f.values if isinstance(f, SampledFunction) else np.asarray(f, dtype=np.float64)


def distribution(f: Union[SampledFunction, np.ndarray], mu: WeightedMeasure, t: float) -> float:
    """μ{f > t}（厳密な不等号）"""
    if t < 0:
        raise NormError(f"しきい値は非負でなければなりません: t={t}")
    values = _values(f)
    return math.fsum(mu.cell_masses[values > t].tolist())


def level_ladder(f: Union[SampledFunction, np.ndarray], mu: WeightedMeasure) -> Tuple[np.ndarray, np.ndarray]:
    """
    正の相異なる値を降順に並べ、各水準 v について μ{f >= v} を返す

    同じ値は走査前にまとめる（ソート順に依存しない）
    """
    values = np.abs(_values(f)).ravel()
    masses = mu.cell_masses.ravel()
    positive = values > 0
    levels, inverse = np.unique(values[positive], return_inverse=True)
    level_mass = np.bincount(inverse, weights=masses[positive], minlength=levels.size)
    levels = levels[::-1]
    cumulative = np.cumsum(level_mass[::-1])
    return levels, cumulative


def weak_norm(f: Union[SampledFunction, np.ndarray], mu: WeightedMeasure, q: float) -> WeakNormResult:
    """
    ‖f‖_{L^{q,∞}(μ)} = sup_{t>0} t·μ{|f| > t}^{1/q}

    sup は t↑v の極限で達成されるので、相異なる値 v についての
    max v·μ{|f| >= v}^{1/q} として厳密に計算する
    """
    if not q > 0:
        raise NormError(f"q は正でなければなりません: q={q}")
    levels, cumulative = level_ladder(f, mu)
    if levels.size == 0:
        return WeakNormResult(q=q, value=0.0, attaining_level=None, ladder=[])
    candidates = levels * cumulative ** (1.0 / q)
    index = int(np.argmax(candidates))
    return WeakNormResult(
        q=q,
        value=float(candidates[index]),
        attaining_level=float(levels[index]),
        ladder=[(float(v), float(c)) for v, c in zip(levels, candidates)],
    )


def weak_norm_scan(
    f: Union[SampledFunction, np.ndarray], mu: WeightedMeasure, q: float, thresholds: int = 10_000
) -> float:
    """
    しきい値走査による弱ノルム（検証用）

    等間隔のしきい値に加え、各水準の直下（左極限）も走査する
    """
    values = np.abs(_values(f))
    top = float(values.max()) if values.size else 0.0
    if top <= 0:
        return 0.0
    levels = np.unique(values[values > 0])
    grid_t = np.linspace(0.0, top, thresholds, endpoint=False)[1:]
    left_limits = np.nextafter(levels, 0.0)
    best = 0.0
    for t in np.concatenate([grid_t, left_limits]):
        mass = math.fsum(mu.cell_masses[values > t].tolist())
        best = max(best, float(t) * mass ** (1.0 / q))
    return best


def power_identity_check(f: Union[SampledFunction, np.ndarray], mu: WeightedMeasure, q: float) -> float:
    """
    ‖f‖_{L^{q,∞}(μ)}^q = ‖f^q‖_{L^{1,∞}(μ)} の両辺を計算し相対誤差を返す
    """
    values = _values(f)
    if np.any(values < 0):
        raise NormError("恒等式の検査は非負関数のみ対象です")
    lhs = weak_norm(values, mu, q).value ** q
    rhs = weak_norm(values ** q, mu, 1.0).value
    if lhs == 0.0 and rhs == 0.0:
        return 0.0
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs))


def weighted_l1(f: SampledFunction, u: Weight) -> float:
    """∫ f u = Σ f·u·セル体積（f と u は同じ標本点で評価されていること）"""
    if f.grid != u.grid:
        raise NormError("関数と重みの格子が一致しません")
    if f.offset != u.offset:
        raise NormError(f"関数（offset={f.offset}）と重み（offset={u.offset}）の標本点が一致しません")
    return math.fsum((np.abs(f.values) * u.values).ravel().tolist()) * f.grid.cell_measure


def weighted_lp(f: Union[SampledFunction, np.ndarray], w: Union[Weight, WeightedMeasure], s: float) -> float:
    """Σ |f|^s w·セル体積（s 乗したままの強い積分）"""
    if not s > 0:
        raise NormError(f"指数は正でなければなりません: s={s}")
    masses = w.cell_masses if isinstance(w, WeightedMeasure) else w.values * w.grid.cell_measure
    values = np.abs(_values(f))
    if values.shape != masses.shape:
        raise NormError("関数と重みの格子が一致しません")
    return math.fsum((values ** s * masses).ravel().tolist())


def strong_norm(f: Union[SampledFunction, np.ndarray], mu: WeightedMeasure, q: float) -> float:
    """(Σ |f|^q μ)^{1/q}"""
    return weighted_lp(f, mu, q) ** (1.0 / q)


def ladder_sweep(result: WeakNormResult) -> List[Tuple[float, float]]:
    """プロット用の (水準, t·μ^{1/q}) 列"""
    return list(result.ladder)
