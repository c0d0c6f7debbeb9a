"""
重み・関数の標本化と Muckenhoupt 定数
A_1, A_p, A_∞ 代理, 多重 A_P⃗ と、その線形クラスによる特徴付けを計算する
"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from config.settings import Config
from models.function import (
    ConstantFamily,
    FamilySpec,
    IndicatorFamily,
    PiecewiseFamily,
    PowerFamily,
    ProductFamily,
    RandomFamily,
    SampledFunction,
    SumFamily,
    Weight,
)
from models.lattice import CubeFamily, Grid
from models.report import MuckenhouptReport, StabilityVerdict, Theorem23Report
from services.exceptions import SampleError, WeightClassError
from services.lattice_service import CubeSet, PrefixTable, family_cubes
from services.stability_service import StabilityAssessor

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# 標本化
# ---------------------------------------------------------------------------

def _box_mask(grid: Grid, points: np.ndarray, lower: Sequence[float], upper: Sequence[float]) -> np.ndarray:
    if len(lower) != grid.dim:
        raise SampleError(f"箱の次元 {len(lower)} が格子の次元 {grid.dim} と一致しません")
    lo = np.asarray(lower, dtype=np.float64)
    hi = np.asarray(upper, dtype=np.float64)
    return np.all((points >= lo) & (points < hi), axis=-1)


def _evaluate(family: FamilySpec, grid: Grid, points: np.ndarray, norms: np.ndarray) -> np.ndarray:
    if isinstance(family, ConstantFamily):
        return np.full(grid.shape, float(family.value))
    if isinstance(family, PowerFamily):
        if family.exponent <= -grid.dim and not family.allow_nonintegrable:
            raise SampleError(
                f"|x|^a は a > -n でないと原点近傍で可積分になりません: a={family.exponent}, n={grid.dim}"
            )
        return norms ** family.exponent
    if isinstance(family, IndicatorFamily):
        mask = _box_mask(grid, points, family.box.lower, family.box.upper)
        return np.where(mask, float(family.height), 0.0)
    if isinstance(family, RandomFamily):
        rng = np.random.default_rng(family.seed)
        return rng.uniform(family.low, family.high, size=grid.shape)
    if isinstance(family, ProductFamily):
        return _evaluate(family.left, grid, points, norms) * _evaluate(family.right, grid, points, norms)
    if isinstance(family, SumFamily):
        total = np.zeros(grid.shape)
        for term in family.terms:
            total = total + _evaluate(term, grid, points, norms)
        return total
    if isinstance(family, PiecewiseFamily):
        result = np.full(grid.shape, np.nan)
        assigned = np.zeros(grid.shape, dtype=bool)
        for piece in family.pieces:
            mask = _box_mask(grid, points, piece.box.lower, piece.box.upper) & ~assigned
            if np.any(mask):
                result[mask] = _evaluate(piece.family, grid, points, norms)[mask]
                assigned |= mask
        if not np.all(assigned):
            if family.default is None:
                raise SampleError("どの箱にも属さないセルがあり、default も指定されていません")
            result[~assigned] = _evaluate(family.default, grid, points, norms)[~assigned]
        return result
    raise SampleError(f"不明な族: {family}")


def _is_nonintegrable(family: FamilySpec, dim: int) -> bool:
    if isinstance(family, PowerFamily):
        return family.exponent <= -dim
    if isinstance(family, ProductFamily):
        return _is_nonintegrable(family.left, dim) or _is_nonintegrable(family.right, dim)
    if isinstance(family, SumFamily):
        return any(_is_nonintegrable(t, dim) for t in family.terms)
    if isinstance(family, PiecewiseFamily):
        parts = [p.family for p in family.pieces] + ([family.default] if family.default else [])
        return any(_is_nonintegrable(p, dim) for p in parts)
    return False


def sample_function(family: FamilySpec, grid: Grid, offset: float = 0.0) -> SampledFunction:
    """族を格子の標本点（セル中心を offset セルずらした点）で評価"""
    values = _evaluate(family, grid, grid.points(offset), grid.point_norms(offset))
    if not np.all(np.isfinite(values)):
        raise SampleError("標本値に有限でない値が含まれています")
    if np.any(values < 0):
        raise SampleError("関数の標本値は非負でなければなりません")
    return SampledFunction(grid=grid, values=values, offset=offset)


def sample(family: FamilySpec, grid: Grid, offset: float = 0.0) -> Weight:
    """
    重みを標本化

    Raises:
        SampleError: a <= -n のべき（allow_nonintegrable なし）、正でない値
    """
    values = _evaluate(family, grid, grid.points(offset), grid.point_norms(offset))
    if not np.all(np.isfinite(values)):
        raise SampleError("重みの標本値に有限でない値が含まれています")
    if np.any(values <= 0):
        raise SampleError("重みは各セルで正でなければなりません")
    return Weight(grid=grid, values=values, offset=offset, nonintegrable=_is_nonintegrable(family, grid.dim))


# ---------------------------------------------------------------------------
# Muckenhoupt 定数
# ---------------------------------------------------------------------------

def _report(weight_class: str, values: np.ndarray, cubes: CubeSet, family: CubeFamily, **extra) -> MuckenhouptReport:
    index = int(np.argmax(values))
    return MuckenhouptReport(
        weight_class=weight_class,
        constant=float(values[index]),
        attaining_cube=cubes.cube(index),
        family=family,
        cells_per_axis=cubes.grid.cells_per_axis,
        **extra,
    )


def _conjugate(p: float) -> float:
    return p / (p - 1.0)


def a1_constant(w: Weight, family: CubeFamily) -> MuckenhouptReport:
    """max_Q avg_Q(w) / inf_Q(w)"""
    cubes = family_cubes(w.grid, family)
    table = PrefixTable.from_array(w.grid, w.values)
    ratios = table.cube_means(cubes) / table.cube_mins(cubes)
    return _report("A1", ratios, cubes, family, nonintegrable=w.nonintegrable)


def _ap_values(w: Weight, p: float, cubes: CubeSet) -> np.ndarray:
    dual = w.values ** (1.0 - _conjugate(p))
    mean_w = PrefixTable.from_array(w.grid, w.values).cube_means(cubes)
    mean_dual = PrefixTable.from_array(w.grid, dual).cube_means(cubes)
    return mean_w * mean_dual ** (p - 1.0)


def ap_constant(w: Weight, p: float, family: CubeFamily) -> MuckenhouptReport:
    """max_Q avg_Q(w)·avg_Q(w^{1-p'})^{p-1}"""
    if p <= 1:
        raise WeightClassError(f"A_p は p > 1 で定義されます（p=1 は a1_constant を使用）: p={p}")
    cubes = family_cubes(w.grid, family)
    return _report("Ap", _ap_values(w, p, cubes), cubes, family, p=float(p), nonintegrable=w.nonintegrable)


def ainf_proxy(w: Weight, family: CubeFamily, p_ladder: Optional[Sequence[float]] = None) -> MuckenhouptReport:
    """
    A_∞ の代理: p のはしご上の A_p 定数の最小値

    Args:
        p_ladder: 昇順で各 p > 1（既定 {2,4,8,16}）
    """
    ladder = list(Config.DEFAULT_AP_LADDER if p_ladder is None else p_ladder)
    if not ladder:
        raise WeightClassError("p のはしごが空です")
    if any(p <= 1 for p in ladder) or ladder != sorted(ladder):
        raise WeightClassError(f"p のはしごは昇順で各 p > 1 でなければなりません: {ladder}")
    reports = [ap_constant(w, p, family) for p in ladder]
    best = min(reports, key=lambda r: r.constant)
    return MuckenhouptReport(
        weight_class="AinfProxy",
        p=best.p,
        constant=best.constant,
        attaining_cube=best.attaining_cube,
        family=family,
        cells_per_axis=w.grid.cells_per_axis,
        ladder={repr(float(r.p)): r.constant for r in reports},
        nonintegrable=w.nonintegrable,
    )


def _check_same_grid(ws: Sequence[SampledFunction]) -> None:
    if not ws:
        raise WeightClassError("重みが一つもありません")
    first = ws[0]
    for w in ws[1:]:
        if w.grid != first.grid or w.offset != first.offset:
            raise WeightClassError("重みの格子（または標本点）が一致しません")


def _joint_exponent(exponents: Sequence[float]) -> float:
    if any(p < 1 for p in exponents):
        raise WeightClassError(f"各 p_i は 1 以上でなければなりません: {list(exponents)}")
    return 1.0 / sum(1.0 / p for p in exponents)


def nu_weight(ws: Sequence[Weight], exponents: Sequence[float]) -> Weight:
    """ν_w = Π w_i^{p/p_i}（セルごと）"""
    p = _joint_exponent(exponents)
    values = np.ones(ws[0].grid.shape)
    for w, p_i in zip(ws, exponents):
        values = values * w.values ** (p / p_i)
    return ws[0].with_values(values)


def multilinear_ap_constant(ws: Sequence[Weight], exponents: Sequence[float], family: CubeFamily) -> MuckenhouptReport:
    """
    A_P⃗ 定数: max_Q avg_Q(ν_w)^{1/p} Π_i term_i

    term_i は p_i > 1 で avg_Q(w_i^{1-p_i'})^{1/p_i'}、p_i = 1 で (inf_Q w_i)^{-1}
    """
    _check_same_grid(ws)
    if len(ws) != len(exponents):
        raise WeightClassError("重みの個数と指数の個数が一致しません")
    p = _joint_exponent(exponents)
    grid = ws[0].grid
    cubes = family_cubes(grid, family)
    nu = nu_weight(ws, exponents)
    values = PrefixTable.from_array(grid, nu.values).cube_means(cubes) ** (1.0 / p)
    for w, p_i in zip(ws, exponents):
        if p_i == 1:
            values = values / PrefixTable.from_array(grid, w.values).cube_mins(cubes)
        else:
            dual = w.values ** (1.0 - _conjugate(p_i))
            values = values * PrefixTable.from_array(grid, dual).cube_means(cubes) ** (1.0 / _conjugate(p_i))
    return _report(
        "AvecP",
        values,
        cubes,
        family,
        exponents=[float(p_i) for p_i in exponents],
        nonintegrable=any(w.nonintegrable for w in ws),
    )


def linear_class_constant(w: Weight, p: float, family: CubeFamily) -> MuckenhouptReport:
    """p = 1 なら A_1、p > 1 なら A_p"""
    if abs(p - 1.0) < 1e-12:
        return a1_constant(w, family)
    return ap_constant(w, p, family)


def check_theorem23(ws: Sequence[Weight], exponents: Sequence[float], family: CubeFamily) -> Theorem23Report:
    """
    A_P⃗ の特徴付け: w⃗ ∈ A_P⃗ ⇔ ν_w ∈ A_{mp} かつ各 w_i^{1-p_i'} ∈ A_{mp_i'}
    （p_i = 1 では w_i^{1/m} ∈ A_1 と読む）。単一格子では判定は未評価
    """
    avec = multilinear_ap_constant(ws, exponents, family)
    m = len(ws)
    p = _joint_exponent(exponents)
    nu_report = linear_class_constant(nu_weight(ws, exponents), m * p, family)
    components = []
    for w, p_i in zip(ws, exponents):
        if p_i == 1:
            components.append(a1_constant(w.power(1.0 / m), family))
        else:
            p_dual = _conjugate(p_i)
            components.append(ap_constant(w.power(1.0 - p_dual), m * p_dual, family))
    return Theorem23Report(
        exponents=[float(p_i) for p_i in exponents],
        avec_p=avec,
        nu_class=nu_report,
        components=components,
    )


def theorem23_agreement(
    avec_verdict: StabilityVerdict, component_verdicts: Sequence[StabilityVerdict]
) -> bool:
    """両側の細分化判定が一致するか（全て安定、または A_P⃗ 側が不安定）"""
    if avec_verdict == StabilityVerdict.STABLE:
        return all(v == StabilityVerdict.STABLE for v in component_verdicts)
    return avec_verdict != StabilityVerdict.STABLE and any(
        v != StabilityVerdict.STABLE for v in component_verdicts
    )


def check_theorem23_refined(
    weight_families: Sequence[FamilySpec],
    exponents: Sequence[float],
    family: CubeFamily,
    grids: Sequence[Grid],
    assessor: Optional[StabilityAssessor] = None,
) -> Theorem23Report:
    """細分化列で特徴付けを評価し、各定数に判定を付けた最終格子のレポートを返す"""
    assessor = assessor or StabilityAssessor()
    per_grid = [
        check_theorem23([sample(f, grid) for f in weight_families], exponents, family)
        for grid in grids
    ]
    ns = [g.cells_per_axis for g in grids]
    last = per_grid[-1]
    avec_verdict = assessor.classify([r.avec_p.constant for r in per_grid])
    nu_verdict = assessor.classify([r.nu_class.constant for r in per_grid])
    component_verdicts = [
        assessor.classify([r.components[i].constant for r in per_grid]) for i in range(len(last.components))
    ]
    last.avec_p.verdict = avec_verdict
    last.nu_class.verdict = nu_verdict
    for report, verdict in zip(last.components, component_verdicts):
        report.verdict = verdict
    last.verdicts_agree = theorem23_agreement(avec_verdict, [nu_verdict] + component_verdicts)
    logger.info(f"A_P⃗ 特徴付け: N={ns} A_P⃗={avec_verdict.value} ν={nu_verdict.value} 成分={[v.value for v in component_verdicts]}")
    return last


def ainf_verdict(ladder_series: Dict[str, List[float]], assessor: StabilityAssessor) -> StabilityVerdict:
    """はしごのいずれかの p で安定なら A_∞ の候補とみなす"""
    verdicts = [assessor.classify(values) for values in ladder_series.values()]
    if any(v == StabilityVerdict.STABLE for v in verdicts):
        return StabilityVerdict.STABLE
    if verdicts and all(v == StabilityVerdict.DIVERGENT for v in verdicts):
        return StabilityVerdict.DIVERGENT
    if verdicts and all(v == StabilityVerdict.UNASSESSED for v in verdicts):
        return StabilityVerdict.UNASSESSED
    return StabilityVerdict.INCONCLUSIVE


def stable_constant_verdict(
    reports: Sequence[MuckenhouptReport], assessor: StabilityAssessor
) -> StabilityVerdict:
    """同じクラスの格子ごとのレポート列から判定（A_∞ 代理ははしご全体で判定）"""
    if reports and reports[0].weight_class == "AinfProxy":
        keys = list(reports[0].ladder or {})
        series = {k: [r.ladder[k] for r in reports] for k in keys}
        return ainf_verdict(series, assessor)
    return assessor.classify([r.constant for r in reports])
