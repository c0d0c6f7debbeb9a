"""
重み・関数族のパラメータ探索
全格子点スイープと座標ごとの山登り法で経験定数を最大化する（仮定が安定なインスタンスのみ数える）
"""
import logging
from itertools import product as cartesian
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import Config
from models.function import Box, IndicatorFamily, PowerFamily
from models.report import InstanceResult, ReportStatus, TheoremId
from models.run_config import TheoremInstance
from models.search import (
    HillClimbSettings,
    ParameterTarget,
    SearchEvaluation,
    SearchParameter,
    SearchSpace,
    SearchState,
)
from services.exceptions import BudgetError, SearchError
from services.experiment_service import ExperimentService
from services.operator_service import q_exponent

logger = logging.getLogger(__name__)

DEFAULT_F_LOWER = -0.5
DEFAULT_F_UPPER = 0.5
DEFAULT_F_HEIGHT = 1.0

# 幅の比較で許す丸め誤差
WIDTH_SLACK = 1e-12

SEARCHABLE = {
    TheoremId.THM_MAX,
    TheoremId.THM_MAX_ALPHA0,
    TheoremId.BCP_P1,
    TheoremId.THM_IMAX,
    TheoremId.THM_EXTRAP,
    TheoremId.MOEN_A1,
    TheoremId.SAWYER11,
}


# ---------------------------------------------------------------------------
# 射影
# ---------------------------------------------------------------------------

def _exponent_floor(space: SearchSpace, dim: int) -> float:
    """mq·a > -n + margin を満たす最小の指数"""
    mq = space.m * q_exponent(space.m, dim, space.alpha)
    return (-dim + space.integrability_margin) / mq


def _bounds(parameter: SearchParameter, space: SearchSpace, dim: int) -> Tuple[float, float]:
    lower, upper = parameter.lower, parameter.upper
    if parameter.target in (ParameterTarget.U_EXPONENT, ParameterTarget.V_EXPONENT):
        lower = max(lower, _exponent_floor(space, dim))
    if lower > upper:
        raise SearchError(f"{parameter.name}: 可積分性の制約を満たす値が範囲内にありません")
    return lower, upper


def project(params: Dict[str, float], space: SearchSpace, dim: int = 1) -> Dict[str, float]:
    """
    範囲へのクリップと可積分性・指示関数の幅の制約を課す（冪等）

    Raises:
        SearchError: 実行可能な値がない
    """
    out = dict(params)
    by_name = {p.name: p for p in space.parameters}
    for name, parameter in by_name.items():
        lower, upper = _bounds(parameter, space, dim)
        if name in out:
            out[name] = float(min(max(out[name], lower), upper))

    for slot in range(space.m):
        lo_name, hi_name = f"f_lower[{slot}]", f"f_upper[{slot}]"
        if lo_name not in by_name and hi_name not in by_name:
            continue
        lo = out.get(lo_name, DEFAULT_F_LOWER)
        hi = out.get(hi_name, DEFAULT_F_UPPER)
        width = space.min_width * (1.0 - WIDTH_SLACK)
        if hi - lo >= width:
            continue
        if hi_name in by_name:
            hi = min(lo + space.min_width, _bounds(by_name[hi_name], space, dim)[1])
            out[hi_name] = hi
        if hi - lo < width and lo_name in by_name:
            lo = max(hi - space.min_width, _bounds(by_name[lo_name], space, dim)[0])
            out[lo_name] = lo
        if hi - lo < width:
            raise SearchError(f"f_{slot} の指示関数の幅 {space.min_width} を確保できません")
    return out


# ---------------------------------------------------------------------------
# 評価
# ---------------------------------------------------------------------------

def build_instance(space: SearchSpace, params: Dict[str, float], dim: int, instance_id: str) -> TheoremInstance:
    """パラメータから u_i = |x|^{a_i}, v = |x|^b, f_i = height·1_[lower, upper)^n を組み立てる"""
    if space.theorem not in SEARCHABLE:
        raise SearchError(f"探索に対応していない定理です: {space.theorem.value}")
    functions = []
    for slot in range(space.m):
        lower = params.get(f"f_lower[{slot}]", DEFAULT_F_LOWER)
        upper = params.get(f"f_upper[{slot}]", DEFAULT_F_UPPER)
        height = params.get(f"f_height[{slot}]", DEFAULT_F_HEIGHT)
        functions.append(IndicatorFamily(box=Box(lower=[lower] * dim, upper=[upper] * dim), height=height))
    us = [PowerFamily(exponent=params.get(f"u_exponent[{slot}]", 0.0)) for slot in range(space.m)]
    v = PowerFamily(exponent=params.get("v_exponent", 0.0))
    return TheoremInstance(
        id=instance_id,
        theorem=space.theorem,
        functions=functions,
        u=us,
        v=v,
        w=us[0] if space.theorem == TheoremId.MOEN_A1 else None,
        alpha=space.alpha,
        mode=space.mode,
    )


def _is_stable(result: InstanceResult, mode: Optional[str]) -> bool:
    if result.status != ReportStatus.OK:
        return False
    if mode is not None:
        return mode in result.modes_satisfied
    return bool(result.modes_satisfied)


def evaluate(
    service: ExperimentService, space: SearchSpace, params: Dict[str, float], step: int
) -> SearchEvaluation:
    """一点の評価（最細格子の経験定数を目的関数とし、判定は格子列全体から）"""
    instance = build_instance(space, params, service.config.grid.dim, f"search-{step}")
    result = service.run_instance(instance)
    last = result.reports[-1]
    constants = [r.empirical_constant for r in result.reports]
    verdicts = {s.label: s.verdict.value for s in result.hypothesis_series}
    return SearchEvaluation(
        step=step,
        params=dict(params),
        objective=last.empirical_constant,
        constants=[c for c in constants if c is not None],
        status=result.status,
        constant_verdict=result.constant_series.verdict.value if result.constant_series else "unassessed",
        verdicts=verdicts,
        modes_satisfied=result.modes_satisfied,
        stable=_is_stable(result, space.mode) and last.empirical_constant is not None,
    )


def _budget(space: SearchSpace) -> int:
    return space.budget if space.budget is not None else Config.EVALUATION_BUDGET


def _axis_values(parameter: SearchParameter) -> List[float]:
    return [float(x) for x in np.linspace(parameter.lower, parameter.upper, parameter.steps)]


def sweep(service: ExperimentService, space: SearchSpace) -> List[SearchEvaluation]:
    """
    全格子点の評価（仮定が不安定な行も残し stable=False で印を付ける）

    Raises:
        BudgetError: 評価回数が予算を超える
    """
    required = int(np.prod([p.steps for p in space.parameters]))
    budget = _budget(space)
    if required > budget:
        raise BudgetError(f"スイープには {required} 回の評価が必要ですが予算は {budget} 回です", required, budget)
    names = [p.name for p in space.parameters]
    dim = service.config.grid.dim
    rows = []
    for step, values in enumerate(cartesian(*[_axis_values(p) for p in space.parameters])):
        params = project(dict(zip(names, values)), space, dim)
        row = evaluate(service, space, params, step)
        if not row.stable:
            logger.info(f"スイープ {step}: 仮定が安定ではありません {params}（{row.status.value}）")
        rows.append(row)
    logger.info(f"スイープ完了: {len(rows)} 行（安定 {sum(r.stable for r in rows)} 行）")
    return rows


def best_row(rows: Sequence[SearchEvaluation]) -> Optional[SearchEvaluation]:
    """仮定が安定な行のうち目的関数が最大のもの（同値なら先の行）"""
    best = None
    for row in rows:
        if row.stable and (best is None or row.objective > best.objective):
            best = row
    return best


def _initial(space: SearchSpace, settings: HillClimbSettings) -> Dict[str, float]:
    params = {}
    for p in space.parameters:
        params[p.name] = float(settings.initial.get(p.name, 0.5 * (p.lower + p.upper)))
    unknown = set(settings.initial) - set(params)
    if unknown:
        raise SearchError(f"初期値に探索空間にないパラメータがあります: {sorted(unknown)}")
    return params


def hill_climb(
    service: ExperimentService,
    space: SearchSpace,
    settings: HillClimbSettings,
    seed: int,
    initial: Optional[Dict[str, float]] = None,
) -> SearchState:
    """
    座標ごとの山登り法

    軸を順番に巡り、符号は乱数で決める。仮定が安定で目的関数が真に増えた提案だけを受理し、
    却下した軸はステップ幅を decay 倍に縮める

    Raises:
        SearchError: 初期値が範囲・制約を満たさない
        BudgetError: max_steps + 1 回の評価が予算を超える
    """
    budget = _budget(space)
    if settings.max_steps + 1 > budget:
        raise BudgetError(
            f"山登りには {settings.max_steps + 1} 回の評価が必要ですが予算は {budget} 回です",
            settings.max_steps + 1,
            budget,
        )
    dim = service.config.grid.dim
    params = dict(initial) if initial is not None else _initial(space, settings)
    if project(params, space, dim) != params:
        raise SearchError(f"初期値が範囲または制約を満たしていません: {params}")

    rng = np.random.default_rng(seed)
    names = [p.name for p in space.parameters]
    scales = {p.name: settings.step_scale * (p.upper - p.lower) for p in space.parameters}

    current = evaluate(service, space, params, 0)
    current.accepted = True
    state = SearchState(
        seed=seed,
        params=params,
        objective=current.objective,
        best_params=dict(params),
        best_objective=current.objective if current.stable else None,
        step_scales=dict(scales),
        history=[current],
    )
    for step in range(1, settings.max_steps + 1):
        name = names[(step - 1) % len(names)]
        sign = float(rng.choice([-1.0, 1.0]))
        candidate = dict(state.params)
        candidate[name] = candidate[name] + sign * scales[name]
        candidate = project(candidate, space, dim)
        row = evaluate(service, space, candidate, step)
        improved = row.stable and (state.best_objective is None or row.objective > state.best_objective)
        if improved:
            row.accepted = True
            state.params = candidate
            state.objective = row.objective
            state.best_params = dict(candidate)
            state.best_objective = row.objective
        else:
            scales[name] *= settings.decay
        state.history.append(row)
        logger.debug(f"山登り {step}: {name} {sign:+.0f} → {row.objective}（{'受理' if improved else '却下'}）")
    state.step_scales = dict(scales)
    logger.info(f"山登り完了: 最良値 {state.best_objective} パラメータ {state.best_params}")
    return state


def warm_start(service: ExperimentService, space: SearchSpace, settings: HillClimbSettings) -> Dict[str, float]:
    """スイープの最良行から山登りを始める（最良行がなければ通常の初期値）"""
    best = best_row(sweep(service, space))
    return dict(best.params) if best is not None else _initial(space, settings)

