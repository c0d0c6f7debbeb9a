"""
定理インスタンスの検証
仮定（重みクラス定数）・左辺・右辺を計算し、経験定数を InequalityReport にまとめる（単一格子）
"""
import logging
import math
from itertools import product as cartesian
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.function import SampledFunction, Weight
from models.lattice import CubeFamily, Grid
from models.operator import OperatorSpec
from models.report import (
    HypothesisEvidence,
    InequalityReport,
    MuckenhouptReport,
    ReportStatus,
    TheoremId,
    TheoremParams,
)
from services.exceptions import VerificationError
from services.norm_service import WeightedMeasure, weak_norm, weighted_l1, weighted_lp
from services.operator_service import (
    TARGET_OFFSET,
    fractional_integral,
    fractional_maximal_linear,
    maximal,
    multilinear_maximal,
    q_exponent,
)
from services.weight_service import a1_constant, ainf_proxy, multilinear_ap_constant

logger = logging.getLogger(__name__)

# 点ごとの評価・集合の包含で許す相対誤差
POINTWISE_SLACK = 1e-9

MODES = ("A", "B")
MOEN_EXPONENTS = (0.5, 1.0, 2.0)
MAX_FAMILY_SIZE = 8


# ---------------------------------------------------------------------------
# 共通処理
# ---------------------------------------------------------------------------

def _grid_of(fs: Sequence[SampledFunction], us: Sequence[Weight], v: Optional[Weight]) -> Grid:
    if not fs:
        raise VerificationError("関数が一つもありません")
    grid = fs[0].grid
    for item in list(fs) + list(us) + ([v] if v is not None else []):
        if item.grid != grid:
            raise VerificationError("関数と重みの格子が一致しません")
    return grid


def _check_offsets(ws: Sequence[Weight], offset: float) -> None:
    """商・測度を評価する点と重みの標本点が一致しているか"""
    for w in ws:
        if abs(w.offset - offset) > 1e-15:
            raise VerificationError(
                f"重みの標本点（offset={w.offset}）が評価点（offset={offset}）と一致しません"
            )


def _source_weights(fs: Sequence[SampledFunction], source_us: Sequence[Weight]) -> List[Weight]:
    """右辺 Π∫f_i u_i 用の u_i（f_i と同じ標本点）"""
    source_us = list(source_us)
    if len(source_us) != len(fs):
        raise VerificationError("関数と右辺用の重みの個数が一致しません")
    _check_offsets(source_us, fs[0].offset)
    return source_us


def _check_mode(mode: Optional[str]) -> List[str]:
    if mode is None:
        return list(MODES)
    if mode not in MODES:
        raise VerificationError(f"仮定のモードは A か B です: {mode}")
    return [mode]


def _params(
    m: int,
    grid: Grid,
    alpha: float,
    family: CubeFamily,
    mode: Optional[str] = None,
    q: Optional[float] = None,
    **extra,
) -> TheoremParams:
    return TheoremParams(
        m=m,
        n=grid.dim,
        alpha=float(alpha),
        q=q_exponent(m, grid.dim, alpha) if q is None else q,
        cells_per_axis=grid.cells_per_axis,
        half_width=grid.half_width,
        family=family,
        mode=mode,
        **extra,
    )


def _status(lhs: float, rhs: float) -> Tuple[Optional[float], ReportStatus]:
    """経験定数 lhs/rhs と状態（rhs = 0 のとき Degenerate / Violation）"""
    if rhs > 0:
        return lhs / rhs, ReportStatus.OK
    if lhs == 0:
        return None, ReportStatus.DEGENERATE
    return None, ReportStatus.VIOLATION


def _nu_measure(us: Sequence[Weight], v: Weight, q: float) -> WeightedMeasure:
    """ν v^q = Π u_i^q · v^q"""
    return WeightedMeasure.from_weights(list(us) + [v], [q] * (len(us) + 1))


def _quotient(values: np.ndarray, v: Weight) -> np.ndarray:
    return values / v.values


def _evidence(name: str, mode: str, report: MuckenhouptReport) -> HypothesisEvidence:
    return HypothesisEvidence(name=name, mode=mode, report=report)


def _report(
    theorem_id: TheoremId,
    params: TheoremParams,
    lhs: float,
    rhs: float,
    evidence: Sequence[HypothesisEvidence] = (),
    sweep: Sequence[Tuple[float, float]] = (),
    details: Optional[Dict[str, float]] = None,
) -> InequalityReport:
    constant, status = _status(lhs, rhs)
    modes = sorted({e.mode for e in evidence if e.mode in MODES})
    return InequalityReport(
        theorem_id=theorem_id,
        params=params,
        hypothesis_evidence=list(evidence),
        modes_satisfied=modes,
        lhs=float(lhs),
        rhs=float(rhs),
        empirical_constant=constant,
        sweep=list(sweep),
        status=status,
        details=details or {},
    )


# ---------------------------------------------------------------------------
# 仮定
# ---------------------------------------------------------------------------

def hypothesis_check(
    us: Sequence[Weight],
    v: Weight,
    alpha: float,
    mode: Optional[str] = None,
    family: CubeFamily = CubeFamily.ALL_CUBES,
) -> List[HypothesisEvidence]:
    """
    Theorem Max / IMax の仮定を評価（q = n/(mn-α)）

    モード A: (u_1^{mq},…,u_m^{mq}) ∈ A_(1,…,1) かつ ν v^q ∈ A_∞
    モード B: 各 u_i^{mq} ∈ A_1 かつ v^{mq} ∈ A_∞
    """
    if not us:
        raise VerificationError("重み u が一つもありません")
    for u in us:
        if u.grid != v.grid or u.offset != v.offset:
            raise VerificationError("重みの格子（または標本点）が一致しません")
    m, n = len(us), v.grid.dim
    q = q_exponent(m, n, alpha)
    mq = m * q
    powered = [u.power(mq) for u in us]
    evidence: List[HypothesisEvidence] = []
    for current in _check_mode(mode):
        if current == "A":
            evidence.append(_evidence(
                "A(1,...,1)[u^{mq}]", "A", multilinear_ap_constant(powered, [1.0] * m, family)
            ))
            nu_v = v.with_values(_nu_measure(us, v, q).density)
            evidence.append(_evidence("Ainf[nu v^q]", "A", ainf_proxy(nu_v, family)))
        else:
            for i, w in enumerate(powered, start=1):
                evidence.append(_evidence(f"A1[u_{i}^{{mq}}]", "B", a1_constant(w, family)))
            evidence.append(_evidence("Ainf[v^{mq}]", "B", ainf_proxy(v.power(mq), family)))
    return evidence


def extrapolation_hypotheses(
    us: Sequence[Weight], v: Weight, alpha: float, family: CubeFamily
) -> List[HypothesisEvidence]:
    """
    外挿定理の仮定 u⃗^{mq} ∈ A_(1,…,1), v^q ∈ A_∞

    IMax 側の ν v^q, v^{mq} の A_∞ 代理も参考として並べる（mode="reference"）
    """
    m = len(us)
    q = q_exponent(m, v.grid.dim, alpha)
    mq = m * q
    powered = [u.power(mq) for u in us]
    nu_v = v.with_values(_nu_measure(us, v, q).density)
    return [
        _evidence("A(1,...,1)[u^{mq}]", "extrapolation", multilinear_ap_constant(powered, [1.0] * m, family)),
        _evidence("Ainf[v^q]", "extrapolation", ainf_proxy(v.power(q), family)),
        _evidence("Ainf[nu v^q]", "reference", ainf_proxy(nu_v, family)),
        _evidence("Ainf[v^{mq}]", "reference", ainf_proxy(v.power(mq), family)),
    ]


# ---------------------------------------------------------------------------
# 点ごとの補題と証明の連鎖
# ---------------------------------------------------------------------------

def _lemma_sides(
    fs: Sequence[SampledFunction], us: Sequence[Weight], alpha: float, family: CubeFamily
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float, float]:
    """補題の両辺 M_α(f⃗) と M(g⃗)^{1/(mq)}·P、および M(g⃗), P, mq"""
    grid = _grid_of(fs, us, None)
    m = len(fs)
    if len(us) != m:
        raise VerificationError("関数と重みの個数が一致しません")
    q = q_exponent(m, grid.dim, alpha)
    mq = m * q
    lhs = maximal(fs, OperatorSpec(m=m, alpha=alpha, family=family)).values
    gs = [f.with_values(f.values * u.values ** (1.0 - mq)) for f, u in zip(fs, us)]
    mg = multilinear_maximal(gs, family).values
    scale = 1.0
    for f, u in zip(fs, us):
        scale *= weighted_l1(f, u) ** (alpha / (m * grid.dim))
    return lhs, mg ** (1.0 / mq) * scale, mg, scale, mq


def verify_lemma_pointwise(
    fs: Sequence[SampledFunction],
    us: Sequence[Weight],
    alpha: float,
    family: CubeFamily = CubeFamily.ALL_CUBES,
) -> float:
    """
    M_α(f⃗) <= M(f_1 u_1^{1-mq},…,f_m u_m^{1-mq})^{1/(mq)}·Π(∫f_i u_i)^{α/(mn)}

    両辺を同じ立方体族で計算し、セルごとの max(左辺 - 右辺) を返す
    """
    lhs, rhs, _, _, _ = _lemma_sides(fs, us, alpha, family)
    return float(np.max(lhs - rhs))


def lemma_pointwise_report(
    fs: Sequence[SampledFunction],
    us: Sequence[Weight],
    alpha: float,
    family: CubeFamily = CubeFamily.ALL_CUBES,
) -> InequalityReport:
    lhs, rhs, _, scale, _ = _lemma_sides(fs, us, alpha, family)
    grid = fs[0].grid
    excess = lhs - rhs
    breaches = int(np.count_nonzero(excess > POINTWISE_SLACK * (1.0 + rhs)))
    report = _report(
        TheoremId.LEMMA_POINTWISE,
        _params(len(fs), grid, alpha, family),
        float(np.max(lhs)),
        float(np.max(rhs)),
        details={
            "max_violation": float(np.max(excess)),
            "breaches": float(breaches),
            "integral_factor": scale,
        },
    )
    report.empirical_constant = None
    if breaches:
        logger.warning(f"点ごとの補題が {breaches} セルで破れています（最大 {np.max(excess):.3e}）")
        report.status = ReportStatus.VIOLATION
    elif scale == 0.0 and alpha > 0:
        report.status = ReportStatus.DEGENERATE
    else:
        report.status = ReportStatus.OK
    return report


def _ladder_with_limits(values: np.ndarray) -> np.ndarray:
    levels = np.unique(values[values > 0])
    return np.concatenate([levels, np.nextafter(levels, 0.0)])


def _containment(
    fs: Sequence[SampledFunction], us: Sequence[Weight], v: Weight, alpha: float, family: CubeFamily
) -> Tuple[float, int, int]:
    """
    {M_α/v > λ} ⊆ {M(g⃗)/v^{mq} > (λ/P)^{mq}} を値のはしご上の各 λ で確かめる

    Returns:
        (最大の相対不足量, 破れた (セル, λ) の組の数, 調べた λ の数)
    """
    lhs, _, mg, scale, mq = _lemma_sides(fs, us, alpha, family)
    quotient = _quotient(lhs, v)
    transformed = mg / v.values ** mq
    lambdas = _ladder_with_limits(quotient)
    worst, failures = 0.0, 0
    if scale == 0.0:
        # P = 0 なら全ての f_i が 0 で左辺の集合は空
        return 0.0, int(np.count_nonzero(quotient > 0)), int(lambdas.size)
    for lam in lambdas:
        inside = quotient > lam
        if not np.any(inside):
            continue
        threshold = (lam / scale) ** mq
        shortfall = (threshold - transformed[inside]) / threshold
        failures += int(np.count_nonzero(shortfall >= POINTWISE_SLACK))
        worst = max(worst, float(np.max(shortfall)))
    return max(worst, 0.0), failures, int(lambdas.size)


def _algebra_discrepancy(fs: Sequence[SampledFunction], us: Sequence[Weight], alpha: float) -> float:
    """Π(∫f_iu_i)^{α/(mn)}·Π(∫f_i u_i^{1-mq} u_i^{mq})^{1/(mq)} と Π∫f_iu_i の相対差"""
    m, n = len(fs), fs[0].grid.dim
    mq = m * q_exponent(m, n, alpha)
    chained, direct = 1.0, 1.0
    for f, u in zip(fs, us):
        integral = weighted_l1(f, u)
        split = weighted_l1(f.with_values(f.values * u.values ** (1.0 - mq)), u.power(mq))
        chained *= integral ** (alpha / (m * n)) * split ** (1.0 / mq)
        direct *= integral
    if chained == direct:
        return 0.0
    return abs(chained - direct) / max(abs(chained), abs(direct))


def proof_chain_check(
    fs: Sequence[SampledFunction],
    us: Sequence[Weight],
    v: Weight,
    alpha: float,
    family: CubeFamily = CubeFamily.ALL_CUBES,
) -> float:
    """包含関係の最大相対不足量と最後の代数的等式の相対差のうち大きい方"""
    shortfall, _, _ = _containment(fs, us, v, alpha, family)
    return max(shortfall, _algebra_discrepancy(fs, us, alpha))


def proof_chain_report(
    fs: Sequence[SampledFunction],
    us: Sequence[Weight],
    v: Weight,
    alpha: float,
    family: CubeFamily = CubeFamily.ALL_CUBES,
) -> InequalityReport:
    grid = _grid_of(fs, us, v)
    shortfall, failures, levels = _containment(fs, us, v, alpha, family)
    algebra = _algebra_discrepancy(fs, us, alpha)
    report = _report(
        TheoremId.PROOF_CHAIN,
        _params(len(fs), grid, alpha, family),
        lhs=shortfall,
        rhs=algebra,
        details={
            "containment_shortfall": shortfall,
            "containment_failures": float(failures),
            "levels_checked": float(levels),
            "algebra_discrepancy": algebra,
        },
    )
    report.empirical_constant = None
    if failures or algebra > 1e-12:
        logger.warning(f"証明の連鎖が成り立ちません: 包含の破れ {failures} 件, 代数的差 {algebra:.3e}")
        report.status = ReportStatus.VIOLATION
    elif all(f.is_zero() for f in fs):
        report.status = ReportStatus.DEGENERATE
    else:
        report.status = ReportStatus.OK
    return report


# ---------------------------------------------------------------------------
# 混合弱型不等式
# ---------------------------------------------------------------------------

def verify_theorem_max(
    fs: Sequence[SampledFunction],
    us: Sequence[Weight],
    v: Weight,
    alpha: float,
    mode: Optional[str] = None,
    family: CubeFamily = CubeFamily.ALL_CUBES,
) -> InequalityReport:
    """‖M_α(f⃗)/v‖_{L^{q,∞}(ν v^q)} <= C Π‖f_i‖_{L^1(u_i)}"""
    grid = _grid_of(fs, us, v)
    m = len(fs)
    if len(us) != m:
        raise VerificationError("関数と重みの個数が一致しません")
    q = q_exponent(m, grid.dim, alpha)
    evidence = hypothesis_check(us, v, alpha, mode, family)
    values = maximal(fs, OperatorSpec(m=m, alpha=alpha, family=family)).values
    result = weak_norm(_quotient(values, v), _nu_measure(us, v, q), q)
    rhs = math.prod(weighted_l1(f, u) for f, u in zip(fs, us))
    return _report(
        TheoremId.THM_MAX, _params(m, grid, alpha, family, mode), result.value, rhs, evidence, result.ladder
    )


def verify_maximal_alpha0(
    fs: Sequence[SampledFunction],
    ws: Sequence[Weight],
    v: Weight,
    mode: Optional[str] = None,
    family: CubeFamily = CubeFamily.ALL_CUBES,
) -> InequalityReport:
    """
    α = 0 の多重最大関数の混合不等式（q = 1/m）

    ‖M(f⃗)/v‖_{L^{1/m,∞}(ν v^{1/m})} <= C Π‖f_i‖_{L^1(w_i)}, ν = Π w_i^{1/m}
    """
    grid = _grid_of(fs, ws, v)
    m = len(fs)
    q = 1.0 / m
    evidence: List[HypothesisEvidence] = []
    for current in _check_mode(mode):
        if current == "A":
            measure = WeightedMeasure.from_weights(list(ws) + [v], [q] * (m + 1))
            evidence.append(_evidence("A(1,...,1)[w]", "A", multilinear_ap_constant(ws, [1.0] * m, family)))
            evidence.append(_evidence("Ainf[nu v^{1/m}]", "A", ainf_proxy(v.with_values(measure.density), family)))
        else:
            for i, w in enumerate(ws, start=1):
                evidence.append(_evidence(f"A1[w_{i}]", "B", a1_constant(w, family)))
            evidence.append(_evidence("Ainf[v]", "B", ainf_proxy(v, family)))
    values = multilinear_maximal(fs, family).values
    measure = WeightedMeasure.from_weights(list(ws) + [v], [q] * (m + 1))
    result = weak_norm(_quotient(values, v), measure, q)
    rhs = math.prod(weighted_l1(f, w) for f, w in zip(fs, ws))
    return _report(
        TheoremId.THM_MAX_ALPHA0, _params(m, grid, 0.0, family, mode, q=q), result.value, rhs, evidence, result.ladder
    )


def verify_bcp_p1(
    g: SampledFunction,
    big_u: Weight,
    v: Weight,
    alpha: float,
    family: CubeFamily = CubeFamily.ALL_CUBES,
) -> InequalityReport:
    """
    一重の p = 1 の混合不等式（線形の分数最大関数で独立に計算）

    U v^q{M_α(g v)/v > t}^{1/q} <= (C/t) ∫|g| U^{1/q} v, q = n/(n-α)
    """
    grid = _grid_of([g], [big_u], v)
    q = q_exponent(1, grid.dim, alpha)
    gv = g.with_values(g.values * v.values)
    values = fractional_maximal_linear(gv, alpha, family).values
    measure = WeightedMeasure(grid, big_u.values * v.values ** q)
    result = weak_norm(_quotient(values, v), measure, q)
    rhs = weighted_l1(g, big_u.with_values(big_u.values ** (1.0 / q) * v.values))
    return _report(TheoremId.BCP_P1, _params(1, grid, alpha, family), result.value, rhs, (), result.ladder)


def verify_theorem_imax(
    fs: Sequence[SampledFunction],
    us: Sequence[Weight],
    v: Weight,
    alpha: float,
    mode: Optional[str] = None,
    family: CubeFamily = CubeFamily.ALL_CUBES,
    override_guards: bool = False,
    *,
    source_us: Sequence[Weight],
) -> InequalityReport:
    """
    ‖I_α(f⃗)/v‖_{L^{q,∞}(ν v^q)} <= C Π‖f_i‖_{L^1(u_i)}

    I_α はずらした評価点で計算するので、仮定と ν v^q に使う us, v はその点（offset=TARGET_OFFSET）で、
    右辺の ∫f_i u_i に使う source_us は f_i と同じセル中心で標本化しておく
    """
    grid = _grid_of(fs, us, v)
    m = len(fs)
    _check_offsets(list(us) + [v], TARGET_OFFSET)
    q = q_exponent(m, grid.dim, alpha)
    sources = _source_weights(fs, source_us)
    evidence = hypothesis_check(us, v, alpha, mode, family)
    values = fractional_integral(fs, alpha, override_guards).values
    result = weak_norm(_quotient(values, v), _nu_measure(us, v, q), q)
    rhs = math.prod(weighted_l1(f, u) for f, u in zip(fs, sources))
    return _report(
        TheoremId.THM_IMAX, _params(m, grid, alpha, family, mode), result.value, rhs, evidence, result.ladder
    )


def verify_extrapolation(
    fs: Sequence[SampledFunction],
    us: Sequence[Weight],
    v: Weight,
    alpha: float,
    family: CubeFamily = CubeFamily.ALL_CUBES,
    override_guards: bool = False,
) -> InequalityReport:
    """‖I_α(f⃗)/v‖_{L^{q,∞}(ν v^q)} <= C ‖M_α(f⃗)/v‖_{L^{q,∞}(ν v^q)}（両辺同じ測度・同じ評価点）"""
    grid = _grid_of(fs, us, v)
    m = len(fs)
    _check_offsets(list(us) + [v], TARGET_OFFSET)
    q = q_exponent(m, grid.dim, alpha)
    evidence = extrapolation_hypotheses(us, v, alpha, family)
    measure = _nu_measure(us, v, q)
    integral = fractional_integral(fs, alpha, override_guards).values
    maximal_values = maximal(fs, OperatorSpec(m=m, alpha=alpha, family=family)).values
    lhs = weak_norm(_quotient(integral, v), measure, q)
    rhs = weak_norm(_quotient(maximal_values, v), measure, q)
    report = _report(
        TheoremId.THM_EXTRAP,
        _params(m, grid, alpha, family, "extrapolation"),
        lhs.value,
        rhs.value,
        evidence,
        lhs.ladder,
    )
    report.modes_satisfied = ["extrapolation"]
    return report


def verify_moen(
    fs: Sequence[SampledFunction],
    w: Weight,
    alpha: float,
    s: float = 1.0,
    family: CubeFamily = CubeFamily.ALL_CUBES,
    override_guards: bool = False,
) -> InequalityReport:
    """
    ∫|I_α f⃗|^s w <= C ∫ (M_α f⃗)^s w（w ∈ A_∞）

    details に s ∈ {1/2, 1, 2} それぞれの経験定数も残す
    """
    grid = _grid_of(fs, [w], None)
    m = len(fs)
    if not s > 0:
        raise VerificationError(f"指数 s は正でなければなりません: s={s}")
    _check_offsets([w], TARGET_OFFSET)
    evidence = [_evidence("Ainf[w]", "Ainf", ainf_proxy(w, family))]
    integral = fractional_integral(fs, alpha, override_guards).values
    maximal_values = maximal(fs, OperatorSpec(m=m, alpha=alpha, family=family)).values
    details: Dict[str, float] = {}
    for exponent in sorted(set(MOEN_EXPONENTS) | {float(s)}):
        top = weighted_lp(integral, w, exponent)
        bottom = weighted_lp(maximal_values, w, exponent)
        if bottom > 0:
            details[f"constant_s={exponent!r}"] = top / bottom
    lhs = weighted_lp(integral, w, s)
    rhs = weighted_lp(maximal_values, w, s)
    report = _report(
        TheoremId.MOEN_A1, _params(m, grid, alpha, family, "Ainf", s=float(s)), lhs, rhs, evidence, details=details
    )
    report.modes_satisfied = ["Ainf"]
    return report


def verify_sawyer(
    f: SampledFunction,
    u: Weight,
    v: Weight,
    mode: Optional[str] = None,
    family: CubeFamily = CubeFamily.ALL_CUBES,
) -> InequalityReport:
    """
    uv{M(fv)/v > t} <= (C/t) ∫|f| u v（n = 1）

    モード A: u, v ∈ A_1、モード B: u ∈ A_1 かつ uv ∈ A_∞
    """
    grid = _grid_of([f], [u], v)
    if grid.dim != 1:
        raise VerificationError("この混合不等式は n = 1 のみが対象です")
    uv = u.with_values(u.values * v.values)
    evidence: List[HypothesisEvidence] = []
    for current in _check_mode(mode):
        evidence.append(_evidence("A1[u]", current, a1_constant(u, family)))
        if current == "A":
            evidence.append(_evidence("A1[v]", "A", a1_constant(v, family)))
        else:
            evidence.append(_evidence("Ainf[uv]", "B", ainf_proxy(uv, family)))
    fv = f.with_values(f.values * v.values)
    values = maximal([fv], OperatorSpec(m=1, alpha=0.0, family=family)).values
    result = weak_norm(_quotient(values, v), WeightedMeasure(grid, uv.values), 1.0)
    rhs = weighted_l1(f, uv)
    return _report(
        TheoremId.SAWYER11, _params(1, grid, 0.0, family, mode, q=1.0), result.value, rhs, evidence, result.ladder
    )


def _check_vector_exponent(r: float, q: float) -> None:
    if r == 2.0:
        return
    if not (q < r < 2.0):
        raise VerificationError(f"r は r = 2 か q < r < 2 でなければなりません: r={r}, q={q}")


def _lr_aggregate(values: Sequence[np.ndarray], r: float) -> np.ndarray:
    total = np.zeros_like(values[0])
    for item in values:
        total = total + np.abs(item) ** r
    return total ** (1.0 / r)


def verify_vector_valued(
    families: Sequence[Sequence[SampledFunction]],
    us: Sequence[Weight],
    v: Weight,
    alpha: float,
    r: float,
    mode: Optional[str] = None,
    family: CubeFamily = CubeFamily.ALL_CUBES,
    override_guards: bool = False,
    *,
    source_us: Sequence[Weight],
) -> InequalityReport:
    """
    ‖(Σ_{k⃗} |I_α(f^1_{k_1},…,f^m_{k_m})/v|^r)^{1/r}‖_{L^{q,∞}(ν v^q)}
        <= C Π‖(Σ_k |f^i_k|^r)^{1/r}‖_{L^1(u_i)}

    us, v は I_α の評価点で、右辺用の source_us は f と同じセル中心で標本化しておく
    """
    if not families or any(not slot for slot in families):
        raise VerificationError("各スロットに一つ以上の関数が必要です")
    if any(len(slot) > MAX_FAMILY_SIZE for slot in families):
        raise VerificationError(f"各スロットの関数は {MAX_FAMILY_SIZE} 個までです")
    grid = _grid_of([f for slot in families for f in slot], us, v)
    m = len(families)
    _check_offsets(list(us) + [v], TARGET_OFFSET)
    q = q_exponent(m, grid.dim, alpha)
    _check_vector_exponent(r, q)
    sources = _source_weights([slot[0] for slot in families], source_us)
    evidence = hypothesis_check(us, v, alpha, mode, family)

    images = [
        fractional_integral(list(members), alpha, override_guards).values
        for members in cartesian(*families)
    ]
    aggregate = _lr_aggregate([_quotient(image, v) for image in images], r)
    result = weak_norm(aggregate, _nu_measure(us, v, q), q)
    rhs = 1.0
    for slot, u in zip(families, sources):
        slot_aggregate = slot[0].with_values(_lr_aggregate([f.values for f in slot], r))
        rhs *= weighted_l1(slot_aggregate, u)
    return _report(
        TheoremId.VECTOR_VALUED42,
        _params(m, grid, alpha, family, mode, r=float(r)),
        result.value,
        rhs,
        evidence,
        result.ladder,
    )
