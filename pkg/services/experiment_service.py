"""
細分化列 N_1 < N_2 < ... に沿った実験の実行
設定の定理インスタンス・重みクラス要求を格子ごとに標本化して評価し、判定をまとめる
"""
import logging
import math
from typing import Dict, List, Sequence

from models.function import SampledFunction, Weight
from models.lattice import CubeFamily, Grid
from models.report import (
    INTEGRAL_THEOREMS,
    ConstantResult,
    HypothesisEvidence,
    InequalityReport,
    InstanceResult,
    MuckenhouptReport,
    RefinementSeries,
    ReportStatus,
    StabilityVerdict,
    TheoremId,
    TheoremParams,
)
from models.run_config import RunConfig, TheoremInstance, WeightClassRequest
from services.exceptions import VerificationError
from services.operator_service import TARGET_OFFSET, q_exponent
from services.stability_service import StabilityAssessor, over_grids, refinement_grids
from services.verify_service import (
    lemma_pointwise_report,
    proof_chain_report,
    verify_bcp_p1,
    verify_extrapolation,
    verify_maximal_alpha0,
    verify_moen,
    verify_sawyer,
    verify_theorem_imax,
    verify_theorem_max,
    verify_vector_valued,
)
from services.weight_service import (
    a1_constant,
    ainf_proxy,
    ap_constant,
    check_theorem23,
    check_theorem23_refined,
    multilinear_ap_constant,
    sample,
    sample_function,
    stable_constant_verdict,
    theorem23_agreement,
)

logger = logging.getLogger(__name__)

# 判定に数える仮定のモード（"reference" などの参考値は数えない）
GATING_MODES = ("A", "B", "extrapolation", "Ainf")

PASSING = (StabilityVerdict.STABLE, StabilityVerdict.UNASSESSED)


class ExperimentService:
    """設定一つ分の格子列・立方体族・判定しきい値をまとめて持つ実行器"""

    def __init__(self, config: RunConfig, override_guards: bool = False):
        self.config = config
        self.family: CubeFamily = config.family
        self.override_guards = override_guards
        self.assessor = StabilityAssessor(config.stability)
        self.grids: List[Grid] = refinement_grids(
            config.grid.dim, config.grid.half_width, config.grid.cells_per_axis
        )

    @property
    def cells(self) -> List[int]:
        return [g.cells_per_axis for g in self.grids]

    # ------------------------------------------------------------------
    # 定理インスタンス
    # ------------------------------------------------------------------

    def run_instance(self, instance: TheoremInstance) -> InstanceResult:
        """全格子で評価し、仮定と経験定数の細分化判定を付ける"""
        logger.info(f"インスタンス {instance.id}（{instance.theorem.value}）を N={self.cells} で評価します")
        reports = over_grids(self.grids, lambda grid: self.evaluate(instance, grid))
        for report in reports:
            report.instance_id = instance.id
        return self._aggregate(instance, reports)

    def evaluate(self, instance: TheoremInstance, grid: Grid) -> InequalityReport:
        """単一格子での検証"""
        theorem = instance.theorem
        alpha = self.config.instance_alpha(instance)
        offset = TARGET_OFFSET if theorem in INTEGRAL_THEOREMS else 0.0
        fs = [sample_function(f, grid) for f in instance.functions]
        us = [sample(u, grid, offset) for u in instance.u]
        v = sample(instance.v, grid, offset)
        # 右辺 ∫f_i u_i は f_i と同じセル中心の u_i で
        source_us = us if offset == 0.0 else [sample(u, grid) for u in instance.u]

        if theorem == TheoremId.LEMMA_POINTWISE:
            return lemma_pointwise_report(fs, us, alpha, self.family)
        if theorem == TheoremId.PROOF_CHAIN:
            return proof_chain_report(fs, us, v, alpha, self.family)
        if theorem == TheoremId.THM_MAX:
            return verify_theorem_max(fs, us, v, alpha, instance.mode, self.family)
        if theorem == TheoremId.THM_MAX_ALPHA0:
            return verify_maximal_alpha0(fs, us, v, instance.mode, self.family)
        if theorem == TheoremId.BCP_P1:
            return self._bcp(fs, us, v, alpha)
        if theorem == TheoremId.THM_IMAX:
            return verify_theorem_imax(
                fs, us, v, alpha, instance.mode, self.family, self.override_guards, source_us=source_us
            )
        if theorem == TheoremId.THM_EXTRAP:
            return verify_extrapolation(fs, us, v, alpha, self.family, self.override_guards)
        if theorem == TheoremId.MOEN_A1:
            if instance.w is None:
                raise VerificationError(f"{instance.id}: MoenA1 には重み w が必要です")
            w = sample(instance.w, grid, offset)
            return verify_moen(fs, w, alpha, instance.s, self.family, self.override_guards)
        if theorem == TheoremId.SAWYER11:
            _require_slots(instance, fs, us, 1)
            return verify_sawyer(fs[0], us[0], v, instance.mode, self.family)
        if theorem == TheoremId.VECTOR_VALUED42:
            if instance.vector_functions is None or instance.r is None:
                raise VerificationError(f"{instance.id}: VectorValued42 には vector_functions と r が必要です")
            families = [[sample_function(f, grid) for f in slot] for slot in instance.vector_functions]
            return verify_vector_valued(
                families, us, v, alpha, instance.r, instance.mode, self.family, self.override_guards,
                source_us=source_us,
            )
        if theorem == TheoremId.THM23_CHAR:
            return self._theorem23(instance, us, grid)
        raise VerificationError(f"未対応の定理です: {theorem.value}")

    def _bcp(self, fs: Sequence[SampledFunction], us: Sequence[Weight], v: Weight, alpha: float) -> InequalityReport:
        """g = f/v, U = u^q として一重 p=1 の経路で評価"""
        if len(fs) != 1 or len(us) != 1:
            raise VerificationError("BcpP1 は m = 1 のみが対象です")
        q = q_exponent(1, v.grid.dim, alpha)
        g = fs[0].with_values(fs[0].values / v.values)
        return verify_bcp_p1(g, us[0].power(q), v, alpha, self.family)

    def _theorem23(self, instance: TheoremInstance, us: Sequence[Weight], grid: Grid) -> InequalityReport:
        """A_P⃗ 定数と、特徴付けの線形クラス定数を仮定の証拠として並べる"""
        exponents = instance.exponents or [1.0] * len(us)
        result = check_theorem23(us, exponents, self.family)
        evidence = [HypothesisEvidence(name="AvecP[w]", mode="AvecP", report=result.avec_p)]
        evidence.append(HypothesisEvidence(name="nu_w", mode="linear", report=result.nu_class))
        evidence.extend(
            HypothesisEvidence(name=f"component[{i}]", mode="linear", report=report)
            for i, report in enumerate(result.components, start=1)
        )
        return InequalityReport(
            theorem_id=TheoremId.THM23_CHAR,
            params=TheoremParams(
                m=len(us),
                n=grid.dim,
                alpha=0.0,
                q=1.0 / sum(1.0 / p for p in exponents),
                cells_per_axis=grid.cells_per_axis,
                half_width=grid.half_width,
                family=self.family,
            ),
            hypothesis_evidence=evidence,
            lhs=result.avec_p.constant,
            rhs=max([result.nu_class.constant] + [r.constant for r in result.components]),
        )

    def _aggregate(self, instance: TheoremInstance, reports: List[InequalityReport]) -> InstanceResult:
        last = reports[-1]
        hypothesis_series: List[RefinementSeries] = []
        for index, evidence in enumerate(last.hypothesis_evidence):
            history = [r.hypothesis_evidence[index].report for r in reports]
            series = self.assessor.series(evidence.name, self.cells, [h.constant for h in history])
            series.verdict = stable_constant_verdict(history, self.assessor)
            evidence.series = series
            evidence.report.verdict = series.verdict
            hypothesis_series.append(series)

        modes = _passing_modes(last.hypothesis_evidence)
        evaluated = sorted({e.mode for e in last.hypothesis_evidence if e.mode in GATING_MODES})
        last.modes_satisfied = modes

        constants = [r.empirical_constant for r in reports]
        constant_series = None
        if all(c is not None for c in constants):
            constant_series = self.assessor.series("empirical_constant", self.cells, constants, spread=True)

        statuses = [r.status for r in reports]
        if ReportStatus.VIOLATION in statuses:
            status = ReportStatus.VIOLATION
        elif all(s == ReportStatus.DEGENERATE for s in statuses):
            status = ReportStatus.DEGENERATE
        elif evaluated and not modes:
            status = ReportStatus.HYPOTHESIS_UNSTABLE
        else:
            status = ReportStatus.OK
        if last.status == ReportStatus.OK:
            last.status = status

        needs_review = False
        if status == ReportStatus.OK and constant_series is not None:
            needs_review = constant_series.verdict not in PASSING
        if instance.theorem == TheoremId.THM23_CHAR:
            verdicts = [e.report.verdict for e in last.hypothesis_evidence]
            agree = theorem23_agreement(verdicts[0], verdicts[1:])
            last.details["verdicts_agree"] = 1.0 if agree else 0.0
            needs_review = not agree
        if needs_review:
            logger.warning(f"インスタンス {instance.id}: 要確認（経験定数 {constants}）")

        logger.info(
            f"インスタンス {instance.id}: 状態={status.value} モード={modes} "
            f"定数判定={constant_series.verdict.value if constant_series else '-'}"
        )
        return InstanceResult(
            instance_id=instance.id,
            theorem_id=instance.theorem,
            reports=reports,
            constant_series=constant_series,
            hypothesis_series=hypothesis_series,
            modes_satisfied=modes,
            status=status,
            needs_review=needs_review,
        )

    # ------------------------------------------------------------------
    # 重みクラス定数
    # ------------------------------------------------------------------

    def run_constants(self, request: WeightClassRequest) -> ConstantResult:
        """要求一つ分の定数を全格子で計算して判定を付ける"""
        if request.weight_class == "Thm23":
            report = check_theorem23_refined(
                request.weights, request.exponents, self.family, self.grids, self.assessor
            )
            return ConstantResult(
                label=request.label,
                weight_class=request.weight_class,
                reports=[report.avec_p],
                theorem23=report,
                status=_constant_status([report.avec_p, report.nu_class] + report.components),
            )
        reports = over_grids(self.grids, lambda grid: self._class_constant(request, grid))
        series = self.assessor.series(request.label, self.cells, [r.constant for r in reports])
        series.verdict = stable_constant_verdict(reports, self.assessor)
        reports[-1].verdict = series.verdict
        logger.info(f"{request.label}（{request.weight_class}）: 定数={series.constants} 判定={series.verdict.value}")
        return ConstantResult(
            label=request.label,
            weight_class=request.weight_class,
            reports=reports,
            series=series,
            status=_constant_status(reports),
        )

    def _class_constant(self, request: WeightClassRequest, grid: Grid) -> MuckenhouptReport:
        weights = [sample(f, grid) for f in request.weights]
        if request.weight_class == "A1":
            return a1_constant(weights[0], self.family)
        if request.weight_class == "Ap":
            return ap_constant(weights[0], request.p, self.family)
        if request.weight_class == "AinfProxy":
            return ainf_proxy(weights[0], self.family, request.p_ladder)
        return multilinear_ap_constant(weights, request.exponents, self.family)


def _require_slots(instance: TheoremInstance, fs: Sequence, us: Sequence, m: int) -> None:
    if len(fs) != m or len(us) != m:
        raise VerificationError(f"{instance.id}: 関数と重み u は {m} 個ずつ必要です")


def _passing_modes(evidence: Sequence[HypothesisEvidence]) -> List[str]:
    """各モードの仮定が全て stable（単一格子では unassessed）なら通過"""
    by_mode: Dict[str, List[StabilityVerdict]] = {}
    for item in evidence:
        if item.mode in GATING_MODES:
            by_mode.setdefault(item.mode, []).append(item.report.verdict)
    return sorted(mode for mode, verdicts in by_mode.items() if all(v in PASSING for v in verdicts))


def _constant_status(reports: Sequence[MuckenhouptReport]) -> ReportStatus:
    if any(not math.isfinite(r.constant) for r in reports):
        return ReportStatus.DEGENERATE
    return ReportStatus.OK
