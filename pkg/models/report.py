from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from models.lattice import Cube, CubeFamily


class StabilityVerdict(str, Enum):
    """細分化に対する定数のふるまい"""
    STABLE = "stable"
    DIVERGENT = "divergent"
    INCONCLUSIVE = "inconclusive"
    UNASSESSED = "unassessed"


class TheoremId(str, Enum):
    SAWYER11 = "Sawyer11"
    LEMMA_POINTWISE = "LemmaPointwise"
    THM_MAX = "ThmMax"
    THM_MAX_ALPHA0 = "ThmMaxAlpha0"
    BCP_P1 = "BcpP1"
    THM_IMAX = "ThmIMax"
    THM_EXTRAP = "ThmExtrap"
    MOEN_A1 = "MoenA1"
    VECTOR_VALUED42 = "VectorValued42"
    THM23_CHAR = "Thm23Char"
    PROOF_CHAIN = "ProofChain"


# I_α を使う定理（0 < α、重みはずらした評価点で標本化する）
INTEGRAL_THEOREMS = frozenset({
    TheoremId.THM_IMAX,
    TheoremId.THM_EXTRAP,
    TheoremId.MOEN_A1,
    TheoremId.VECTOR_VALUED42,
})


class ReportStatus(str, Enum):
    OK = "OK"
    HYPOTHESIS_UNSTABLE = "HypothesisUnstable"
    DEGENERATE = "Degenerate"
    VIOLATION = "Violation"


class MuckenhouptReport(BaseModel):
    """重みクラス定数の推定結果"""
    weight_class: str = Field(..., description="A1 | Ap | AinfProxy | AvecP")
    p: Optional[float] = Field(None, description="A_p の p（A_∞ では到達した p）")
    exponents: Optional[List[float]] = Field(None, description="A_P⃗ の指数ベクトル")
    constant: float = Field(..., description="有限族上の sup の値")
    attaining_cube: Optional[Cube] = Field(None, description="sup を与えた立方体")
    family: CubeFamily
    cells_per_axis: int
    ladder: Optional[Dict[str, float]] = Field(None, description="A_∞ 代理の p ごとの定数")
    nonintegrable: bool = False
    verdict: StabilityVerdict = StabilityVerdict.UNASSESSED


class RefinementSeries(BaseModel):
    """格子細分化 N→2N→4N に沿った定数列と判定"""
    label: str
    cells_per_axis: List[int]
    constants: List[float]
    ratios: List[float]
    verdict: StabilityVerdict


class Theorem23Report(BaseModel):
    """A_P⃗ の特徴付け（各成分の線形クラス）の比較結果"""
    exponents: List[float]
    avec_p: MuckenhouptReport
    nu_class: MuckenhouptReport = Field(..., description="ν_w の A_{mp} 定数")
    components: List[MuckenhouptReport] = Field(..., description="w_i^{1-p_i'} の A_{mp_i'}（p_i=1 では w_i^{1/m} の A_1）")
    verdicts_agree: Optional[bool] = Field(None, description="細分化判定が両側で一致したか")


class WeakNormResult(BaseModel):
    """弱 L^{q,∞}(μ) 準ノルム"""
    q: float
    value: float
    attaining_level: Optional[float] = None
    ladder: List[Tuple[float, float]] = Field(default_factory=list, description="(水準 v, v·μ{f≥v}^{1/q}) の列")


class HypothesisEvidence(BaseModel):
    """定理の仮定の一つに対する数値的な証拠"""
    name: str = Field(..., description="条件名（例: 'A1(u_1^{mq})'）")
    mode: str = Field(..., description="A | B | extrapolation")
    report: MuckenhouptReport
    series: Optional[RefinementSeries] = None


class TheoremParams(BaseModel):
    m: int
    n: int
    alpha: float
    q: float
    r: Optional[float] = None
    s: Optional[float] = None
    cells_per_axis: int
    half_width: float
    family: CubeFamily
    mode: Optional[str] = None
    kernel_norm: str = "euclidean"


class InequalityReport(BaseModel):
    """一つの定理インスタンスの検証結果"""
    theorem_id: TheoremId
    instance_id: str = ""
    params: TheoremParams
    hypothesis_evidence: List[HypothesisEvidence] = Field(default_factory=list)
    modes_satisfied: List[str] = Field(default_factory=list)
    lhs: float
    rhs: float
    empirical_constant: Optional[float] = None
    sweep: List[Tuple[float, float]] = Field(default_factory=list)
    status: ReportStatus = ReportStatus.OK
    details: Dict[str, float] = Field(default_factory=dict)


class InstanceResult(BaseModel):
    """細分化列 N_1 < N_2 < ... に渡る同一インスタンスの検証結果"""
    instance_id: str
    theorem_id: TheoremId
    reports: List[InequalityReport]
    constant_series: Optional[RefinementSeries] = None
    hypothesis_series: List[RefinementSeries] = Field(default_factory=list)
    modes_satisfied: List[str] = Field(default_factory=list)
    status: ReportStatus = ReportStatus.OK
    needs_review: bool = Field(False, description="仮定は安定なのに経験定数が細分化で安定しなかった")


class ConstantResult(BaseModel):
    """constants コマンドの一要求分（格子ごとのレポートと判定）"""
    label: str
    weight_class: str
    reports: List[MuckenhouptReport] = Field(default_factory=list)
    series: Optional[RefinementSeries] = None
    theorem23: Optional[Theorem23Report] = None
    status: ReportStatus = ReportStatus.OK


class OracleCheck(BaseModel):
    """高速経路とオラクルの食い違い（一つの検査ケース）"""
    suite: str = Field(..., description="lattice | operators | norms")
    case: str = Field(..., description="例: 'm=2,n=1,N=128'")
    max_discrepancy: float
    tolerance: float
    passed: bool
