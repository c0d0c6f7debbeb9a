from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from models.report import ReportStatus, TheoremId


class ParameterTarget(str, Enum):
    """探索パラメータが動かす量"""
    U_EXPONENT = "u_exponent"
    V_EXPONENT = "v_exponent"
    F_LOWER = "f_lower"
    F_UPPER = "f_upper"
    F_HEIGHT = "f_height"


class SearchParameter(BaseModel):
    """探索軸一本（範囲と分割数）"""
    target: ParameterTarget
    slot: int = Field(0, ge=0, description="u_i / f_i の添字（v では 0）")
    lower: float
    upper: float
    steps: int = Field(3, ge=2, description="sweep の分割数")

    @model_validator(mode="after")
    def check_bounds(self):
        if self.lower > self.upper:
            raise ValueError(f"{self.name}: lower <= upper を満たしていません")
        return self

    @property
    def name(self) -> str:
        if self.target == ParameterTarget.V_EXPONENT:
            return self.target.value
        return f"{self.target.value}[{self.slot}]"


class SearchSpace(BaseModel):
    """
    重み・関数族のパラメータ空間

    u_i = |x|^{a_i}, v = |x|^b, f_i = height·1_[lower, upper) を動かす
    """
    theorem: TheoremId = TheoremId.THM_MAX
    m: int = Field(1, ge=1, le=3)
    alpha: float = Field(0.0, ge=0)
    mode: Optional[str] = Field(None, pattern="^(A|B)$", description="目的関数に数える仮定のモード")
    parameters: List[SearchParameter] = Field(..., min_length=1)
    integrability_margin: float = Field(0.05, gt=0, description="mq·a > -n + margin")
    min_width: float = Field(0.05, gt=0, description="指示関数の最小幅")
    budget: Optional[int] = Field(None, ge=1, description="評価回数の上限（省略時は LAB_EVALUATION_BUDGET）")

    @model_validator(mode="after")
    def check_names(self):
        names = [p.name for p in self.parameters]
        if len(names) != len(set(names)):
            raise ValueError("探索パラメータが重複しています")
        for p in self.parameters:
            if p.target != ParameterTarget.V_EXPONENT and p.slot >= self.m:
                raise ValueError(f"{p.name}: slot は m 未満でなければなりません")
        return self


class HillClimbSettings(BaseModel):
    """座標ごとの山登り法の設定"""
    initial: Dict[str, float] = Field(default_factory=dict, description="初期値（省略した軸は範囲の中点）")
    max_steps: int = Field(20, ge=1)
    step_scale: float = Field(0.25, gt=0, description="初期ステップ幅（軸の範囲に対する比）")
    decay: float = Field(0.5, gt=0, lt=1, description="却下時のステップ縮小率")
    seed: Optional[int] = Field(None, ge=0, description="省略時は RunConfig.seed")
    warm_start: bool = Field(False, description="同じ探索空間のスイープの最良行から始める")


class SearchEvaluation(BaseModel):
    """一回の評価（パラメータ・目的関数・仮定の判定）"""
    step: int
    params: Dict[str, float]
    objective: Optional[float] = Field(None, description="最細格子での経験定数")
    constants: List[float] = Field(default_factory=list, description="N ごとの経験定数")
    status: ReportStatus
    constant_verdict: str
    verdicts: Dict[str, str] = Field(default_factory=dict, description="仮定の名前 → 細分化判定")
    modes_satisfied: List[str] = Field(default_factory=list)
    stable: bool = Field(False, description="仮定が安定で目的関数に数えるか")
    accepted: bool = False


class SearchState(BaseModel):
    """山登り法の状態と履歴"""
    seed: int
    params: Dict[str, float]
    objective: Optional[float] = None
    best_params: Dict[str, float]
    best_objective: Optional[float] = None
    step_scales: Dict[str, float] = Field(default_factory=dict)
    history: List[SearchEvaluation] = Field(default_factory=list)
