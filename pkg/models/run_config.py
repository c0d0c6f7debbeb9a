from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from models.function import ConstantFamily, FamilySpec
from models.lattice import CubeFamily
from models.report import INTEGRAL_THEOREMS, TheoremId
from models.search import HillClimbSettings, SearchSpace


class GridSpec(BaseModel):
    """格子の指定（細分化列 N_1 < N_2 < ...）"""
    dim: int = Field(1, ge=1, le=2, description="次元 n")
    half_width: float = Field(1.0, gt=0, description="領域 [-R, R)^n の R")
    cells_per_axis: List[int] = Field([64, 128, 256], min_length=1, description="軸あたりのセル数 N の列")

    @field_validator("cells_per_axis")
    @classmethod
    def check_sorted(cls, values: List[int]) -> List[int]:
        if values != sorted(set(values)):
            raise ValueError("N の列は重複なしの昇順で指定してください")
        return values


class OperatorSettings(BaseModel):
    """既定の作用素パラメータ（インスタンスごとに上書き可能）"""
    m: int = Field(1, ge=1, le=3, description="多重度 m")
    alpha: float = Field(0.0, ge=0, description="分数次数 α")


class WeightClassRequest(BaseModel):
    """constants コマンドで評価する重みクラス"""
    label: str
    weight_class: str = Field(..., pattern="^(A1|Ap|AinfProxy|AvecP|Thm23)$")
    weights: List[FamilySpec] = Field(..., min_length=1, description="AvecP / Thm23 では m 個、それ以外は 1 個")
    p: Optional[float] = Field(None, description="Ap の p")
    exponents: Optional[List[float]] = Field(None, description="AvecP / Thm23 の P⃗")
    p_ladder: Optional[List[float]] = Field(None, description="AinfProxy の p のはしご")

    @model_validator(mode="after")
    def check_arguments(self):
        if self.weight_class == "Ap" and (self.p is None or self.p <= 1):
            raise ValueError("Ap には p > 1 が必要です")
        if self.weight_class in ("AvecP", "Thm23"):
            if not self.exponents or len(self.exponents) != len(self.weights):
                raise ValueError("exponents は weights と同じ個数が必要です")
        elif len(self.weights) != 1:
            raise ValueError(f"{self.weight_class} の weights は 1 個です")
        return self


class TheoremInstance(BaseModel):
    """verify コマンドで検証する定理インスタンス"""
    id: str = Field(..., min_length=1, description="インスタンス ID（出力ファイル名に使う）")
    theorem: TheoremId
    functions: List[FamilySpec] = Field(default_factory=list, description="f_1..f_m（VectorValued42 では未使用）")
    vector_functions: Optional[List[List[FamilySpec]]] = Field(None, description="スロットごとの関数族 f^i_k")
    u: List[FamilySpec] = Field(default_factory=list, description="u_i（ThmMaxAlpha0 では w_i、Sawyer11 では u）")
    v: FamilySpec = Field(default_factory=lambda: ConstantFamily(value=1.0))
    w: Optional[FamilySpec] = Field(None, description="MoenA1 の重み w")
    alpha: Optional[float] = Field(None, ge=0, description="省略時は operator.alpha")
    mode: Optional[str] = Field(None, pattern="^(A|B)$", description="省略時は両モード")
    exponents: Optional[List[float]] = Field(None, description="Thm23Char の P⃗")
    r: Optional[float] = Field(None, gt=0)
    s: float = Field(1.0, gt=0)

    def slots(self) -> int:
        if self.vector_functions is not None:
            return len(self.vector_functions)
        return len(self.functions) or len(self.u)


def _check_alpha(label: str, theorem: TheoremId, alpha: float, m: int, n: int) -> None:
    if not alpha < m * n:
        raise ValueError(f"{label}: 0 <= α < mn が必要です（α={alpha}, m={m}, n={n}）")
    if theorem in INTEGRAL_THEOREMS and not alpha > 0:
        raise ValueError(f"{label}: {theorem.value} は I_α を使うので α > 0 が必要です")


class OracleSettings(BaseModel):
    """oracle-check コマンドの設定"""
    seeds: int = Field(5, ge=1, description="乱数シードの個数")
    cases: List[List[int]] = Field(
        [[1, 1, 256], [2, 1, 128], [3, 1, 64], [2, 2, 16]],
        description="(m, n, N) の組",
    )
    tolerance: float = Field(1e-10, gt=0)
    inject_fault: bool = Field(False, description="累積和表を意図的に壊す（検査の検査）")


class RunConfig(BaseModel):
    """実行設定（JSON から読み込む）"""
    grid: GridSpec = Field(default_factory=GridSpec)
    family: CubeFamily = CubeFamily.ALL_CUBES
    operator: OperatorSettings = Field(default_factory=OperatorSettings)
    constants: List[WeightClassRequest] = Field(default_factory=list)
    instances: List[TheoremInstance] = Field(default_factory=list)
    sweep: Optional[SearchSpace] = None
    search: Optional[HillClimbSettings] = None
    oracle: OracleSettings = Field(default_factory=OracleSettings)
    stability: Dict[str, float] = Field(default_factory=dict, description="判定しきい値の上書き")
    seed: int = Field(0, ge=0, description="乱数シード")
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def check_operator_range(self):
        n = self.grid.dim
        if not self.operator.alpha < self.operator.m * n:
            raise ValueError(f"operator: 0 <= α < mn が必要です（α={self.operator.alpha}, m={self.operator.m}, n={n}）")
        for instance in self.instances:
            alpha = self.operator.alpha if instance.alpha is None else instance.alpha
            _check_alpha(f"instances[{instance.id}]", instance.theorem, alpha, instance.slots() or self.operator.m, n)
        if self.sweep is not None:
            _check_alpha("sweep", self.sweep.theorem, self.sweep.alpha, self.sweep.m, n)
        unknown = set(self.stability) - {"stable_ratio", "divergent_ratio", "log_growth_ratio", "min_relative_growth"}
        if unknown:
            raise ValueError(f"stability に未知のキーがあります: {sorted(unknown)}")
        ids = [instance.id for instance in self.instances]
        if len(ids) != len(set(ids)):
            raise ValueError("インスタンス ID が重複しています")
        return self

    def instance_alpha(self, instance: TheoremInstance) -> float:
        return self.operator.alpha if instance.alpha is None else instance.alpha
