from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from models.lattice import Grid


class Box(BaseModel):
    """半開区間の直積 [lower, upper)"""
    lower: List[float] = Field(..., description="各軸の下端")
    upper: List[float] = Field(..., description="各軸の上端")

    @model_validator(mode="after")
    def check_bounds(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("lower と upper の次元が一致しません")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("lower < upper を満たしていません")
        return self


class ConstantFamily(BaseModel):
    """定数関数 c"""
    kind: Literal["constant"] = "constant"
    value: float = Field(..., description="定数値")


class PowerFamily(BaseModel):
    """べき重み |x|^a"""
    kind: Literal["power"] = "power"
    exponent: float = Field(..., description="指数 a")
    allow_nonintegrable: bool = Field(False, description="a <= -n を許可（局所可積分でない重みの実験用）")


class IndicatorFamily(BaseModel):
    """箱の指示関数（高さ付き）"""
    kind: Literal["indicator"] = "indicator"
    box: Box
    height: float = Field(1.0, description="高さ")


class RandomFamily(BaseModel):
    """一様乱数による関数（シード固定）"""
    kind: Literal["random"] = "random"
    seed: int = 0
    low: float = 0.0
    high: float = 1.0


class ProductFamily(BaseModel):
    """二つの族の積"""
    kind: Literal["product"] = "product"
    left: "FamilySpec"
    right: "FamilySpec"


class SumFamily(BaseModel):
    """族の和"""
    kind: Literal["sum"] = "sum"
    terms: List["FamilySpec"]


class Piece(BaseModel):
    box: Box
    family: "FamilySpec"


class PiecewiseFamily(BaseModel):
    """箱ごとに族を切り替える（先に一致した箱を採用）"""
    kind: Literal["piecewise"] = "piecewise"
    pieces: List[Piece]
    default: Optional["FamilySpec"] = None


FamilySpec = Annotated[
    Union[
        ConstantFamily,
        PowerFamily,
        IndicatorFamily,
        RandomFamily,
        ProductFamily,
        SumFamily,
        PiecewiseFamily,
    ],
    Field(discriminator="kind"),
]

ProductFamily.model_rebuild()
SumFamily.model_rebuild()
Piece.model_rebuild()
PiecewiseFamily.model_rebuild()


class SampledFunction(BaseModel):
    """格子上の非負値関数（セルごとに一つの値）"""
    grid: Grid
    values: np.ndarray
    offset: float = Field(0.0, description="標本点のずらし量（セル幅単位）")

    class Config:
        arbitrary_types_allowed = True

    @field_validator("values")
    @classmethod
    def check_values(cls, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise ValueError("有限でない値が含まれています")
        if np.any(values < 0):
            raise ValueError("負の値が含まれています")
        return values

    @model_validator(mode="after")
    def check_shape(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values の形状 {self.values.shape} が格子 {self.grid.shape} と一致しません")
        return self

    def with_values(self, values: np.ndarray):
        """同じ格子・標本点で値だけ差し替えた新しいインスタンス"""
        return type(self)(grid=self.grid, values=values, offset=self.offset)

    def is_zero(self) -> bool:
        return not np.any(self.values > 0)


class Weight(SampledFunction):
    """格子上の重み（各セルで 0 < w < ∞）"""
    nonintegrable: bool = Field(False, description="局所可積分でない族から標本化されたか")

    @field_validator("values")
    @classmethod
    def check_positive(cls, values: np.ndarray) -> np.ndarray:
        if np.any(values <= 0):
            raise ValueError("重みは各セルで正でなければなりません")
        return values

    def with_values(self, values: np.ndarray):
        return Weight(grid=self.grid, values=values, offset=self.offset, nonintegrable=self.nonintegrable)

    def power(self, exponent: float) -> "Weight":
        """w^t をセルごとに計算"""
        return self.with_values(self.values ** exponent)
