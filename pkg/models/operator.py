from pydantic import BaseModel, Field

from models.lattice import CubeFamily


class OperatorSpec(BaseModel):
    """多重（分数）作用素の指定"""
    m: int = Field(..., ge=1, description="多重度 m")
    alpha: float = Field(..., ge=0, description="分数次数 α（0 <= α < mn、I_α では 0 < α）")
    family: CubeFamily = Field(CubeFamily.ALL_CUBES, description="最大作用素の sup を取る立方体族")

    class Config:
        frozen = True

    def q(self, n: int) -> float:
        """q = n / (mn - α)"""
        return n / (self.m * n - self.alpha)
