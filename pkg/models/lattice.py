from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, Field


class CubeFamily(str, Enum):
    """上限（sup）を取る立方体族"""
    ALL_CUBES = "all_cubes"
    SHIFTED_DYADIC = "shifted_dyadic"


class Grid(BaseModel):
    """[-R,R)^n の一様格子（セル中心は半セルずらして原点を避ける）"""
    dim: int = Field(..., description="次元 n（1 または 2）")
    half_width: float = Field(..., description="半幅 R")
    cells_per_axis: int = Field(..., description="各軸のセル数 N（2の冪）")

    class Config:
        frozen = True

    @property
    def cell_side(self) -> float:
        return 2.0 * self.half_width / self.cells_per_axis

    @property
    def cell_measure(self) -> float:
        return self.cell_side ** self.dim

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.cells_per_axis,) * self.dim

    @property
    def cell_count(self) -> int:
        return self.cells_per_axis ** self.dim

    def axis_centers(self, offset: float = 0.0) -> np.ndarray:
        """
        各軸の標本点座標

        Args:
            offset: セル幅を単位としたずらし量（0 はセル中心、0.25 は分数積分の評価点）
        """
        k = np.arange(self.cells_per_axis, dtype=np.float64)
        return -self.half_width + (k + 0.5 + offset) * self.cell_side

    def points(self, offset: float = 0.0) -> np.ndarray:
        """標本点座標を shape (*grid.shape, dim) の配列で返す"""
        axes = [self.axis_centers(offset)] * self.dim
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def point_norms(self, offset: float = 0.0) -> np.ndarray:
        """標本点のユークリッドノルム |x|"""
        return np.sqrt(np.sum(self.points(offset) ** 2, axis=-1))

    def contains_cell(self, cell: Tuple[int, ...]) -> bool:
        return len(cell) == self.dim and all(0 <= c < self.cells_per_axis for c in cell)


class Cube(BaseModel):
    """セル境界に揃った立方体（各軸で同じ辺セル数）"""
    origin_cell: Tuple[int, ...] = Field(..., description="各軸の始点セル番号")
    side_cells: int = Field(..., gt=0, description="辺のセル数 s")

    class Config:
        frozen = True

    def contains(self, cell: Tuple[int, ...]) -> bool:
        return all(o <= c < o + self.side_cells for o, c in zip(self.origin_cell, cell))

    def inside(self, grid: Grid) -> bool:
        return len(self.origin_cell) == grid.dim and all(
            0 <= o and o + self.side_cells <= grid.cells_per_axis for o in self.origin_cell
        )

    def slices(self) -> Tuple[slice, ...]:
        return tuple(slice(o, o + self.side_cells) for o in self.origin_cell)

    def measure(self, grid: Grid) -> float:
        """幾何学的な体積 |Q| = (s·h)^n"""
        return (self.side_cells * grid.cell_side) ** grid.dim
