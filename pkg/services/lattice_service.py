"""
格子・立方体族・累積和テーブル
[-R,R)^n の離散化と、立方体上の和・平均・最小値を O(1) で返す前処理を担当
"""
import logging
import math
from functools import lru_cache
from typing import List, Sequence, Tuple, Union

import numpy as np

from models.function import SampledFunction
from models.lattice import Cube, CubeFamily, Grid
from services.exceptions import CubeError, GridError, SampleError, UnsupportedFamilyError

logger = logging.getLogger(__name__)


def _is_power_of_two(value: int) -> bool:
    return value > 0 and (value & (value - 1)) == 0


def _ilog2(value: int) -> int:
    """正の整数の2を底とする対数の整数部分"""
    return int(value).bit_length() - 1


def build_grid(dim: int, half_width: float, cells_per_axis: int) -> Grid:
    """
    格子を生成

    Args:
        dim: 次元 n（1 または 2）
        half_width: 半幅 R > 0
        cells_per_axis: 各軸のセル数 N（4 以上の2の冪）

    Returns:
        セル中心が原点を避ける Grid
    """
    if dim not in (1, 2):
        raise GridError(f"次元は 1 または 2 のみ対応しています: dim={dim}")
    if not (half_width > 0 and math.isfinite(half_width)):
        raise GridError(f"半幅は正の有限値でなければなりません: R={half_width}")
    if not _is_power_of_two(int(cells_per_axis)) or cells_per_axis < 4 or int(cells_per_axis) != cells_per_axis:
        raise GridError(f"セル数は 4 以上の2の冪でなければなりません: N={cells_per_axis}")
    return Grid(dim=dim, half_width=float(half_width), cells_per_axis=int(cells_per_axis))


class CubeSet:
    """立方体の列をベクトル化して保持（origins: (K, n)、sides: (K,)）"""

    def __init__(self, grid: Grid, origins: np.ndarray, sides: np.ndarray):
        self.grid = grid
        self.origins = np.ascontiguousarray(origins, dtype=np.int64).reshape(-1, grid.dim)
        self.sides = np.ascontiguousarray(sides, dtype=np.int64).reshape(-1)
        self.origins.setflags(write=False)
        self.sides.setflags(write=False)

    def __len__(self) -> int:
        return int(self.sides.shape[0])

    def cube(self, index: int) -> Cube:
        return Cube(origin_cell=tuple(int(o) for o in self.origins[index]), side_cells=int(self.sides[index]))

    def cubes(self) -> List[Cube]:
        return [self.cube(i) for i in range(len(self))]

    def measures(self) -> np.ndarray:
        """各立方体の体積 |Q|"""
        return (self.sides * self.grid.cell_side) ** self.grid.dim

    def containing(self, cell: Sequence[int]) -> np.ndarray:
        """セルを含む立方体のインデックス"""
        cell_arr = np.asarray(cell, dtype=np.int64).reshape(1, -1)
        mask = np.all((self.origins <= cell_arr) & (cell_arr < self.origins + self.sides[:, None]), axis=1)
        return np.nonzero(mask)[0]


def _all_intervals(grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    n_cells = grid.cells_per_axis
    starts, lengths = [], []
    for a in range(n_cells):
        s = np.arange(1, n_cells - a + 1)
        starts.append(np.full(s.shape, a))
        lengths.append(s)
    return np.concatenate(starts)[:, None], np.concatenate(lengths)


def _shifted_dyadic(grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    n_cells = grid.cells_per_axis
    rows = []
    for level in range(_ilog2(n_cells) + 1):
        side = 2 ** level
        for t in range(3):
            shift = (t * side) // 3
            # 領域と交わる平行移動コピーを取り、はみ出したものは領域内へ滑らせる
            first = -((shift + side - 1) // side) - 1
            axis_origins = [shift + j * side for j in range(first, n_cells // side + 1)]
            axis_origins = sorted({
                min(max(o, 0), n_cells - side)
                for o in axis_origins
                if o < n_cells and o + side > 0
            })
            mesh = np.meshgrid(*([np.array(axis_origins)] * grid.dim), indexing="ij")
            origins = np.stack([g.ravel() for g in mesh], axis=-1)
            rows.append(np.concatenate([origins, np.full((origins.shape[0], 1), side)], axis=1))
    table = np.unique(np.concatenate(rows), axis=0)
    return table[:, :-1], table[:, -1]


@lru_cache(maxsize=64)
def family_cubes(grid: Grid, family: CubeFamily) -> CubeSet:
    """
    立方体族を列挙

    AllCubes は n=1 のセル境界区間すべて（N(N+1)/2 個）、
    ShiftedDyadic は二進立方体とその 1/3 平行移動コピー 2 組
    """
    if family == CubeFamily.ALL_CUBES:
        if grid.dim != 1:
            raise UnsupportedFamilyError("AllCubes は n=1 のみ対応しています")
        origins, sides = _all_intervals(grid)
    elif family == CubeFamily.SHIFTED_DYADIC:
        origins, sides = _shifted_dyadic(grid)
    else:
        raise UnsupportedFamilyError(f"不明な立方体族: {family}")
    logger.debug(f"立方体族 {family.value} を列挙しました: N={grid.cells_per_axis}, n={grid.dim}, 個数={len(sides)}")
    return CubeSet(grid, origins, sides)


def enumerate_cubes_containing(grid: Grid, family: CubeFamily, cell: Sequence[int]) -> List[Cube]:
    """セルを含む族の立方体を列挙"""
    cell = tuple(int(c) for c in cell)
    if not grid.contains_cell(cell):
        raise CubeError(f"セル {cell} は格子の外です")
    cubes = family_cubes(grid, family)
    return [cubes.cube(int(i)) for i in cubes.containing(cell)]


def _two_sum(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """誤差なし加算 a + b = s + e"""
    s = a + b
    bp = s - a
    e = (a - (s - bp)) + (b - bp)
    return s, e


def _compensated_cumsum(hi: np.ndarray, lo: np.ndarray, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """二倍長（hi, lo）の累積和を axis に沿って計算"""
    hi = np.moveaxis(hi.copy(), axis, 0)
    lo = np.moveaxis(lo.copy(), axis, 0)
    for k in range(1, hi.shape[0]):
        s, e = _two_sum(hi[k - 1], hi[k])
        hi[k] = s
        lo[k] = lo[k - 1] + lo[k] + e
    return np.moveaxis(hi, 0, axis), np.moveaxis(lo, 0, axis)


class PrefixTable:
    """
    累積和テーブル（補償付き summed-area table）と範囲最小値の sparse table

    構築後は不変。cube_sum / cube_min は 1 問い合わせあたり O(1)
    """

    def __init__(self, grid: Grid, values: np.ndarray, sums_hi: np.ndarray, sums_lo: np.ndarray, minima: np.ndarray):
        self.grid = grid
        self.values = values
        self.sums_hi = sums_hi
        self.sums_lo = sums_lo
        # minima[k] は辺 2^k の立方体の最小値（範囲外は +inf）
        self.minima = minima
        for array in (self.values, self.sums_hi, self.sums_lo, self.minima):
            array.setflags(write=False)

    @classmethod
    def from_array(cls, grid: Grid, values: np.ndarray) -> "PrefixTable":
        values = np.array(values, dtype=np.float64)
        if values.shape != grid.shape:
            raise SampleError(f"配列の形状 {values.shape} が格子 {grid.shape} と一致しません")
        if not np.all(np.isfinite(values)):
            raise SampleError("累積和テーブルに有限でない値は使えません")
        if np.any(values < 0):
            raise SampleError("累積和テーブルの値は非負でなければなりません")

        padded_shape = tuple(s + 1 for s in grid.shape)
        hi = np.zeros(padded_shape)
        hi[(slice(1, None),) * grid.dim] = values
        lo = np.zeros(padded_shape)
        for axis in range(grid.dim):
            hi, lo = _compensated_cumsum(hi, lo, axis)

        n_cells = grid.cells_per_axis
        levels = _ilog2(n_cells) + 1
        minima = np.full((levels,) + grid.shape, np.inf)
        minima[0] = values
        for k in range(1, levels):
            half = 2 ** (k - 1)
            valid = n_cells - 2 ** k + 1
            window = (slice(0, valid),) * grid.dim
            current = minima[k - 1][window]
            for axis in range(grid.dim):
                index = [slice(0, valid)] * grid.dim
                index[axis] = slice(half, half + valid)
                current = np.minimum(current, minima[k - 1][tuple(index)])
            if grid.dim == 2:
                current = np.minimum(current, minima[k - 1][half:half + valid, half:half + valid])
            minima[k][window] = current
        return cls(grid, values, hi, lo, minima)

    def corrupted(self, magnitude: float = 1.0) -> "PrefixTable":
        """故障注入用: 累積和の一部を書き換えたコピーを返す"""
        hi = self.sums_hi.copy()
        index = tuple(s // 2 for s in hi.shape)
        hi[index] += magnitude
        return PrefixTable(self.grid, self.values.copy(), hi, self.sums_lo.copy(), self.minima.copy())

    def _check(self, cubes: CubeSet) -> None:
        if len(cubes) == 0:
            return
        if np.any(cubes.origins < 0) or np.any(cubes.origins + cubes.sides[:, None] > self.grid.cells_per_axis):
            raise CubeError("格子からはみ出した立方体が含まれています")

    def cube_sums(self, cubes: CubeSet) -> np.ndarray:
        """各立方体上のセル値の和（セル体積を掛けない）"""
        self._check(cubes)
        o = cubes.origins
        s = cubes.sides
        if self.grid.dim == 1:
            a, b = o[:, 0], o[:, 0] + s
            total, e1 = _two_sum(self.sums_hi[b], -self.sums_hi[a])
            return total + (e1 + (self.sums_lo[b] - self.sums_lo[a]))
        x0, y0 = o[:, 0], o[:, 1]
        x1, y1 = x0 + s, y0 + s
        total, e1 = _two_sum(self.sums_hi[x1, y1], -self.sums_hi[x0, y1])
        total, e2 = _two_sum(total, -self.sums_hi[x1, y0])
        total, e3 = _two_sum(total, self.sums_hi[x0, y0])
        low = self.sums_lo[x1, y1] - self.sums_lo[x0, y1] - self.sums_lo[x1, y0] + self.sums_lo[x0, y0]
        return total + ((e1 + e2 + e3) + low)

    def cube_means(self, cubes: CubeSet) -> np.ndarray:
        """各立方体上の平均 (1/|Q|)∫_Q f"""
        return self.cube_sums(cubes) / cubes.sides.astype(np.float64) ** self.grid.dim

    def cube_mins(self, cubes: CubeSet) -> np.ndarray:
        """各立方体上の最小値（sparse table の重なり2^n個で O(1)）"""
        self._check(cubes)
        k = np.array([_ilog2(int(s)) for s in cubes.sides], dtype=np.int64)
        d = cubes.sides - 2 ** k
        o = cubes.origins
        if self.grid.dim == 1:
            return np.minimum(self.minima[k, o[:, 0]], self.minima[k, o[:, 0] + d])
        x, y = o[:, 0], o[:, 1]
        return np.minimum(
            np.minimum(self.minima[k, x, y], self.minima[k, x + d, y]),
            np.minimum(self.minima[k, x, y + d], self.minima[k, x + d, y + d]),
        )

    def _single(self, cube: Cube) -> CubeSet:
        if not cube.inside(self.grid):
            raise CubeError(f"立方体 {cube} は格子からはみ出しています")
        return CubeSet(self.grid, np.array([cube.origin_cell]), np.array([cube.side_cells]))

    def cube_sum(self, cube: Cube) -> float:
        return float(self.cube_sums(self._single(cube))[0])

    def cube_integral(self, cube: Cube) -> float:
        """∫_Q f = Σ 値 × セル体積"""
        return self.cube_sum(cube) * self.grid.cell_measure

    def cube_min(self, cube: Cube) -> float:
        return float(self.cube_mins(self._single(cube))[0])


def build_prefix(values: Union[SampledFunction, np.ndarray], grid: Grid = None) -> PrefixTable:
    """標本化関数（または格子と配列）から累積和テーブルを構築"""
    if isinstance(values, SampledFunction):
        return PrefixTable.from_array(values.grid, values.values)
    if grid is None:
        raise SampleError("配列から構築する場合は格子の指定が必要です")
    return PrefixTable.from_array(grid, values)


def cube_average(table: PrefixTable, q: Cube) -> float:
    """(1/|Q|)∫_Q f（セル値の単純平均に等しい）"""
    return table.cube_sum(q) / float(q.side_cells) ** table.grid.dim


def naive_cube_sum(values: np.ndarray, cube: Cube) -> float:
    """セルごとの素朴な和（オラクル）"""
    return math.fsum(np.asarray(values)[cube.slices()].ravel().tolist())


def naive_cube_min(values: np.ndarray, cube: Cube) -> float:
    return float(np.min(np.asarray(values)[cube.slices()]))
