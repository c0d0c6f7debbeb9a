"""
多重分数最大作用素 M_α と多重分数積分 I_α
最大作用素は累積和による高速経路と、立方体ごとの直接和による検証用経路の二本立て
"""
import logging
import math
from typing import Sequence

import numpy as np

from config.settings import Config
from models.function import SampledFunction
from models.lattice import CubeFamily, Grid
from models.operator import OperatorSpec
from services.exceptions import GuardError, OperatorSpecError
from services.lattice_service import CubeSet, PrefixTable, family_cubes

logger = logging.getLogger(__name__)

# I_α の評価点は標本点からセル幅の 1/4 ずらす（核の分母が 0 にならない）
TARGET_OFFSET = 0.25


def q_exponent(m: int, n: int, alpha: float) -> float:
    """q = n / (mn - α)"""
    return n / (m * n - alpha)


def _common_grid(fs: Sequence[SampledFunction]) -> Grid:
    if not fs:
        raise OperatorSpecError("関数が一つもありません")
    grid = fs[0].grid
    for f in fs[1:]:
        if f.grid != grid or f.offset != fs[0].offset:
            raise OperatorSpecError("関数の格子（または標本点）が一致しません")
    return grid


def _check_alpha(m: int, n: int, alpha: float, strict: bool) -> None:
    upper = m * n
    if strict and not (0 < alpha < upper):
        raise OperatorSpecError(f"I_α は 0 < α < mn が必要です: α={alpha}, mn={upper}")
    if not strict and not (0 <= alpha < upper):
        raise OperatorSpecError(f"M_α は 0 <= α < mn が必要です: α={alpha}, mn={upper}")


def _cube_values(fs: Sequence[SampledFunction], alpha: float, cubes: CubeSet) -> np.ndarray:
    """各立方体で Π_i |Q|^{α/(nm)}·avg_Q f_i"""
    grid = cubes.grid
    m = len(fs)
    factor = cubes.measures() ** (alpha / (grid.dim * m))
    product = np.ones(len(cubes))
    for f in fs:
        product = product * (factor * PrefixTable.from_array(grid, f.values).cube_means(cubes))
    return product


def _scatter_max(cubes: CubeSet, values: np.ndarray) -> np.ndarray:
    """各セルについて、そのセルを含む立方体の値の最大値"""
    grid = cubes.grid
    out = np.full(grid.shape, -np.inf)
    for origin, side, value in zip(cubes.origins, cubes.sides, values):
        index = tuple(slice(int(o), int(o) + int(side)) for o in origin)
        np.maximum(out[index], value, out=out[index])
    return out


def _interval_max(grid: Grid, cubes: CubeSet, values: np.ndarray) -> np.ndarray:
    """
    n=1 の全区間族での最大値（O(N^2) の累積最大）

    V[a, b] を区間 [a, b) の値として、セル c の値は max_{a<=c<b} V[a, b]
    """
    n_cells = grid.cells_per_axis
    table = np.full((n_cells, n_cells + 1), -np.inf)
    starts = cubes.origins[:, 0]
    table[starts, starts + cubes.sides] = values
    best_start = np.maximum.accumulate(table, axis=0)
    best_end = np.maximum.accumulate(best_start[:, ::-1], axis=1)[:, ::-1]
    cells = np.arange(n_cells)
    return best_end[cells, cells + 1]


def maximal(fs: Sequence[SampledFunction], spec: OperatorSpec) -> SampledFunction:
    """
    M_α f⃗(x) = max_{Q∋x} Π_i |Q|^{α/(nm)}·avg_Q f_i（族 spec.family 上）

    α = 0 で多重（劣）線形最大関数 M に一致
    """
    grid = _common_grid(fs)
    if len(fs) != spec.m:
        raise OperatorSpecError(f"関数の個数 {len(fs)} が m={spec.m} と一致しません")
    _check_alpha(spec.m, grid.dim, spec.alpha, strict=False)
    cubes = family_cubes(grid, spec.family)
    values = _cube_values(fs, spec.alpha, cubes)
    if spec.family == CubeFamily.ALL_CUBES:
        out = _interval_max(grid, cubes, values)
    else:
        out = _scatter_max(cubes, values)
    return SampledFunction(grid=grid, values=out, offset=fs[0].offset)


def _check_oracle_size(grid: Grid, family: CubeFamily) -> None:
    if grid.dim == 1 and grid.cells_per_axis > Config.ORACLE_MAX_N_1D:
        raise GuardError(f"オラクルのサイズ上限を超えています: N={grid.cells_per_axis} > {Config.ORACLE_MAX_N_1D}")
    if grid.dim == 2:
        if family != CubeFamily.SHIFTED_DYADIC:
            raise GuardError("n=2 のオラクルは ShiftedDyadic のみ対応しています")
        if grid.cells_per_axis > Config.ORACLE_MAX_N_2D:
            raise GuardError(f"オラクルのサイズ上限を超えています: N={grid.cells_per_axis} > {Config.ORACLE_MAX_N_2D}")


def maximal_oracle(fs: Sequence[SampledFunction], spec: OperatorSpec) -> SampledFunction:
    """累積和を使わず、立方体ごとの直接和と素朴な走査で M_α を計算（検証用）"""
    grid = _common_grid(fs)
    _check_alpha(spec.m, grid.dim, spec.alpha, strict=False)
    _check_oracle_size(grid, spec.family)
    cubes = family_cubes(grid, spec.family)
    m = len(fs)
    out = np.full(grid.shape, -np.inf)
    for index in range(len(cubes)):
        cube = cubes.cube(index)
        window = cube.slices()
        volume = cube.measure(grid)
        value = 1.0
        for f in fs:
            mean = float(np.sum(f.values[window])) / cube.side_cells ** grid.dim
            value *= volume ** (spec.alpha / (grid.dim * m)) * mean
        out[window] = np.maximum(out[window], value)
    return SampledFunction(grid=grid, values=out, offset=fs[0].offset)


def multilinear_maximal(fs: Sequence[SampledFunction], family: CubeFamily) -> SampledFunction:
    """多重（劣）線形最大関数 M f⃗(x) = max_{Q∋x} Π_i avg_Q f_i（|Q| のべき因子なし）"""
    grid = _common_grid(fs)
    cubes = family_cubes(grid, family)
    product = np.ones(len(cubes))
    for f in fs:
        product = product * PrefixTable.from_array(grid, f.values).cube_means(cubes)
    return SampledFunction(grid=grid, values=_scatter_max(cubes, product), offset=fs[0].offset)


def fractional_maximal_linear(f: SampledFunction, alpha: float, family: CubeFamily) -> SampledFunction:
    """線形の分数最大関数 M_α f(x) = max_{Q∋x} |Q|^{α/n-1} ∫_Q f"""
    grid = f.grid
    _check_alpha(1, grid.dim, alpha, strict=False)
    cubes = family_cubes(grid, family)
    integrals = PrefixTable.from_array(grid, f.values).cube_sums(cubes) * grid.cell_measure
    values = cubes.measures() ** (alpha / grid.dim - 1.0) * integrals
    return SampledFunction(grid=grid, values=_scatter_max(cubes, values), offset=f.offset)


def product_of_maximals(fs: Sequence[SampledFunction], family: CubeFamily) -> SampledFunction:
    """Π_i M f_i（多重最大関数を上から抑える）"""
    grid = _common_grid(fs)
    out = np.ones(grid.shape)
    for f in fs:
        out = out * multilinear_maximal([f], family).values
    return SampledFunction(grid=grid, values=out, offset=fs[0].offset)


def kernel(x: Sequence[float], ys: Sequence[Sequence[float]], alpha: float, m: int, n: int) -> float:
    """(Σ_i |x - y_i|)^{α - mn}（ユークリッドノルム）"""
    x_arr = np.asarray(x, dtype=np.float64).reshape(n)
    ys_arr = np.asarray(ys, dtype=np.float64).reshape(m, n)
    total = float(np.sum(np.sqrt(np.sum((ys_arr - x_arr) ** 2, axis=1))))
    if total == 0.0:
        raise OperatorSpecError("核の特異点（すべての y_i が x に一致）で評価しようとしました")
    return total ** (alpha - m * n)


def integral_work_log2(grid: Grid, m: int) -> float:
    """I_α の計算量 N^{n(m+1)} の log2"""
    return grid.dim * (m + 1) * math.log2(grid.cells_per_axis)


def check_integral_guard(grid: Grid, m: int, override_guards: bool = False) -> None:
    work = integral_work_log2(grid, m)
    if work > Config.WORK_BUDGET_LOG2 and not override_guards:
        logger.warning(f"I_α の計算量ガードを超過: log2(work)={work:.1f} > {Config.WORK_BUDGET_LOG2}")
        raise GuardError(
            f"I_α の計算量 2^{work:.1f} が上限 2^{Config.WORK_BUDGET_LOG2:.1f} を超えています"
            f"（n={grid.dim}, m={m}, N={grid.cells_per_axis}）",
            work_log2=work,
            budget_log2=Config.WORK_BUDGET_LOG2,
        )


def fractional_integral(
    fs: Sequence[SampledFunction],
    alpha: float,
    override_guards: bool = False,
    target_offset: float = TARGET_OFFSET,
) -> SampledFunction:
    """
    I_α f⃗ の中点則近似

    評価点 x はセル中心から 1/4 セルずらした点、和は源セルの組すべてにわたる:
    Σ Π_i f_i(y_i)·(Σ_i |x - y_i|)^{α-mn}·(セル体積)^m
    """
    grid = _common_grid(fs)
    m, n = len(fs), grid.dim
    _check_alpha(m, n, alpha, strict=True)
    check_integral_guard(grid, m, override_guards)

    sources = grid.points(fs[0].offset).reshape(-1, n)
    targets = grid.points(target_offset).reshape(-1, n)
    supports = [np.nonzero(f.values.reshape(-1) > 0)[0] for f in fs]
    out = np.zeros(targets.shape[0])
    if any(s.size == 0 for s in supports):
        return SampledFunction(grid=grid, values=out.reshape(grid.shape), offset=target_offset)

    weights = fs[0].values.reshape(-1)[supports[0]]
    for f, support in zip(fs[1:], supports[1:]):
        weights = np.multiply.outer(weights, f.values.reshape(-1)[support])
    scale = grid.cell_measure ** m
    power = alpha - m * n

    logger.debug(f"I_α を計算: m={m}, n={n}, N={grid.cells_per_axis}, 源セル数={[s.size for s in supports]}")
    for t, x in enumerate(targets):
        distance = np.sqrt(np.sum((sources - x) ** 2, axis=1))
        total = distance[supports[0]]
        for support in supports[1:]:
            total = np.add.outer(total, distance[support])
        out[t] = np.sum(weights * total ** power) * scale
    return SampledFunction(grid=grid, values=out.reshape(grid.shape), offset=target_offset)
