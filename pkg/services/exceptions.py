"""
ラボ共通の例外定義
CLIの終了コード（2: 設定 / 3: ガード / 4: 予算）への対応付けに使う
"""
from typing import Optional


class LabError(ValueError):
    """ラボ全体の基底例外"""


class GridError(LabError):
    """格子の指定が不正"""


class CubeError(LabError):
    """立方体が格子からはみ出している"""


class UnsupportedFamilyError(LabError):
    """次元に対応していない立方体族"""


class SampleError(LabError):
    """標本化された関数・重みが不変条件を満たさない"""


class WeightClassError(LabError):
    """Muckenhoupt定数の引数が不正"""


class OperatorSpecError(LabError):
    """作用素の指定（m, α）が不正"""


class NormError(LabError):
    """ノルム計算の引数が不正"""


class VerificationError(LabError):
    """定理インスタンスの引数が不正"""


class SearchError(LabError):
    """探索空間・初期値が不正"""


class ConfigError(LabError):
    """実行設定ファイルの誤り"""


class GuardError(LabError):
    """計算量ガードを超過"""

    def __init__(self, message: str, work_log2: Optional[float] = None, budget_log2: Optional[float] = None):
        super().__init__(message)
        self.work_log2 = work_log2
        self.budget_log2 = budget_log2


class BudgetError(LabError):
    """評価回数の予算を超過"""

    def __init__(self, message: str, required: int, budget: int):
        super().__init__(message)
        self.required = required
        self.budget = budget
