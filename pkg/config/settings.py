import os
from typing import Dict, Any
from dotenv import load_dotenv

# .envファイルを読み込み
load_dotenv()


class Config:
    """実験ラボの実行環境設定クラス"""

    TOOL_NAME = "mixed-weak-lab"
    TOOL_VERSION = "1.0.0"
    REPORT_SCHEMA_VERSION = 1

    # 出力・ログ設定
    OUTPUT_DIR = os.getenv("LAB_OUTPUT_DIR", "out")
    LOG_DIR = os.getenv("LAB_LOG_DIR", "logs")
    LOG_LEVEL = os.getenv("LAB_LOG_LEVEL", "INFO")

    # 細分化安定性の判定しきい値
    STABLE_RATIO = float(os.getenv("LAB_STABLE_RATIO", "1.5"))
    DIVERGENT_RATIO = float(os.getenv("LAB_DIVERGENT_RATIO", "1.8"))
    LOG_GROWTH_RATIO = float(os.getenv("LAB_LOG_GROWTH_RATIO", "0.95"))
    MIN_RELATIVE_GROWTH = float(os.getenv("LAB_MIN_RELATIVE_GROWTH", "0.05"))

    # 多重分数積分の計算量ガード（log2(N^{n(m+1)}) の上限）
    WORK_BUDGET_LOG2 = float(os.getenv("LAB_WORK_BUDGET_LOG2", "24"))

    # スイープ・探索の評価回数上限
    EVALUATION_BUDGET = int(os.getenv("LAB_EVALUATION_BUDGET", "400"))

    # オラクル計算のサイズ上限
    ORACLE_MAX_N_1D = int(os.getenv("LAB_ORACLE_MAX_N_1D", "256"))
    ORACLE_MAX_N_2D = int(os.getenv("LAB_ORACLE_MAX_N_2D", "32"))

    # A_∞ 判定に使う p のはしご
    DEFAULT_AP_LADDER = (2.0, 4.0, 8.0, 16.0)

    @classmethod
    def get_stability_thresholds(cls) -> Dict[str, float]:
        """安定性判定しきい値を辞書で返す"""
        return {
            "stable_ratio": cls.STABLE_RATIO,
            "divergent_ratio": cls.DIVERGENT_RATIO,
            "log_growth_ratio": cls.LOG_GROWTH_RATIO,
            "min_relative_growth": cls.MIN_RELATIVE_GROWTH,
        }

    @classmethod
    def validate_config(cls) -> bool:
        """設定の妥当性をチェック"""
        if not (1.0 < cls.STABLE_RATIO < cls.DIVERGENT_RATIO):
            return False
        if not (0.0 < cls.LOG_GROWTH_RATIO <= 1.0):
            return False
        if cls.WORK_BUDGET_LOG2 <= 0 or cls.EVALUATION_BUDGET <= 0:
            return False
        return True

    @classmethod
    def debug_config(cls) -> Dict[str, Any]:
        """設定のデバッグ情報を返す"""
        return {
            "tool": f"{cls.TOOL_NAME} {cls.TOOL_VERSION}",
            "output_dir": cls.OUTPUT_DIR,
            "log_dir": cls.LOG_DIR,
            "log_level": cls.LOG_LEVEL,
            "stability": cls.get_stability_thresholds(),
            "work_budget_log2": cls.WORK_BUDGET_LOG2,
            "evaluation_budget": cls.EVALUATION_BUDGET,
            "oracle_limits": {
                "max_n_1d": cls.ORACLE_MAX_N_1D,
                "max_n_2d": cls.ORACLE_MAX_N_2D,
            },
        }
