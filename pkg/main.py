#!/usr/bin/env python3
"""
混合弱型不等式の数値実験ラボ
constants | verify | sweep | search | oracle-check の各サブコマンドを実行する

終了コード: 0 正常 / 1 違反 / 2 設定エラー / 3 計算量ガード / 4 評価予算
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

from commands import EXIT_BUDGET, EXIT_CONFIG, EXIT_GUARD
from commands import constants as constants_command
from commands import oracle_check as oracle_command
from commands import search as search_command
from commands import verify as verify_command
from config.loader import load_run_config
from config.settings import Config
from services.exceptions import BudgetError, ConfigError, GuardError, LabError

logger = logging.getLogger(__name__)

COMMANDS = {
    "constants": constants_command.run,
    "verify": verify_command.run,
    "sweep": search_command.run_sweep,
    "search": search_command.run_search,
    "oracle-check": oracle_command.run,
}


class FlushingFileHandler(logging.FileHandler):
    """各ログ出力後に即座にフラッシュする"""

    def emit(self, record):
        super().emit(record)
        self.flush()


def setup_logging(log_dir: Optional[str] = None, level: Optional[str] = None) -> None:
    log_dir = log_dir or Config.LOG_DIR
    level = level or Config.LOG_LEVEL
    os.makedirs(log_dir, exist_ok=True)
    file_handler = FlushingFileHandler(os.path.join(log_dir, "lab.log"))
    stream_handler = logging.StreamHandler()
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[file_handler, stream_handler],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=Config.TOOL_NAME, description="混合弱型不等式の数値実験ラボ")
    parser.add_argument("command", choices=sorted(COMMANDS), help="実行するサブコマンド")
    parser.add_argument("--config", default=None, help="実行設定ファイル（JSON）")
    parser.add_argument("--out", default=None, help="出力ディレクトリ（既定は設定の output_dir か LAB_OUTPUT_DIR）")
    parser.add_argument("--seed", type=int, default=None, help="乱数シード（設定の seed を上書き）")
    parser.add_argument("--override-guards", action="store_true", help="I_α の計算量ガードを無効にする")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging()
    if not Config.validate_config():
        logger.error(f"環境設定が不正です: {Config.debug_config()}")
        return EXIT_CONFIG

    try:
        config = load_run_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(f"--seed は非負でなければなりません: {args.seed}")
            config = config.model_copy(update={"seed": args.seed})
        out_dir = args.out or config.output_dir or Config.OUTPUT_DIR
        logger.info(f"{args.command} を開始します（出力先: {out_dir}）")
        return COMMANDS[args.command](config, out_dir, args.override_guards)
    except ConfigError as e:
        logger.error(f"設定エラー: {e}")
        return EXIT_CONFIG
    except GuardError as e:
        logger.error(f"計算量ガード: {e}（log2(work)={e.work_log2}, 上限={e.budget_log2}）")
        return EXIT_GUARD
    except BudgetError as e:
        logger.error(f"評価予算の超過: {e}（必要 {e.required} 回, 予算 {e.budget} 回）")
        return EXIT_BUDGET
    except LabError as e:
        # 標本化・定理インスタンスの不正も設定の誤りとして扱う
        logger.error(f"入力エラー: {e}")
        return EXIT_CONFIG
    except Exception as e:
        logger.error(f"予期しないエラー: {e}", exc_info=True)
        raise


if __name__ == "__main__":
    sys.exit(main())
