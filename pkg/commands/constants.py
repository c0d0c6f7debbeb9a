"""
constants コマンド: 重みクラス定数を細分化列で計算し muckenhoupt_report.json に書き出す
"""
import logging
import os

from commands import EXIT_OK, EXIT_VIOLATION
from models.report import ReportStatus
from models.run_config import RunConfig
from services.experiment_service import ExperimentService
from services.report_writer import envelope, write_json

logger = logging.getLogger(__name__)

REPORT_FILE = "muckenhoupt_report.json"


def run(config: RunConfig, out_dir: str, override_guards: bool = False) -> int:
    """
    発散の判定は発見であってエラーではない（終了コード 0）。
    定数が有限でない要求があれば 1
    """
    service = ExperimentService(config, override_guards)
    results = [service.run_constants(request) for request in config.constants]
    write_json(os.path.join(out_dir, REPORT_FILE), envelope(config, "constants", results))

    degenerate = [r.label for r in results if r.status != ReportStatus.OK]
    if degenerate:
        logger.error(f"有限でない定数がありました: {degenerate}")
        return EXIT_VIOLATION
    logger.info(f"{len(results)} 件の重みクラス定数を書き出しました")
    return EXIT_OK
