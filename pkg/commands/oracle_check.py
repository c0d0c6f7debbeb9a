"""
oracle-check コマンド: 高速経路とオラクルの一致を検査し、最大食い違いを出力する
"""
import logging
import os

from commands import EXIT_OK, EXIT_VIOLATION
from models.run_config import RunConfig
from services.oracle_service import OracleService
from services.report_writer import envelope, write_json

logger = logging.getLogger(__name__)

REPORT_FILE = "oracle_check.json"


def run(config: RunConfig, out_dir: str, override_guards: bool = False) -> int:
    service = OracleService(config.oracle, config.family, config.grid.half_width)
    checks = service.run()
    for check in checks:
        mark = "OK" if check.passed else "NG"
        print(f"[{mark}] {check.suite:<9} {check.case:<45} 最大食い違い {check.max_discrepancy:.3e}")
    write_json(os.path.join(out_dir, REPORT_FILE), envelope(config, "oracle-check", checks))

    failed = [c for c in checks if not c.passed]
    if failed:
        logger.error(f"{len(failed)} 件の検査が許容値を超えました")
        return EXIT_VIOLATION
    return EXIT_OK
