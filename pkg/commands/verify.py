"""
verify コマンド: 定理インスタンスごとの JSON と summary.csv を書き出す
"""
import logging
import os

from commands import EXIT_OK, EXIT_VIOLATION
from models.report import ReportStatus, TheoremId
from models.run_config import RunConfig
from services.experiment_service import ExperimentService
from services.report_writer import envelope, safe_name, write_csv, write_json

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.csv"
SUMMARY_HEADER = ["instance_id", "theorem_id", "N", "empirical_constant", "status"]

# 違反で終了コード 1 にする定理（点ごとの補題と証明の包含）
STRICT_THEOREMS = {TheoremId.LEMMA_POINTWISE, TheoremId.PROOF_CHAIN}


def run(config: RunConfig, out_dir: str, override_guards: bool = False) -> int:
    service = ExperimentService(config, override_guards)
    rows = []
    violations = []
    for instance in config.instances:
        result = service.run_instance(instance)
        path = os.path.join(out_dir, "instances", f"{safe_name(instance.id)}.json")
        write_json(path, envelope(config, "verify", result))
        for report in result.reports:
            rows.append([
                instance.id,
                instance.theorem.value,
                report.params.cells_per_axis,
                report.empirical_constant,
                report.status.value,
            ])
        if instance.theorem in STRICT_THEOREMS and result.status == ReportStatus.VIOLATION:
            violations.append(instance.id)

    write_csv(os.path.join(out_dir, SUMMARY_FILE), SUMMARY_HEADER, rows)
    if violations:
        logger.error(f"補題・包含の違反があったインスタンス: {violations}")
        return EXIT_VIOLATION
    return EXIT_OK
