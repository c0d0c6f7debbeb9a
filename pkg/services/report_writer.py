"""
レポートの書き出し（JSON / CSV）
同じ設定・シードなら出力はバイト単位で一致する（時刻は埋め込まない）
"""
import csv
import hashlib
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Sequence

from pydantic import BaseModel

from config.settings import Config
from models.run_config import RunConfig

logger = logging.getLogger(__name__)


def config_hash(config: RunConfig) -> str:
    """正規化した設定 JSON の sha256"""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def envelope(config: RunConfig, kind: str, payload: Any) -> Dict[str, Any]:
    """全 JSON レポート共通の外枠（スキーマ版・ツール版・設定ハッシュ・格子・立方体族）"""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    elif isinstance(payload, list):
        payload = [item.model_dump(mode="json") if isinstance(item, BaseModel) else item for item in payload]
    return {
        "schema_version": Config.REPORT_SCHEMA_VERSION,
        "tool": Config.TOOL_NAME,
        "tool_version": Config.TOOL_VERSION,
        "kind": kind,
        "config_hash": config_hash(config),
        "grid": config.grid.model_dump(mode="json"),
        "family": config.family.value,
        "seed": config.seed,
        "payload": payload,
    }


def dumps(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def write_json(path: str, data: Any) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dumps(data))
    logger.info(f"JSON を書き出しました: {path}")
    return path


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """ヘッダ付き・カンマ区切り・LF 改行の CSV"""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    logger.info(f"CSV を書き出しました: {path}")
    return path


def write_plot(path: str, ladder: Sequence[Sequence[float]]) -> str:
    """(しきい値, t·μ^{1/q}) の二列 CSV"""
    return write_csv(path, ["threshold", "value"], ladder)


def safe_name(identifier: str) -> str:
    """インスタンス ID をファイル名に使える形に"""
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in identifier)


def load_rows(path: str) -> List[List[str]]:
    with open(path, encoding="utf-8", newline="") as handle:
        return list(csv.reader(handle))
