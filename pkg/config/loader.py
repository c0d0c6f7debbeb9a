"""
実行設定ファイル（JSON）の読み込み
構文エラーは行・列、検証エラーはフィールドのパスで報告する
"""
import json
import logging
from typing import Optional

from pydantic import ValidationError

from models.run_config import RunConfig
from services.exceptions import ConfigError

logger = logging.getLogger(__name__)


def _field_path(location) -> str:
    return ".".join(str(part) for part in location) or "<root>"


def parse_run_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}:{e.lineno}:{e.colno}: JSON の構文エラー: {e.msg}") from e
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        messages = "; ".join(f"{_field_path(err['loc'])}: {err['msg']}" for err in e.errors())
        logger.debug(f"設定の検証エラー: {messages}")
        raise ConfigError(f"{source}: {_field_path(first['loc'])}: {first['msg']}（全 {e.error_count()} 件: {messages}）") from e


def load_run_config(path: Optional[str]) -> RunConfig:
    """パスがなければ既定値の設定を返す"""
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise ConfigError(f"設定ファイルを読み込めません: {path}（{e}）") from e
    return parse_run_config(text, path)


def dump_run_config(config: RunConfig) -> str:
    """parse_run_config で読み戻せる JSON"""
    return json.dumps(config.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"
