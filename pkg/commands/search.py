"""
sweep / search コマンド: 探索表・履歴 CSV、最良状態 JSON、プロット用 CSV を書き出す
"""
import logging
import os
from typing import Dict, List, Optional, Sequence

from commands import EXIT_OK
from models.run_config import RunConfig
from models.search import HillClimbSettings, SearchEvaluation, SearchSpace
from services.exceptions import ConfigError
from services.experiment_service import ExperimentService
from services.report_writer import envelope, write_csv, write_json, write_plot
from services.search_service import best_row, build_instance, hill_climb, sweep, warm_start

logger = logging.getLogger(__name__)

SWEEP_FILE = "sweep.csv"
HISTORY_FILE = "search_history.csv"
BEST_FILE = "best.json"
PLOT_FILE = "plot_best.csv"


def _space(config: RunConfig) -> SearchSpace:
    if config.sweep is None:
        raise ConfigError("設定に sweep（探索空間）がありません")
    return config.sweep


def _rows(space: SearchSpace, evaluations: Sequence[SearchEvaluation]) -> List[list]:
    names = [p.name for p in space.parameters]
    rows = []
    for e in evaluations:
        rows.append(
            [e.step]
            + [e.params.get(name) for name in names]
            + [
                e.objective,
                ";".join(repr(c) for c in e.constants),
                e.status.value,
                e.constant_verdict,
                ";".join(e.modes_satisfied),
                e.stable,
                e.accepted,
            ]
        )
    return rows


def _header(space: SearchSpace) -> List[str]:
    return (
        ["step"]
        + [p.name for p in space.parameters]
        + ["objective", "constants", "status", "constant_verdict", "modes_satisfied", "stable", "accepted"]
    )


def _write_plot(service: ExperimentService, space: SearchSpace, params: Optional[Dict[str, float]], out_dir: str) -> None:
    """最良インスタンスの (しきい値, t·μ^{1/q}) を最細格子で書き出す"""
    if params is None:
        logger.warning("仮定が安定な評価がなかったため、プロット用データは書き出しません")
        return
    instance = build_instance(space, params, service.config.grid.dim, "best")
    report = service.evaluate(instance, service.grids[-1])
    write_plot(os.path.join(out_dir, PLOT_FILE), report.sweep)


def run_sweep(config: RunConfig, out_dir: str, override_guards: bool = False) -> int:
    space = _space(config)
    service = ExperimentService(config, override_guards)
    rows = sweep(service, space)
    write_csv(os.path.join(out_dir, SWEEP_FILE), _header(space), _rows(space, rows))
    best = best_row(rows)
    _write_plot(service, space, best.params if best else None, out_dir)
    return EXIT_OK


def run_search(config: RunConfig, out_dir: str, override_guards: bool = False) -> int:
    space = _space(config)
    settings = config.search or HillClimbSettings()
    seed = settings.seed if settings.seed is not None else config.seed
    service = ExperimentService(config, override_guards)
    initial = warm_start(service, space, settings) if settings.warm_start else None
    state = hill_climb(service, space, settings, seed, initial)
    write_csv(os.path.join(out_dir, HISTORY_FILE), _header(space), _rows(space, state.history))
    write_json(os.path.join(out_dir, BEST_FILE), envelope(config, "search", state))
    best = state.best_params if state.best_objective is not None else None
    _write_plot(service, space, best, out_dir)
    return EXIT_OK
