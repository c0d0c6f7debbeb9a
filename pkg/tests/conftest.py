import numpy as np
import pytest

from config.settings import Config
from models.function import SampledFunction
from services.lattice_service import build_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def line_grid():
    return build_grid(1, 1.0, 64)


@pytest.fixture
def plane_grid():
    return build_grid(2, 1.0, 8)


@pytest.fixture(autouse=True)
def isolated_dirs(tmp_path, monkeypatch):
    """ログ・出力をテストごとの一時ディレクトリへ"""
    monkeypatch.setattr(Config, "LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setattr(Config, "OUTPUT_DIR", str(tmp_path / "out"))


@pytest.fixture
def random_function(rng):
    """一様乱数の標本化関数を作る"""

    def make(grid, low=0.0, high=1.0):
        return SampledFunction(grid=grid, values=rng.uniform(low, high, grid.shape))

    return make
