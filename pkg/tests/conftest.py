import os
import tempfile
from pathlib import Path

os.environ.setdefault("QIMAGEGEN_LOG", str(Path(tempfile.gettempdir()) / "qimagegen-tests.log"))

import numpy as np
import pytest

from backend.storage import DatasetConfig, RunConfig
from core.rng import make_rng
from core.schema import CriticConfig, GeneratorConfig, TrainConfig


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run long end-to-end training tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return

    skip = pytest.mark.skip(reason="needs --runslow")

    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(1234)


@pytest.fixture
def frqi4() -> GeneratorConfig:
    return GeneratorConfig(encoding="frqi", side=4, layers=1, sublayers=2, modes=2)


@pytest.fixture
def small_critic() -> CriticConfig:
    return CriticConfig(side=4, channels=1, filters=(2, 2, 2), kernel_size=3)


@pytest.fixture
def tiny_run(small_critic) -> RunConfig:
    return RunConfig(
            name="tiny",
            generator=GeneratorConfig(side=4, layers=1, sublayers=2, modes=2),
            critic=small_critic,
            train=TrainConfig(batch_size=4, n_critic=2, iterations=4, checkpoint_interval=2, mmd_samples=8, seed=3),
            dataset=DatasetConfig(kind="bimodal", count=32),
    )
