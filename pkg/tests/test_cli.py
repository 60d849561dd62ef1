from pathlib import Path

import numpy as np
import pytest
import torch

from backend.cli import build_parser, run
from backend.storage import RunDirectory
from backend.training import train
from core.image_codec import read_image, read_raw, write_image


@pytest.fixture
def cli(tmp_path):
    log: Path = tmp_path / "cli.log"
    return lambda *argv: run(["--log-file", str(log), *map(str, argv)])


@pytest.fixture
def trained(tiny_run, tmp_path) -> RunDirectory:
    return train(tiny_run, tmp_path / "run")


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_encode_decode_roundtrip(cli, tmp_path):
    image: torch.Tensor = torch.from_numpy(np.random.default_rng(3).integers(0, 256, (1, 4, 4)) / 255)
    write_image(tmp_path / "in.pgm", image)

    assert cli("encode", tmp_path / "in.pgm", tmp_path / "state.qsv") == 0
    assert (tmp_path / "state.qsv").stat().st_size == 8 + 16 * 32
    assert cli("decode", tmp_path / "state.qsv", tmp_path / "out.pgm") == 0
    assert torch.equal(read_image(tmp_path / "out.pgm"), image)


def test_count(cli, capsys):
    assert cli("count", "--side", 4, "--layers", 8, "--modes", 2) == 0
    assert capsys.readouterr().out.strip() == "552"

    assert cli("count", "--encoding", "mcrqi", "--side", 32, "--layers", 32, "--modes", 3, "--channel-layout", "control") == 0
    assert capsys.readouterr().out.strip() == "6944"


def test_train_from_a_config_file(cli, tiny_run, tmp_path, capsys):
    config: Path = tmp_path / "config.json"
    config.write_text(tiny_run.model_copy(update={"train": tiny_run.train.model_copy(update={"iterations": 0})}).model_dump_json())

    assert cli("train", tmp_path / "run", "--config", config) == 0
    assert "1 checkpoint(s)" in capsys.readouterr().out
    assert cli("resume", tmp_path / "run") == 0


def test_sample_grid_and_single(cli, trained, tmp_path):
    assert cli("sample", trained.path, "--count", 4, "--output", tmp_path / "grid.pgm") == 0
    assert cli("sample", trained.path, "--mode", 2, "--invert", "--output", tmp_path / "one.pgm") == 0
    assert read_image(tmp_path / "one.pgm").shape == (1, 4, 4)
    assert read_image(tmp_path / "grid.pgm").shape[0] == 1


def test_finite_shots_stay_close_to_the_exact_image(cli, trained, tmp_path):
    assert cli("sample", trained.path, "--seed", 9, "--output", tmp_path / "exact.imgf64") == 0
    assert cli("sample", trained.path, "--seed", 9, "--shots", 100000, "--output", tmp_path / "shots.imgf64") == 0

    exact: torch.Tensor = read_raw(tmp_path / "exact.imgf64")
    sampled: torch.Tensor = read_raw(tmp_path / "shots.imgf64")

    assert float((exact - sampled).abs().mean()) < 0.1
    assert not torch.equal(exact, sampled)


def test_select(cli, trained, capsys):
    assert cli("select", trained.path, "--window", 1) == 0

    iteration, path = capsys.readouterr().out.strip().split("\t")

    assert int(iteration) in (0, 2, 4)
    assert Path(path) == trained.checkpoint_path(int(iteration))


def test_analyze_tools(cli, trained, tmp_path, capsys):
    assert cli("analyze", "entropy", trained.path, "--draws", 2) == 0
    assert capsys.readouterr().out.splitlines()[0] == "layer,mode,subset,mean,std"

    assert cli("analyze", "grad", trained.path, "--batch", 4) == 0
    assert float(capsys.readouterr().out) > 0

    assert cli("analyze", "pca", trained.path, "--samples", 8, "--mode", 2, "--output", tmp_path / "pca.pgm") == 0
    assert capsys.readouterr().out.startswith("mode 2:")
    assert read_image(tmp_path / "pca.pgm").shape[0] == 1


def test_failures_return_one(cli, trained, tmp_path, capsys):
    assert cli("analyze", "grad", trained.path, "--summary") == 1
    assert "qimagegen analyze" in capsys.readouterr().err

    assert cli("sample", trained.path, "--mode", 3, "--output", tmp_path / "x.pgm") == 1
    assert "--mode must lie in [1, 2]" in capsys.readouterr().err

    assert cli("resume", tmp_path / "nowhere") == 1
    assert "CheckpointError" in capsys.readouterr().err
    assert "Command failed" in (tmp_path / "cli.log").read_text()
