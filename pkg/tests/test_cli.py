"""
Tests for the command-line front end.
"""
import json
from pathlib import Path

import pandas as pd
import pytest

from hydrotwin.cli import build_parser, main, run_config_from_args
from hydrotwin.config import settings
from hydrotwin.errors import ConfigError
from hydrotwin.models.run_config import Subcommand
from tests.conftest import FIXTURES


MIXED_SCHEDULE = """
initial = [0.3, -1.0, 0.5]

[[segments]]
duration = 2.0
velocity = [0.05, 0.05, 0.1]

[[segments]]
duration = 2.0
velocity = [-0.05, -0.05, -0.1]

[[segments]]
duration = 2.0
velocity = [0.04, -0.04, 0.08]

[[segments]]
duration = 2.0
velocity = [-0.04, 0.04, -0.08]

[[segments]]
duration = 1.0
velocity = [0.0, 0.0, 0.0]
"""

BOOM_SCHEDULE = """
initial = [0.3, -1.0, 0.5]

[[segments]]
duration = 2.0
velocity = [0.05, 0.0, 0.0]

[[segments]]
duration = 2.0
velocity = [-0.05, 0.0, 0.0]
"""


def _schedule(tmp_path: Path, name: str, text: str) -> Path:
    path = tmp_path / f"{name}.toml"
    path.write_text(text)
    return path


@pytest.fixture
def fast_training(monkeypatch):
    monkeypatch.setattr(settings, "gp_restarts", 1)
    monkeypatch.setattr(settings, "max_train_rows", 60)
    monkeypatch.setattr(settings, "margin_iterations", 200)


def test_simulate_writes_five_experiments(tmp_path):
    assert main(["simulate", "--out", str(tmp_path)]) == 0

    names = sorted(path.name for path in tmp_path.glob("*.csv"))
    assert names == [f"experiment_{key}.csv" for key in ("I", "II", "III", "IV", "V")]


def test_simulate_is_reproducible(tmp_path):
    schedule = _schedule(tmp_path, "mixed", MIXED_SCHEDULE)
    for out in ("a", "b"):
        assert main(["simulate", "--schedule", str(schedule), "--seed", "5", "--out", str(tmp_path / out)]) == 0

    assert (tmp_path / "a" / "mixed.csv").read_bytes() == (tmp_path / "b" / "mixed.csv").read_bytes()


def test_bad_config_exits_with_two(tmp_path):
    config = tmp_path / "broken.toml"
    config.write_text("[crane\n")

    assert main(["simulate", "--config", str(config), "--out", str(tmp_path)]) == 2


def test_geometry_only_config_cannot_simulate(tmp_path):
    text = (Path(__file__).resolve().parents[1] / "configs" / "default_plant.toml").read_text()
    config = tmp_path / "crane.toml"
    config.write_text(text.split("[plant]")[0])

    assert main(["simulate", "--config", str(config), "--out", str(tmp_path)]) == 2


def test_flag_validation(tmp_path):
    assert main(["evaluate", "--bundle", str(FIXTURES / "bundle_v1.json"), "--out", str(tmp_path)]) == 2
    assert main(["train", "--log", "x.csv", "--sg-window", "10", "--out", str(tmp_path)]) == 2
    assert main(["train", "--log", "x.csv", "--epsilon", "0", "--out", str(tmp_path)]) == 2


def test_explicit_zero_filter_flags_are_rejected(tmp_path):
    assert main(["train", "--log", "x.csv", "--sg-window", "0", "--out", str(tmp_path)]) == 2
    assert main(["train", "--log", "x.csv", "--sg-order", "0", "--out", str(tmp_path)]) == 2

    args = build_parser().parse_args(["featurize", "--log", "a.csv", "--sg-window", "0"])
    with pytest.raises(ConfigError, match="window"):
        run_config_from_args(args)


def test_run_config_from_flags(tmp_path):
    args = build_parser().parse_args(
        ["evaluate", "--log", "a.csv", "--log", "b.csv", "--bundle", "m.json", "--no-plots", "--seed", "3"]
    )

    run = run_config_from_args(args)

    assert run.command == Subcommand.EVALUATE
    assert run.logs == [Path("a.csv"), Path("b.csv")]
    assert run.plots is False
    assert run.seed == 3
    assert run.sg_window == settings.sg_window

    duplicate = build_parser().parse_args(["train", "--log", "a.csv", "--log", "a.csv"])
    with pytest.raises(ConfigError, match="only once"):
        run_config_from_args(duplicate)


def test_missing_log_file_exits_with_one(tmp_path):
    assert main(["featurize", "--log", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 1


def test_featurize_writes_table_and_sidecar(tmp_path):
    schedule = _schedule(tmp_path, "mixed", MIXED_SCHEDULE)
    assert main(["simulate", "--schedule", str(schedule), "--out", str(tmp_path)]) == 0

    assert main(["featurize", "--log", str(tmp_path / "mixed.csv"), "--out", str(tmp_path / "features")]) == 0

    table = pd.read_csv(tmp_path / "features" / "mixed_features.csv")
    sidecar = json.loads((tmp_path / "features" / "mixed_features.json").read_text())
    assert len(table) == 450
    assert sidecar["epsilon"] == settings.epsilon


def test_never_moved_actuator_fails_training(tmp_path, fast_training):
    schedule = _schedule(tmp_path, "boom", BOOM_SCHEDULE)
    assert main(["simulate", "--schedule", str(schedule), "--out", str(tmp_path)]) == 0

    assert main(["train", "--log", str(tmp_path / "boom.csv"), "--out", str(tmp_path / "model")]) == 1
    assert not (tmp_path / "model" / "bundle.json").exists()


def test_bundle_from_other_geometry_is_rejected(tmp_path):
    schedule = _schedule(tmp_path, "mixed", MIXED_SCHEDULE)
    assert main(["simulate", "--schedule", str(schedule), "--out", str(tmp_path)]) == 0

    code = main([
        "predict", "--log", str(tmp_path / "mixed.csv"),
        "--bundle", str(FIXTURES / "bundle_v1.json"), "--out", str(tmp_path),
    ])
    assert code == 2


def test_train_predict_evaluate(tmp_path, fast_training):
    schedule = _schedule(tmp_path, "mixed", MIXED_SCHEDULE)
    assert main(["simulate", "--schedule", str(schedule), "--out", str(tmp_path / "logs")]) == 0
    log = str(tmp_path / "logs" / "mixed.csv")
    model_dir = tmp_path / "model"

    assert main(["train", "--log", log, "--out", str(model_dir)]) == 0
    bundle = model_dir / "bundle.json"
    report = json.loads((model_dir / "training_report.json").read_text())
    assert json.loads(bundle.read_text())["format_version"] == 1
    assert report["training_logs"] == ["mixed"]
    assert len(report["actuators"]) == 3

    assert main(["predict", "--log", log, "--bundle", str(bundle), "--out", str(tmp_path / "pred")]) == 0
    prediction = pd.read_csv(tmp_path / "pred" / "mixed_prediction.csv")
    assert len(prediction) == 450
    assert (prediction["pred_p_pump_pa"] >= 0).all()

    for out in ("eval_a", "eval_b"):
        assert main(["evaluate", "--log", log, "--bundle", str(bundle), "--out", str(tmp_path / out)]) == 0
    first = tmp_path / "eval_a"
    second = tmp_path / "eval_b"
    evaluation = json.loads((first / "evaluation_report.json").read_text())
    repeated = json.loads((second / "evaluation_report.json").read_text())
    assert evaluation["logs"][0]["log"] == "mixed"
    assert [Path(p).name for p in evaluation["plots"]["mixed"]] == [
        "mixed_working.svg", "mixed_pump.svg", "mixed_series.csv"
    ]
    for name in ("mixed_working.svg", "mixed_pump.svg", "mixed_series.csv"):
        assert (first / "plots" / name).read_bytes() == (second / "plots" / name).read_bytes()
    assert evaluation["logs"] == repeated["logs"]
