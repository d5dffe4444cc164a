"""
Tests for signal-log CSV files and model bundles.
"""
import json

import numpy as np
import pandas as pd
import pytest

from hydrotwin.errors import BundleVersionError, GeometryError, SchemaError, TimingError
from hydrotwin.models.pressure import GPHyperparameters, PumpModel, ScalerParams
from hydrotwin.models.signals import FilterSpec, SignalLog
from hydrotwin.services.data_io import (
    check_geometry,
    check_timing,
    load_bundle,
    read_log,
    save_bundle,
    write_feature_table,
    write_log,
)
from hydrotwin.services.features import featurize, geometry_hash
from hydrotwin.services.gaussian_process import GPModel
from hydrotwin.services.pressure_models import WorkingPressureModel, predict_working_pressure_batch
from tests.conftest import FIXTURES


GOLDEN_BUNDLE = FIXTURES / "bundle_v1.json"


def _random_gp(rng, n=25):
    return GPModel(
        rng.normal(size=(n, 2)),
        rng.normal(size=n),
        GPHyperparameters(
            lengthscales=list(rng.uniform(0.5, 2.0, size=2)),
            signal_variance=float(rng.uniform(0.5, 2.0)),
            noise_variance=float(rng.uniform(1e-4, 1e-2)),
        ),
        ScalerParams(mean=[3e-4, 4e4], scale=[1e-4, 2e4]),
        ScalerParams(mean=[float(rng.uniform(4e6, 9e6))], scale=[1.5e6]),
    )


@pytest.fixture
def random_models():
    rng = np.random.default_rng(21)
    return {i: WorkingPressureModel(i, _random_gp(rng), _random_gp(rng), 1e-3) for i in (1, 2, 3)}


# ---------------------------------------------------------------------------
# Signal logs
# ---------------------------------------------------------------------------

def test_log_roundtrip(mixed_log, tmp_path):
    path = write_log(mixed_log, tmp_path / "mixed.csv")

    loaded = read_log(path)

    assert loaded.name == "mixed"
    assert loaded.dt == pytest.approx(0.02)
    pd.testing.assert_frame_equal(loaded.frame, mixed_log.frame, check_dtype=False)
    assert loaded.metadata_columns == mixed_log.metadata_columns


def test_missing_pump_column(mixed_log, tmp_path):
    path = tmp_path / "no_pump.csv"
    mixed_log.frame.drop(columns=["p_pump_pa"]).to_csv(path, index=False)

    with pytest.raises(SchemaError, match="p_pump_pa"):
        read_log(path)
    assert read_log(path, require_pressures=False).has_pressures is False


def test_non_uniform_timestamps(mixed_log, tmp_path):
    frame = mixed_log.frame.copy()
    frame.loc[10, "time_s"] += 0.005
    path = tmp_path / "jitter.csv"
    frame.to_csv(path, index=False)

    with pytest.raises(TimingError, match="row 10"):
        read_log(path)


def test_check_timing():
    assert check_timing(np.arange(5) * 0.01) == pytest.approx(0.01)
    with pytest.raises(TimingError):
        check_timing(np.array([0.0]))
    with pytest.raises(TimingError):
        check_timing(np.array([0.2, 0.1, 0.0]))


def test_bad_cells_rejected(mixed_log, tmp_path):
    frame = mixed_log.frame.copy()
    frame.loc[3, "p_A_2_pa"] = -5.0
    frame.to_csv(tmp_path / "negative.csv", index=False)
    frame = mixed_log.frame.copy()
    frame["theta1_rad"] = frame["theta1_rad"].astype(object)
    frame.loc[4, "theta1_rad"] = "n/a"
    frame.to_csv(tmp_path / "text.csv", index=False)
    frame = mixed_log.frame.copy()
    frame.loc[5, "theta2_rad"] = np.nan
    frame.to_csv(tmp_path / "missing.csv", index=False)

    for name in ("negative", "text", "missing"):
        with pytest.raises(SchemaError):
            read_log(tmp_path / f"{name}.csv")


def test_empty_file_is_schema_error(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(SchemaError):
        read_log(path)


def test_feature_table_sidecar(mixed_log, geometry, tmp_path):
    table = featurize(mixed_log, geometry)

    path = write_feature_table(table, tmp_path / "mixed_features.csv")
    sidecar = json.loads(path.with_suffix(".json").read_text())

    assert sidecar["geometry_hash"] == geometry_hash(geometry)
    assert sidecar["filter"]["window"] == 11
    assert sidecar["columns"] == list(pd.read_csv(path).columns)


# ---------------------------------------------------------------------------
# Model bundles
# ---------------------------------------------------------------------------

def test_bundle_roundtrip_predicts_identically(random_models, geometry, tmp_path):
    pump = PumpModel(margins=[1.6e6, 2.4e6, 2.0e6], standby=2e6)
    path = tmp_path / "bundle.json"
    save_bundle(random_models, pump, geometry_hash(geometry), path, filter_spec=FilterSpec(window=21, dt=0.02))

    loaded = load_bundle(path)

    rng = np.random.default_rng(22)
    q = rng.choice([-1.0, 1.0], size=100) * rng.uniform(1e-4, 5e-4, size=100)
    f = rng.uniform(0.0, 8e4, size=100)
    for actuator_id, model in random_models.items():
        expected = predict_working_pressure_batch(model, q, f)
        actual = predict_working_pressure_batch(loaded.models[actuator_id], q, f)
        np.testing.assert_allclose(actual[0], expected[0], rtol=1e-12)
        np.testing.assert_allclose(actual[1], expected[1], rtol=1e-12)
    assert loaded.pump == pump
    assert loaded.bundle.filter_window == 21
    check_geometry(loaded, geometry)


def test_bundle_file_is_reproducible(random_models, tmp_path):
    pump = PumpModel(margins=[1.0, 2.0, 3.0], standby=2e6)
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"

    save_bundle(random_models, pump, "f" * 64, first)
    save_bundle(random_models, pump, "f" * 64, second)

    assert first.read_bytes() == second.read_bytes()


def test_unsupported_bundle_version(tmp_path):
    data = json.loads(GOLDEN_BUNDLE.read_text())
    data["format_version"] = 2
    path = tmp_path / "future.json"
    path.write_text(json.dumps(data))

    with pytest.raises(BundleVersionError, match="upgrade"):
        load_bundle(path)


def test_malformed_bundles(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(SchemaError):
        load_bundle(broken)

    data = json.loads(GOLDEN_BUNDLE.read_text())
    del data["pump"]
    incomplete = tmp_path / "incomplete.json"
    incomplete.write_text(json.dumps(data))
    with pytest.raises(SchemaError):
        load_bundle(incomplete)


def test_geometry_mismatch(geometry):
    loaded = load_bundle(GOLDEN_BUNDLE)

    with pytest.raises(GeometryError):
        check_geometry(loaded, geometry)
    with pytest.raises(GeometryError):
        check_geometry(loaded.bundle, geometry.model_copy(update={"load_mass": 100.0}))


def test_golden_bundle_predictions():
    loaded = load_bundle(GOLDEN_BUNDLE)

    assert loaded.bundle.format_version == 1
    assert loaded.pump.margins == [1.5e6, 2.5e6, 2.0e6]
    for model in loaded.models.values():
        means, variances = predict_working_pressure_batch(
            model, np.array([1e-12, -1e-12, 100.0, -100.0]), np.zeros(4)
        )
        np.testing.assert_allclose(means, [6e6, 7e6, 4e6, 9e6], atol=1e-2)
        assert np.all(variances < 1e3)


def test_golden_bundle_reserializes_unchanged(tmp_path):
    loaded = load_bundle(GOLDEN_BUNDLE)
    path = tmp_path / "copy.json"

    save_bundle(
        loaded.models, loaded.pump, loaded.geometry_hash, path,
        filter_spec=loaded.bundle.filter_spec(1.0),
        epsilon=loaded.bundle.epsilon,
        metadata=loaded.bundle.metadata,
    )

    assert json.loads(path.read_text()) == json.loads(GOLDEN_BUNDLE.read_text())


def test_featurize_without_pressures(mixed_log, geometry):
    frame = mixed_log.frame.drop(columns=["p_A_1_pa", "p_B_1_pa", "p_pump_pa"])
    table = featurize(SignalLog(dt=mixed_log.dt, frame=frame, name="joints"), geometry)

    assert table.pump_pressure is None
    assert np.all(np.isnan(table.values(1, "p_work")))
    np.testing.assert_array_equal(table.values(1, "q_flow"), featurize(mixed_log, geometry).values(1, "q_flow"))


@pytest.mark.parametrize("actuators", [[0, 1], [0, 1, 1]])
def test_bundle_needs_every_actuator_once(tmp_path, actuators):
    data = json.loads(GOLDEN_BUNDLE.read_text())
    data["actuators"] = [data["actuators"][i] for i in actuators]
    path = tmp_path / "partial.json"
    path.write_text(json.dumps(data))

    with pytest.raises(SchemaError, match="actuators"):
        load_bundle(path)
