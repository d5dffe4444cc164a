"""
Persistence: CSV signal logs, feature tables and versioned model bundles.
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from hydrotwin import __version__
from hydrotwin.errors import BundleVersionError, GeometryError, SchemaError, TimingError
from hydrotwin.models.bundle import (
    BUNDLE_FORMAT_VERSION,
    BundleMetadata,
    GPRecord,
    ModelBundle,
    WorkingPressureRecord,
)
from hydrotwin.models.geometry import CraneGeometry
from hydrotwin.models.pressure import PumpModel
from hydrotwin.models.signals import (
    ACTUATOR_IDS,
    TIME_COLUMN,
    FeatureTable,
    FilterSpec,
    SignalLog,
    mandatory_columns,
    pressure_columns,
    PUMP_COLUMN,
)
from hydrotwin.services.features import geometry_hash
from hydrotwin.services.gaussian_process import GPModel
from hydrotwin.services.pressure_models import WorkingPressureModel
from hydrotwin.utils.file_utils import atomic_write
from hydrotwin.utils.logger import logger


TIMING_TOLERANCE = 1e-6


# ---------------------------------------------------------------------------
# Signal logs
# ---------------------------------------------------------------------------

def check_timing(time: np.ndarray) -> float:
    """
    Verify strictly increasing, uniformly spaced timestamps.

    Args:
        time: Timestamps (s)

    Returns:
        Sample period (s)
    """
    if time.size < 2:
        raise TimingError("a log needs at least two samples")
    dt = float(time[-1] - time[0]) / (time.size - 1)
    if not dt > 0:
        raise TimingError("timestamps are not increasing")
    deviation = np.abs(np.diff(time) - dt)
    bad = np.flatnonzero(deviation > TIMING_TOLERANCE * dt)
    if bad.size:
        row = int(bad[0]) + 1
        raise TimingError(
            f"non-uniform timestamps at row {row}: step {time[row] - time[row - 1]:.9g} s, expected {dt:.9g} s"
        )
    return dt


def validate_frame(frame: pd.DataFrame, require_pressures: bool = True) -> float:
    """Check the mandatory columns of a log frame and return its sample period."""
    missing = [column for column in mandatory_columns(require_pressures) if column not in frame.columns]
    if missing:
        raise SchemaError(f"missing column(s): {', '.join(missing)}")

    pressure_names = {PUMP_COLUMN, *(c for i in ACTUATOR_IDS for c in pressure_columns(i))}
    for column in mandatory_columns(require_pressures):
        values = frame[column]
        if not pd.api.types.is_numeric_dtype(values):
            raise SchemaError(f"column {column} is not numeric")
        if values.isna().any():
            raise SchemaError(f"column {column} has missing cells (first at row {int(values.isna().to_numpy().argmax())})")
        if column in pressure_names and (values < 0).any():
            raise SchemaError(f"column {column} has negative pressures")

    return check_timing(frame[TIME_COLUMN].to_numpy(dtype=float))


def read_log(path: Union[str, Path], require_pressures: bool = True) -> SignalLog:
    """
    Read a signal log CSV.

    Args:
        path: CSV file (comma separated, decimal point, UTF-8, header row)
        require_pressures: Require side and pump pressure columns

    Returns:
        SignalLog; unknown columns are kept as metadata
    """
    log_path = Path(path)
    try:
        frame = pd.read_csv(log_path, float_precision="round_trip", encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise SchemaError(f"{log_path}: {e}") from e

    try:
        dt = validate_frame(frame, require_pressures)
    except (SchemaError, TimingError) as e:
        logger.error(f"Invalid log {log_path}: {e}")
        raise type(e)(f"{log_path}: {e}") from e

    logger.info(f"Read {len(frame)} samples from {log_path} (dt={dt:.6g} s)")
    return SignalLog(dt=dt, frame=frame, name=log_path.stem)


def write_log(log: SignalLog, path: Union[str, Path]) -> Path:
    """Write a signal log CSV atomically."""
    target = atomic_write(path, log.frame.to_csv(index=False))
    logger.info(f"Wrote {len(log)} samples to {target}")
    return target


def write_feature_table(table: FeatureTable, path: Union[str, Path]) -> Path:
    """Write a feature CSV plus a JSON sidecar carrying the geometry hash and filter."""
    target = atomic_write(path, table.frame.to_csv(index=False))
    sidecar = {
        "geometry_hash": table.geometry_hash,
        "epsilon": table.epsilon,
        "filter": table.filter.model_dump(),
        "source": table.source,
        "columns": list(table.frame.columns),
    }
    atomic_write(Path(target).with_suffix(".json"), json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    logger.info(f"Wrote feature table {target}")
    return target


# ---------------------------------------------------------------------------
# Model bundles
# ---------------------------------------------------------------------------

@dataclass
class LoadedBundle:
    """A bundle file with its models rebuilt."""

    bundle: ModelBundle
    models: Dict[int, WorkingPressureModel]
    pump: PumpModel

    @property
    def geometry_hash(self) -> str:
        return self.bundle.geometry_hash


def _gp_record(model: GPModel) -> GPRecord:
    return GPRecord(
        hyper=model.hyper,
        input_scaler=model.input_scaler,
        output_scaler=model.output_scaler,
        train_inputs=model.train_inputs.tolist(),
        train_targets=model.train_targets.tolist(),
    )


def _gp_model(record: GPRecord) -> GPModel:
    return GPModel(
        np.array(record.train_inputs, dtype=float),
        np.array(record.train_targets, dtype=float),
        record.hyper,
        record.input_scaler,
        record.output_scaler,
    )


def build_bundle(
    models: Dict[int, WorkingPressureModel],
    pump: PumpModel,
    geom_hash: str,
    training_fingerprint: str = "",
    filter_spec: Optional[FilterSpec] = None,
    epsilon: Optional[float] = None,
    metadata: Optional[BundleMetadata] = None
) -> ModelBundle:
    """Assemble the serializable bundle of trained models."""
    ordered = [models[actuator_id] for actuator_id in sorted(models)]
    if epsilon is None:
        epsilon = ordered[0].epsilon
    filter_spec = filter_spec or FilterSpec(dt=1.0)
    return ModelBundle(
        format_version=BUNDLE_FORMAT_VERSION,
        geometry_hash=geom_hash,
        training_fingerprint=training_fingerprint,
        epsilon=epsilon,
        filter_window=filter_spec.window,
        filter_order=filter_spec.poly_order,
        actuators=[
            WorkingPressureRecord(
                actuator_id=model.actuator_id,
                epsilon=model.epsilon,
                extend=_gp_record(model.gp_extend),
                retract=_gp_record(model.gp_retract),
            )
            for model in ordered
        ],
        pump=pump,
        metadata=metadata or BundleMetadata(package_version=__version__, seed=0),
    )


def save_bundle(
    models: Dict[int, WorkingPressureModel],
    pump: PumpModel,
    geom_hash: str,
    path: Union[str, Path],
    **kwargs
) -> ModelBundle:
    """
    Write a model bundle as versioned JSON.

    Args:
        models: Working-pressure models keyed by actuator id
        pump: Fitted pump model
        geom_hash: Hash of the geometry used for featurization
        path: Target file
        **kwargs: training_fingerprint, filter_spec, epsilon, metadata

    Returns:
        The written ModelBundle
    """
    return write_bundle(build_bundle(models, pump, geom_hash, **kwargs), path)


def write_bundle(bundle: ModelBundle, path: Union[str, Path]) -> ModelBundle:
    """Write an assembled bundle as indented JSON."""
    atomic_write(path, bundle.model_dump_json(indent=2) + "\n")
    logger.info(f"Saved model bundle {path} ({len(bundle.actuators)} actuators)")
    return bundle


def load_bundle(path: Union[str, Path]) -> LoadedBundle:
    """
    Read a model bundle and rebuild its models.

    Args:
        path: Bundle file

    Returns:
        LoadedBundle
    """
    bundle_path = Path(path)
    try:
        data = json.loads(bundle_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"{bundle_path}: not a JSON bundle ({e})") from e

    version = data.get("format_version") if isinstance(data, dict) else None
    if version != BUNDLE_FORMAT_VERSION:
        logger.error(f"Bundle {bundle_path} has format version {version}")
        raise BundleVersionError(
            f"{bundle_path}: bundle format version {version!r} is not supported "
            f"(this release reads version {BUNDLE_FORMAT_VERSION}); upgrade by retraining the bundle"
        )

    try:
        bundle = ModelBundle.model_validate(data)
    except ValidationError as e:
        raise SchemaError(f"{bundle_path}: malformed bundle: {e}") from e

    present = sorted(record.actuator_id for record in bundle.actuators)
    if present != list(ACTUATOR_IDS):
        logger.error(f"Bundle {bundle_path} holds actuators {present}")
        raise SchemaError(f"{bundle_path}: bundle must hold actuators {list(ACTUATOR_IDS)} once each, found {present}")

    models = {
        record.actuator_id: WorkingPressureModel(
            record.actuator_id,
            _gp_model(record.extend),
            _gp_model(record.retract),
            record.epsilon,
        )
        for record in bundle.actuators
    }
    return LoadedBundle(bundle=bundle, models=models, pump=bundle.pump)


def check_geometry(loaded: Union[LoadedBundle, ModelBundle], geom: CraneGeometry) -> None:
    """Raise GeometryError unless the bundle was trained with this geometry."""
    expected = loaded.geometry_hash
    actual = geometry_hash(geom)
    if expected != actual:
        logger.error(f"Geometry hash mismatch: bundle {expected[:12]}, configuration {actual[:12]}")
        raise GeometryError(
            f"bundle was trained with geometry {expected[:12]}…, configuration has {actual[:12]}…"
        )
