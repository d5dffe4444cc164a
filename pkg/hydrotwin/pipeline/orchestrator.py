"""
Pipeline orchestrator that composes featurization, training, prediction and
evaluation.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from hydrotwin import __version__
from hydrotwin.config import settings
from hydrotwin.errors import HydroTwinError, SchemaError
from hydrotwin.models.bundle import BundleMetadata, ModelBundle
from hydrotwin.models.geometry import CraneGeometry
from hydrotwin.models.pressure import GPFitOptions, PumpFitResult, PumpModel
from hydrotwin.models.reports import (
    ActuatorMetrics,
    ActuatorTrainingReport,
    EvaluationReport,
    LogEvaluation,
    PartitionReport,
    PipelineStage,
    TrainingReport,
)
from hydrotwin.models.signals import ACTUATOR_IDS, TIME_COLUMN, Direction, FeatureTable, FilterSpec, SignalLog
from hydrotwin.services.data_io import LoadedBundle, build_bundle, check_geometry
from hydrotwin.services.features import featurize, geometry_hash
from hydrotwin.services.pressure_models import (
    WorkingPressureModel,
    dataset_from_features,
    demand_argmax,
    fit_pump_margins,
    merge_datasets,
    predict_working_pressure_batch,
    pump_pressure_series,
    train_all_working_pressure,
)
from hydrotwin.services.plot_service import plot_pump_pressure, plot_working_pressures, write_series
from hydrotwin.utils.file_utils import get_arrays_fingerprint, nrmse
from hydrotwin.utils.logger import logger


DEFAULT_ARGMAX_MIN_GAP = 2.5e5  # twice the default pressure noise std (Pa)


@dataclass
class TrainingResult:
    """Trained models with the bundle and report describing them."""

    models: Dict[int, WorkingPressureModel]
    pump_fit: PumpFitResult
    bundle: ModelBundle
    report: TrainingReport


@dataclass
class PressurePrediction:
    """Predicted working and pump pressures for every sample of a log."""

    table: FeatureTable
    working: np.ndarray    # (n, 3) Pa
    variance: np.ndarray   # (n, 3) Pa²
    flows: np.ndarray      # (n, 3) m³/s
    pump: np.ndarray       # (n,) Pa
    argmax: np.ndarray     # (n,) dominating actuator, 0 = standby

    def to_frame(self) -> pd.DataFrame:
        out = {TIME_COLUMN: self.table.time}
        for actuator_id in ACTUATOR_IDS:
            j = actuator_id - 1
            out[f"q_flow_{actuator_id}_m3s"] = self.flows[:, j]
            out[f"f_static_{actuator_id}_n"] = self.table.values(actuator_id, "f_static")
            out[f"direction_{actuator_id}"] = self.table.values(actuator_id, "direction")
            out[f"pred_p_work_{actuator_id}_pa"] = self.working[:, j]
            out[f"pred_p_work_var_{actuator_id}_pa2"] = self.variance[:, j]
        out["pred_p_pump_pa"] = self.pump
        out["pred_demand_argmax"] = self.argmax
        return pd.DataFrame(out)


class PipelineOrchestrator:
    """Coordinates the train, predict and evaluate workflows for one crane geometry."""

    def __init__(
        self,
        geometry: CraneGeometry,
        epsilon: Optional[float] = None,
        sg_window: Optional[int] = None,
        sg_order: Optional[int] = None,
        seed: Optional[int] = None
    ):
        self.geometry = geometry
        self.epsilon = settings.epsilon if epsilon is None else epsilon
        self.sg_window = sg_window or settings.sg_window
        self.sg_order = sg_order or settings.sg_order
        self.seed = settings.seed if seed is None else seed
        self.runs: Dict[str, Dict] = {}

    def _update_stage(self, run: str, stage: PipelineStage, progress: int, message: str) -> None:
        """
        Update and log the status of a run.

        Args:
            run: Run name
            stage: Current stage
            progress: Progress percentage
            message: Status message
        """
        self.runs[run] = {"stage": stage, "progress": progress, "message": message}
        logger.info(f"Run {run}: {message} ({progress}%)")

    def filter_spec(self, dt: float) -> FilterSpec:
        return FilterSpec(window=self.sg_window, poly_order=self.sg_order, dt=dt)

    def featurize(self, log: SignalLog) -> FeatureTable:
        return featurize(log, self.geometry, self.filter_spec(log.dt), self.epsilon)

    # ------------------------------------------------------------------
    # Training
    # ------------------------------------------------------------------

    def train(
        self,
        logs: Sequence[SignalLog],
        fit_standby: bool = False,
        standby: Optional[float] = None,
        opts: Optional[GPFitOptions] = None,
        max_rows: Optional[int] = None
    ) -> TrainingResult:
        """
        Train all working-pressure models, then fit the pump margins on
        their predictions.

        Args:
            logs: Training logs with pressures
            fit_standby: Fit the standby pressure as well
            standby: Fixed (or initial) standby pressure (Pa)
            opts: GP optimizer settings (seeded from the orchestrator seed)
            max_rows: Rows kept per direction partition

        Returns:
            TrainingResult
        """
        run = "train"
        opts = opts or GPFitOptions(
            restarts=settings.gp_restarts,
            max_iter=settings.gp_max_iter,
            seed=self.seed,
            max_rows=settings.gp_max_rows,
        )
        max_rows = max_rows or settings.max_train_rows
        try:
            self._update_stage(run, PipelineStage.FEATURIZING, 10, f"Featurizing {len(logs)} training logs...")
            for log in logs:
                if not log.has_pressures:
                    raise SchemaError(f"training log {log.name or '?'} has no pressure columns")
            tables = [self.featurize(log) for log in logs]

            self._update_stage(run, PipelineStage.TRAINING, 30, "Training working-pressure models...")
            datasets = [
                merge_datasets([dataset_from_features(table, actuator_id) for table in tables])
                for actuator_id in ACTUATOR_IDS
            ]
            for ds in datasets:
                logger.info(
                    f"Actuator {ds.actuator_id}: {ds.extend.n_rows} extend rows, {ds.retract.n_rows} retract rows"
                )
                ds.require()
            models = train_all_working_pressure(datasets, opts, max_rows, self.epsilon)

            self._update_stage(run, PipelineStage.FITTING_PUMP, 75, "Fitting pump margins...")
            predicted, flows = self._predict_tables(models, tables)
            measured = np.concatenate([table.pump_pressure for table in tables])
            pump_fit = fit_pump_margins(
                predicted, flows, measured,
                fit_standby=fit_standby,
                standby=standby,
                seed=self.seed,
            )

            fingerprint = get_arrays_fingerprint(
                [array for ds in datasets for part in (ds.extend, ds.retract)
                 for array in (part.q_flow, part.f_static, part.pressure)] + [measured]
            )
            geom_hash = geometry_hash(self.geometry)
            spec = tables[0].filter
            metadata = BundleMetadata(
                package_version=__version__,
                seed=self.seed,
                training_logs=[log.name for log in logs],
                row_counts={
                    str(ds.actuator_id): {"extend": ds.extend.n_rows, "retract": ds.retract.n_rows}
                    for ds in datasets
                },
                identifiable=pump_fit.identifiable,
            )
            bundle = build_bundle(
                models, pump_fit.pump, geom_hash,
                training_fingerprint=fingerprint,
                filter_spec=spec,
                epsilon=self.epsilon,
                metadata=metadata,
            )
            report = TrainingReport(
                training_logs=metadata.training_logs,
                geometry_hash=geom_hash,
                training_fingerprint=fingerprint,
                seed=self.seed,
                epsilon=self.epsilon,
                filter_window=spec.window,
                filter_order=spec.poly_order,
                actuators=[
                    ActuatorTrainingReport(
                        actuator_id=ds.actuator_id,
                        extend=self._partition_report(ds.extend.n_rows, models[ds.actuator_id].gp_extend),
                        retract=self._partition_report(ds.retract.n_rows, models[ds.actuator_id].gp_retract),
                    )
                    for ds in datasets
                ],
                pump=pump_fit.pump,
                standby_fitted=pump_fit.standby_fitted,
                identifiable=pump_fit.identifiable,
                dominant_samples=pump_fit.dominant_samples,
                pump_rmse=pump_fit.rmse,
            )
            self._update_stage(run, PipelineStage.COMPLETED, 100, "Training finished")
            return TrainingResult(models=models, pump_fit=pump_fit, bundle=bundle, report=report)

        except HydroTwinError as e:
            logger.error(f"Training failed: {e}")
            self._update_stage(run, PipelineStage.FAILED, 0, f"Training failed: {e}")
            raise

    @staticmethod
    def _partition_report(rows: int, gp) -> PartitionReport:
        return PartitionReport(
            rows=rows,
            used_rows=gp.n_train,
            hyper=gp.hyper,
            log_marginal_likelihood=gp.log_marginal_likelihood(),
        )

    @staticmethod
    def _predict_table(models: Dict[int, WorkingPressureModel], table: FeatureTable):
        n = len(table)
        working = np.zeros((n, len(ACTUATOR_IDS)))
        variance = np.zeros((n, len(ACTUATOR_IDS)))
        flows = np.zeros((n, len(ACTUATOR_IDS)))
        for actuator_id in ACTUATOR_IDS:
            j = actuator_id - 1
            flows[:, j] = table.values(actuator_id, "q_flow")
            working[:, j], variance[:, j] = predict_working_pressure_batch(
                models[actuator_id], flows[:, j], table.values(actuator_id, "f_static")
            )
        return working, variance, flows

    def _predict_tables(self, models: Dict[int, WorkingPressureModel], tables: Sequence[FeatureTable]):
        parts = [self._predict_table(models, table) for table in tables]
        return np.vstack([p[0] for p in parts]), np.vstack([p[2] for p in parts])

    # ------------------------------------------------------------------
    # Prediction
    # ------------------------------------------------------------------

    def predict(self, loaded: LoadedBundle, log: SignalLog) -> PressurePrediction:
        """
        Predict working and pump pressures from joint states alone.

        Args:
            loaded: Model bundle
            log: Signal log (pressure columns are not used)

        Returns:
            PressurePrediction
        """
        run = f"predict {log.name or 'log'}"
        check_geometry(loaded, self.geometry)
        self._update_stage(run, PipelineStage.FEATURIZING, 20, "Featurizing joint states...")
        spec = loaded.bundle.filter_spec(log.dt)
        table = featurize(log, self.geometry, spec, loaded.bundle.epsilon)

        self._update_stage(run, PipelineStage.PREDICTING, 60, "Predicting pressures...")
        working, variance, flows = self._predict_table(loaded.models, table)
        pump = pump_pressure_series(working, flows, loaded.pump)
        argmax = demand_argmax(working, flows, loaded.pump)
        self._update_stage(run, PipelineStage.COMPLETED, 100, "Prediction finished")
        return PressurePrediction(table, working, variance, flows, pump, argmax)

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def evaluate(
        self,
        loaded: LoadedBundle,
        logs: Sequence[SignalLog],
        argmax_min_gap: float = DEFAULT_ARGMAX_MIN_GAP,
        plot_dir: Optional[Path] = None
    ) -> EvaluationReport:
        """
        Compare predictions with measured (and, when logged, pre-noise) pressures.

        Args:
            loaded: Model bundle
            logs: Evaluation logs with pressures
            argmax_min_gap: Minimum true demand gap (Pa) for argmax scoring
            plot_dir: Directory for SVG plots and series CSVs; None skips plots

        Returns:
            EvaluationReport
        """
        results: List[LogEvaluation] = []
        plots: Dict[str, List[str]] = {}
        for index, log in enumerate(logs):
            if not log.has_pressures:
                raise SchemaError(f"evaluation log {log.name or '?'} has no pressure columns")
            prediction = self.predict(loaded, log)
            run = f"evaluate {log.name or index}"
            self._update_stage(run, PipelineStage.EVALUATING, 70, "Computing metrics...")
            results.append(self._evaluate_log(log, prediction, argmax_min_gap))

            if plot_dir is not None:
                self._update_stage(run, PipelineStage.WRITING, 90, "Writing plots...")
                stem = log.name or f"log{index}"
                plots[stem] = [
                    str(plot_working_pressures(prediction, Path(plot_dir) / f"{stem}_working.svg", title=stem)),
                    str(plot_pump_pressure(prediction, Path(plot_dir) / f"{stem}_pump.svg", title=stem)),
                    str(write_series(prediction, Path(plot_dir) / f"{stem}_series.csv")),
                ]
            self._update_stage(run, PipelineStage.COMPLETED, 100, "Evaluation finished")

        return EvaluationReport(
            geometry_hash=loaded.geometry_hash,
            argmax_min_gap=argmax_min_gap,
            logs=results,
            plots=plots,
        )

    def _evaluate_log(self, log: SignalLog, prediction: PressurePrediction, argmax_min_gap: float) -> LogEvaluation:
        table = prediction.table
        dt = log.dt
        measured_pump = table.pump_pressure

        actuators = []
        measured_working = np.zeros_like(prediction.working)
        for actuator_id in ACTUATOR_IDS:
            j = actuator_id - 1
            p_work = table.values(actuator_id, "p_work")
            measured_working[:, j] = p_work
            moving = table.values(actuator_id, "direction") != Direction.HOLD.value

            truth = log.column(f"true_p_work_{actuator_id}_pa")
            rmse_truth = None
            if truth is not None:
                rmse_truth = float(np.sqrt(np.mean((prediction.working[:, j] - truth.astype(float)) ** 2)))

            actuators.append(ActuatorMetrics(
                actuator_id=actuator_id,
                moving_samples=int(np.sum(moving)),
                working_nrmse=nrmse(p_work, prediction.working[:, j]),
                working_rmse_truth=rmse_truth,
                force_correlation=self._force_correlation(
                    table.values(actuator_id, "f_total")[moving],
                    table.values(actuator_id, "f_static")[moving],
                ),
            ))

        pump_truth = log.column("true_p_pump_pa")
        pump_rmse_truth = None
        if pump_truth is not None:
            pump_rmse_truth = float(np.sqrt(np.mean((prediction.pump - pump_truth.astype(float)) ** 2)))

        argmax_accuracy, argmax_samples = None, 0
        true_argmax = log.column("true_demand_argmax")
        gap = log.column("true_demand_gap_pa")
        if true_argmax is not None and gap is not None:
            clear = gap.astype(float) > argmax_min_gap
            argmax_samples = int(np.sum(clear))
            if argmax_samples:
                argmax_accuracy = float(np.mean(prediction.argmax[clear] == true_argmax.astype(int)[clear]))

        magnitude = np.abs(prediction.flows)
        active = prediction.flows != 0
        return LogEvaluation(
            log=log.name,
            samples=len(log),
            actuators=actuators,
            pump_nrmse=nrmse(measured_pump, prediction.pump),
            pump_rmse_truth=pump_rmse_truth,
            argmax_accuracy=argmax_accuracy,
            argmax_samples=argmax_samples,
            pump_energy_measured_j=float(np.sum(measured_pump * magnitude.sum(axis=1)) * dt),
            pump_energy_predicted_j=float(np.sum(prediction.pump * magnitude.sum(axis=1)) * dt),
            throttling_energy_measured_j=throttling_energy(measured_pump, measured_working, magnitude, active, dt),
            throttling_energy_predicted_j=throttling_energy(
                prediction.pump, prediction.working, magnitude, active, dt
            ),
        )

    @staticmethod
    def _force_correlation(measured: np.ndarray, static: np.ndarray) -> Optional[float]:
        ok = np.isfinite(measured) & np.isfinite(static)
        if np.sum(ok) < 2 or np.std(measured[ok]) == 0 or np.std(static[ok]) == 0:
            return None
        return float(np.corrcoef(measured[ok], static[ok])[0, 1])


def throttling_energy(
    pump: np.ndarray,
    working: np.ndarray,
    flow_magnitude: np.ndarray,
    active: np.ndarray,
    dt: float
) -> float:
    """
    Energy (J) dissipated across the valves of active actuators:
    sum over samples and actuators of max(0, P_pump - P_i)·|Q_i|·dt.
    """
    drop = np.maximum(0.0, pump[:, None] - working)
    return float(np.sum(drop * flow_magnitude * active) * dt)
