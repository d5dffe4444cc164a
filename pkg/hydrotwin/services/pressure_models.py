"""
Working-pressure models (two GPs per actuator, selected by flow direction)
and the pump-pressure composition with margins and standby pressure.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from hydrotwin.config import settings
from hydrotwin.errors import DimensionError, HydroTwinError, SchemaError
from hydrotwin.models.geometry import CraneGeometry
from hydrotwin.models.pressure import (
    DirectionedDataset,
    DirectionPartition,
    GPFitOptions,
    PumpFitResult,
    PumpModel,
)
from hydrotwin.models.signals import Direction, FeatureTable, FilterSpec, SignalLog
from hydrotwin.services.features import featurize
from hydrotwin.services.gaussian_process import GPModel, fit_gp, gp_predict
from hydrotwin.utils.logger import logger


MIN_PARTITION_ROWS = 10
UNIQUE_MAX_TOLERANCE = 1e-9
COORDINATE_SWEEPS = 100


class WorkingPressureModel:
    """Piecewise working-pressure model of one actuator."""

    def __init__(self, actuator_id: int, gp_extend: GPModel, gp_retract: GPModel, epsilon: float):
        self.actuator_id = actuator_id
        self.gp_extend = gp_extend
        self.gp_retract = gp_retract
        self.epsilon = epsilon

    def predict(self, q_flow: float, f_static: float) -> Tuple[float, float]:
        return predict_working_pressure(self, q_flow, f_static)


# ---------------------------------------------------------------------------
# Training sets
# ---------------------------------------------------------------------------

def dataset_from_features(table: FeatureTable, actuator_id: int) -> DirectionedDataset:
    """
    Split the moving samples of one actuator by direction.

    Args:
        table: Feature table with working-pressure targets
        actuator_id: Actuator 1, 2 or 3

    Returns:
        DirectionedDataset with rows (|q|, F_static, pressure)
    """
    directions = table.values(actuator_id, "direction")
    q_flow = table.values(actuator_id, "q_flow")
    f_static = table.values(actuator_id, "f_static")
    p_work = table.values(actuator_id, "p_work")

    parts = {}
    for direction in (Direction.EXTEND, Direction.RETRACT):
        mask = directions == direction.value
        if np.any(~np.isfinite(p_work[mask])):
            raise SchemaError(f"actuator {actuator_id}: working-pressure targets missing in {table.source or 'log'}")
        parts[direction] = DirectionPartition(
            q_flow=np.abs(q_flow[mask]),
            f_static=f_static[mask].copy(),
            pressure=p_work[mask].copy(),
        )

    return DirectionedDataset(
        actuator_id=actuator_id,
        extend=parts[Direction.EXTEND],
        retract=parts[Direction.RETRACT],
    )


def build_training_set(
    log: SignalLog,
    geom: CraneGeometry,
    actuator_id: int,
    epsilon: float,
    spec: Optional[FilterSpec] = None,
    min_rows: int = MIN_PARTITION_ROWS
) -> DirectionedDataset:
    """
    Featurize a log and collect the direction-partitioned rows of one actuator.

    Extend rows target the piston-side pressure, retract rows the rod-side
    pressure; hold samples are dropped.

    Args:
        log: Signal log with pressures
        geom: Crane geometry used for the static-force feature
        actuator_id: Actuator 1, 2 or 3
        epsilon: Velocity deadband (m/s)
        spec: Differentiation filter (defaults to window 11, order 3 at the log's dt)
        min_rows: Minimum rows per partition; 0 skips the check

    Returns:
        DirectionedDataset
    """
    if not log.has_pressures:
        raise SchemaError("training logs need side and pump pressure columns")
    table = featurize(log, geom, spec, epsilon)
    dataset = dataset_from_features(table, actuator_id)
    if min_rows > 0:
        dataset.require(min_rows)
    return dataset


def merge_datasets(datasets: Sequence[DirectionedDataset]) -> DirectionedDataset:
    """Concatenate datasets of the same actuator (in the given order)."""
    if not datasets:
        raise DimensionError("no datasets to merge")
    actuator_ids = {ds.actuator_id for ds in datasets}
    if len(actuator_ids) != 1:
        raise DimensionError(f"cannot merge datasets of actuators {sorted(actuator_ids)}")
    return DirectionedDataset(
        actuator_id=datasets[0].actuator_id,
        extend=DirectionPartition.concatenate([ds.extend for ds in datasets]),
        retract=DirectionPartition.concatenate([ds.retract for ds in datasets]),
    )


def decimate(part: DirectionPartition, max_rows: int) -> DirectionPartition:
    """Keep at most max_rows evenly spaced rows."""
    if part.n_rows <= max_rows:
        return part
    index = np.unique(np.round(np.linspace(0, part.n_rows - 1, max_rows)).astype(int))
    return DirectionPartition(part.q_flow[index], part.f_static[index], part.pressure[index])


# ---------------------------------------------------------------------------
# Working-pressure models
# ---------------------------------------------------------------------------

def train_working_pressure(
    ds: DirectionedDataset,
    opts: Optional[GPFitOptions] = None,
    max_rows: Optional[int] = None,
    epsilon: Optional[float] = None
) -> WorkingPressureModel:
    """
    Fit the extend and retract GPs of one actuator independently.

    Args:
        ds: Direction-partitioned training rows
        opts: GP optimizer settings
        max_rows: Per-partition row cap (evenly spaced decimation)
        epsilon: Deadband recorded with the model

    Returns:
        WorkingPressureModel
    """
    ds.require(MIN_PARTITION_ROWS)
    opts = opts or GPFitOptions(
        restarts=settings.gp_restarts,
        max_iter=settings.gp_max_iter,
        seed=settings.seed,
        max_rows=settings.gp_max_rows,
    )
    max_rows = max_rows or settings.max_train_rows
    epsilon = settings.epsilon if epsilon is None else epsilon

    models = {}
    for name, part in (("extend", ds.extend), ("retract", ds.retract)):
        rows = decimate(part, max_rows)
        logger.info(
            f"Actuator {ds.actuator_id}: fitting {name} GP on {rows.n_rows} of {part.n_rows} rows"
        )
        try:
            models[name] = fit_gp(rows.inputs, rows.pressure, opts)
        except HydroTwinError as e:
            logger.error(f"Actuator {ds.actuator_id} partition {name}: {e}")
            raise type(e)(f"actuator {ds.actuator_id} partition '{name}': {e}") from e

    return WorkingPressureModel(ds.actuator_id, models["extend"], models["retract"], epsilon)


def train_all_working_pressure(
    datasets: Sequence[DirectionedDataset],
    opts: Optional[GPFitOptions] = None,
    max_rows: Optional[int] = None,
    epsilon: Optional[float] = None,
    max_workers: Optional[int] = None
) -> Dict[int, WorkingPressureModel]:
    """Train independent actuator models concurrently; results keyed by actuator id."""
    max_workers = max_workers or settings.max_concurrent_jobs
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {
            ds.actuator_id: pool.submit(train_working_pressure, ds, opts, max_rows, epsilon)
            for ds in datasets
        }
        return {actuator_id: futures[actuator_id].result() for actuator_id in sorted(futures)}


def predict_working_pressure_batch(
    m: WorkingPressureModel,
    q_flows: np.ndarray,
    forces: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized working-pressure prediction.

    Args:
        m: Working-pressure model
        q_flows: Signed deadbanded flows (m³/s)
        forces: Static reaction forces (N)

    Returns:
        (mean Pa, variance Pa²); zero flow gives exactly (0, 0), means are clamped at 0
    """
    q_flows = np.asarray(q_flows, dtype=float).ravel()
    forces = np.asarray(forces, dtype=float).ravel()
    if q_flows.shape != forces.shape:
        raise DimensionError("q_flows and forces differ in length")

    means = np.zeros(q_flows.size)
    variances = np.zeros(q_flows.size)
    for mask, gp in ((q_flows > 0, m.gp_extend), (q_flows < 0, m.gp_retract)):
        if not np.any(mask):
            continue
        mean, variance = gp_predict(gp, np.column_stack([np.abs(q_flows[mask]), forces[mask]]))
        clamped = mean < 0
        if np.any(clamped):
            logger.debug(
                f"Actuator {m.actuator_id}: clamped {int(np.sum(clamped))} negative predictions "
                f"(min {float(np.min(mean)):.4g} Pa)"
            )
        means[mask] = np.maximum(mean, 0.0)
        variances[mask] = variance
    return means, variances


def predict_working_pressure(m: WorkingPressureModel, q_flow: float, f_static: float) -> Tuple[float, float]:
    """Working pressure (Pa) and variance (Pa²) for one sample."""
    if q_flow == 0:
        return 0.0, 0.0
    means, variances = predict_working_pressure_batch(m, np.array([q_flow]), np.array([f_static]))
    return float(means[0]), float(variances[0])


# ---------------------------------------------------------------------------
# Pump composition
# ---------------------------------------------------------------------------

def activation(q_flow: float) -> int:
    """1 while the actuator is in working mode (non-zero deadbanded flow)."""
    return 1 if q_flow != 0 else 0


def pump_demand(pressures: Sequence[float], flows: Sequence[float], pump: PumpModel) -> float:
    """Highest elevated demand max_i(P_i + c_i·activation(q_i))."""
    if not (len(pressures) == len(flows) == len(pump.margins)):
        raise DimensionError(
            f"got {len(pressures)} pressures and {len(flows)} flows for {len(pump.margins)} margins"
        )
    return max(p + c * activation(q) for p, q, c in zip(pressures, flows, pump.margins))


def pump_pressure(demand: float, pump: PumpModel) -> float:
    """Pump output: never below the standby pressure."""
    return max(pump.standby, demand)


def elevated_demands(pressures: np.ndarray, flows: np.ndarray, margins: Sequence[float]) -> np.ndarray:
    """(n, m) elevated demands P + c·activation for series of samples."""
    pressures = np.atleast_2d(np.asarray(pressures, dtype=float))
    flows = np.atleast_2d(np.asarray(flows, dtype=float))
    if pressures.shape != flows.shape or pressures.shape[1] != len(margins):
        raise DimensionError(f"pressure {pressures.shape} and flow {flows.shape} series do not match the pump")
    return pressures + np.asarray(margins, dtype=float) * (flows != 0)


def pump_pressure_series(pressures: np.ndarray, flows: np.ndarray, pump: PumpModel) -> np.ndarray:
    """Pump pressure for every sample of (n, m) pressure and flow series."""
    return np.maximum(pump.standby, elevated_demands(pressures, flows, pump.margins).max(axis=1))


def demand_argmax(pressures: np.ndarray, flows: np.ndarray, pump: PumpModel) -> np.ndarray:
    """
    Dominating actuator id per sample (lowest id on ties), 0 where standby
    is at least every elevated demand.
    """
    demands = elevated_demands(pressures, flows, pump.margins)
    winner = demands.argmax(axis=1) + 1
    return np.where(demands.max(axis=1) > pump.standby, winner, 0)


# ---------------------------------------------------------------------------
# Margin fitting
# ---------------------------------------------------------------------------

def _minimize_max_quadratic(
    floor: np.ndarray,
    base: np.ndarray,
    target: np.ndarray,
    lower: float = 0.0
) -> float:
    """
    Exact minimizer over x >= lower of sum_k (max(floor_k, base_k + x) - target_k)².

    Between consecutive breakpoints floor_k - base_k the set of terms that
    depend on x is fixed and the objective is a quadratic, so every interval
    contributes one candidate. Ties resolve to the smallest x.
    """
    if floor.size == 0:
        return lower

    breakpoints = floor - base
    order = np.argsort(breakpoints, kind="stable")
    breakpoints = breakpoints[order]
    offsets = (target - base)[order]
    constants = ((floor - target) ** 2)[order]

    n = breakpoints.size
    active = np.arange(n + 1)
    s1 = np.concatenate([[0.0], np.cumsum(offsets)])
    s2 = np.concatenate([[0.0], np.cumsum(offsets ** 2)])
    inactive = np.concatenate([np.cumsum(constants[::-1])[::-1], [0.0]])

    lo = np.maximum(np.concatenate([[-np.inf], breakpoints]), lower)
    hi = np.concatenate([breakpoints, [np.inf]])
    valid = lo <= hi

    free = np.where(active > 0, s1 / np.maximum(active, 1), lo)
    x = np.minimum(np.maximum(free, lo), hi)
    value = inactive + active * x ** 2 - 2.0 * x * s1 + s2
    value = np.where(valid, value, np.inf)
    return float(x[int(np.argmin(value))])


def _unique_dominance(demands: np.ndarray, flows: np.ndarray, standby: float) -> List[int]:
    """Samples where each actuator is active and strictly the largest elevated demand."""
    n, m = demands.shape
    counts = [0] * m
    if m == 0 or n == 0:
        return counts
    order = np.sort(demands, axis=1)
    top = order[:, -1]
    second = order[:, -2] if m > 1 else np.full(n, -np.inf)
    winner = demands.argmax(axis=1)
    unique = (top - second > UNIQUE_MAX_TOLERANCE) & (top > standby + UNIQUE_MAX_TOLERANCE)
    unique &= flows[np.arange(n), winner] != 0
    for i in range(m):
        counts[i] = int(np.sum(unique & (winner == i)))
    return counts


def fit_pump_margins(
    predicted: np.ndarray,
    flows: np.ndarray,
    measured: np.ndarray,
    fit_standby: bool = False,
    standby: Optional[float] = None,
    iterations: Optional[int] = None,
    seed: int = 0
) -> PumpFitResult:
    """
    Fit non-negative margins (and optionally the standby pressure) to
    measured pump pressure.

    A projected subgradient phase (step 0.5/sqrt(t), projection onto c >= 0)
    is followed by exact coordinate descent in a seeded random order. Both
    work on pressures normalized by the largest measured value.

    Args:
        predicted: (n, m) working pressures per actuator (Pa)
        flows: (n, m) deadbanded flows per actuator (m³/s)
        measured: n measured pump pressures (Pa)
        fit_standby: Fit the standby pressure as well
        standby: Fixed (or initial) standby pressure (Pa)
        iterations: Subgradient iterations
        seed: Seed of the coordinate order

    Returns:
        PumpFitResult with identifiability flags
    """
    predicted = np.atleast_2d(np.asarray(predicted, dtype=float))
    flows = np.atleast_2d(np.asarray(flows, dtype=float))
    measured = np.asarray(measured, dtype=float).ravel()
    if predicted.shape != flows.shape or predicted.shape[0] != measured.size:
        raise DimensionError(
            f"predicted {predicted.shape}, flows {flows.shape} and measured {measured.shape} are not aligned"
        )
    if measured.size == 0:
        raise DimensionError("no samples to fit the pump model on")

    standby = settings.standby_pressure if standby is None else standby
    iterations = iterations or settings.margin_iterations
    n, m = predicted.shape

    scale = float(np.max(np.abs(measured)))
    scale = scale if scale > 0 else 1.0
    pressures = predicted / scale
    target = measured / scale
    active = (flows != 0).astype(float)
    margins = np.zeros(m)
    floor = standby / scale

    for t in range(1, iterations + 1):
        demands = pressures + margins * active
        demand = demands.max(axis=1)
        residual = np.maximum(floor, demand) - target
        pump_driven = demand > floor
        winner = demands.argmax(axis=1)

        gradient = np.zeros(m)
        np.add.at(
            gradient,
            winner[pump_driven],
            residual[pump_driven] * active[pump_driven, winner[pump_driven]],
        )
        step = 0.5 / np.sqrt(t)
        margins = np.maximum(0.0, margins - step * 2.0 / n * gradient)
        if fit_standby:
            floor = max(0.0, floor - step * 2.0 / n * float(np.sum(residual[~pump_driven])))

    rng = np.random.default_rng(seed)
    coordinates = m + (1 if fit_standby else 0)
    for sweep in range(COORDINATE_SWEEPS):
        previous = np.append(margins, floor)
        for i in rng.permutation(coordinates):
            demands = pressures + margins * active
            if i == m:
                floor = _minimize_max_quadratic(demands.max(axis=1), np.zeros(n), target)
                continue
            mask = active[:, i] > 0
            if not np.any(mask):
                continue
            others = np.delete(demands[mask], i, axis=1)
            other_max = others.max(axis=1) if others.shape[1] else np.full(int(np.sum(mask)), -np.inf)
            margins[i] = _minimize_max_quadratic(
                np.maximum(floor, other_max), pressures[mask, i], target[mask]
            )
        change = float(np.max(np.abs(np.append(margins, floor) - previous)))
        if change < 1e-12:
            logger.debug(f"Margin refinement converged after {sweep + 1} sweeps")
            break

    demands = pressures + margins * active
    fitted = np.maximum(floor, demands.max(axis=1))
    rmse = float(np.sqrt(np.mean((fitted - target) ** 2))) * scale
    counts = _unique_dominance(demands, flows, floor)
    identifiable = [count > 0 for count in counts]
    for i, ok in enumerate(identifiable):
        if not ok:
            logger.warning(f"Margin of actuator {i + 1} is unidentifiable: it never uniquely dominates the pump")

    pump = PumpModel(margins=[float(c * scale) for c in margins], standby=float(floor * scale))
    logger.info(
        f"Fitted pump margins {[round(c) for c in pump.margins]} Pa, standby {pump.standby:.0f} Pa, "
        f"rmse {rmse:.0f} Pa"
    )
    return PumpFitResult(
        pump=pump,
        identifiable=identifiable,
        dominant_samples=counts,
        rmse=rmse,
        standby_fitted=fit_standby,
    )
