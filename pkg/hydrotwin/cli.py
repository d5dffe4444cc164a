"""
Command-line front end: simulate, featurize, train, predict and evaluate.

Exit codes: 0 success, 1 runtime failure, 2 configuration or schema error.
"""
import argparse
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from pydantic import ValidationError

from hydrotwin import __version__
from hydrotwin.config import LOG_LEVEL_ALIASES, settings
from hydrotwin.errors import ConfigError, HydroTwinError
from hydrotwin.models.plant import PlantConfig
from hydrotwin.models.run_config import RunConfig, Subcommand
from hydrotwin.pipeline.orchestrator import DEFAULT_ARGMAX_MIN_GAP, PipelineOrchestrator
from hydrotwin.services.config_loader import load_config, load_schedule
from hydrotwin.services.data_io import (
    load_bundle,
    read_log,
    write_bundle,
    write_feature_table,
    write_log,
)
from hydrotwin.services.synthetic_plant import default_plant, experiment_suite, simulate_trajectory
from hydrotwin.utils.file_utils import atomic_write, ensure_directory
from hydrotwin.utils.logger import logger, set_level


def _plant_config(run: RunConfig) -> PlantConfig:
    if run.config_path is None:
        plant = default_plant()
        return PlantConfig(geometry=plant.geometry, plant=plant)
    return load_config(run.config_path)


def _orchestrator(run: RunConfig, config: PlantConfig) -> PipelineOrchestrator:
    return PipelineOrchestrator(
        config.geometry,
        epsilon=run.epsilon,
        sg_window=run.sg_window,
        sg_order=run.sg_order,
        seed=run.seed,
    )


def cmd_simulate(run: RunConfig) -> List[Path]:
    """Simulate experiments I to V (or a custom schedule) and write the logs."""
    config = _plant_config(run)
    if config.plant is None:
        raise ConfigError(f"{run.config_path}: simulate needs a [plant] table")

    if run.schedule is not None:
        name = run.schedule.stem
        logs = {name: simulate_trajectory(config.plant, load_schedule(run.schedule), run.dt, run.seed, name=name)}
    else:
        logs = {f"experiment_{key}": log for key, log in experiment_suite(config.plant, run.dt, run.seed).items()}

    return [write_log(log, run.out_dir / f"{name}.csv") for name, log in logs.items()]


def cmd_featurize(run: RunConfig) -> List[Path]:
    """Write a feature table (CSV + JSON sidecar) for every log."""
    orchestrator = _orchestrator(run, _plant_config(run))
    paths = []
    for path in run.logs:
        log = read_log(path, require_pressures=False)
        paths.append(write_feature_table(orchestrator.featurize(log), run.out_dir / f"{log.name}_features.csv"))
    return paths


def cmd_train(run: RunConfig) -> List[Path]:
    """Train the working-pressure and pump models; write bundle and training report."""
    config = _plant_config(run)
    standby = config.plant.standby if config.plant is not None else settings.standby_pressure
    logs = [read_log(path) for path in run.logs]

    result = _orchestrator(run, config).train(logs, fit_standby=run.fit_standby, standby=standby)
    bundle_path = run.out_dir / "bundle.json"
    write_bundle(result.bundle, bundle_path)
    report_path = atomic_write(run.out_dir / "training_report.json", result.report.model_dump_json(indent=2) + "\n")
    return [bundle_path, report_path]


def cmd_predict(run: RunConfig) -> List[Path]:
    """Predict pressures from joint states; one prediction CSV per log."""
    orchestrator = _orchestrator(run, _plant_config(run))
    loaded = load_bundle(run.bundle)
    paths = []
    for path in run.logs:
        log = read_log(path, require_pressures=False)
        prediction = orchestrator.predict(loaded, log)
        paths.append(atomic_write(
            run.out_dir / f"{log.name}_prediction.csv",
            prediction.to_frame().to_csv(index=False),
        ))
    return paths


def cmd_evaluate(run: RunConfig) -> List[Path]:
    """Score a bundle on held-out logs; write metrics and plot files."""
    orchestrator = _orchestrator(run, _plant_config(run))
    loaded = load_bundle(run.bundle)
    logs = [read_log(path) for path in run.logs]

    seen = set(loaded.bundle.metadata.training_logs)
    for log in logs:
        if log.name in seen:
            logger.warning(f"Log {log.name} was used for training; its metrics are not held-out metrics")

    plot_dir = run.out_dir / "plots" if run.plots else None
    report = orchestrator.evaluate(loaded, logs, run.argmax_min_gap, plot_dir)
    report_path = atomic_write(run.out_dir / "evaluation_report.json", report.model_dump_json(indent=2) + "\n")
    return [report_path] + [Path(p) for paths in report.plots.values() for p in paths]


COMMANDS: Dict[Subcommand, Callable[[RunConfig], List[Path]]] = {
    Subcommand.SIMULATE: cmd_simulate,
    Subcommand.FEATURIZE: cmd_featurize,
    Subcommand.TRAIN: cmd_train,
    Subcommand.PREDICT: cmd_predict,
    Subcommand.EVALUATE: cmd_evaluate,
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one sub-parser per subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML geometry/plant configuration (default plant if omitted)")
    common.add_argument("--seed", type=int, help=f"Random seed (default {settings.seed})")
    common.add_argument("--out", type=Path, help=f"Output directory (default {settings.output_dir})")
    common.add_argument("--epsilon", type=float, help=f"Velocity deadband in m/s (default {settings.epsilon})")
    common.add_argument("--sg-window", type=int, help=f"Savitzky-Golay window (default {settings.sg_window})")
    common.add_argument("--sg-order", type=int, help=f"Savitzky-Golay order (default {settings.sg_order})")
    common.add_argument("--fit-standby", action="store_true", help="Fit the standby pressure with the margins")
    common.add_argument("--log-level", choices=sorted(LOG_LEVEL_ALIASES), help="Overrides HYDROTWIN_LOG_LEVEL")

    parser = argparse.ArgumentParser(
        prog="hydrotwin",
        description="Pressure prediction for load-sensing hydraulic cranes",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    simulate = subparsers.add_parser("simulate", parents=[common], help="Generate synthetic signal logs")
    simulate.add_argument("--dt", type=float, default=0.02, help="Sample period in s (default 0.02)")
    simulate.add_argument("--schedule", type=Path, help="Custom command schedule (TOML) instead of experiments I-V")

    for name, text in (
        ("featurize", "Write feature tables"),
        ("train", "Train working-pressure and pump models"),
        ("predict", "Predict pressures from joint states"),
        ("evaluate", "Score a bundle on logs with measured pressures"),
    ):
        sub = subparsers.add_parser(name, parents=[common], help=text)
        sub.add_argument("--log", type=Path, action="append", default=[], help="Signal log CSV (repeatable)")
        if name in ("predict", "evaluate"):
            sub.add_argument("--bundle", type=Path, required=True, help="Model bundle JSON")
        if name == "evaluate":
            sub.add_argument(
                "--argmax-min-gap", type=float, default=DEFAULT_ARGMAX_MIN_GAP,
                help="Minimum true demand gap in Pa for argmax scoring",
            )
            sub.add_argument("--no-plots", action="store_true", help="Skip SVG plots")

    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    """Merge flags over settings into a validated RunConfig."""
    try:
        return RunConfig(
            command=args.command,
            config_path=args.config,
            out_dir=args.out or settings.output_dir,
            logs=getattr(args, "log", []),
            bundle=getattr(args, "bundle", None),
            schedule=getattr(args, "schedule", None),
            epsilon=settings.epsilon if args.epsilon is None else args.epsilon,
            sg_window=settings.sg_window if args.sg_window is None else args.sg_window,
            sg_order=settings.sg_order if args.sg_order is None else args.sg_order,
            seed=settings.seed if args.seed is None else args.seed,
            dt=getattr(args, "dt", 0.02),
            fit_standby=args.fit_standby,
            argmax_min_gap=getattr(args, "argmax_min_gap", DEFAULT_ARGMAX_MIN_GAP),
            plots=not getattr(args, "no_plots", False),
        )
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in item['loc']) or 'arguments'}: {item['msg']}" for item in e.errors()
        )
        raise ConfigError(problems) from e


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)

    try:
        run = run_config_from_args(args)
        ensure_directory(run.out_dir)
        logger.info(f"hydrotwin {__version__}: {run.command.value}")
        written = COMMANDS[run.command](run)
        logger.info(f"{run.command.value} finished, {len(written)} file(s) written to {run.out_dir}")
        return 0
    except HydroTwinError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"{args.command} failed with an unexpected error: {e}")
        return 1
