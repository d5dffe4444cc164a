"""
Run configuration assembled from command-line flags and settings.
"""
from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from hydrotwin.models.signals import FilterSpec


class Subcommand(str, Enum):
    """CLI subcommands."""
    SIMULATE = "simulate"
    FEATURIZE = "featurize"
    TRAIN = "train"
    PREDICT = "predict"
    EVALUATE = "evaluate"


NEEDS_LOGS = {Subcommand.FEATURIZE, Subcommand.TRAIN, Subcommand.PREDICT, Subcommand.EVALUATE}
NEEDS_BUNDLE = {Subcommand.PREDICT, Subcommand.EVALUATE}


class RunConfig(BaseModel):
    """
    One CLI invocation.

    Logs are whole trajectories: training and evaluation sets are split by
    file, never by sample.
    """

    command: Subcommand
    config_path: Optional[Path] = Field(None, description="TOML geometry/plant file; default plant if omitted")
    out_dir: Path
    logs: List[Path] = Field(default_factory=list)
    bundle: Optional[Path] = None
    schedule: Optional[Path] = Field(None, description="Custom command schedule for simulate")
    epsilon: float = Field(..., gt=0, description="Velocity deadband (m/s)")
    sg_window: int
    sg_order: int
    seed: int
    dt: float = Field(default=0.02, gt=0, description="Simulation sample period (s)")
    fit_standby: bool = False
    argmax_min_gap: float = Field(default=2.5e5, ge=0, description="Pa")
    plots: bool = True

    @model_validator(mode="after")
    def check_inputs(self) -> "RunConfig":
        """Ensure every subcommand gets the inputs it needs."""
        if self.command in NEEDS_LOGS and not self.logs:
            raise ValueError(f"{self.command.value} needs at least one --log")
        if self.command in NEEDS_BUNDLE and self.bundle is None:
            raise ValueError(f"{self.command.value} needs --bundle")
        if len({path.resolve() for path in self.logs}) != len(self.logs):
            raise ValueError("a log may be given only once")
        self.filter_spec(1.0)
        return self

    def filter_spec(self, dt: float) -> FilterSpec:
        return FilterSpec(window=self.sg_window, poly_order=self.sg_order, dt=dt)
