"""
TOML configuration files for crane geometry, synthetic plant and command schedules.
"""
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import ValidationError

from hydrotwin.errors import ConfigError
from hydrotwin.models.plant import CommandSchedule, PlantConfig, SyntheticPlantParams
from hydrotwin.models.geometry import CraneGeometry
from hydrotwin.utils.logger import logger


def _read_toml(path: Union[str, Path]) -> Dict[str, Any]:
    config_path = Path(path)
    try:
        text = config_path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise ConfigError(f"{config_path}: file not found") from e
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        message = str(e)
        # Errors at end of input carry "(at end of document)" instead of a line.
        found = re.search(r"line (\d+)", message)
        line = int(found.group(1)) if found else text.count("\n") + 1
        reason = re.sub(r"\s*\(at [^)]*\)\s*$", "", message)
        logger.error(f"Invalid TOML in {config_path} at line {line}: {reason}")
        raise ConfigError(f"{config_path}: line {line}: {reason}") from e


def _describe(error: ValidationError, prefix: str) -> str:
    problems = []
    for item in error.errors():
        location = ".".join(str(part) for part in (prefix, *item["loc"]))
        problems.append(f"{location}: {item['msg']}")
    return "; ".join(problems)


def load_config(path: Union[str, Path]) -> PlantConfig:
    """
    Load crane geometry and the optional synthetic plant from a TOML file.

    Args:
        path: Configuration file with a [crane] table and an optional [plant] table

    Returns:
        PlantConfig
    """
    data = _read_toml(path)
    if "crane" not in data:
        raise ConfigError(f"{path}: missing [crane] table")

    try:
        geometry = CraneGeometry.model_validate(data["crane"])
    except ValidationError as e:
        raise ConfigError(f"{path}: {_describe(e, 'crane')}") from e

    plant: Optional[SyntheticPlantParams] = None
    if "plant" in data:
        try:
            plant = SyntheticPlantParams.model_validate({**data["plant"], "geometry": geometry})
        except ValidationError as e:
            raise ConfigError(f"{path}: {_describe(e, 'plant')}") from e

    logger.info(f"Loaded configuration {path} (plant section: {'yes' if plant else 'no'})")
    return PlantConfig(geometry=geometry, plant=plant)


def load_schedule(path: Union[str, Path]) -> CommandSchedule:
    """
    Load a command schedule: initial = [theta1, theta2, x_prism] and
    [[segments]] tables with duration, velocity and label.
    """
    data = _read_toml(path)
    try:
        return CommandSchedule.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{path}: {_describe(e, 'schedule')}") from e
