"""
Error hierarchy shared by the services and the command-line front end.

Every error carries the process exit code the CLI returns for it: 1 for
runtime failures, 2 for configuration and schema problems.
"""


class HydroTwinError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


class DomainError(HydroTwinError, ValueError):
    """Input outside the domain of an operation (joint limits, negative pressure)."""


class RangeError(HydroTwinError, ValueError):
    """Cylinder length outside the feasible interval of its linkage."""


class SingularityError(HydroTwinError, ArithmeticError):
    """Linkage gain too small to invert."""


class DimensionError(HydroTwinError, ValueError):
    """Array or list shapes do not agree."""


class DataError(HydroTwinError, ValueError):
    """Training data that cannot be used (non-finite values, too many rows)."""


class ConditioningError(HydroTwinError, ArithmeticError):
    """Cholesky factorization failed even with the maximum jitter."""


class InsufficientDataError(HydroTwinError, ValueError):
    """A direction partition has too few rows to train on."""

    def __init__(self, actuator_id: int, partition: str, rows: int, required: int):
        self.actuator_id = actuator_id
        self.partition = partition
        self.rows = rows
        self.required = required
        super().__init__(
            f"actuator {actuator_id}: partition '{partition}' has {rows} rows, "
            f"at least {required} required"
        )


class ConfigError(HydroTwinError, ValueError):
    """Invalid configuration file or parameter set."""

    exit_code = 2


class SchemaError(HydroTwinError, ValueError):
    """Signal log that does not follow the CSV schema."""

    exit_code = 2


class TimingError(HydroTwinError, ValueError):
    """Timestamps that are not strictly increasing and uniformly spaced."""

    exit_code = 2


class BundleVersionError(HydroTwinError, ValueError):
    """Model bundle written with an unsupported format version."""

    exit_code = 2


class GeometryError(HydroTwinError, ValueError):
    """Model bundle applied with a different crane geometry than it was trained on."""

    exit_code = 2
