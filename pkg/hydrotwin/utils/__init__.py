"""Utility package initialization."""
from .logger import logger, set_level, setup_logger
from .file_utils import (
    get_text_hash,
    get_file_hash,
    get_arrays_fingerprint,
    atomic_write,
    ensure_directory,
    nrmse
)

__all__ = [
    'logger',
    'setup_logger',
    'set_level',
    'get_text_hash',
    'get_file_hash',
    'get_arrays_fingerprint',
    'atomic_write',
    'ensure_directory',
    'nrmse'
]
