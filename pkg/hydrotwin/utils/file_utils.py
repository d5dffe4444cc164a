"""
File and fingerprint utilities for logs, bundles and reports.
"""
import hashlib
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np
from sklearn.metrics import mean_squared_error


def get_text_hash(text: str) -> str:
    """
    Calculate the SHA-256 hash of a text.

    Args:
        text: Text to hash (encoded as UTF-8)

    Returns:
        Hex digest
    """
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def get_file_hash(file_path: Path) -> str:
    """
    Calculate the SHA-256 hash of a file.

    Args:
        file_path: Path to the file

    Returns:
        Hex digest
    """
    hash_sha = hashlib.sha256()
    with open(file_path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            hash_sha.update(chunk)
    return hash_sha.hexdigest()


def get_arrays_fingerprint(arrays: Iterable[np.ndarray]) -> str:
    """
    Fingerprint a sequence of arrays by shape and raw float64 bytes.

    Args:
        arrays: Arrays in a fixed order

    Returns:
        Hex digest
    """
    hash_sha = hashlib.sha256()
    for array in arrays:
        data = np.ascontiguousarray(np.asarray(array, dtype=np.float64))
        hash_sha.update(str(data.shape).encode("ascii"))
        hash_sha.update(data.tobytes())
    return hash_sha.hexdigest()


def atomic_write(path: Union[str, Path], content: Union[str, bytes]) -> Path:
    """
    Write a file through a temporary sibling and an atomic rename.

    Args:
        path: Target path
        content: Text (written as UTF-8) or bytes

    Returns:
        The target path
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    data = content.encode("utf-8") if isinstance(content, str) else content

    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return target


def ensure_directory(directory: Union[str, Path]) -> Path:
    """Create a directory (and parents) if missing."""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    return path


def nrmse(truth: np.ndarray, prediction: np.ndarray) -> Optional[float]:
    """
    Root-mean-square error normalized by the range of the truth signal.

    Args:
        truth: Ground-truth samples
        prediction: Predicted samples

    Returns:
        NRMSE, or None when the truth range is zero
    """
    truth = np.asarray(truth, dtype=float)
    prediction = np.asarray(prediction, dtype=float)
    if truth.size == 0:
        return None
    span = float(np.max(truth) - np.min(truth))
    if span <= 0.0:
        return None
    return float(np.sqrt(mean_squared_error(truth, prediction)) / span)
