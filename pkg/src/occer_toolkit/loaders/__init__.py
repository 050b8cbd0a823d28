"""Unified dataset loader interface for all supported formats."""

from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..dataset import Dataset
from ..errors import DataError
from . import csv

# UCI-style ``.data`` files are plain comma-separated text as well.
_CSV_SUFFIXES = {".csv", ".data", ".txt"}


def load_dataset(
    path: Union[str, Path],
    label_column: Optional[str] = None,
    target_label: Optional[str] = None,
    has_header: bool = True,
) -> Dataset:
    """
    Load a dataset using the loader matching the file extension.

    Raises:
        FileNotFoundError: If the file doesn't exist
        DataError: If the format is unsupported or the contents are invalid
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Dataset not found: {path}")

    suffix = file_path.suffix.lower()
    if suffix in _CSV_SUFFIXES:
        return csv.load_csv(file_path, label_column, target_label, has_header)

    raise DataError(
        f"Unsupported dataset format: {suffix or '(none)'}. "
        f"Supported formats: {', '.join(sorted(_CSV_SUFFIXES))}"
    )


def get_dataset_info(
    path: Union[str, Path],
    label_column: Optional[str] = None,
    target_label: Optional[str] = None,
    has_header: bool = True,
) -> Dict[str, Any]:
    """Information about a dataset file; errors are reported in the result."""
    file_path = Path(path)
    if not file_path.exists():
        return {"error": f"Dataset not found: {path}", "exists": False}
    try:
        return csv.get_dataset_info(file_path, label_column, target_label, has_header)
    except Exception as e:
        return {
            "format": file_path.suffix.lstrip("."),
            "file_size": file_path.stat().st_size,
            "error": str(e),
        }


__all__ = [
    "load_dataset",
    "get_dataset_info",
]
