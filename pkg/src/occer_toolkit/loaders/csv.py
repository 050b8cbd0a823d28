"""CSV dataset loader."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from ..dataset import Dataset
from ..errors import ConfigError, DataError

logger = logging.getLogger(__name__)


def _read_frame(file_path: Path, has_header: bool) -> pd.DataFrame:
    if file_path.stat().st_size == 0:
        raise DataError(f"Dataset file is empty: {file_path}")
    try:
        frame = pd.read_csv(
            file_path,
            sep=",",
            header=0 if has_header else None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
        )
    except pd.errors.EmptyDataError:
        raise DataError(f"Dataset file is empty: {file_path}")
    except pd.errors.ParserError as e:
        raise DataError(f"Malformed CSV {file_path}: {e}")

    if has_header:
        frame.columns = [str(c).strip() for c in frame.columns]
    else:
        frame.columns = [f"col_{i}" for i in range(frame.shape[1])]
    return frame


def _parse_numeric(frame: pd.DataFrame, positions: List[int]) -> np.ndarray:
    """Convert string cells to floats, reporting the first bad cell.

    Row numbers count data rows from 1; column numbers are file positions
    from 1.
    """
    if frame.empty:
        return np.empty((len(frame), frame.shape[1]), dtype=np.float64)
    stripped = frame.apply(lambda column: column.str.strip())
    numeric = stripped.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(numeric)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        cell = stripped.iat[row, col]
        reason = "Missing value" if cell == "" else f"Non-numeric value {cell!r}"
        raise DataError(
            f"{reason} at row {row + 1}, column {positions[col] + 1} ({frame.columns[col]})",
            row=int(row) + 1,
            column=positions[col] + 1,
        )
    return numeric


def load_csv(
    path: Union[str, Path],
    label_column: Optional[str] = None,
    target_label: Optional[str] = None,
    has_header: bool = True,
    name: Optional[str] = None,
) -> Dataset:
    """
    Load a comma-separated dataset.

    Rows whose label equals ``target_label`` are tagged target and every other
    row outlier. Without ``label_column`` the dataset is unlabeled.

    Args:
        path: Path to the CSV file
        label_column: Name of the class column (``col_<i>`` for headerless files)
        target_label: Label value of the target class
        has_header: Whether the first row holds column names
        name: Dataset name for reports; defaults to the file stem

    Returns:
        Dataset with every non-label column as a feature

    Raises:
        FileNotFoundError: If the file doesn't exist
        ConfigError: If ``label_column`` is given without ``target_label``
        DataError: If the file is empty, a cell is not a finite number, or
            fewer than 2 feature columns remain
    """
    file_path = Path(path)
    if not file_path.exists():
        raise FileNotFoundError(f"Dataset not found: {path}")
    if label_column is not None and target_label is None:
        raise ConfigError("target_label is required when label_column is given")

    frame = _read_frame(file_path, has_header)
    columns = list(frame.columns)

    labels = None
    if label_column is not None:
        if label_column not in columns:
            raise DataError(f"Label column '{label_column}' not found in {file_path.name}")
        labels = (frame[label_column].str.strip() != target_label).to_numpy()
        frame = frame.drop(columns=label_column)

    feature_columns = list(frame.columns)
    if len(feature_columns) < 2:
        raise DataError(f"Need at least 2 feature columns, found {len(feature_columns)}")

    positions = [columns.index(c) for c in feature_columns]
    features = _parse_numeric(frame, positions)
    features = features.reshape(len(frame), len(feature_columns))

    dataset = Dataset(
        features=features,
        labels=labels,
        feature_names=tuple(feature_columns),
        name=name or file_path.stem,
    )
    logger.debug(
        f"Loaded {dataset.n_rows} rows x {dataset.n_features} features from {file_path}"
        + (f" ({dataset.outlier_count} outliers)" if labels is not None else "")
    )
    return dataset


def get_dataset_info(
    path: Union[str, Path],
    label_column: Optional[str] = None,
    target_label: Optional[str] = None,
    has_header: bool = True,
) -> Dict[str, Any]:
    """Summary statistics of a CSV dataset."""
    dataset = load_csv(path, label_column, target_label, has_header)
    X = dataset.features
    constant = [] if dataset.n_rows == 0 else [
        name for name, is_constant in zip(dataset.feature_names, X.max(axis=0) == X.min(axis=0))
        if is_constant
    ]
    return {
        "format": "csv",
        "name": dataset.name,
        "file_size": Path(path).stat().st_size,
        "rows": dataset.n_rows,
        "features": dataset.n_features,
        "feature_names": list(dataset.feature_names),
        "target_rows": dataset.target_count if dataset.has_labels else None,
        "outlier_rows": dataset.outlier_count if dataset.has_labels else None,
        "constant_features": constant,
    }
