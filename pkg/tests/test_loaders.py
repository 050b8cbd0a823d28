"""Tests for CSV ingestion and format dispatch."""

import numpy as np
import pytest

from occer_toolkit.errors import ConfigError, DataError
from occer_toolkit.loaders import get_dataset_info, load_dataset
from occer_toolkit.loaders.csv import load_csv


def test_load_with_header(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b,c\n1,2,3\n4,5,6\n")
    data = load_dataset(path)
    assert data.feature_names == ("a", "b", "c")
    np.testing.assert_array_equal(data.features, [[1, 2, 3], [4, 5, 6]])
    assert data.name == "d"
    assert not data.has_labels


def test_label_column_maps_target_and_outlier(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,label,b\n1,yes,2\n3,no,4\n5, yes ,6\n")
    data = load_dataset(path, label_column="label", target_label="yes")
    assert data.feature_names == ("a", "b")
    assert data.labels.tolist() == [False, True, False]


def test_headerless_file(tmp_path):
    path = tmp_path / "bench.data"
    path.write_text("1,2,n\n3,4,o\n")
    data = load_dataset(path, label_column="col_2", target_label="n", has_header=False)
    assert data.feature_names == ("col_0", "col_1")
    assert data.outlier_count == 1


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path / "absent.csv")


def test_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(DataError):
        load_dataset(path)


def test_header_only_file_has_no_rows(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("a,b\n")
    data = load_dataset(path)
    assert data.n_rows == 0
    assert data.n_features == 2


def test_non_numeric_cell_location(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n3,abc\n")
    with pytest.raises(DataError) as info:
        load_dataset(path)
    assert info.value.row == 2
    assert info.value.column == 2
    assert "abc" in str(info.value)


def test_missing_value_reported(tmp_path):
    path = tmp_path / "gap.csv"
    path.write_text("a,b\n1,\n3,4\n")
    with pytest.raises(DataError, match="Missing value at row 1, column 2"):
        load_dataset(path)


def test_column_numbers_count_the_label_column(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("cls,a,b\nt,1,x\n")
    with pytest.raises(DataError) as info:
        load_dataset(path, label_column="cls", target_label="t")
    assert info.value.column == 3


def test_label_without_target_label(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ConfigError):
        load_csv(path, label_column="c")


def test_unknown_label_column(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(DataError):
        load_dataset(path, label_column="class", target_label="t")


def test_single_feature_column_rejected(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,c\n1,t\n")
    with pytest.raises(DataError):
        load_dataset(path, label_column="c", target_label="t")


def test_unsupported_suffix(tmp_path):
    path = tmp_path / "d.xlsx"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(DataError):
        load_dataset(path)


def test_dataset_info(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b,cls\n1,7,t\n2,7,o\n3,7,t\n")
    info = get_dataset_info(path, label_column="cls", target_label="t")
    assert info["rows"] == 3
    assert info["features"] == 2
    assert info["target_rows"] == 2
    assert info["outlier_rows"] == 1
    assert info["constant_features"] == ["b"]


def test_dataset_info_reports_errors(tmp_path):
    info = get_dataset_info(tmp_path / "absent.csv")
    assert info["exists"] is False
    assert "error" in info
