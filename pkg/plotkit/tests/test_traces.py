import math

import numpy as np
import pytest

from plotkit import COLUMNS, TRACE_HEADER, TraceSchemaError, load_trace

from conftest import HEADER, write_trace


def test_header_constant_matches_bench_schema():
    assert TRACE_HEADER == HEADER
    assert COLUMNS == tuple(HEADER.split(","))


def test_round_trip_of_repr_floats(tmp_path):
    path = write_trace(tmp_path / "run.csv", [1 / 3, 1e-17, 0.125],
                       stepsizes=[0.7, 1.0])
    columns = load_trace(path)
    assert columns["f"].tolist() == [1 / 3, 1e-17, 0.125]
    assert columns["iter"].tolist() == [0.0, 1.0, 2.0]
    assert columns["stepsize"][0] == 0.7
    assert math.isnan(columns["stepsize"][-1])
    assert math.isnan(columns["theta"][0])


def test_missing_column_named(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(HEADER.replace(",stepsize", "") + "\n")
    with pytest.raises(TraceSchemaError, match=r"bad\.csv.*missing trace column 'stepsize'"):
        load_trace(path)


def test_renamed_column_named(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(HEADER.replace("stepsize", "step") + "\n")
    with pytest.raises(TraceSchemaError, match=r"bad\.csv.*'stepsize'"):
        load_trace(path)


def test_unexpected_extra_column_named(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(HEADER + ",memo\n")
    with pytest.raises(TraceSchemaError, match=r"bad\.csv.*unexpected trace column 'memo'"):
        load_trace(path)


def test_reordered_columns_named_by_position(tmp_path):
    path = tmp_path / "bad.csv"
    swapped = HEADER.split(",")
    swapped[1], swapped[2] = swapped[2], swapped[1]
    path.write_text(",".join(swapped) + "\n")
    with pytest.raises(TraceSchemaError, match="column 2 is 'grad_norm_l2', expected 'f'"):
        load_trace(path)


def test_ragged_row_named(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text(HEADER + "\n0,1.0,1.0\n")
    with pytest.raises(TraceSchemaError, match=r"ragged\.csv: row 2 has 3 fields"):
        load_trace(path)


def test_non_numeric_cell_named(tmp_path):
    path = tmp_path / "bad.csv"
    row = "0,oops,1.0,1.0,1.0,nan,0,0.0,0.0"
    path.write_text(HEADER + "\n" + row + "\n")
    with pytest.raises(TraceSchemaError, match="column 'f' has non-numeric value 'oops' at row 2"):
        load_trace(path)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_trace(tmp_path / "nope.csv")


def test_empty_body_gives_empty_columns(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text(HEADER + "\n")
    columns = load_trace(path)
    assert all(isinstance(v, np.ndarray) and len(v) == 0 for v in columns.values())
