"""Reading bench trace CSVs.

The schema is the bench tool's stable external interface: a fixed
nine-column header, one row per recorded iteration, floats written with
repr. This module validates it strictly and reports exactly which file
and column broke, so a figure never silently plots the wrong series.
"""

import numpy as np

TRACE_HEADER = ("iter,f,grad_norm_l2,local_grad_norm,stepsize,theta,"
                "backtracks,hessian_shift,elapsed_seconds")
COLUMNS = tuple(TRACE_HEADER.split(","))


class TraceSchemaError(ValueError):
    """A CSV does not match the bench trace schema."""


def _header_mismatch(path, got):
    missing = [c for c in COLUMNS if c not in got]
    if missing:
        return f"{path}: missing trace column {missing[0]!r}"
    extra = [c for c in got if c not in COLUMNS]
    if extra:
        return f"{path}: unexpected trace column {extra[0]!r}"
    for i, (expected, found) in enumerate(zip(COLUMNS, got)):
        if expected != found:
            return f"{path}: column {i + 1} is {found!r}, expected {expected!r}"
    return f"{path}: malformed trace header"


def load_trace(path):
    """Parse one trace CSV into a dict of float arrays keyed by column name.

    Raises TraceSchemaError naming the file and the offending column or
    row on any schema violation.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    got = header.split(",")
    if got != list(COLUMNS):
        raise TraceSchemaError(_header_mismatch(path, got))
    rows = [line.split(",") for line in lines]
    for i, row in enumerate(rows):
        if len(row) != len(COLUMNS):
            raise TraceSchemaError(
                f"{path}: row {i + 2} has {len(row)} fields, expected {len(COLUMNS)}")
    columns = {}
    for j, name in enumerate(COLUMNS):
        try:
            columns[name] = np.array([float(row[j]) for row in rows], dtype=float)
        except ValueError:
            bad = next(i for i, row in enumerate(rows) if not _is_float(row[j]))
            raise TraceSchemaError(
                f"{path}: column {name!r} has non-numeric value "
                f"{rows[bad][j]!r} at row {bad + 2}") from None
    return columns


def _is_float(text):
    try:
        float(text)
    except ValueError:
        return False
    return True
