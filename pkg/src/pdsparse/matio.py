"""Plain-text matrix, dataset, and results-table I/O.

Matrices travel as CSV with a `rows,cols` first line and one row per
line.  Floats are written with repr, which round-trips exactly, and all
files use LF line endings so identical runs produce identical bytes.
"""

import numpy as np

from .applications import LogisticDataset
from .errors import DataFormatError, InvalidInputError

# every results CSV uses a subset of these columns, in this order
TABLE_COLUMNS = ("r", "ns", "mse_mean", "residual", "time_ms", "iters", "likelihood", "loss")


def _format(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_matrix(path, m):
    """Write a dense matrix with a rows,cols header line."""
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[None, :]
    if m.ndim != 2:
        raise InvalidInputError("write_matrix: need a vector or matrix")
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{m.shape[0]},{m.shape[1]}\n")
        for row in m:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix(path):
    """Read a matrix written by write_matrix (or hand-made in the format)."""
    with open(path, "r") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise DataFormatError(f"{path}: empty matrix file")
    try:
        rows, cols = (int(part) for part in lines[0].split(","))
    except ValueError as exc:
        raise DataFormatError(f"{path}: first line must be rows,cols") from exc
    if rows < 1 or cols < 1 or len(lines) - 1 != rows:
        raise DataFormatError(f"{path}: expected {rows} data lines, found {len(lines) - 1}")
    out = np.empty((rows, cols))
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != cols:
            raise DataFormatError(f"{path}: line {i + 2} has {len(parts)} fields, expected {cols}")
        try:
            out[i] = [float(part) for part in parts]
        except ValueError as exc:
            raise DataFormatError(f"{path}: line {i + 2} is not numeric") from exc
    if not np.all(np.isfinite(out)):
        raise DataFormatError(f"{path}: non-finite entries")
    return out


def read_logistic_csv(path, standardize=True):
    """Dataset file: first column the +-1 outcome, the rest features.

    Features are standardized to zero mean and unit variance per column
    by default; constant columns are left centered only.
    """
    data = read_matrix(path)
    if data.shape[1] < 2:
        raise DataFormatError(f"{path}: need an outcome column plus at least one feature")
    outcomes = data[:, 0]
    if not np.all(np.abs(outcomes) == 1.0):
        raise DataFormatError(f"{path}: first column must be +1 or -1")
    features = data[:, 1:]
    if standardize:
        features = features - features.mean(axis=0)
        scale = features.std(axis=0)
        scale[scale == 0.0] = 1.0
        features = features / scale
    return LogisticDataset.from_features(features, outcomes)


def write_table(path, columns, rows):
    """Write result rows as CSV restricted to the canonical column subset.

    `columns` must be a subset of TABLE_COLUMNS and is emitted in the
    canonical order no matter how it is passed.  Rows may carry extra
    keys; only the requested columns are written.
    """
    bad = [c for c in columns if c not in TABLE_COLUMNS]
    if bad:
        raise InvalidInputError(f"write_table: unknown columns {bad}")
    ordered = [c for c in TABLE_COLUMNS if c in columns]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(ordered) + "\n")
        for i, row in enumerate(rows):
            missing = [c for c in ordered if c not in row]
            if missing:
                raise InvalidInputError(f"write_table: row {i} lacks {missing}")
            fh.write(",".join(_format(row[c]) for c in ordered) + "\n")


def read_table(path):
    """Read a results CSV back into (columns, list of row dicts)."""
    with open(path, "r") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines:
        raise DataFormatError(f"{path}: empty table")
    columns = tuple(lines[0].split(","))
    bad = [c for c in columns if c not in TABLE_COLUMNS]
    if bad:
        raise DataFormatError(f"{path}: unknown columns {bad}")
    rows = []
    for i, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != len(columns):
            raise DataFormatError(f"{path}: line {i + 2} has {len(parts)} fields, expected {len(columns)}")
        row = {}
        for name, part in zip(columns, parts):
            try:
                row[name] = int(part) if name in ("r", "ns") else float(part)
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {i + 2} field {name} is not numeric") from exc
        rows.append(row)
    return columns, rows
