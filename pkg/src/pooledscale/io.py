"""Reading delimited datasets and writing results atomically."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engines import Dendrogram, Partition
from .errors import DatasetError

PRECISION = ".12g"


@dataclass
class Dataset:
    columns: list
    matrix: np.ndarray
    labels: np.ndarray | None = None
    label_name: str | None = None
    label_index: int | None = None
    header: bool = True
    delimiter: str = ","

    @property
    def truth(self) -> Partition | None:
        return None if self.labels is None else Partition.from_labels(self.labels)


def fmt(v) -> str:
    return format(float(v), PRECISION)


def _parse_float(cell: str, row: int, column: str) -> float:
    text = cell.strip()
    if text == "":
        raise DatasetError(f"missing value at row {row}, column {column!r}", row, column)
    try:
        v = float(text)
    except ValueError:
        raise DatasetError(f"non-numeric value {cell!r} at row {row}, column {column!r}",
                           row, column) from None
    if not math.isfinite(v):
        raise DatasetError(f"non-finite value {cell!r} at row {row}, column {column!r}", row, column)
    return v


def read_dataset(path, delimiter: str = ",", header: bool = True, label=None) -> Dataset:
    """Read a rectangular delimited file of numbers.

    ``label`` names (or, for headerless files, 1-based indexes) a column held
    out as the truth labels.  Rows are numbered as physical lines of the file.
    """
    with open(path, newline="") as fh:
        records = [r for r in csv.reader(fh, delimiter=delimiter)]
    # drop fully blank trailing lines
    while records and all(c.strip() == "" for c in records[-1]):
        records.pop()
    if not records:
        raise DatasetError(f"{path}: empty file")
    if header:
        names = [c.strip() for c in records[0]]
        body = records[1:]
        first_row = 2
    else:
        names = [f"v{j + 1}" for j in range(len(records[0]))]
        body = records
        first_row = 1
    if not body:
        raise DatasetError(f"{path}: no data rows")
    p = len(names)

    label_index = None
    if label is not None:
        if label in names:
            label_index = names.index(label)
        elif str(label).isdigit() and 1 <= int(label) <= p:
            label_index = int(label) - 1
        else:
            raise DatasetError(f"label column {label!r} not found")

    data_cols = [j for j in range(p) if j != label_index]
    X = np.empty((len(body), len(data_cols)))
    labels = [] if label_index is not None else None
    for i, rec in enumerate(body):
        row = first_row + i
        if len(rec) != p:
            raise DatasetError(f"row {row} has {len(rec)} fields, expected {p}", row)
        for jj, j in enumerate(data_cols):
            X[i, jj] = _parse_float(rec[j], row, names[j])
        if label_index is not None:
            val = rec[label_index].strip()
            if val == "":
                raise DatasetError(f"missing label at row {row}", row, names[label_index])
            labels.append(val)
    return Dataset(
        columns=[names[j] for j in data_cols],
        matrix=X,
        labels=None if labels is None else np.array(labels),
        label_name=None if label_index is None else names[label_index],
        label_index=label_index,
        header=header,
        delimiter=delimiter,
    )


def atomic_write(path, text: str) -> None:
    """Write ``text`` to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dataset_text(ds: Dataset, matrix=None) -> str:
    """Serialize ``matrix`` (default: the dataset's own) in the dataset's layout,
    label column restored at its original position."""
    M = ds.matrix if matrix is None else np.asarray(matrix)
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=ds.delimiter, lineterminator="\n")
    cols = list(ds.columns)
    if ds.label_index is not None:
        cols.insert(ds.label_index, ds.label_name)
    if ds.header:
        w.writerow(cols)
    for i in range(M.shape[0]):
        cells = [fmt(v) for v in M[i]]
        if ds.label_index is not None:
            cells.insert(ds.label_index, ds.labels[i])
        w.writerow(cells)
    return buf.getvalue()


def write_dataset(path, ds: Dataset, matrix=None) -> None:
    atomic_write(path, dataset_text(ds, matrix))


def labels_text(partition) -> str:
    labels = partition.labels if isinstance(partition, Partition) else np.asarray(partition)
    return "label\n" + "".join(f"{v}\n" for v in labels)


def read_labels(path, header: bool = True) -> np.ndarray:
    with open(path, newline="") as fh:
        lines = [ln.strip() for ln in fh.read().splitlines()]
    while lines and lines[-1] == "":
        lines.pop()
    if header:
        lines = lines[1:]
    for i, ln in enumerate(lines):
        if ln == "":
            raise DatasetError(f"{path}: blank label at row {i + 1 + int(header)}", i + 1 + int(header))
    return np.array(lines)


def dendrogram_text(d: Dendrogram) -> str:
    out = ["left,right,height,size"]
    for a, b, h, s in zip(d.left, d.right, d.height, d.size):
        out.append(f"{a},{b},{fmt(h)},{s}")
    return "\n".join(out) + "\n"
