"""CSV ingestion and the in-memory dataset container.

CSV files are RFC-4180 style: UTF-8, comma separated, decimal points,
a mandatory header row. Column order defines variable indices.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, SchemaError


@dataclass
class Dataset:
    names: list
    X: np.ndarray

    def __post_init__(self):
        self.names = [str(s) for s in self.names]
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2:
            raise ValueError("X must be 2-dimensional")
        if len(self.names) != self.X.shape[1]:
            raise ValueError("names length must match column count")
        if len(set(self.names)) != len(self.names):
            raise ParseError("duplicate column names")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.X[:, self.names.index(name)]
        except ValueError:
            raise SchemaError(f"no column named '{name}'") from None

    def target_index(self, name: str | None = None) -> int:
        """Resolve the target column: by name, default last column."""
        if name is None:
            return self.d - 1
        if name not in self.names:
            raise SchemaError(f"target column '{name}' not found")
        return self.names.index(name)

    def drop(self, name: str) -> "Dataset":
        idx = self.target_index(name)
        keep = [i for i in range(self.d) if i != idx]
        return Dataset([self.names[i] for i in keep], self.X[:, keep])


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def read_csv(path) -> Dataset:
    """Parse a headered numeric CSV, with row/column diagnostics on failure."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if all(_is_number(h) for h in header):
            raise ParseError(f"{path}: first row looks numeric; a header row is required")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {line_no} has {len(row)} cells, expected {len(header)}")
            parsed = []
            for col, cell in zip(header, row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {line_no}, column '{col}': non-numeric value {cell!r}"
                    ) from None
            rows.append(parsed)
    X = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    return Dataset(header, X)


def write_csv(path, dataset: Dataset):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(dataset.names)
        for row in dataset.X:
            writer.writerow([repr(float(v)) for v in row])


__all__ = ["Dataset", "read_csv", "write_csv"]
