"""Tabular data with a per-row cluster assignment.

Columns are either numeric (float64, NaN = missing) or categorical
(object array of ``str``, ``None`` = missing). The label column is kept
apart from the feature columns; rows are identified by position.
"""
from __future__ import annotations

import csv
import enum
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from .errors import DataError, SchemaError

DEFAULT_CARDINALITY_THRESHOLD = 10


class AttributeKind(str, enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


@dataclass(frozen=True, eq=False)
class Column:
    name: str
    kind: AttributeKind
    values: np.ndarray
    # categorical only: sorted distinct values and int codes (-1 = missing)
    categories: tuple[str, ...] = ()
    codes: np.ndarray | None = field(default=None, repr=False)

    @property
    def missing(self) -> np.ndarray:
        if self.kind is AttributeKind.NUMERIC:
            return np.isnan(self.values)
        return self.codes < 0

    def value_counts(self) -> dict[str, int]:
        """Category -> count over non-missing cells (categorical only)."""
        counts = np.bincount(self.codes[self.codes >= 0], minlength=len(self.categories))
        return {cat: int(n) for cat, n in zip(self.categories, counts)}


def _numeric_column(name: str, values: Iterable[Any]) -> Column:
    arr = np.array([np.nan if _is_missing(v) else float(v) for v in values], dtype=np.float64)
    if not np.all(np.isfinite(arr[~np.isnan(arr)])):
        raise DataError(f"column {name!r}: numeric cells must be finite")
    arr.setflags(write=False)
    return Column(name, AttributeKind.NUMERIC, arr)


def _categorical_column(name: str, values: Iterable[Any]) -> Column:
    cells = [None if _is_missing(v) else str(v) for v in values]
    categories = tuple(sorted({c for c in cells if c is not None}))
    lookup = {c: i for i, c in enumerate(categories)}
    codes = np.array([-1 if c is None else lookup[c] for c in cells], dtype=np.int32)
    arr = np.array(cells, dtype=object)
    arr.setflags(write=False)
    codes.setflags(write=False)
    return Column(name, AttributeKind.CATEGORICAL, arr, categories, codes)


def _is_missing(v: Any) -> bool:
    if v is None:
        return True
    if isinstance(v, str):
        return v == ""
    if isinstance(v, float):
        return math.isnan(v)
    return False


def _parse_real(cell: Any) -> float | None:
    if isinstance(cell, bool):
        return None
    if isinstance(cell, (int, float, np.integer, np.floating)):
        f = float(cell)
    else:
        try:
            f = float(str(cell).strip())
        except ValueError:
            return None
    return f if math.isfinite(f) else None


def infer_kind(cells: Sequence[Any], threshold: int = DEFAULT_CARDINALITY_THRESHOLD) -> AttributeKind:
    """Numeric iff every non-missing cell is a finite real and there are more
    than ``threshold`` distinct values; categorical otherwise."""
    distinct = set()
    for cell in cells:
        if _is_missing(cell):
            continue
        f = _parse_real(cell)
        if f is None:
            return AttributeKind.CATEGORICAL
        distinct.add(f)
    return AttributeKind.NUMERIC if len(distinct) > threshold else AttributeKind.CATEGORICAL


def _coerce_kind(kind: AttributeKind | str) -> AttributeKind:
    try:
        return AttributeKind(kind.value if isinstance(kind, AttributeKind) else str(kind).lower())
    except ValueError:
        raise DataError(f"unknown attribute kind {kind!r}") from None


_INT_RE = re.compile(r"-?\d+")


def _parse_labels(raw: Sequence[Any]) -> np.ndarray:
    """Integer ids when every label is an integer literal, strings otherwise."""
    if any(_is_missing(v) for v in raw):
        raise DataError("label column has missing cells")
    if all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) or
           isinstance(v, str) and _INT_RE.fullmatch(v.strip()) for v in raw):
        return np.array([int(v) for v in raw], dtype=object)
    return np.array([str(v) for v in raw], dtype=object)


class Dataset:
    """Immutable feature columns plus one cluster label per row."""

    def __init__(self, columns: Sequence[Column], labels: Sequence[Any]):
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise DataError("column names must be unique")
        labels = np.asarray(labels, dtype=object)
        n = len(labels)
        for col in columns:
            if len(col.values) != n:
                raise DataError(f"column {col.name!r} has {len(col.values)} rows, labels have {n}")
        labels.setflags(write=False)
        self._columns = {c.name: c for c in columns}
        self._labels = labels
        self._cluster_ids = tuple(sorted(set(labels.tolist())))
        self._label_codes = np.searchsorted(
            np.array(self._cluster_ids, dtype=object), labels
        ) if n else np.zeros(0, dtype=np.int64)

    @classmethod
    def from_columns(
        cls,
        columns: Mapping[str, Sequence[Any]],
        labels: Sequence[Any],
        kinds: Mapping[str, AttributeKind | str] | None = None,
        cardinality_threshold: int = DEFAULT_CARDINALITY_THRESHOLD,
    ) -> "Dataset":
        kinds = {k: _coerce_kind(v) for k, v in (kinds or {}).items()}
        cols = []
        for name, cells in columns.items():
            cells = list(cells)
            kind = kinds.get(name) or infer_kind(cells, cardinality_threshold)
            if kind is AttributeKind.NUMERIC:
                bad = [c for c in cells if not _is_missing(c) and _parse_real(c) is None]
                if bad:
                    raise DataError(f"column {name!r}: cannot parse {bad[0]!r} as a number")
                cols.append(_numeric_column(name, (None if _is_missing(c) else _parse_real(c) for c in cells)))
            else:
                cols.append(_categorical_column(name, cells))
        return cls(cols, _parse_labels(list(labels)))

    @property
    def n_rows(self) -> int:
        return len(self._labels)

    @property
    def attributes(self) -> list[str]:
        return list(self._columns)

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def label_codes(self) -> np.ndarray:
        """Index of each row's label within ``cluster_ids``."""
        return self._label_codes

    @property
    def cluster_ids(self) -> tuple:
        return self._cluster_ids

    def column(self, name: str) -> Column:
        try:
            return self._columns[name]
        except KeyError:
            raise SchemaError(f"unknown attribute {name!r}") from None

    def kind(self, name: str) -> AttributeKind:
        return self.column(name).kind

    def __contains__(self, name: str) -> bool:
        return name in self._columns

    def __len__(self) -> int:
        return self.n_rows

    def row(self, i: int) -> dict[str, Any]:
        """Row ``i`` as attribute -> value, with ``None`` for missing cells."""
        out = {}
        for name, col in self._columns.items():
            v = col.values[i]
            if col.kind is AttributeKind.NUMERIC:
                out[name] = None if np.isnan(v) else float(v)
            else:
                out[name] = v
        return out

    def select(self, attributes: Iterable[str]) -> "Dataset":
        """Same rows and labels restricted to the given feature columns."""
        return Dataset([self.column(a) for a in attributes], self._labels)

    def __repr__(self) -> str:
        return f"Dataset(n_rows={self.n_rows}, attributes={len(self._columns)}, clusters={len(self._cluster_ids)})"


def cluster_rows(d: Dataset, c: Any) -> np.ndarray:
    """Sorted row indices labelled ``c``."""
    if c not in d.cluster_ids:
        raise DataError(f"unknown cluster id {c!r}")
    return np.flatnonzero(d.label_codes == d.cluster_ids.index(c))


def load_csv(
    path: str | Path,
    label_column: str,
    type_hints: Mapping[str, AttributeKind | str] | None = None,
    cardinality_threshold: int = DEFAULT_CARDINALITY_THRESHOLD,
) -> Dataset:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise DataError(f"{path}: missing header row")
    if len(set(header)) != len(header):
        raise SchemaError(f"{path}: duplicate column names in header")
    if label_column not in header:
        raise SchemaError(f"{path}: label column {label_column!r} not found")
    hints = dict(type_hints or {})
    unknown = set(hints) - set(header)
    if unknown:
        raise SchemaError(f"type hints for unknown columns: {sorted(unknown)}")

    frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False, encoding="utf-8")
    if len(frame) == 0:
        raise DataError(f"{path}: no data rows")
    labels = _parse_labels(frame[label_column].tolist())
    columns = {name: frame[name].to_numpy(dtype=object) for name in header if name != label_column}
    return _dataset_from_strings(columns, labels, hints, cardinality_threshold)


def _parse_floats(cells: np.ndarray) -> np.ndarray | None:
    """Float array if every cell parses as a finite real, else None."""
    try:
        parsed = cells.astype(np.float64)
    except ValueError:
        return None
    return parsed if np.all(np.isfinite(parsed)) else None


def _categorical_from_strings(name: str, cells: np.ndarray, present: np.ndarray) -> Column:
    categories, inverse = np.unique(cells[present].astype(str), return_inverse=True)
    codes = np.full(len(cells), -1, dtype=np.int32)
    codes[present] = inverse
    values = np.where(present, cells, None).astype(object)
    values.setflags(write=False)
    codes.setflags(write=False)
    return Column(name, AttributeKind.CATEGORICAL, values, tuple(categories.tolist()), codes)


def _dataset_from_strings(columns, labels, hints, threshold) -> Dataset:
    cols = []
    for name, cells in columns.items():
        present = cells != ""
        hinted = _coerce_kind(hints[name]) if name in hints else None
        parsed = None if hinted is AttributeKind.CATEGORICAL else _parse_floats(cells[present])
        if hinted is AttributeKind.NUMERIC and parsed is None:
            bad = next(c for c in cells[present] if _parse_real(c) is None)
            raise DataError(f"column {name!r}: cannot parse {bad!r} as a number")
        if hinted is None:
            numeric = parsed is not None and len(np.unique(parsed)) > threshold
        else:
            numeric = hinted is AttributeKind.NUMERIC
        if numeric:
            values = np.full(len(cells), np.nan)
            values[present] = parsed
            values.setflags(write=False)
            cols.append(Column(name, AttributeKind.NUMERIC, values))
        else:
            cols.append(_categorical_from_strings(name, cells, present))
    return Dataset(cols, labels)


def _format_number(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def write_csv(d: Dataset, path: str | Path, label_column: str = "cluster") -> None:
    if label_column in d:
        raise DataError(f"label column name {label_column!r} clashes with a feature column")
    cols = [d.column(a) for a in d.attributes]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([c.name for c in cols] + [label_column])
        for i in range(d.n_rows):
            row = []
            for col in cols:
                v = col.values[i]
                if col.kind is AttributeKind.NUMERIC:
                    row.append("" if np.isnan(v) else _format_number(v))
                else:
                    row.append("" if v is None else v)
            row.append(str(d.labels[i]))
            w.writerow(row)
