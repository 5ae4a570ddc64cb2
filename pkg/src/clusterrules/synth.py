"""Seeded synthetic clustered tables for demos, tests and benchmarks."""
from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from .dataset import AttributeKind, Column, Dataset, _categorical_from_strings

LABEL_COLUMN = "cluster"


def make_synthetic(rows: int, numeric_attrs: int, categorical_attrs: int, clusters: int,
                   noise_attrs: int = 0, seed: int = 0, spread: float = 1.0,
                   dominance: float = 0.9) -> pd.DataFrame:
    """Clustered table with informative and label-independent columns.

    Informative numeric columns put each cluster around its own centroid
    (centroids 10 apart, noise sd ``1.5 * spread``). Informative
    categorical columns give each cluster a dominant value drawn with
    probability ``dominance``. Noise columns alternate numeric (uniform on
    [0, 100)) and categorical (4 uniform values), starting with numeric.
    """
    if min(rows, clusters) < 1 or min(numeric_attrs, categorical_attrs, noise_attrs) < 0:
        raise ValueError("sizes must be positive")
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(rows) % clusters)
    data = {}
    for j in range(numeric_attrs):
        centroids = rng.permutation(clusters) * 10.0 + rng.uniform(0, 2)
        data[f"num{j}"] = np.round(centroids[labels] + rng.normal(0, 1.5 * spread, rows), 2)
    n_values = max(clusters, 3) + 1
    for j in range(categorical_attrs):
        dominant = rng.permutation(n_values)[:clusters]
        other = rng.integers(0, n_values, rows)
        pick = rng.random(rows) < dominance
        codes = np.where(pick, dominant[labels], other)
        data[f"cat{j}"] = np.array([f"v{k}" for k in range(n_values)], dtype=object)[codes]
    for j in range(noise_attrs):
        if j % 2 == 0:
            data[f"noise{j}"] = np.round(rng.uniform(0, 100, rows), 2)
        else:
            data[f"noise{j}"] = np.array(["a", "b", "c", "d"], dtype=object)[rng.integers(0, 4, rows)]
    frame = pd.DataFrame(data)
    frame[LABEL_COLUMN] = labels
    return frame


def write_synthetic(path: str | Path, **kwargs) -> pd.DataFrame:
    frame = make_synthetic(**kwargs)
    frame.to_csv(path, index=False, lineterminator="\n")
    return frame


def synthetic_dataset(**kwargs) -> Dataset:
    """``make_synthetic`` as a ``Dataset``, kinds taken from the column dtypes."""
    frame = make_synthetic(**kwargs)
    cols = []
    for name in frame.columns.drop(LABEL_COLUMN):
        cells = frame[name].to_numpy()
        if cells.dtype == object:
            cols.append(_categorical_from_strings(name, cells, np.ones(len(cells), dtype=bool)))
        else:
            values = cells.astype(np.float64)
            values.setflags(write=False)
            cols.append(Column(name, AttributeKind.NUMERIC, values))
    return Dataset(cols, frame[LABEL_COLUMN].to_numpy())
