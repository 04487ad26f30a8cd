"""Labeled datasets and exact Euclidean nearest-neighbor search.

Every neighbor ordering in the package goes through :func:`distances`, which
accumulates squared coordinate differences left to right. Keeping one
summation order means single-query and batched searches agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np


class LabeledSample(NamedTuple):
    x: np.ndarray
    y: int


@dataclass(frozen=True, eq=False)
class SourceDataset:
    """An immutable (n, d) covariate matrix with binary labels and a source tag.

    Empty datasets are allowed but still carry their dimension, so that
    ``SourceDataset.empty(2)`` can sit next to a nonempty 2-d source.
    """

    X: np.ndarray
    y: np.ndarray
    tag: str = "P"

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(0, 1)
        if X.ndim != 2 or X.shape[1] < 1:
            raise ValueError(f"covariates must be a 2-d array with d >= 1, got shape {X.shape}")
        y = np.array(self.y).reshape(-1)
        if y.shape[0] != X.shape[0]:
            raise ValueError(f"{X.shape[0]} covariate rows but {y.shape[0]} labels")
        if y.size and not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        y = y.astype(np.int64)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def empty(cls, d: int, tag: str = "Q") -> "SourceDataset":
        return cls(np.zeros((0, d)), np.zeros(0, dtype=np.int64), tag)

    @classmethod
    def from_samples(cls, samples: Sequence[LabeledSample], tag: str = "P") -> "SourceDataset":
        if not samples:
            raise ValueError("cannot infer dimension from an empty sample list; use SourceDataset.empty")
        X = np.array([np.asarray(s.x, dtype=np.float64) for s in samples])
        return cls(X, np.array([s.y for s in samples]), tag)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[LabeledSample]:
        for x, y in zip(self.X, self.y):
            yield LabeledSample(x, int(y))

    def take(self, indices, tag: str | None = None) -> "SourceDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return SourceDataset(self.X[idx], self.y[idx], self.tag if tag is None else tag)


class NeighborList(NamedTuple):
    """Indices into the dataset and their distances, nearest first."""

    indices: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return len(self.indices)


def _as_query(query, d: int) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    if q.shape[0] != d:
        raise ValueError(f"query has dimension {q.shape[0]}, dataset has {d}")
    return q


def euclidean_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(distances(a[None, :], b[None, :])[0, 0])


def distances(X: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Euclidean distances from each query row to each row of ``X``, shape (q, n)."""
    X = np.asarray(X, dtype=np.float64)
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if X.shape[1] != queries.shape[1]:
        raise ValueError(f"dimension mismatch: data has d={X.shape[1]}, queries have d={queries.shape[1]}")
    diff = queries[:, None, 0] - X[None, :, 0]
    acc = diff * diff
    for j in range(1, X.shape[1]):
        diff = queries[:, None, j] - X[None, :, j]
        acc += diff * diff
    return np.sqrt(acc)


def neighbor_order(X: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Full neighbor ordering per query, ties broken by ascending row index.

    Returns an (q, n) integer array; row ``i`` lists every data index sorted
    by distance to ``queries[i]``.
    """
    dist = distances(X, queries)
    # stable sort keeps equal distances in index order
    return np.argsort(dist, axis=1, kind="stable")


def k_nearest(dataset: SourceDataset, query, k: int) -> NeighborList:
    q = _as_query(query, dataset.d)
    if not 1 <= k <= dataset.n:
        raise ValueError(f"k must lie in [1, {dataset.n}], got {k}")
    dist = distances(dataset.X, q[None, :])[0]
    order = np.argsort(dist, kind="stable")[:k]
    return NeighborList(order, dist[order])
