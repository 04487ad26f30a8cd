"""CSV ingestion, min-max scaling and the split/replicate protocol for tabular data.

Files are comma separated with a header row, '.' as decimal point and UTF-8
text. Source and query datasets use the columns ``f0, ..., f{d-1}, y``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .bench import COMPETITORS, predict
from .geometry import SourceDataset

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TabularDataset:
    features: np.ndarray
    feature_names: tuple[str, ...]
    labels: np.ndarray
    split: np.ndarray | None = None
    dropped_count: int = 0


def _parse(value: str) -> float | None:
    value = value.strip()
    if not value or value in {"?", "NA", "nan", "NaN"}:
        return None
    try:
        v = float(value)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, label_column: str, feature_columns: Sequence[str], split_column: str | None = None) -> TabularDataset:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such CSV file: {path}")
    wanted = [*feature_columns, label_column] + ([split_column] if split_column else [])
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        missing = [c for c in wanted if c not in header]
        if missing:
            raise ValueError(f"{path}: columns {missing} not found in header {header}")
        pos = [header.index(c) for c in wanted]
        rows, dropped = [], 0
        for line_no, raw in enumerate(reader, start=2):
            if not raw:
                continue
            vals = [_parse(raw[i]) if i < len(raw) else None for i in pos]
            if any(v is None for v in vals):
                dropped += 1
                log.debug("dropping line %d of %s: %r", line_no, path, raw)
                continue
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no complete rows in columns {wanted}")
    data = np.array(rows, dtype=np.float64)
    nf = len(feature_columns)
    labels = data[:, nf]
    bad = ~np.isin(labels, (0.0, 1.0))
    if bad.any():
        raise ValueError(f"{path}: label column {label_column!r} has non-binary value {labels[bad][0]!r}")
    split = data[:, nf + 1] if split_column else None
    return TabularDataset(data[:, :nf], tuple(feature_columns), labels.astype(np.int64), split, dropped)


def normalize_minmax(dataset: TabularDataset) -> TabularDataset:
    """Map every feature column onto [0, 1]; constant columns become 0."""
    X = dataset.features
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (X - lo) / safe, 0.0)
    return replace(dataset, features=scaled)


def split_by_binary(dataset: TabularDataset) -> tuple[SourceDataset, SourceDataset]:
    """Rows with split value 1 become the source sample ``P``, rows with 0 the target ``Q``."""
    if dataset.split is None:
        raise ValueError("dataset has no split column")
    s = dataset.split
    if not np.isin(s, (0.0, 1.0)).all():
        raise ValueError(f"split column must be binary, found {sorted(set(s.tolist()) - {0.0, 1.0})[:3]}")
    d = dataset.features.shape[1]

    def part(mask, tag):
        if not mask.any():
            return SourceDataset.empty(d, tag)
        return SourceDataset(dataset.features[mask], dataset.labels[mask], tag)

    return part(s == 1, "P"), part(s == 0, "Q")


def write_dataset_csv(source: SourceDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{j}" for j in range(source.d)] + ["y"])
        for x, y in zip(source.X, source.y):
            w.writerow([format(v, ".17g") for v in x] + [int(y)])


def read_dataset_csv(path, tag: str = "P", require_labels: bool = True) -> SourceDataset:
    """Read an ``f0..f{d-1}[,y]`` file; without a ``y`` column labels default to 0 unless required."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        fcols = [i for i, h in enumerate(header) if h.startswith("f") and h[1:].isdigit()]
        fcols.sort(key=lambda i: int(header[i][1:]))
        if not fcols:
            raise ValueError(f"{path}: expected feature columns f0, f1, ...")
        ycol = header.index("y") if "y" in header else None
        if ycol is None and require_labels:
            raise ValueError(f"{path}: missing label column 'y'")
        X, y = [], []
        for line_no, raw in enumerate(reader, start=2):
            if not raw:
                continue
            try:
                X.append([float(raw[i]) for i in fcols])
                y.append(int(float(raw[ycol])) if ycol is not None else 0)
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}, line {line_no}: {exc}") from None
    d = len(fcols)
    if not X:
        return SourceDataset.empty(d, tag)
    return SourceDataset(np.array(X), np.array(y), tag)


@dataclass
class RealDataResult:
    n_Q_train: int
    replications: int
    accuracies: dict[str, np.ndarray] = field(default_factory=dict)

    def mean(self, name: str) -> float:
        return float(self.accuracies[name].mean())

    def stderr(self, name: str) -> float:
        a = self.accuracies[name]
        return float(a.std(ddof=1) / math.sqrt(len(a))) if len(a) > 1 else 0.0


def real_data_protocol(
    P: SourceDataset,
    Q: SourceDataset,
    n_Q_train: int,
    replications: int = 100,
    seed: int = 0,
    classifiers: Sequence[str] = COMPETITORS,
) -> RealDataResult:
    """Repeatedly hold out ``|Q| - n_Q_train`` target rows and score each classifier on them.

    Replication ``i`` draws its subsample from ``SeedSequence([seed, i])``.
    """
    if not 0 <= n_Q_train < Q.n:
        raise ValueError(f"n_Q_train must lie in [0, {Q.n - 1}], got {n_Q_train}")
    if replications < 1:
        raise ValueError("replications must be >= 1")
    acc = {name: np.empty(replications) for name in classifiers}
    for rep in range(replications):
        rng = np.random.default_rng(np.random.SeedSequence([seed, rep]))
        perm = rng.permutation(Q.n)
        train, test = Q.take(perm[:n_Q_train]), Q.take(perm[n_Q_train:])
        for name in classifiers:
            labels, _ = predict(name, P, train, test.X)
            acc[name][rep] = float(np.mean(labels == test.y))
    return RealDataResult(n_Q_train, replications, acc)
