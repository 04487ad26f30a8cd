"""Monte Carlo comparison of the adaptive classifier against pooled-scan and naive kNN baselines.

Classifiers
-----------
ADAPTIVE     two-sample adaptive scan led by the larger source (``max(n_P, n_Q)`` attempts)
KNN_CW_LIKE  the same stopping rule evaluated over every prefix of the pooled
             neighbor ordering (``n_P + n_Q`` attempts); a stand-in that keeps
             the search-space size of the exhaustive pooled method
KNN_Q        plug-in kNN on the target sample only
KNN_ALL      plug-in kNN on the pooled sample
BAYES        the oracle rule itself; scores exactly 1 and serves as a harness check

Trial seeds come from ``SeedSequence([master_seed, trial_index])`` so any
trial can be recomputed alone and results do not depend on scheduling.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .adaptive import _r_two, _threshold, adaptive_two_source_batch
from .estimators import round_half_up
from .geometry import SourceDataset, neighbor_order
from .synth import DgpConfig, bayes_label, make_rng, sample_covariates, sample_dataset

ADAPTIVE = "ADAPTIVE"
KNN_CW_LIKE = "KNN_CW_LIKE"
KNN_Q = "KNN_Q"
KNN_ALL = "KNN_ALL"
BAYES = "BAYES"
COMPETITORS = (ADAPTIVE, KNN_CW_LIKE, KNN_Q, KNN_ALL)
KNOWN = COMPETITORS + (BAYES,)

WORKERS_ENV = "DRIFTKNN_WORKERS"


def baseline_k(n: int, d: int) -> int:
    """Rate-optimal neighbor count for a Lipschitz posterior, ``round(n ** (2 / (2 + d)))`` in ``[1, n]``."""
    if n < 1:
        raise ValueError("baseline kNN needs a nonempty sample")
    return min(max(round_half_up(n ** (2 / (2 + d))), 1), n)


def _plug_in(source: SourceDataset, queries: np.ndarray) -> np.ndarray:
    k = baseline_k(source.n, source.d)
    order = neighbor_order(source.X, queries)[:, :k]
    ones = source.y[order].sum(axis=1)
    return (2 * ones >= k).astype(np.int64)


def _pool(P: SourceDataset, Q: SourceDataset) -> SourceDataset:
    if P.d != Q.d:
        raise ValueError(f"sources disagree on dimension: {P.d} vs {Q.d}")
    return SourceDataset(np.vstack([P.X, Q.X]), np.concatenate([P.y, Q.y]), "ALL")


def knn_q_baseline_batch(Q: SourceDataset, queries) -> np.ndarray:
    if Q.n == 0:
        raise ValueError("KNN_Q needs a nonempty target sample")
    return _plug_in(Q, np.atleast_2d(queries))


def knn_all_baseline_batch(P: SourceDataset, Q: SourceDataset, queries) -> np.ndarray:
    pooled = _pool(P, Q)
    if pooled.n == 0:
        raise ValueError("KNN_ALL needs at least one observation")
    return _plug_in(pooled, np.atleast_2d(queries))


def knn_cw_like_batch(P: SourceDataset, Q: SourceDataset, queries) -> tuple[np.ndarray, np.ndarray]:
    """Labels and attempt counts of the pooled-prefix scan.

    Prefix ``k`` of the pooled ordering is split by source into
    ``(k_P, k_Q)``; the two-sample statistic and threshold are applied to it.
    """
    pooled = _pool(P, Q)
    N = pooled.n
    if N == 0:
        raise ValueError("both datasets are empty")
    qs = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    order = neighbor_order(pooled.X, qs)
    from_P = (order < P.n).astype(np.int64)
    ys = pooled.y[order]
    k_P = np.cumsum(from_P, axis=1)
    s_P = np.cumsum(ys * from_P, axis=1)
    s_all = np.cumsum(ys, axis=1)
    k = np.arange(1, N + 1, dtype=np.int64)
    k_Q = k - k_P
    s_Q = s_all - s_P
    eta_P = np.where(k_P > 0, s_P / np.maximum(k_P, 1), 0.5)
    eta_Q = np.where(k_Q > 0, s_Q / np.maximum(k_Q, 1), 0.5)
    r = _r_two([k_P.astype(np.float64), k_Q.astype(np.float64)], [eta_P, eta_Q])
    over = r > _threshold(P.d, N)
    stop = np.where(over.any(axis=1), over.argmax(axis=1), N - 1)
    rows = np.arange(qs.shape[0])
    labels = (2 * s_all[rows, stop] - k[stop] >= 0).astype(np.int64)
    return labels, stop + 1


def knn_q_baseline(Q: SourceDataset, query) -> int:
    return int(knn_q_baseline_batch(Q, query)[0])


def knn_all_baseline(P: SourceDataset, Q: SourceDataset, query) -> int:
    return int(knn_all_baseline_batch(P, Q, query)[0])


def knn_cw_like(P: SourceDataset, Q: SourceDataset, query) -> tuple[int, int]:
    labels, attempts = knn_cw_like_batch(P, Q, query)
    return int(labels[0]), int(attempts[0])


def predict(name: str, P: SourceDataset, Q: SourceDataset, queries) -> tuple[np.ndarray, np.ndarray | None]:
    """Labels for ``queries`` from a named competitor, plus per-query attempts for scanning methods."""
    if name == ADAPTIVE:
        sel = adaptive_two_source_batch(P, Q, queries)
        return sel.labels, sel.iterations
    if name == KNN_CW_LIKE:
        return knn_cw_like_batch(P, Q, queries)
    if name == KNN_Q:
        return knn_q_baseline_batch(Q, queries), None
    if name == KNN_ALL:
        return knn_all_baseline_batch(P, Q, queries), None
    raise ValueError(f"unknown classifier {name!r}; choose from {', '.join(COMPETITORS)}")


@dataclass(frozen=True)
class ExperimentConfig:
    dgp: DgpConfig
    n_P: int
    n_Q: int
    trials: int = 100
    test_points: int = 200
    classifiers: tuple[str, ...] = COMPETITORS
    master_seed: int = 0

    def __post_init__(self):
        if self.trials < 1 or self.test_points < 1:
            raise ValueError("trials and test_points must be >= 1")
        if self.n_P < 0 or self.n_Q < 0:
            raise ValueError("sample sizes must be nonnegative")
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        unknown = set(self.classifiers) - set(KNOWN)
        if unknown:
            raise ValueError(f"unknown classifiers {sorted(unknown)}")
        if self.n_Q == 0 and KNN_Q in self.classifiers:
            raise ValueError("KNN_Q needs n_Q >= 1")


@dataclass
class TrialResult:
    agreements: dict[str, int]
    attempts: dict[str, int | None]
    elapsed: dict[str, float]


def trial_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, index])


def run_trial(config: ExperimentConfig, trial_index: int) -> TrialResult:
    p_seed, q_seed, x_seed = trial_seed(config.master_seed, trial_index).spawn(3)
    dgp = config.dgp
    P = sample_dataset(dgp, "P", config.n_P, seed=p_seed)
    Q = sample_dataset(dgp, "Q", config.n_Q, seed=q_seed)
    queries = sample_covariates(dgp.d, config.test_points, make_rng(x_seed))
    truth = np.asarray(bayes_label(dgp, queries)).reshape(-1)

    out = TrialResult({}, {}, {})
    for name in config.classifiers:
        start = time.perf_counter()
        if name == BAYES:
            labels, attempts = np.asarray(bayes_label(dgp, queries)).reshape(-1), None
        else:
            labels, attempts = predict(name, P, Q, queries)
        out.elapsed[name] = time.perf_counter() - start
        out.agreements[name] = int((labels == truth).sum())
        out.attempts[name] = None if attempts is None else int(np.sum(attempts))
    return out


@dataclass
class ClassifierStats:
    accuracy: float
    stderr: float
    mean_attempts: float | None
    wall_time_seconds: float
    agreements: int
    total: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    stats: dict[str, ClassifierStats] = field(default_factory=dict)

    def __getitem__(self, name: str) -> ClassifierStats:
        return self.stats[name]


def binomial_stderr(p: float, total: int) -> float:
    return math.sqrt(p * (1 - p) / total)


def aggregate(config: ExperimentConfig, trials: Sequence[TrialResult]) -> ExperimentResult:
    total = len(trials) * config.test_points
    result = ExperimentResult(config)
    for name in config.classifiers:
        agree = sum(t.agreements[name] for t in trials)
        attempts = [t.attempts[name] for t in trials]
        acc = agree / total
        result.stats[name] = ClassifierStats(
            accuracy=acc,
            stderr=binomial_stderr(acc, total),
            mean_attempts=None if attempts[0] is None else sum(attempts) / total,
            wall_time_seconds=sum(t.elapsed[name] for t in trials),
            agreements=agree,
            total=total,
        )
    return result


def _run_chunk(args):
    config, indices = args
    return [run_trial(config, i) for i in indices]


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    return max(int(raw), 1) if raw else 1


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    workers = default_workers() if workers is None else max(workers, 1)
    indices = list(range(config.trials))
    if workers == 1:
        trials = [run_trial(config, i) for i in indices]
    else:
        chunks = [indices[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [(config, c) for c in chunks]))
        by_index = {}
        for chunk, part in zip(chunks, parts):
            by_index.update(zip(chunk, part))
        trials = [by_index[i] for i in indices]
    return aggregate(config, trials)


RESULT_COLUMNS = (
    "dgp", "kappa", "gamma", "d", "n_P", "n_Q", "trials", "test_points", "master_seed",
    "classifier", "accuracy", "stderr", "mean_attempts", "wall_time_seconds",
)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def result_rows(results: Iterable[ExperimentResult], timing: bool = True) -> list[dict[str, str]]:
    rows = []
    for res in results:
        c = res.config
        base = {
            "dgp": c.dgp.dgp_id, "kappa": c.dgp.kappa, "gamma": c.dgp.gamma, "d": c.dgp.d,
            "n_P": c.n_P, "n_Q": c.n_Q, "trials": c.trials, "test_points": c.test_points,
            "master_seed": c.master_seed,
        }
        for name, s in res.stats.items():
            row = dict(base, classifier=name, accuracy=s.accuracy, stderr=s.stderr,
                       mean_attempts=s.mean_attempts,
                       wall_time_seconds=s.wall_time_seconds if timing else None)
            rows.append({k: _fmt(v) for k, v in row.items()})
    return rows


def write_results_csv(results: Iterable[ExperimentResult], path, timing: bool = True) -> None:
    """One row per (config point, classifier).

    Wall-clock times are the only nondeterministic column; ``timing=False``
    leaves it blank so repeated runs give byte-identical files.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(result_rows(results, timing))


def config_to_dict(config: ExperimentConfig) -> dict:
    out = asdict(config)
    out["classifiers"] = list(config.classifiers)
    return out


def config_from_dict(raw: dict) -> ExperimentConfig:
    raw = dict(raw)
    dgp = raw.pop("dgp", {})
    if not isinstance(dgp, DgpConfig):
        dgp = DgpConfig(**dgp)
    return ExperimentConfig(dgp=dgp, **raw)
