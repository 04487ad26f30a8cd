"""Pointwise-adaptive selection of neighbor counts by a signal-to-noise stopping rule.

For a query point the lead source (the largest one) is scanned over
``k_1 = 1, 2, ..., n_1`` while every other source uses ``k_j = floor(k_1 n_j / n_1)``.
The scan stops at the first ``k_1`` whose signal-to-noise statistic exceeds
``sqrt((d + log N) log N)`` with ``N`` the total sample size, or when the lead
source is exhausted. The label is the sign of ``sum_j k_j (eta_j - 1/2)``.

Each source is sorted once per query; label counts along that ordering are
cumulated so the whole scan is a handful of vectorized array operations.
Queries are processed in batches through the ``*_batch`` functions; the
per-query functions are thin wrappers around them.

Per-source terms are always formed as ``k * (eta - 1/2) ** 2`` (as a product,
never via ``sqrt(k) * |eta - 1/2|``) so that the one-, two- and multi-source
statistics agree to the last bit whenever they agree algebraically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import SourceDataset, neighbor_order

THRESHOLD_CROSSED = "threshold_crossed"
EXHAUSTED = "exhausted"


def stopping_threshold(d: int, n_total: int) -> float:
    if n_total < 2:
        raise ValueError(f"the stopping threshold needs n_total >= 2, got {n_total}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    log_n = math.log(n_total)
    return math.sqrt((d + log_n) * log_n)


def _threshold(d: int, n_total: int) -> float:
    # with a single observation log N = 0; only exhaustion can end the scan
    return stopping_threshold(d, n_total) if n_total >= 2 else math.inf


def _terms(k, eta):
    dev = eta - 0.5
    return k * (dev * dev), dev


def signal_to_noise_r(estimates: Sequence[tuple[int, float]]) -> float:
    """Larger of the root mass of sources voting 1 and of sources voting 0.

    ``estimates`` holds ``(k, eta_hat)`` pairs; pairs with ``k = 0`` are ignored.
    """
    plus = 0.0
    minus = 0.0
    active = False
    for k, eta in estimates:
        if k < 0:
            raise ValueError(f"neighbor counts must be nonnegative, got {k}")
        if k == 0:
            continue
        active = True
        term, dev = _terms(float(k), float(eta))
        if dev >= 0:
            plus += term
        else:
            minus += term
    if not active:
        raise ValueError("every estimate has k = 0")
    return max(math.sqrt(plus), math.sqrt(minus))


def _r_single(ks, etas):
    term, _ = _terms(ks[0], etas[0])
    return np.sqrt(term)


def _r_two(ks, etas):
    """Case split of the two-sample scan: root-sum if the votes agree, else the larger single term.

    A source sitting exactly at 1/2 carries no mass and is routed to the
    agreement branch.
    """
    a, dev_a = _terms(ks[0], etas[0])
    b, dev_b = _terms(ks[1], etas[1])
    disagree = np.sign(dev_a) * np.sign(dev_b) < 0
    return np.where(disagree, np.maximum(np.sqrt(a), np.sqrt(b)), np.sqrt(a + b))


def _r_multi(ks, etas):
    plus = 0.0
    minus = 0.0
    for k, eta in zip(ks, etas):
        term, dev = _terms(k, eta)
        nonneg = dev >= 0
        plus = plus + np.where(nonneg, term, 0.0)
        minus = minus + np.where(nonneg, 0.0, term)
    return np.maximum(np.sqrt(plus), np.sqrt(minus))


@dataclass(frozen=True)
class AdaptiveSelection:
    """Outcome of one adaptive scan, with enough state to recompute the label.

    ``ks``, ``ones`` and ``etas`` follow the caller's source order. ``ones``
    counts 1-labels among each source's ``k`` nearest neighbors; ``etas`` is
    1/2 for a source with ``k = 0``.
    """

    ks: tuple[int, ...]
    ones: tuple[int, ...]
    etas: tuple[float, ...]
    r_final: float
    threshold: float
    iterations: int
    stop_reason: str

    @property
    def label(self) -> int:
        # sum_j k_j (eta_j - 1/2) >= 0, in integers: sum_j (2 s_j - k_j) >= 0
        return int(sum(2 * s - k for s, k in zip(self.ones, self.ks)) >= 0)


@dataclass(frozen=True)
class BatchSelection:
    """Array form of :class:`AdaptiveSelection` for ``q`` queries; ``ks`` and ``ones`` are (q, m)."""

    ks: np.ndarray
    ones: np.ndarray
    r_final: np.ndarray
    threshold: float
    iterations: np.ndarray
    crossed: np.ndarray

    @property
    def labels(self) -> np.ndarray:
        return ((2 * self.ones - self.ks).sum(axis=1) >= 0).astype(np.int64)

    def __len__(self) -> int:
        return self.ks.shape[0]

    def etas(self) -> np.ndarray:
        ks = self.ks
        return np.where(ks > 0, self.ones / np.maximum(ks, 1), 0.5)

    def selection(self, i: int) -> AdaptiveSelection:
        etas = self.etas()[i]
        return AdaptiveSelection(
            ks=tuple(int(k) for k in self.ks[i]),
            ones=tuple(int(s) for s in self.ones[i]),
            etas=tuple(float(e) for e in etas),
            r_final=float(self.r_final[i]),
            threshold=self.threshold,
            iterations=int(self.iterations[i]),
            stop_reason=THRESHOLD_CROSSED if self.crossed[i] else EXHAUSTED,
        )


def cumulative_ones(source: SourceDataset, queries: np.ndarray) -> np.ndarray:
    """(q, n + 1) running count of 1-labels along each query's neighbor ordering, starting at 0."""
    q = queries.shape[0]
    out = np.zeros((q, source.n + 1), dtype=np.int64)
    if source.n:
        order = neighbor_order(source.X, queries)
        np.cumsum(source.y[order], axis=1, out=out[:, 1:])
    return out


def scan(
    cum_ones: Sequence[np.ndarray],
    sizes: Sequence[int],
    threshold: float,
    statistic: Callable,
) -> BatchSelection:
    """Run the stopping rule given per-source cumulative label counts.

    ``sizes[0]`` must be the largest size and positive; it drives the scan.
    """
    n1 = sizes[0]
    k1 = np.arange(1, n1 + 1, dtype=np.int64)
    ks = [k1] + [(k1 * n) // n1 for n in sizes[1:]]
    ones = [c[:, k] for c, k in zip(cum_ones, ks)]
    etas = [np.where(k > 0, s / np.maximum(k, 1), 0.5) for s, k in zip(ones, ks)]
    r = statistic([k.astype(np.float64) for k in ks], etas)
    over = r > threshold
    crossed = over.any(axis=1)
    stop = np.where(crossed, over.argmax(axis=1), n1 - 1)
    rows = np.arange(r.shape[0])
    return BatchSelection(
        ks=np.stack([k[stop] for k in ks], axis=1),
        ones=np.stack([s[rows, stop] for s in ones], axis=1),
        r_final=r[rows, stop],
        threshold=threshold,
        iterations=stop + 1,
        crossed=crossed,
    )


def _queries(queries, d: int) -> np.ndarray:
    qs = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if qs.shape[1] != d:
        raise ValueError(f"queries have dimension {qs.shape[1]}, data has {d}")
    return qs


def _common_dim(sources: Sequence[SourceDataset]) -> int:
    dims = {s.d for s in sources}
    if len(dims) != 1:
        raise ValueError(f"sources disagree on dimension: {sorted(dims)}")
    return dims.pop()


def adaptive_single_source_batch(P: SourceDataset, queries) -> BatchSelection:
    if P.n == 0:
        raise ValueError("the source dataset is empty")
    qs = _queries(queries, P.d)
    return scan([cumulative_ones(P, qs)], [P.n], _threshold(P.d, P.n), _r_single)


def adaptive_two_source_batch(P: SourceDataset, Q: SourceDataset, queries) -> BatchSelection:
    """Two-sample scan; columns of ``ks`` are ``(k_P, k_Q)`` whichever source leads."""
    if P.n == 0 and Q.n == 0:
        raise ValueError("both datasets are empty")
    d = _common_dim([P, Q])
    qs = _queries(queries, d)
    thr = _threshold(d, P.n + Q.n)
    cum_P, cum_Q = cumulative_ones(P, qs), cumulative_ones(Q, qs)
    if P.n >= Q.n:
        return scan([cum_P, cum_Q], [P.n, Q.n], thr, _r_two)
    sel = scan([cum_Q, cum_P], [Q.n, P.n], thr, _r_two)
    return _permute(sel, [1, 0])


def _permute(sel: BatchSelection, cols) -> BatchSelection:
    return BatchSelection(
        ks=sel.ks[:, cols],
        ones=sel.ones[:, cols],
        r_final=sel.r_final,
        threshold=sel.threshold,
        iterations=sel.iterations,
        crossed=sel.crossed,
    )


def adaptive_multi_source_batch(sources: Sequence[SourceDataset], queries) -> BatchSelection:
    """Multi-sample scan; sources are processed largest first, results reported in input order."""
    if not sources:
        raise ValueError("no sources given")
    sizes = [s.n for s in sources]
    if sum(sizes) == 0:
        raise ValueError("all sources are empty")
    d = _common_dim(sources)
    qs = _queries(queries, d)
    order = sorted(range(len(sources)), key=lambda j: -sizes[j])
    cums = [cumulative_ones(sources[j], qs) for j in order]
    sel = scan(cums, [sizes[j] for j in order], _threshold(d, sum(sizes)), _r_multi)
    return _permute(sel, np.argsort(order))


def adaptive_single_source(P: SourceDataset, query) -> tuple[int, AdaptiveSelection]:
    sel = adaptive_single_source_batch(P, query).selection(0)
    return sel.label, sel


def adaptive_two_source(P: SourceDataset, Q: SourceDataset, query) -> tuple[int, AdaptiveSelection]:
    sel = adaptive_two_source_batch(P, Q, query).selection(0)
    return sel.label, sel


def adaptive_multi_source(sources: Sequence[SourceDataset], query) -> tuple[int, AdaptiveSelection]:
    sel = adaptive_multi_source_batch(sources, query).selection(0)
    return sel.label, sel


def attempt_count(selection: AdaptiveSelection) -> int:
    return selection.iterations
