import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from driftknn.geometry import SourceDataset, euclidean_distance, k_nearest, neighbor_order


def test_distance_examples():
    assert euclidean_distance([0, 0], [0, 0]) == 0.0
    assert euclidean_distance([0, 0], [1, 1]) == pytest.approx(math.sqrt(2), abs=1e-15)
    assert euclidean_distance([0.1, 0.1], [0.2, 0.2]) == pytest.approx(0.14142136, abs=1e-8)


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        euclidean_distance([0, 0], [0, 0, 0])


def test_k_nearest_small_example():
    ds = SourceDataset([[0.1, 0.1], [0.9, 0.9], [0.2, 0.2]], [1, 0, 1])
    assert k_nearest(ds, [0, 0], 2).indices.tolist() == [0, 2]


def test_k_equals_n_returns_everything_sorted():
    ds = SourceDataset([[0.5], [0.1], [0.9], [0.3]], [0, 0, 1, 1])
    nb = k_nearest(ds, [0.0], 4)
    assert nb.indices.tolist() == [1, 3, 0, 2]
    assert np.all(np.diff(nb.distances) >= 0)


def test_tie_goes_to_lower_index():
    ds = SourceDataset([[0.75], [0.25]], [0, 1])
    assert k_nearest(ds, [0.5], 1).indices.tolist() == [0]


@pytest.mark.parametrize("k", [0, 4])
def test_k_out_of_range(k):
    ds = SourceDataset([[0.1], [0.2], [0.3]], [0, 1, 0])
    with pytest.raises(ValueError):
        k_nearest(ds, [0.0], k)


def test_query_dimension_checked():
    ds = SourceDataset([[0.1, 0.2]], [1])
    with pytest.raises(ValueError):
        k_nearest(ds, [0.1], 1)


def test_labels_must_be_binary():
    with pytest.raises(ValueError):
        SourceDataset([[0.1]], [2])


def test_dataset_is_immutable():
    ds = SourceDataset([[0.1, 0.2]], [1])
    with pytest.raises(ValueError):
        ds.X[0, 0] = 1.0


def test_matches_sort_oracle_on_random_data(rng):
    for _ in range(200):
        n = int(rng.integers(1, 500))
        d = int(rng.integers(1, 5))
        X = rng.random((n, d))
        if rng.random() < 0.5:
            X = np.round(X * 5) / 5  # force many ties
        q = rng.random(d)
        if rng.random() < 0.5:
            q = np.round(q * 5) / 5
        k = int(rng.integers(1, n + 1))
        ds = SourceDataset(X, np.zeros(n, dtype=int))
        assert k_nearest(ds, q, k).indices.tolist() == oracles.knn_indices(X.tolist(), q.tolist(), k)


def test_batched_order_equals_single_queries(rng):
    X = np.round(rng.random((300, 3)) * 6) / 6
    Q = np.round(rng.random((20, 3)) * 6) / 6
    batch = neighbor_order(X, Q)
    ds = SourceDataset(X, np.zeros(300, dtype=int))
    for i, q in enumerate(Q):
        assert batch[i].tolist() == k_nearest(ds, q, 300).indices.tolist()


coords = st.floats(0, 1, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 40), st.just(2)), elements=coords), st.data())
def test_prefix_property(X, data):
    n = X.shape[0]
    ds = SourceDataset(X, np.zeros(n, dtype=int))
    q = data.draw(arrays(np.float64, 2, elements=coords))
    k = data.draw(st.integers(1, n - 1))
    small, big = k_nearest(ds, q, k), k_nearest(ds, q, k + 1)
    assert big.indices[:k].tolist() == small.indices.tolist()
    assert len(set(big.indices.tolist())) == k + 1


def test_permutation_invariance_without_ties(rng):
    for _ in range(50):
        X = rng.random((60, 2))
        q = rng.random(2)
        perm = rng.permutation(60)
        ds, ds_perm = SourceDataset(X, np.zeros(60, int)), SourceDataset(X[perm], np.zeros(60, int))
        a = k_nearest(ds, q, 10).indices
        b = perm[k_nearest(ds_perm, q, 10).indices]
        assert sorted(a.tolist()) == sorted(b.tolist())
