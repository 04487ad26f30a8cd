import math

import numpy as np
import pytest

import oracles
from conftest import random_instance, random_source
from driftknn.adaptive import (
    EXHAUSTED,
    THRESHOLD_CROSSED,
    adaptive_multi_source,
    adaptive_multi_source_batch,
    adaptive_single_source,
    adaptive_two_source,
    adaptive_two_source_batch,
    attempt_count,
    signal_to_noise_r,
    stopping_threshold,
)
from driftknn.geometry import SourceDataset


def test_threshold_examples():
    assert stopping_threshold(2, 100) == pytest.approx(5.51525, abs=1e-5)
    assert stopping_threshold(2, 2) == pytest.approx(1.3663, abs=5e-5)
    assert stopping_threshold(2, 50) < stopping_threshold(3, 50)
    with pytest.raises(ValueError):
        stopping_threshold(2, 1)


def test_signal_to_noise_examples():
    assert signal_to_noise_r([(4, 0.75), (1, 0.7)]) == pytest.approx(math.sqrt(0.25 + 0.04), abs=1e-15)
    assert signal_to_noise_r([(4, 0.75), (1, 0.7)]) == pytest.approx(0.53852, abs=5e-6)
    # each side carries sqrt(4) * 0.25 = 0.5
    assert signal_to_noise_r([(4, 0.75), (4, 0.25)]) == 0.5
    assert signal_to_noise_r([(9, 0.5)]) == 0.0
    assert signal_to_noise_r([(3, 1.0), (0, 0.0)]) == pytest.approx(math.sqrt(0.75))
    with pytest.raises(ValueError):
        signal_to_noise_r([(0, 0.2)])


def ones(n, d=2, seed=0, tag="P"):
    return SourceDataset(np.random.default_rng(seed).random((n, d)), np.ones(n, int), tag)


def test_single_source_exhausts_below_threshold():
    label, sel = adaptive_single_source(ones(100), [0.5, 0.5])
    # max attainable r is sqrt(100) / 2 = 5 < threshold(2, 100) = 5.515
    assert label == 1
    assert sel.stop_reason == EXHAUSTED
    assert sel.ks == (100,)
    assert attempt_count(sel) == 100


def test_single_source_crosses_threshold():
    label, sel = adaptive_single_source(ones(10_000), [0.5, 0.5])
    # sqrt(k) / 2 > sqrt((2 + ln 1e4) ln 1e4) = 10.1613 first at k = 414
    assert label == 1
    assert sel.stop_reason == THRESHOLD_CROSSED
    assert sel.ks == (414,)
    assert sel.threshold == pytest.approx(10.161252408616113, rel=1e-14)


def test_single_observation():
    label, sel = adaptive_single_source(SourceDataset([[0.3, 0.3]], [0]), [0.1, 0.9])
    assert label == 0
    assert sel.ks == (1,)
    assert sel.stop_reason == EXHAUSTED


def test_empty_inputs_rejected():
    empty = SourceDataset.empty(2)
    with pytest.raises(ValueError):
        adaptive_single_source(empty, [0, 0])
    with pytest.raises(ValueError):
        adaptive_two_source(empty, empty, [0, 0])
    with pytest.raises(ValueError):
        adaptive_multi_source([empty, empty], [0, 0])


def test_two_source_all_ones_crosses():
    label, sel = adaptive_two_source(ones(5000, seed=1), ones(5000, seed=2, tag="Q"), [0.5, 0.5])
    assert label == 1
    assert sel.stop_reason == THRESHOLD_CROSSED
    # sqrt(2k) / 2 > 10.1613 first at k = 207
    assert sel.ks == (207, 207)


def test_two_source_tie_at_exhaustion_is_label_one():
    P = SourceDataset([[0.1], [0.2]], [0, 1])
    Q = SourceDataset([[0.3], [0.4]], [1, 0], "Q")
    label, sel = adaptive_two_source(P, Q, [0.0])
    assert sel.stop_reason == EXHAUSTED
    assert sel.etas == (0.5, 0.5)
    assert label == 1


def test_two_source_larger_q_drives_the_loop(rng):
    P = random_source(rng, 30, 2, "P", 1.0)
    Q = random_source(rng, 90, 2, "Q", 1.0)
    _, sel = adaptive_two_source(P, Q, [0.4, 0.6])
    k_P, k_Q = sel.ks
    assert sel.iterations == k_Q
    assert k_P == k_Q * 30 // 90


def test_multi_source_equal_sizes_all_ones():
    srcs = [ones(4000, seed=s, tag=f"P{s}") for s in range(3)]
    label, sel = adaptive_multi_source(srcs, [0.5, 0.5])
    assert label == 1
    assert sel.stop_reason == THRESHOLD_CROSSED
    assert sel.ks == (143, 143, 143)


def test_multi_source_sorts_and_reports_in_input_order(rng):
    small = random_source(rng, 10, 2, "a", 1.0)
    big = random_source(rng, 100, 2, "b", 1.0)
    mid = random_source(rng, 40, 2, "c", 1.0)
    _, sel = adaptive_multi_source([small, big, mid], [0.5, 0.5])
    k_small, k_big, k_mid = sel.ks
    assert sel.iterations == k_big
    assert k_small == k_big * 10 // 100
    assert k_mid == k_big * 40 // 100


def test_oracle_equivalence(rng):
    for _ in range(300):
        P, Q, q = random_instance(rng)
        label, sel = adaptive_two_source(P, Q, q)
        kP, kQ, olabel, iters = oracles.two_source(P.X.tolist(), P.y.tolist(), Q.X.tolist(), Q.y.tolist(), q.tolist(), P.d)
        assert (sel.ks, label, sel.iterations) == ((kP, kQ), olabel, iters)


def test_reduction_identities(rng):
    for _ in range(300):
        P, Q, q = random_instance(rng)
        two = adaptive_two_source(P, Q, q)
        multi = adaptive_multi_source([P, Q], q)
        assert two[0] == multi[0]
        assert two[1].ks == multi[1].ks
        assert two[1].iterations == multi[1].iterations
        assert two[1].r_final == multi[1].r_final
        if P.n:
            single = adaptive_single_source(P, q)
            alone = adaptive_two_source(P, SourceDataset.empty(P.d), q)
            assert single[0] == alone[0]
            assert single[1].ks[0] == alone[1].ks[0]
            assert single[1].r_final == alone[1].r_final
            m1 = adaptive_multi_source([P], q)
            assert (m1[0], m1[1].ks, m1[1].iterations) == (single[0], single[1].ks, single[1].iterations)


def test_selection_invariants(rng):
    for _ in range(200):
        P, Q, q = random_instance(rng)
        label, sel = adaptive_two_source(P, Q, q)
        n1 = max(P.n, Q.n)
        assert 1 <= sel.iterations <= n1
        lead, other = (0, 1) if P.n >= Q.n else (1, 0)
        sizes = (P.n, Q.n)
        assert sel.ks[lead] == sel.iterations
        assert sel.ks[other] == sel.iterations * sizes[other] // n1
        if sel.stop_reason == THRESHOLD_CROSSED:
            assert sel.r_final > sel.threshold
        else:
            assert sel.iterations == n1
        # the label is recomputable from the recorded selection
        assert label == int(sum(k * (e - 0.5) for k, e in zip(sel.ks, sel.etas)) >= -1e-9)


def test_stopping_monotonicity(rng):
    for _ in range(100):
        P, Q, q = random_instance(rng)
        _, sel = adaptive_two_source(P, Q, q)
        if sel.stop_reason != THRESHOLD_CROSSED:
            continue
        n1 = max(P.n, Q.n)
        A, B = (P, Q) if P.n >= Q.n else (Q, P)
        for k in range(1, sel.iterations):
            kb = k * B.n // n1
            est = [(k, oracles.eta_from_scratch(A.X.tolist(), A.y.tolist(), q.tolist(), k))]
            est.append((kb, oracles.eta_from_scratch(B.X.tolist(), B.y.tolist(), q.tolist(), kb)))
            assert signal_to_noise_r(est) <= sel.threshold


def test_label_complement_symmetry(rng):
    checked = 0
    for _ in range(300):
        P, Q, q = random_instance(rng)
        label, sel = adaptive_two_source(P, Q, q)
        flip = lambda s: SourceDataset(s.X, 1 - s.y, s.tag) if s.n else s
        flabel, fsel = adaptive_two_source(flip(P), flip(Q), q)
        assert fsel.ks == sel.ks
        live = [e for k, e in zip(sel.ks, sel.etas) if k > 0]
        margin = sum(2 * s - k for s, k in zip(sel.ones, sel.ks))
        if all(e != 0.5 for e in live) and margin != 0:
            assert flabel == 1 - label
            checked += 1
    assert checked > 50


def test_batch_matches_per_query(rng):
    P = random_source(rng, 150, 2, "P", 2.0, grid=10)
    Q = random_source(rng, 60, 2, "Q", 2.0, grid=10)
    queries = np.round(rng.random((40, 2)) * 10) / 10
    batch = adaptive_two_source_batch(P, Q, queries)
    mbatch = adaptive_multi_source_batch([P, Q], queries)
    for i, q in enumerate(queries):
        label, sel = adaptive_two_source(P, Q, q)
        assert batch.selection(i) == sel
        assert batch.labels[i] == label
        assert mbatch.labels[i] == label


def test_attempts_bounded_by_largest_source(rng):
    for _ in range(100):
        P, Q, q = random_instance(rng)
        _, sel = adaptive_multi_source([P, Q], q)
        assert attempt_count(sel) <= max(P.n, Q.n)
