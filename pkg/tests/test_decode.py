import itertools
import math

import numpy as np
import pytest

from pooldata.model import (
    LabelCounts,
    NoiseModel,
    Proportions,
    TestDesign,
    bernoulli_design,
    noiseless_counts,
    observe,
    round_proportions,
    sample_beta,
)
from pooldata.decode import (
    EnumerationGuardError,
    approx_success,
    candidate_array,
    candidate_counts,
    enumerate_B,
    exact_pe_oracle,
    ml_decode,
)


def test_enumerate_counts_and_uniqueness():
    seqs = [tuple(b) for b in enumerate_B(LabelCounts(np.array([2, 2])))]
    assert len(seqs) == 6
    assert len(set(seqs)) == 6
    assert all(s.count(1) == 2 and s.count(2) == 2 for s in seqs)
    seqs3 = list(enumerate_B(LabelCounts(np.array([2, 2, 2]))))
    assert len(seqs3) == 90


def test_enumerate_lexicographic_order():
    seqs = [tuple(b) for b in enumerate_B(LabelCounts(np.array([2, 1])))]
    assert seqs == sorted(seqs)
    assert seqs[0] == (1, 1, 2)
    assert seqs[-1] == (2, 1, 1)


def test_enumerate_degenerate_single_sequence():
    seqs = list(enumerate_B(LabelCounts(np.array([5, 0]))))
    assert len(seqs) == 1
    assert list(seqs[0]) == [1] * 5


def test_enumeration_guard():
    with pytest.raises(EnumerationGuardError):
        list(enumerate_B(LabelCounts(np.array([15, 15]))))  # C(30,15) > 1e7


def test_candidate_counts_matches_direct():
    counts = LabelCounts(np.array([2, 1, 1]))
    X = bernoulli_design(4, 4, 0.5, 0)
    cands = candidate_array(counts)
    obs = candidate_counts(cands, X, 3)
    for i in range(cands.shape[0]):
        assert np.array_equal(obs[i], noiseless_counts(cands[i], X, 3))


def test_ml_decode_singleton_tests_identify_truth():
    counts = round_proportions(Proportions(np.array([0.5, 0.25, 0.25])), 4)
    X = TestDesign(np.eye(4, dtype=np.int8))
    for s in range(10):
        beta = sample_beta(counts, s)
        y = observe(beta, X, NoiseModel.noiseless(), 0, d=3)
        res = ml_decode(y, X, counts, NoiseModel.noiseless(), s)
        assert res.tie_count == 1
        assert np.array_equal(res.beta_hat, beta)


def test_ml_decode_uninformative_test_full_tie():
    counts = LabelCounts(np.array([2, 2]))
    X = TestDesign(np.ones((1, 4), dtype=np.int8))
    beta = np.array([1, 2, 1, 2])
    y = observe(beta, X, NoiseModel.noiseless(), 0, d=2)
    hits = 0
    trials = 6000
    for s in range(trials):
        res = ml_decode(y, X, counts, NoiseModel.noiseless(), s)
        assert res.tie_count == 6
        hits += np.array_equal(res.beta_hat, beta)
    # tie-break is uniform over the 6 consistent candidates
    se = math.sqrt((1 / 6) * (5 / 6) / trials)
    assert abs(hits / trials - 1 / 6) < 3.5 * se


def test_ml_decode_inconsistent_observation_rejected():
    counts = LabelCounts(np.array([2, 2]))
    X = TestDesign(np.ones((1, 4), dtype=np.int8))
    bad = np.array([[4, 0]])  # impossible given counts (2,2)
    with pytest.raises(ValueError):
        ml_decode(bad, X, counts, NoiseModel.noiseless(), 0)


def test_ml_decode_gaussian_small_sigma_matches_noiseless():
    counts = round_proportions(Proportions(np.array([0.5, 0.5])), 6)
    X = bernoulli_design(8, 6, 0.5, 3)
    for s in range(10):
        beta = sample_beta(counts, 20 + s)
        y = observe(beta, X, NoiseModel.noiseless(), 0, d=2).astype(float)
        clean = ml_decode(y, X, counts, NoiseModel.noiseless(), 99)
        noisy = ml_decode(y, X, counts, NoiseModel.gaussian(1e-6), 99)
        assert noisy.tie_count == clean.tie_count
        assert np.array_equal(noisy.beta_hat, clean.beta_hat)


def test_ml_decode_gaussian_error_drops_with_sigma():
    counts = round_proportions(Proportions(np.array([0.5, 0.5])), 6)
    X = bernoulli_design(10, 6, 0.5, 7)
    trials = 300
    errors = {}
    for sigma2 in (2.0, 0.01):
        noise = NoiseModel.gaussian(sigma2)
        bad = 0
        for s in range(trials):
            beta = sample_beta(counts, s)
            y = observe(beta, X, noise, 1000 + s, d=2)
            res = ml_decode(y, X, counts, noise, 2000 + s)
            bad += not np.array_equal(res.beta_hat, beta)
        errors[sigma2] = bad / trials
    # 3-sigma statistical check that less noise cannot hurt
    slack = 3 * math.sqrt(0.25 / trials) * 2
    assert errors[0.01] <= errors[2.0] + slack


def test_ml_decode_clipped_recovers_at_small_sigma():
    counts = round_proportions(Proportions(np.array([0.5, 0.5])), 6)
    X = bernoulli_design(10, 6, 0.5, 7)
    noise = NoiseModel.clipped_gaussian(1e-4)
    ok = 0
    for s in range(50):
        beta = sample_beta(counts, s)
        y = observe(beta, X, noise, 300 + s, d=2)
        res = ml_decode(y, X, counts, noise, 400 + s)
        ok += np.array_equal(res.beta_hat, beta)
    assert ok >= 45  # tiny noise rarely flips a rounding cell


def test_ml_decode_clipped_scores_finite_at_extremes():
    counts = LabelCounts(np.array([3, 3]))
    X = TestDesign(np.ones((1, 6), dtype=np.int8))
    noise = NoiseModel.clipped_gaussian(4.0)
    y = np.array([[6, 0]])  # clipped to the boundary cells
    res = ml_decode(y, X, counts, noise, 0)
    assert np.isfinite(res.log_likelihood)


def test_approx_success_examples():
    b = np.array([1, 2, 1, 2])
    assert approx_success(b, b, 0)
    assert not approx_success(np.array([2, 1, 2, 2]), b, 2)
    assert approx_success(np.array([2, 1, 2, 2]), b, 3)
    # constant most-common-label guess within minority count
    beta = np.array([1, 1, 1, 2, 2])
    assert approx_success(np.full(5, 1), beta, 2)
    with pytest.raises(ValueError):
        approx_success(np.array([1]), np.array([1, 2]), 0)


def test_oracle_pinned_half():
    counts = LabelCounts(np.array([2, 2]))
    X = TestDesign(np.array([[1, 1, 0, 0]], dtype=np.int8))
    res = exact_pe_oracle(X, counts)
    # classes by N_1: {2}x1, {0}x1, {1}x4 -> pe = (4/6)*(3/4) = 1/2
    assert res.pe_exact == pytest.approx(0.5, abs=1e-12)
    assert res.pe_unique == pytest.approx(4 / 6, abs=1e-12)
    assert res.candidates_total == 6


def test_oracle_no_tests():
    counts = LabelCounts(np.array([2, 2]))
    res = exact_pe_oracle(TestDesign(np.zeros((0, 4), dtype=np.int8)), counts)
    assert res.pe_exact == pytest.approx(1 - 1 / 6, abs=1e-12)
    assert res.pe_unique == 1.0


def test_oracle_singleton_tests_zero_error():
    counts = LabelCounts(np.array([2, 1, 2]))
    res = exact_pe_oracle(TestDesign(np.eye(5, dtype=np.int8)), counts)
    assert res.pe_exact == 0.0
    assert res.pe_unique == 0.0


def test_oracle_matches_brute_force_simulation_free_count():
    # independent oracle: average over all (truth, tie pick) by direct class math
    counts = LabelCounts(np.array([2, 1]))
    X = TestDesign(np.array([[1, 0, 1], [0, 1, 1]], dtype=np.int8))
    cands = candidate_array(counts)
    obs = candidate_counts(cands, X, 2)
    keys = {}
    for i in range(cands.shape[0]):
        keys.setdefault(obs[i].tobytes(), []).append(i)
    expect = sum((1 / len(v)) for v in keys.values() for _ in v) / cands.shape[0]
    res = exact_pe_oracle(X, counts)
    assert res.pe_exact == pytest.approx(1 - expect, abs=1e-12)


def test_oracle_monotone_under_appended_rows():
    rng = np.random.default_rng(8)
    counts = LabelCounts(np.array([3, 2]))
    for _ in range(20):
        rows = (rng.random((4, 5)) < 0.5).astype(np.int8)
        pes = [exact_pe_oracle(TestDesign(rows[:k]), counts).pe_exact
               for k in range(5)]
        assert all(b <= a + 1e-12 for a, b in zip(pes, pes[1:]))


def test_oracle_qmax_relaxation():
    counts = LabelCounts(np.array([2, 2]))
    X = TestDesign(np.array([[1, 1, 0, 0]], dtype=np.int8))
    exact = exact_pe_oracle(X, counts, qmax=0).pe_exact
    relaxed = exact_pe_oracle(X, counts, qmax=2).pe_exact
    assert relaxed <= exact + 1e-12
    # whole-space Hamming ball: every estimate is a success
    assert exact_pe_oracle(X, counts, qmax=4).pe_exact == 0.0


def test_oracle_qmax_value_by_enumeration():
    # independent enumeration of the qmax=2 success probability
    counts = LabelCounts(np.array([2, 2]))
    X = TestDesign(np.array([[1, 1, 0, 0]], dtype=np.int8))
    cands = candidate_array(counts)
    obs = candidate_counts(cands, X, 2)
    succ = 0.0
    for i in range(6):
        cls = [j for j in range(6) if np.array_equal(obs[j], obs[i])]
        within = sum(np.count_nonzero(cands[i] != cands[j]) <= 2 for j in cls)
        succ += within / len(cls)
    expect = 1 - succ / 6
    assert exact_pe_oracle(X, counts, qmax=2).pe_exact == pytest.approx(
        expect, abs=1e-12)
