import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardlda.baselines import estimate_psi_from_sample
from hardlda.corpus import corpus_from_token_lists
from hardlda.errors import (
    DimensionMismatchError,
    EmptyHeldoutError,
    HardLdaError,
)
from hardlda.evaluation import (
    EvalReport,
    adjusted_rand,
    fold_in_thetas,
    hard_predictive_ll,
    hungarian_align,
    nmi,
    soft_predictive_ll,
    symmetric_kl_topics,
    topic_l1_error,
)
from hardlda.model import TopicMatrix


class TestNmi:
    def test_identical(self):
        assert nmi([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0

    def test_relabeled_identical(self):
        assert nmi([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0

    def test_independent_partitions(self):
        assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == 0.0

    def test_both_constant(self):
        assert nmi([3, 3, 3], [7, 7, 7]) == 1.0

    def test_one_constant(self):
        assert nmi([0, 0, 0], [0, 1, 2]) == 0.0

    def test_range(self, rng):
        for _ in range(50):
            a = rng.integers(0, 5, size=40)
            b = rng.integers(0, 3, size=40)
            value = nmi(a, b)
            assert 0.0 <= value <= 1.0

    def test_relabeling_invariance(self, rng):
        a = rng.integers(0, 5, size=60)
        b = rng.integers(0, 4, size=60)
        perm_a = rng.permutation(5)
        perm_b = rng.permutation(4)
        assert nmi(a, b) == pytest.approx(nmi(perm_a[a], perm_b[b]), abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            nmi([0, 1], [0])


def _pair_count_rand(a, b):
    """O(N^2) pair-counting adjusted Rand."""
    n = len(a)
    same_a = same_b = same_both = 0
    for i, j in itertools.combinations(range(n), 2):
        sa = a[i] == a[j]
        sb = b[i] == b[j]
        same_a += sa
        same_b += sb
        same_both += sa and sb
    total = n * (n - 1) / 2
    expected = same_a * same_b / total
    max_index = (same_a + same_b) / 2
    if max_index == expected:
        return 1.0
    return (same_both - expected) / (max_index - expected)


class TestAdjustedRand:
    def test_identical(self):
        assert adjusted_rand([0, 1, 0, 2], [5, 3, 5, 1]) == 1.0

    def test_hand_case(self):
        assert adjusted_rand([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(
            -0.5, abs=1e-12
        )

    def test_matches_pair_counting_oracle(self, rng):
        for _ in range(25):
            a = rng.integers(0, 4, size=50)
            b = rng.integers(0, 5, size=50)
            assert adjusted_rand(a, b) == pytest.approx(
                _pair_count_rand(a, b), abs=1e-12
            )

    def test_one_iff_identical_partitions(self, rng):
        a = rng.integers(0, 4, size=30)
        b = a.copy()
        b[0] = (b[0] + 1) % 4
        if adjusted_rand(a, b) == 1.0:
            pytest.fail("distinct partitions scored 1")
        assert adjusted_rand(a, np.random.default_rng(1).permutation(4)[a]) == 1.0

    @given(
        st.lists(st.integers(0, 3), min_size=2, max_size=25),
        st.data(),
    )
    @settings(max_examples=50, deadline=None)
    def test_relabeling_invariance_property(self, a, data):
        b = data.draw(
            st.lists(st.integers(0, 3), min_size=len(a), max_size=len(a))
        )
        perm = np.array([2, 0, 3, 1])
        got = adjusted_rand(a, b)
        assert got == pytest.approx(
            adjusted_rand(perm[np.array(a)], b), abs=1e-12
        )


class TestHungarian:
    def test_identity(self, rng):
        mat = rng.random((5, 9))
        mat /= mat.sum(axis=1, keepdims=True)
        perm, cost = hungarian_align(mat, mat)
        assert perm.tolist() == list(range(5))
        assert cost == pytest.approx(0.0, abs=1e-12)

    def test_row_swap_recovered(self, rng):
        mat = rng.random((4, 6))
        swapped = mat[[1, 0, 3, 2]]
        perm, cost = hungarian_align(swapped, mat)
        assert cost == pytest.approx(0.0, abs=1e-12)
        assert np.array_equal(swapped[perm], mat)

    def test_matches_bruteforce(self, rng):
        for _ in range(30):
            hat = rng.random((6, 10))
            ref = rng.random((6, 10))
            _, cost = hungarian_align(hat, ref)
            best = min(
                sum(
                    np.abs(hat[p[i]] - ref[i]).sum() for i in range(6)
                )
                for p in itertools.permutations(range(6))
            )
            assert cost == pytest.approx(best, abs=1e-10)

    def test_beats_random_permutations(self, rng):
        hat = rng.random((7, 12))
        ref = rng.random((7, 12))
        _, cost = hungarian_align(hat, ref)
        idty = sum(np.abs(hat[i] - ref[i]).sum() for i in range(7))
        assert cost <= idty + 1e-12
        for _ in range(50):
            p = rng.permutation(7)
            rand_cost = sum(np.abs(hat[p[i]] - ref[i]).sum() for i in range(7))
            assert cost <= rand_cost + 1e-12

    def test_shape_mismatch(self, rng):
        with pytest.raises(DimensionMismatchError):
            hungarian_align(rng.random((2, 3)), rng.random((3, 3)))


class TestTopicL1:
    def test_identical_zero(self, rng):
        mat = rng.random((4, 8))
        assert topic_l1_error(mat, mat) == pytest.approx(0.0, abs=1e-12)

    def test_bounded_by_simplex_diameter(self, rng):
        a = rng.random((5, 10))
        a /= a.sum(axis=1, keepdims=True)
        b = rng.random((5, 10))
        b /= b.sum(axis=1, keepdims=True)
        assert topic_l1_error(a, b) <= 2.0

    def test_row_permutation_zero(self, rng):
        mat = rng.random((6, 9))
        for _ in range(5):
            perm = rng.permutation(6)
            assert topic_l1_error(mat[perm], mat) == pytest.approx(0.0, abs=1e-12)


def _uniform_matrix(k, v):
    return TopicMatrix(np.full((k, v), 1.0 / v))


class TestHardPredictiveLL:
    def test_delta_rows_matching_words(self):
        eps = 1e-12
        psi = np.array([[1 - eps, eps], [eps, 1 - eps]])
        heldout = corpus_from_token_lists([[0, 0], [1, 1, 1]], 2)
        ll = hard_predictive_ll(TopicMatrix(psi), heldout, lam=0.0)
        assert ll == pytest.approx(0.0, abs=1e-9)

    def test_uniform_rows(self):
        heldout = corpus_from_token_lists([[0, 3, 2], [1]], 5)
        ll = hard_predictive_ll(_uniform_matrix(3, 5), heldout, lam=2.0)
        assert ll == pytest.approx(-math.log(5))

    def test_lambda_zero_equals_max_rule(self, rng):
        psi = rng.random((4, 9))
        psi /= psi.sum(axis=1, keepdims=True)
        heldout = corpus_from_token_lists(
            [rng.integers(0, 9, size=12) for _ in range(5)], 9
        )
        ll = hard_predictive_ll(TopicMatrix(psi), heldout, lam=0.0)
        words = heldout.flat_words()
        expected = np.log(psi[:, words]).max(axis=0).mean()
        assert ll == pytest.approx(expected, abs=1e-12)

    def test_beats_random_assignment(self, rng):
        psi = rng.random((4, 9))
        psi /= psi.sum(axis=1, keepdims=True)
        heldout = corpus_from_token_lists(
            [rng.integers(0, 9, size=15) for _ in range(6)], 9
        )
        ll = hard_predictive_ll(TopicMatrix(psi), heldout, lam=1.5)
        words = heldout.flat_words()
        for seed in range(10):
            z = np.random.default_rng(seed).integers(0, 4, size=words.shape[0])
            rand_ll = np.log(psi[z, words]).mean()
            assert ll >= rand_ll - 1e-12

    def test_empty_heldout(self):
        empty = corpus_from_token_lists([], 3)
        with pytest.raises(EmptyHeldoutError):
            hard_predictive_ll(_uniform_matrix(2, 3), empty, 1.0)


class TestSoftPredictiveLL:
    def test_k_one(self, rng):
        psi = rng.random((1, 6))
        psi /= psi.sum()
        heldout = corpus_from_token_lists([[0, 2, 5], [1]], 6)
        ll = soft_predictive_ll(TopicMatrix(psi), heldout, alpha=0.5, sweeps=5)
        expected = np.log(psi[0, heldout.flat_words()]).mean()
        assert ll == pytest.approx(expected, abs=1e-12)

    def test_uniform_rows(self):
        heldout = corpus_from_token_lists([[0, 1, 2, 3]], 4)
        ll = soft_predictive_ll(_uniform_matrix(3, 4), heldout, alpha=1.0, sweeps=5)
        assert ll == pytest.approx(-math.log(4))

    def test_mixture_beats_hard_term(self, rng):
        # log sum_i theta_i psi_iw >= log max_i theta_i psi_iw, per token
        psi = rng.random((3, 7))
        psi /= psi.sum(axis=1, keepdims=True)
        tm = TopicMatrix(psi)
        heldout = corpus_from_token_lists(
            [rng.integers(0, 7, size=10) for _ in range(4)], 7
        )
        alpha, sweeps, seed = 0.4, 30, 2
        soft = soft_predictive_ll(tm, heldout, alpha, sweeps=sweeps, seed=seed)
        thetas = fold_in_thetas(tm, heldout, alpha, sweeps=sweeps, seed=seed)
        total_soft = 0.0
        total_hard = 0.0
        for doc, theta in zip(heldout.docs, thetas):
            contrib = theta[:, None] * psi[:, doc.tokens]
            total_soft += np.log(contrib.sum(axis=0)).sum()
            total_hard += np.log(contrib.max(axis=0)).sum()
        n = heldout.num_tokens
        assert soft == pytest.approx(total_soft / n, abs=1e-12)
        assert soft >= total_hard / n

    def test_deterministic(self, rng):
        psi = rng.random((3, 7))
        psi /= psi.sum(axis=1, keepdims=True)
        heldout = corpus_from_token_lists([[0, 1, 2], [3, 4]], 7)
        a = soft_predictive_ll(TopicMatrix(psi), heldout, 0.3, sweeps=10, seed=4)
        b = soft_predictive_ll(TopicMatrix(psi), heldout, 0.3, sweeps=10, seed=4)
        assert a == b

    def test_empty_heldout(self):
        with pytest.raises(EmptyHeldoutError):
            soft_predictive_ll(_uniform_matrix(2, 3), corpus_from_token_lists([], 3), 0.5)


class TestSymmetricKl:
    def test_identical_zero(self, rng):
        mat = rng.random((3, 6)) + 0.1
        mat /= mat.sum(axis=1, keepdims=True)
        assert symmetric_kl_topics(mat, mat) == pytest.approx(0.0, abs=1e-12)

    def test_symmetric(self, rng):
        a = rng.random((4, 6)) + 0.1
        a /= a.sum(axis=1, keepdims=True)
        b = rng.random((4, 6)) + 0.1
        b /= b.sum(axis=1, keepdims=True)
        assert symmetric_kl_topics(a, b) == pytest.approx(
            symmetric_kl_topics(b, a), abs=1e-10
        )

    def test_two_topic_hand_case(self):
        p = np.array([0.9, 0.1])
        q = np.array([0.5, 0.5])
        other = np.array([0.05, 0.95])
        a = np.vstack([p, other])
        b = np.vstack([q, other])
        kl_pq = (p * np.log(p / q)).sum()
        kl_qp = (q * np.log(q / p)).sum()
        expected = (kl_pq + kl_qp) / 2  # second pair contributes 0
        assert symmetric_kl_topics(a, b) == pytest.approx(expected, abs=1e-12)

    def test_rejects_zeros(self):
        a = np.array([[1.0, 0.0]])
        with pytest.raises(HardLdaError):
            symmetric_kl_topics(a, a)


class TestEvalReport:
    def test_keyvalue_and_csv(self):
        report = EvalReport(nmi=0.5, objective=12.0)
        report.omitted["hard_ll"] = "needs --heldout"
        kv = report.to_keyvalue()
        assert "nmi=0.5" in kv
        assert "omitted.hard_ll=needs --heldout" in kv
        csv = report.to_csv().splitlines()
        assert csv[0] == "nmi,objective"
        assert csv[1] == "0.5,12.0"

    def test_psi_from_cgs_sample_usable(self, rng):
        # matrices from the sampler interoperate with the metric suite
        from hardlda.baselines import CgsSample

        counts = rng.integers(0, 5, size=(3, 6))
        sample = CgsSample(np.zeros(1, np.int32), counts, 0)
        psi = estimate_psi_from_sample(sample, 0.2)
        assert topic_l1_error(psi, psi) == pytest.approx(0.0, abs=1e-12)
