"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
(run with ``pytest -s tests/test_acceptance.py`` to see the lines live).

Desk-scale protocol. Shared corpora: three seeded synthetic corpora with
M=1000, K=20, V=2000, alpha=0.04, beta=0.05, doc_len=150, swept over
lambda in {6..12} for all three combinatorial fitters. Fits use
gamma=1e-3 (near the unsmoothed objective; smoothing only keeps
distances finite). The reconstruction-ratio check (criterion 3) runs on
an M=2000 corpus with the same generator parameters: both methods on one
corpus, at a size where topic estimates are not noise-dominated.
"""

import itertools
import math
import sys
import time

import numpy as np
import pytest

import hardlda.cli as cli
from conftest import random_corpus, random_state
from hardlda.baselines import CgsConfig, cgs_fit, collapsed_log_joint, estimate_psi_from_sample, kl_kmeans_fit
from hardlda.corpus import SplitSpec, corpus_from_token_lists, split_heldout
from hardlda.errors import DegenerateStateError
from hardlda.evaluation import (
    adjusted_rand,
    hard_predictive_ll,
    hungarian_align,
    nmi,
    soft_predictive_ll,
    symmetric_kl_topics,
    topic_l1_error,
)
from hardlda.model import (
    FitConfig,
    TopicMatrix,
    TopicState,
    compute_objective,
    update_topics,
    verify_lemma1_ratio,
)
from hardlda.synthgen import LdaGenSpec, generate_lda_corpus
from hardlda.sva import (
    basic_batch_fit,
    candidate_score_sequence,
    delta_move,
    mini_topic,
    ufl_assign_document_fast,
    ufl_assign_document_naive,
    word_fit,
    word_refine_fit,
)

SEEDS = (0, 1, 2)
LAMBDAS = (6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0)
SYNTH_A = dict(num_topics=20, vocab_size=2000, alpha=0.04, beta=0.05, doc_len=150)
FIT_GAMMA = 1e-3


def _report(criterion: int, ok: bool, detail: str):
    # visible with `pytest -s`; on failure the line lands in the assert
    line = f"ACCEPTANCE {criterion} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line, flush=True)
    assert ok, line


@pytest.fixture(scope="session")
def synth_a_runs():
    """Per seed: the corpus, truth, and the full lambda sweep of the three
    fitters (NMI and final objective per lambda)."""
    runs = {}
    for seed in SEEDS:
        t0 = time.perf_counter()
        corpus, truth = generate_lda_corpus(
            LdaGenSpec(num_docs=1000, seed=seed, **SYNTH_A)
        )
        zt = truth.flat_z()
        rec = {
            "corpus": corpus, "truth": truth, "zt": zt,
            "nmi": {"basic": {}, "word": {}, "word+refine": {}},
            "obj": {"basic": {}, "word": {}, "word+refine": {}},
            "word_obj_iter10": {},
            "wr_labels": None,
        }
        for lam in LAMBDAS:
            kw = dict(num_topics=20, lam=lam, seed=seed, gamma=FIT_GAMMA)
            basic = basic_batch_fit(corpus, FitConfig(schedule="basic", **kw))
            word = word_fit(corpus, FitConfig(schedule="word", **kw))
            wr = word_refine_fit(corpus, FitConfig(schedule="word+refine", **kw))
            for name, res in (("basic", basic), ("word", word), ("word+refine", wr)):
                rec["nmi"][name][lam] = nmi(res.state.z, zt)
                rec["obj"][name][lam] = res.final_objective
            rec["word_obj_iter10"][lam] = word.trace[
                min(10, len(word.trace) - 1)
            ].objective
            if lam == 12.0:
                rec["wr_labels"] = wr.state.z.copy()
        rec["elapsed"] = time.perf_counter() - t0
        runs[seed] = rec
    return runs


class TestCriterion1AlgorithmOrdering:
    def test_nmi_ordering_and_thresholds(self, synth_a_runs):
        details = []
        ok = True
        for seed, rec in synth_a_runs.items():
            wr = max(rec["nmi"]["word+refine"].values())
            word = max(rec["nmi"]["word"].values())
            basic = max(rec["nmi"]["basic"].values())
            seed_ok = (
                wr >= 0.75 and wr >= word >= basic and basic <= 0.3
                and rec["elapsed"] < 300.0
            )
            ok = ok and seed_ok
            details.append(
                f"seed {seed}: W+R={wr:.3f} Word={word:.3f} Basic={basic:.3f} "
                f"sweep={rec['elapsed']:.0f}s"
            )
        _report(1, ok, "; ".join(details))


class TestCriterion2CgsParity:
    def test_wr_within_tenth_of_cgs(self, synth_a_runs):
        details = []
        ok = True
        for seed, rec in synth_a_runs.items():
            samples = cgs_fit(
                rec["corpus"],
                CgsConfig(20, 0.04, 0.05, burnin=500, n_samples=5,
                          thinning=10, seed=seed),
            )
            cgs_best = max(nmi(s.labels, rec["zt"]) for s in samples)
            wr = max(rec["nmi"]["word+refine"].values())
            gap = abs(wr - cgs_best)
            ok = ok and gap <= 0.10
            details.append(f"seed {seed}: W+R={wr:.3f} CGS={cgs_best:.3f} gap={gap:.3f}")
        _report(2, ok, "; ".join(details))


class TestCriterion3TopicReconstruction:
    def test_wr_at_most_half_of_kmeans(self):
        corpus, truth = generate_lda_corpus(
            LdaGenSpec(num_docs=2000, seed=0, **SYNTH_A)
        )
        _, psi_km = kl_kmeans_fit(corpus, 20, seed=0)
        km_l1 = topic_l1_error(psi_km, truth.psi_true)
        wr_l1 = min(
            topic_l1_error(
                word_refine_fit(
                    corpus,
                    FitConfig(20, lam, seed=0, gamma=FIT_GAMMA),
                ).psi,
                truth.psi_true,
            )
            for lam in (8.0, 10.0, 12.0)
        )
        ok = wr_l1 <= 0.5 * km_l1
        _report(3, ok, f"W+R l1={wr_l1:.3f} vs KL-k-means l1={km_l1:.3f} (need <= half)")


class TestCriterion4ObjectiveOrdering:
    def test_final_objectives_ordered_at_lambda_10(self, synth_a_runs):
        details = []
        ok = True
        for seed, rec in synth_a_runs.items():
            wr = rec["obj"]["word+refine"][10.0]
            word = rec["obj"]["word"][10.0]
            basic = rec["obj"]["basic"][10.0]
            word_matched = rec["word_obj_iter10"][10.0]
            seed_ok = wr <= word <= basic and wr <= word_matched + 1e-8
            ok = ok and seed_ok
            details.append(
                f"seed {seed}: W+R={wr:.0f} <= Word={word:.0f} <= Basic={basic:.0f}"
            )
        _report(4, ok, "; ".join(details))


class TestCriterion5OracleEquivalences:
    def test_fast_ufl_equals_naive(self):
        rng = np.random.default_rng(501)
        for trial in range(200):
            v = int(rng.integers(3, 30))
            k = int(rng.integers(1, 9))
            n = int(rng.integers(1, 40))
            words = rng.integers(0, v, size=n).astype(np.int32)
            counts = rng.integers(0, 9, size=(k, v))
            counts[:, 0] += 1
            gamma = float(rng.choice([1e-3, 0.01, 0.5]))
            psi = TopicMatrix(
                (counts + gamma) / (counts.sum(axis=1, keepdims=True) + gamma * v),
                gamma,
            )
            lam = float(rng.uniform(0, 6))
            naive = ufl_assign_document_naive(words, psi, lam)
            fast = ufl_assign_document_fast(words, psi, lam, counts=counts)
            if not np.array_equal(naive, fast):
                _report(5, False, f"fast UFL != naive UFL on fuzz doc {trial}")
        _report(5, True, "fast UFL == naive UFL on 200 fuzzed documents (exact)")

    def test_delta_move_equals_recompute(self):
        rng = np.random.default_rng(502)
        worst = 0.0
        checked = 0
        while checked < 1000:
            corpus = random_corpus(rng, min_len=2)
            k = int(rng.integers(2, 6))
            state = random_state(rng, corpus, k, lam=float(rng.uniform(0, 4)))
            gamma = float(rng.choice([1e-3, 0.01, 0.5]))
            j = int(rng.integers(0, state.num_docs))
            used = state.used_topics(j)
            if used.size == 0:
                continue
            i = int(rng.choice(used))
            targets = [t for t in range(k) if t != i]
            if not targets:
                continue
            target = int(rng.choice(targets))
            mini = mini_topic(state, j, i)
            got = delta_move(state, mini, target, gamma)
            before = compute_objective(state, update_topics(state, gamma))
            after_state = state.copy()
            after_state.z[
                state.doc_offsets[j] + mini.positions
            ] = target
            after_state.set_labels(after_state.z)
            want = compute_objective(
                after_state, update_topics(after_state, gamma)
            ) - before
            worst = max(worst, abs(got - want))
            checked += 1
        ok = worst <= 1e-8
        _report(5, ok, f"incremental delta vs full recompute: 1000 moves, max |err|={worst:.2e}")

    def test_hungarian_equals_bruteforce(self):
        rng = np.random.default_rng(503)
        for trial in range(100):
            k = int(rng.integers(2, 8))
            cost = rng.random((k, k)) * 10
            rows, cols = __import__("scipy.optimize", fromlist=["linear_sum_assignment"]).linear_sum_assignment(cost)
            got = cost[rows, cols].sum()
            best = min(
                cost[np.arange(k), perm].sum()
                for perm in itertools.permutations(range(k))
            )
            if got != best:
                _report(5, False, f"hungarian != brute force on matrix {trial}")
        _report(5, True, "hungarian == brute force on 100 random cost matrices (exact)")


class TestCriterion6Lemma1:
    def test_ratio_near_one_and_monotone(self):
        rng = np.random.default_rng(601)
        worst = 0.0
        states = 0
        mono_ok = True
        while states < 20:
            corpus = random_corpus(rng, max_docs=20, max_len=120, min_len=10)
            k = int(rng.integers(2, 8))
            state = random_state(rng, corpus, k, lam=1.0)
            try:
                ratio = verify_lemma1_ratio(state, 1.0, 1e6)
            except DegenerateStateError:
                continue
            worst = max(worst, abs(ratio - 1.0))
            errs = [
                abs(verify_lemma1_ratio(state, 1.0, eta) - 1.0)
                for eta in (1e3, 1e4, 1e5, 1e6)
            ]
            mono_ok = mono_ok and all(a > b for a, b in zip(errs, errs[1:]))
            states += 1
        ok = worst <= 1e-3 and mono_ok
        _report(
            6, ok,
            f"20 states: max |ratio-1| at eta=1e6 is {worst:.2e}; "
            f"|ratio-1| strictly decreasing over eta grid: {mono_ok}",
        )


class TestCriterion7Unimodality:
    def test_no_decrease_after_first_increase(self):
        rng = np.random.default_rng(701)
        violations = 0
        for _ in range(10_000):
            n = int(rng.integers(1, 60))
            counts = np.sort(rng.integers(1, 60, size=n))[::-1]
            total = counts.sum() + int(rng.integers(0, 200))
            dists = np.log(total) - np.log(counts)
            scores = candidate_score_sequence(dists, float(rng.uniform(0, 12)))
            increased = False
            for t in range(1, len(scores)):
                if increased and scores[t] < scores[t - 1]:
                    violations += 1
                    break
                if scores[t] > scores[t - 1]:
                    increased = True
        _report(7, violations == 0, f"10^4 random scans, {violations} violations")


class TestCriterion8CgsCorrectness:
    def test_tiny_corpus_matches_enumerated_posterior(self):
        corpus = corpus_from_token_lists([[0, 1, 2], [2, 1, 1]], 3)
        alpha, beta, k = 1.0, 0.8, 2
        words = corpus.flat_words()
        offsets = corpus.doc_offsets()
        log_p = []
        keys = list(itertools.product(range(k), repeat=6))
        for z in keys:
            z = np.array(z, dtype=np.int32)
            doc_topic = np.zeros((2, k), dtype=np.int64)
            topic_word = np.zeros((k, 3), dtype=np.int64)
            doc_ids = np.repeat([0, 1], np.diff(offsets))
            np.add.at(doc_topic, (doc_ids, z), 1)
            np.add.at(topic_word, (z, words), 1)
            log_p.append(collapsed_log_joint(doc_topic, topic_word, alpha, beta))
        log_p = np.array(log_p)
        exact = np.exp(log_p - log_p.max())
        exact /= exact.sum()
        n_sweeps = 100_000
        samples = cgs_fit(
            corpus,
            CgsConfig(k, alpha, beta, burnin=200, n_samples=n_sweeps,
                      thinning=1, seed=801),
        )
        counts = dict.fromkeys(keys, 0)
        for s in samples:
            counts[tuple(s.labels)] += 1
        empirical = np.array([counts[key] for key in keys]) / n_sweeps
        tv = 0.5 * np.abs(empirical - exact).sum()
        _report(8, tv <= 0.02, f"sampler vs enumerated posterior: TV={tv:.4f} (<= 0.02)")

    def test_warm_start_not_slower_than_random(self, synth_a_runs):
        def sweeps_to(corpus, zt, seed, init, cap=200):
            samples = cgs_fit(
                corpus,
                CgsConfig(20, 0.04, 0.05, burnin=0, n_samples=cap,
                          thinning=1, seed=seed, init_labels=init),
            )
            for s in samples:
                if nmi(s.labels, zt) >= 0.7:
                    return s.index + 1
            return cap + 1

        wins = 0
        details = []
        for seed in range(5):
            if seed in synth_a_runs:
                rec = synth_a_runs[seed]
                corpus, zt = rec["corpus"], rec["zt"]
                warm_labels = rec["wr_labels"]
            else:
                corpus, truth = generate_lda_corpus(
                    LdaGenSpec(num_docs=1000, seed=seed, **SYNTH_A)
                )
                zt = truth.flat_z()
                warm_labels = word_refine_fit(
                    corpus, FitConfig(20, 12.0, seed=seed, gamma=FIT_GAMMA)
                ).state.z
            warm = sweeps_to(corpus, zt, seed, warm_labels)
            rand = sweeps_to(corpus, zt, seed, None)
            wins += int(warm <= rand)
            details.append(f"seed {seed}: warm={warm} rand={rand}")
        _report(8, wins >= 4, f"warm start wins {wins}/5; " + "; ".join(details))


class TestCriterion9HardPredictiveLL:
    def test_wr_within_margin_of_cgs(self):
        corpus, _ = generate_lda_corpus(
            LdaGenSpec(num_docs=2100, seed=11, **SYNTH_A)
        )
        train, heldout = split_heldout(corpus, SplitSpec(100, seed=0))
        wr = word_refine_fit(train, FitConfig(20, 10.0, seed=0, gamma=FIT_GAMMA))
        psi_wr = update_topics(wr.state, 0.05)
        samples = cgs_fit(
            train,
            CgsConfig(20, 0.04, 0.05, burnin=500, n_samples=5, thinning=10, seed=0),
        )
        psi_cgs = estimate_psi_from_sample(samples[-1], 0.05)
        ll_wr = hard_predictive_ll(psi_wr, heldout, 10.0)
        ll_cgs = hard_predictive_ll(psi_cgs, heldout, 10.0)
        ok = ll_wr >= ll_cgs - 0.05
        _report(
            9, ok,
            f"hard LL: W+R={ll_wr:.4f} CGS={ll_cgs:.4f} "
            f"(need W+R >= CGS - 0.05 nats/token)",
        )


class TestCriterion10Complexity:
    def test_tokens_examined_scaling(self):
        works = []
        for m in (100, 200, 400):  # N = 1e4, 2e4, 4e4
            corpus, _ = generate_lda_corpus(
                LdaGenSpec(m, 10, 500, 0.05, 0.05, 100, seed=7)
            )
            res = word_fit(
                corpus,
                FitConfig(10, 5.0, gamma=FIT_GAMMA, seed=0, max_iters=4,
                          schedule="word"),
            )
            works.append(res.trace[-1].work)
        r1 = works[1] / works[0]
        r2 = works[2] / works[1]
        ok = r1 <= 2.5 and r2 <= 2.5
        _report(
            10, ok,
            f"tokens examined per Word iteration at N=1e4,2e4,4e4: {works} "
            f"(doubling ratios {r1:.2f}, {r2:.2f} <= 2.5)",
        )

    def test_bench_table_under_budget(self, tmp_path):
        out = tmp_path / "bench.csv"
        t0 = time.perf_counter()
        rc = cli.main([
            "bench", "--sizes", "150,300", "--topics", "10", "--vocab", "500",
            "--alpha", "0.05", "--beta", "0.05", "--doc-len", "60",
            "--lambda", "5", "--cgs-alpha", "0.05", "--cgs-beta", "0.05",
            "--out", str(out),
        ])
        elapsed = time.perf_counter() - t0
        lines = out.read_text().strip().splitlines()
        ok = rc == 0 and elapsed < 180 and len(lines) == 3
        _report(10, ok, f"cmd_bench wrote {len(lines) - 1} rows in {elapsed:.0f}s (< 180s)")


class TestCriterion11MetricUnitSuite:
    def test_trivial_examples_exact(self):
        checks = []
        checks.append(nmi([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0)
        checks.append(nmi([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0)
        checks.append(nmi([0, 0, 1, 1], [0, 1, 0, 1]) == 0.0)
        checks.append(adjusted_rand([0, 1, 2], [5, 0, 5]) <= 1.0)
        checks.append(adjusted_rand([0, 0, 1, 1], [3, 3, 9, 9]) == 1.0)
        checks.append(
            abs(adjusted_rand([0, 0, 1, 1], [0, 1, 0, 1]) - (-0.5)) <= 1e-12
        )
        rng = np.random.default_rng(111)
        mat = rng.random((4, 6))
        mat /= mat.sum(axis=1, keepdims=True)
        perm, cost = hungarian_align(mat, mat)
        checks.append(perm.tolist() == [0, 1, 2, 3] and cost == 0.0)
        swapped = mat[[1, 0, 3, 2]]
        _, cost_sw = hungarian_align(swapped, mat)
        checks.append(cost_sw == 0.0)
        checks.append(topic_l1_error(mat, mat) == 0.0)
        other = rng.random((4, 6))
        other /= other.sum(axis=1, keepdims=True)
        checks.append(topic_l1_error(mat, other) <= 2.0)
        checks.append(topic_l1_error(mat[[3, 2, 1, 0]], mat) == 0.0)

        heldout = corpus_from_token_lists([[0, 3, 2], [1]], 5)
        uniform = TopicMatrix(np.full((3, 5), 0.2))
        checks.append(
            abs(hard_predictive_ll(uniform, heldout, 2.0) + math.log(5)) < 1e-12
        )
        eps = 1e-12
        delta = TopicMatrix(np.array([[1 - eps, eps], [eps, 1 - eps]]))
        matched = corpus_from_token_lists([[0, 0], [1, 1]], 2)
        checks.append(abs(hard_predictive_ll(delta, matched, 0.0)) < 1e-9)
        single = rng.random((1, 5))
        single /= single.sum()
        c = corpus_from_token_lists([[0, 2], [4]], 5)
        want = float(np.log(single[0, c.flat_words()]).mean())
        checks.append(
            abs(soft_predictive_ll(TopicMatrix(single), c, 0.5, sweeps=3) - want)
            < 1e-12
        )
        checks.append(
            abs(soft_predictive_ll(TopicMatrix(np.full((2, 5), 0.2)), c, 1.0,
                                   sweeps=3) + math.log(5)) < 1e-12
        )
        pos = mat * 0.9 + 0.01
        pos /= pos.sum(axis=1, keepdims=True)
        checks.append(symmetric_kl_topics(pos, pos) == 0.0)
        other_pos = other * 0.9 + 0.01
        other_pos /= other_pos.sum(axis=1, keepdims=True)
        checks.append(
            abs(symmetric_kl_topics(pos, other_pos)
                - symmetric_kl_topics(other_pos, pos)) < 1e-10
        )
        ok = all(checks)
        _report(11, ok, f"{sum(checks)}/{len(checks)} metric unit checks exact")
