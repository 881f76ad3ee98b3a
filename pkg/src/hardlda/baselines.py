"""Probabilistic comparison methods: collapsed Gibbs sampling for LDA and
KL-divergence k-means over documents (one topic per document)."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from ._jit import njit
from ._rand import make_state, next_uniform
from .corpus import Corpus
from .errors import DimensionMismatchError
from .model import (
    COUNT_DTYPE,
    LABEL_DTYPE,
    TopicMatrix,
    smoothed_rows,
)
from .trace import TraceRecord


@dataclass(frozen=True)
class CgsConfig:
    """Chain settings. Desk-scale defaults; the full-scale reference
    settings are burnin=3000, thinning=30, n_samples=10."""

    num_topics: int
    alpha: float
    beta: float
    burnin: int = 500
    n_samples: int = 5
    thinning: int = 10
    seed: int = 0
    init_labels: np.ndarray | None = None

    def __post_init__(self):
        if self.num_topics < 1:
            raise ValueError("num_topics must be >= 1")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be > 0")
        if self.burnin < 0:
            raise ValueError("burnin must be >= 0")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")


@dataclass(frozen=True)
class CgsSample:
    labels: np.ndarray
    topic_word: np.ndarray
    index: int


@njit
def _cgs_sweeps(words, offsets, z, doc_topic, topic_word, topic_total,
                alpha, beta, n_sweeps, rng_state):
    """Full Gibbs sweeps in document-major token order; one inverse-CDF
    draw per token from the unnormalized conditional."""
    m = offsets.shape[0] - 1
    k = topic_word.shape[0]
    beta_v = beta * topic_word.shape[1]
    weights = np.empty(k, np.float64)
    for _ in range(n_sweeps):
        for j in range(m):
            for t in range(offsets[j], offsets[j + 1]):
                w = words[t]
                old = z[t]
                doc_topic[j, old] -= 1
                topic_word[old, w] -= 1
                topic_total[old] -= 1
                total = 0.0
                for i in range(k):
                    wt = (
                        (doc_topic[j, i] + alpha)
                        * (topic_word[i, w] + beta)
                        / (topic_total[i] + beta_v)
                    )
                    weights[i] = wt
                    total += wt
                r = next_uniform(rng_state) * total
                acc = 0.0
                new = k - 1
                for i in range(k):
                    acc += weights[i]
                    if r < acc:
                        new = i
                        break
                z[t] = new
                doc_topic[j, new] += 1
                topic_word[new, w] += 1
                topic_total[new] += 1


def collapsed_log_joint(doc_topic, topic_word, alpha: float, beta: float) -> float:
    """log p(W, Z | alpha, beta) with theta and psi integrated out."""
    doc_topic = np.asarray(doc_topic, dtype=np.float64)
    topic_word = np.asarray(topic_word, dtype=np.float64)
    m, k = doc_topic.shape
    v = topic_word.shape[1]
    lg = math.lgamma
    doc_tot = doc_topic.sum(axis=1)
    topic_tot = topic_word.sum(axis=1)
    from scipy.special import gammaln

    out = m * (lg(alpha * k) - k * lg(alpha))
    out -= float(gammaln(doc_tot + alpha * k).sum())
    out += float(gammaln(doc_topic + alpha).sum())
    out += k * (lg(beta * v) - v * lg(beta))
    out -= float(gammaln(topic_tot + beta * v).sum())
    out += float(gammaln(topic_word + beta).sum())
    return out


def cgs_fit(
    corpus: Corpus, config: CgsConfig, *, return_trace: bool = False,
    debug_recount: bool = False,
):
    """Run one chain; after burn-in, record a sample every ``thinning``
    sweeps until ``n_samples`` are collected. Deterministic given the seed."""
    words = corpus.flat_words()
    offsets = corpus.doc_offsets()
    n = words.shape[0]
    k = config.num_topics
    if config.init_labels is not None:
        z = np.ascontiguousarray(config.init_labels, dtype=LABEL_DTYPE).copy()
        if z.shape[0] != n:
            raise DimensionMismatchError(
                f"init labels have {z.shape[0]} entries, corpus has {n} tokens"
            )
        if n and (z.min() < 0 or z.max() >= k):
            raise ValueError("init labels outside topic range")
    else:
        z = np.random.default_rng(config.seed).integers(
            0, k, size=n, dtype=LABEL_DTYPE
        )

    doc_topic = np.zeros((corpus.num_docs, k), dtype=COUNT_DTYPE)
    topic_word = np.zeros((k, corpus.vocab_size), dtype=COUNT_DTYPE)
    doc_ids = np.repeat(np.arange(corpus.num_docs, dtype=np.int64), np.diff(offsets))
    np.add.at(doc_topic, (doc_ids, z), 1)
    np.add.at(topic_word, (z, words), 1)
    topic_total = topic_word.sum(axis=1)

    rng_state = make_state(config.seed, stream=2)
    samples: list[CgsSample] = []
    trace: list[TraceRecord] = []

    def run_block(sweeps):
        with np.errstate(over="ignore"):
            _cgs_sweeps(
                words, offsets, z, doc_topic, topic_word, topic_total,
                float(config.alpha), float(config.beta), sweeps, rng_state,
            )
        if debug_recount:
            tw = np.zeros_like(topic_word)
            np.add.at(tw, (z, words), 1)
            if not np.array_equal(tw, topic_word):
                raise AssertionError("CGS bookkeeping drifted from labels")

    t0 = time.perf_counter()
    if config.burnin:
        run_block(config.burnin)
    prev = z.copy()
    for s in range(config.n_samples):
        run_block(config.thinning)
        samples.append(CgsSample(z.copy(), topic_word.copy(), s))
        if return_trace:
            energy = -collapsed_log_joint(
                doc_topic, topic_word, config.alpha, config.beta
            )
            changed = int(np.count_nonzero(z != prev))
            trace.append(
                TraceRecord(
                    config.burnin + (s + 1) * config.thinning,
                    "cgs",
                    energy,
                    changed,
                    time.perf_counter() - t0,
                )
            )
            prev = z.copy()
            t0 = time.perf_counter()
    if return_trace:
        return samples, trace
    return samples


def estimate_psi_from_sample(sample: CgsSample, beta: float) -> TopicMatrix:
    """Standard posterior point estimate (c + beta) / (n + beta*V)."""
    return TopicMatrix(smoothed_rows(sample.topic_word, beta), beta)


def kl_kmeans_fit(
    corpus: Corpus, num_topics: int, seed: int = 0, max_iters: int = 50,
    gamma: float = 0.01, *, return_trace: bool = False,
):
    """Bregman k-means on documents: each document joins the topic row
    minimizing its total token KL cost; rows are re-estimated as smoothed
    means of member documents' counts. Empty clusters are re-seeded with
    the worst-fitting document."""
    m, v = corpus.num_docs, corpus.vocab_size
    if num_topics < 1:
        raise ValueError("num_topics must be >= 1")
    if m < num_topics:
        raise ValueError(f"need at least {num_topics} documents, have {m}")
    counts = scipy.sparse.csr_matrix(
        (
            np.ones(corpus.num_tokens, dtype=np.float64),
            (
                np.repeat(np.arange(m, dtype=np.int64), np.diff(corpus.doc_offsets())),
                corpus.flat_words(),
            ),
        ),
        shape=(m, v),
    )
    rng = np.random.default_rng(seed)
    seeds = rng.choice(m, size=num_topics, replace=False)
    agg = np.asarray(counts[seeds].todense(), dtype=np.float64)
    psi = smoothed_rows(agg, gamma)

    labels = np.full(m, -1, dtype=LABEL_DTYPE)
    trace: list[TraceRecord] = []
    for it in range(1, max_iters + 1):
        t0 = time.perf_counter()
        scores = counts.dot(-np.log(psi).T)
        new_labels = np.argmin(scores, axis=1).astype(LABEL_DTYPE)
        assigned_cost = scores[np.arange(m), new_labels].copy()
        present = np.bincount(new_labels, minlength=num_topics)
        for empty in np.nonzero(present == 0)[0]:
            worst = int(np.argmax(assigned_cost))
            new_labels[worst] = empty
            assigned_cost[worst] = -np.inf
        changed = int(np.count_nonzero(new_labels != labels))
        labels = new_labels
        member = scipy.sparse.csr_matrix(
            (np.ones(m), (labels, np.arange(m))), shape=(num_topics, m)
        )
        agg = np.asarray(member.dot(counts).todense(), dtype=np.float64)
        psi = smoothed_rows(agg, gamma)
        objective = float(
            counts.dot(-np.log(psi).T)[np.arange(m), labels].sum()
        )
        trace.append(
            TraceRecord(it, "kmeans", objective, changed, time.perf_counter() - t0)
        )
        if changed == 0:
            break
    matrix = TopicMatrix(psi, gamma)
    if return_trace:
        return labels, matrix, trace
    return labels, matrix


def expand_doc_labels(corpus: Corpus, doc_labels) -> np.ndarray:
    """Token-level labels from per-document labels (k-means export)."""
    doc_labels = np.asarray(doc_labels)
    return np.repeat(doc_labels, np.diff(corpus.doc_offsets())).astype(LABEL_DTYPE)
