"""Shared hard-LDA state: count statistics, the smoothed topic matrix,
token-topic distances, the penalized objective, and a numeric check of the
asymptotic Dirichlet-multinomial penalty.

The objective being minimized over (labels z, topics psi) is

    sum_j sum_t -log psi[z_jt][w_jt]  +  lam * sum_j K_j+

where K_j+ is the number of distinct topics used by document j. An empty
document contributes 0 to both terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .errors import DegenerateStateError, DegenerateTopicError

COUNT_DTYPE = np.int64
LABEL_DTYPE = np.int32

#: Sentinel for a token sitting on a zero-probability word (gamma = 0 only).
INFINITE_DISTANCE = math.inf


@dataclass(frozen=True)
class TopicMatrix:
    """Row-stochastic K x V matrix of per-topic word probabilities."""

    psi: np.ndarray
    gamma: float = 0.0

    def __post_init__(self):
        psi = np.ascontiguousarray(self.psi, dtype=np.float64)
        object.__setattr__(self, "psi", psi)
        if psi.ndim != 2:
            raise ValueError("psi must be a K x V matrix")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")

    @property
    def num_topics(self) -> int:
        return self.psi.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.psi.shape[1]

    def neg_log(self) -> np.ndarray:
        """Distance matrix -log psi, with inf where psi is exactly 0."""
        with np.errstate(divide="ignore"):
            return -np.log(self.psi)


class TopicState:
    """Per-token labels plus every derived count statistic.

    Counts are redundant with the labels; ``check_consistent`` recomputes
    them from scratch and is used by tests and debug assertions.
    """

    def __init__(self, words, doc_offsets, z, num_topics, lam, vocab_size):
        self.words = np.ascontiguousarray(words, dtype=LABEL_DTYPE)
        self.doc_offsets = np.ascontiguousarray(doc_offsets, dtype=np.int64)
        self.z = np.ascontiguousarray(z, dtype=LABEL_DTYPE)
        self.num_topics = int(num_topics)
        self.lam = float(lam)
        self.vocab_size = int(vocab_size)
        if self.z.shape != self.words.shape:
            raise ValueError("labels and words must have the same length")
        if self.num_topics < 1:
            raise ValueError("num_topics must be >= 1")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        self._rebuild_counts()

    @classmethod
    def from_labels(cls, corpus: Corpus, z, num_topics: int, lam: float) -> "TopicState":
        return cls(
            corpus.flat_words(),
            corpus.doc_offsets(),
            z,
            num_topics,
            lam,
            corpus.vocab_size,
        )

    @property
    def num_docs(self) -> int:
        return self.doc_offsets.shape[0] - 1

    @property
    def num_tokens(self) -> int:
        return self.words.shape[0]

    def _rebuild_counts(self):
        k, v, m = self.num_topics, self.vocab_size, self.num_docs
        self.topic_word = np.zeros((k, v), dtype=COUNT_DTYPE)
        np.add.at(self.topic_word, (self.z, self.words), 1)
        self.topic_total = self.topic_word.sum(axis=1)
        self.doc_topic = np.zeros((m, k), dtype=COUNT_DTYPE)
        doc_ids = np.repeat(
            np.arange(m, dtype=np.int64), np.diff(self.doc_offsets)
        )
        np.add.at(self.doc_topic, (doc_ids, self.z), 1)

    def set_labels(self, z) -> None:
        """Replace all labels and rebuild every count from scratch."""
        z = np.ascontiguousarray(z, dtype=LABEL_DTYPE)
        if z.shape != self.words.shape:
            raise ValueError("labels and words must have the same length")
        self.z = z
        self._rebuild_counts()

    def doc_slice(self, j: int) -> slice:
        return slice(int(self.doc_offsets[j]), int(self.doc_offsets[j + 1]))

    def used_topics(self, j: int) -> np.ndarray:
        """T_j: ascending topic ids with at least one token in document j."""
        return np.nonzero(self.doc_topic[j])[0]

    def topics_per_doc(self) -> np.ndarray:
        """K_j+ for every document, shape (M,)."""
        return np.count_nonzero(self.doc_topic, axis=1)

    def check_consistent(self) -> bool:
        """Full recount from labels; True iff stored counts match exactly."""
        fresh = TopicState(
            self.words, self.doc_offsets, self.z, self.num_topics, self.lam,
            self.vocab_size,
        )
        return (
            np.array_equal(fresh.topic_word, self.topic_word)
            and np.array_equal(fresh.topic_total, self.topic_total)
            and np.array_equal(fresh.doc_topic, self.doc_topic)
        )

    def copy(self) -> "TopicState":
        other = TopicState.__new__(TopicState)
        other.words = self.words
        other.doc_offsets = self.doc_offsets
        other.z = self.z.copy()
        other.num_topics = self.num_topics
        other.lam = self.lam
        other.vocab_size = self.vocab_size
        other.topic_word = self.topic_word.copy()
        other.topic_total = self.topic_total.copy()
        other.doc_topic = self.doc_topic.copy()
        return other


@dataclass(frozen=True)
class FitConfig:
    """Knobs shared by the three combinatorial fitters.

    ``max_iters=None`` means the schedule default (20 for basic and word,
    10 for word+refine). ``tol`` is a relative objective-change threshold.
    """

    num_topics: int
    lam: float
    max_iters: int | None = None
    seed: int = 0
    gamma: float = 0.01
    tol: float = 1e-12
    schedule: str = "word+refine"
    threads: int = 1

    def __post_init__(self):
        if self.num_topics < 1:
            raise ValueError("num_topics must be >= 1")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.schedule not in ("basic", "word", "word+refine"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def resolved_iters(self) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return 10 if self.schedule == "word+refine" else 20


def smoothed_rows(topic_word: np.ndarray, gamma: float) -> np.ndarray:
    """(c + gamma) / (n + gamma*V) for every row; uniform rows for empty
    topics when gamma > 0."""
    topic_word = np.asarray(topic_word, dtype=np.float64)
    totals = topic_word.sum(axis=1)
    v = topic_word.shape[1]
    denom = totals + gamma * v
    if np.any(denom == 0):
        raise DegenerateTopicError(
            "empty topic with gamma = 0 cannot be normalized"
        )
    return (topic_word + gamma) / denom[:, None]


def update_topics(state: TopicState, gamma: float) -> TopicMatrix:
    """Closed-form topic update: each row is the (smoothed) mean of the
    word counts assigned to it."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    return TopicMatrix(smoothed_rows(state.topic_word, gamma), gamma)


def token_topic_distance(psi: TopicMatrix, word: int, topic: int) -> float:
    """KL distance from a one-hot word to a topic row: -log psi[topic][word]."""
    p = psi.psi[topic, word]
    if p <= 0.0:
        return INFINITE_DISTANCE
    return -math.log(p)


def compute_objective(state: TopicState, psi: TopicMatrix) -> float:
    """Objective value for the current labels against the given topics."""
    probs = psi.psi[state.z, state.words]
    if np.any(probs <= 0.0):
        return INFINITE_DISTANCE
    token_cost = float(-np.log(probs).sum())
    penalty = state.lam * float(state.topics_per_doc().sum())
    return token_cost + penalty


def dirichlet_multinomial_neg_log(
    doc_topic_counts, num_topics: int, alpha: float | None = None,
    *, log_alpha: float | None = None,
) -> float:
    """Exact -log p(Z | alpha) of the symmetric Dirichlet-multinomial.

    Evaluated in summation form: per document,
    sum_{n=0}^{N_j-1} log(alpha*K + n) - sum_i sum_{n=0}^{n_ji-1} log(alpha + n).
    Only the n = 0 terms involve log(alpha), so ``log_alpha`` may be passed
    directly when alpha itself underflows (e.g. exp(-1e6)).
    """
    if (alpha is None) == (log_alpha is None):
        raise ValueError("pass exactly one of alpha or log_alpha")
    if alpha is not None:
        if alpha <= 0:
            raise ValueError("alpha must be > 0")
        log_alpha = math.log(alpha)
        a = alpha
    else:
        a = math.exp(log_alpha)  # may underflow to 0; only used in log1p terms
    counts = np.asarray(doc_topic_counts, dtype=np.int64)
    if counts.ndim != 2 or counts.shape[1] != num_topics:
        raise ValueError("doc_topic_counts must be (M, K)")
    log_k = math.log(num_topics)
    ak = a * num_topics

    total = 0.0
    for row in counts:
        n_j = int(row.sum())
        if n_j == 0:
            continue
        # sum_{n=0}^{N_j-1} log(alpha*K + n); n = 0 -> log(alpha) + log(K)
        total += log_alpha + log_k
        if n_j > 1:
            ns = np.arange(1, n_j, dtype=np.float64)
            total += float(np.sum(np.log(ns) + np.log1p(ak / ns)))
        for n_ji in row:
            n_ji = int(n_ji)
            if n_ji == 0:
                continue
            total -= log_alpha
            if n_ji > 1:
                ns = np.arange(1, n_ji, dtype=np.float64)
                total -= float(np.sum(np.log(ns) + np.log1p(a / ns)))
    return total


def verify_lemma1_ratio(state: TopicState, lam: float, eta: float) -> float:
    """Ratio of the exact Dirichlet-multinomial negative log-likelihood at
    alpha = exp(-lam*eta) to its asymptote eta*lam*sum_j(K_j+ - 1).

    Approaches 1 as eta grows; the non-divergent remainder is
    O(sum_j log N_j!).
    """
    if lam <= 0 or eta <= 0:
        raise ValueError("lam and eta must be > 0")
    k_plus = state.topics_per_doc()
    nonempty = k_plus > 0
    denom = eta * lam * float((k_plus[nonempty] - 1).sum())
    if denom == 0.0:
        raise DegenerateStateError(
            "every document uses a single topic; asymptote is 0"
        )
    num = dirichlet_multinomial_neg_log(
        state.doc_topic, state.num_topics, log_alpha=-lam * eta
    )
    return num / denom


def write_matrix(path, matrix: np.ndarray) -> None:
    """Dense text matrix, one row per line, full-precision decimals."""
    matrix = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", encoding="ascii") as fh:
        for row in matrix:
            fh.write(" ".join(repr(float(x)) for x in row))
            fh.write("\n")


def read_matrix(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        rows = [
            np.array([float(x) for x in line.split()], dtype=np.float64)
            for line in fh
            if line.strip()
        ]
    if not rows:
        return np.empty((0, 0), dtype=np.float64)
    return np.vstack(rows)
