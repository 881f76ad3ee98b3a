"""Evaluation metrics: clustering agreement between token labelings, topic
reconstruction against a reference matrix, predictive log-likelihoods on
held-out documents, and topic-matrix divergence."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from ._jit import njit
from ._rand import make_state, next_uniform
from .corpus import Corpus
from .errors import DimensionMismatchError, EmptyHeldoutError, HardLdaError
from .model import TopicMatrix
from .sva import ufl_assign_document_fast


def _check_pair(a, b, min_len):
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(
            f"label sequences differ in length: {a.shape[0]} vs {b.shape[0]}"
        )
    if a.shape[0] < min_len:
        raise ValueError(f"need at least {min_len} labels")
    return a, b


def _contingency(a, b):
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def nmi(a, b) -> float:
    """Mutual information normalized by the arithmetic mean of the two
    label entropies. 1 when both partitions are the same constant
    partition, 0 when exactly one is constant."""
    a, b = _check_pair(a, b, 1)
    table = _contingency(a, b).astype(np.float64)
    n = table.sum()
    pij = table / n
    pa = pij.sum(axis=1)
    pb = pij.sum(axis=0)
    h_a = float(-np.sum(pa * np.log(pa, where=pa > 0, out=np.zeros_like(pa))))
    h_b = float(-np.sum(pb * np.log(pb, where=pb > 0, out=np.zeros_like(pb))))
    if h_a == 0.0 and h_b == 0.0:
        return 1.0
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    outer = pa[:, None] * pb[None, :]
    mask = pij > 0
    mi = float(np.sum(pij[mask] * np.log(pij[mask] / outer[mask])))
    return float(min(1.0, max(0.0, mi / ((h_a + h_b) / 2.0))))


def adjusted_rand(a, b) -> float:
    """Permutation-model adjusted Rand index from the contingency table."""
    a, b = _check_pair(a, b, 2)
    table = _contingency(a, b).astype(np.float64)
    n = table.sum()
    sum_pairs = float((table * (table - 1) / 2).sum())
    a_pairs = float((table.sum(axis=1) * (table.sum(axis=1) - 1) / 2).sum())
    b_pairs = float((table.sum(axis=0) * (table.sum(axis=0) - 1) / 2).sum())
    total_pairs = n * (n - 1) / 2
    expected = a_pairs * b_pairs / total_pairs
    max_index = (a_pairs + b_pairs) / 2.0
    if max_index == expected:
        # both constant or both all-singletons: identical partitions
        return 1.0
    return float((sum_pairs - expected) / (max_index - expected))


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, TopicMatrix):
        return x.psi
    return np.asarray(x, dtype=np.float64)


def hungarian_align(psi_hat, psi_ref) -> tuple[np.ndarray, float]:
    """Optimal matching of estimated rows to reference rows under l1 cost.

    Returns (perm, total_cost) where perm[i] is the psi_hat row matched to
    reference row i and total_cost = sum_i ||psi_hat[perm[i]] - psi_ref[i]||_1.
    """
    hat = _as_matrix(psi_hat)
    ref = _as_matrix(psi_ref)
    if hat.shape != ref.shape:
        raise DimensionMismatchError(
            f"matrix shapes differ: {hat.shape} vs {ref.shape}"
        )
    cost = np.abs(hat[:, None, :] - ref[None, :, :]).sum(axis=2)
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    perm = np.empty(hat.shape[0], dtype=np.int64)
    perm[cols] = rows
    return perm, float(cost[rows, cols].sum())


def topic_l1_error(psi_hat, psi_ref) -> float:
    """Mean per-topic l1 distance after optimal alignment."""
    _, total = hungarian_align(psi_hat, psi_ref)
    return total / _as_matrix(psi_ref).shape[0]


def symmetric_kl_topics(psi_a, psi_b) -> float:
    """Mean over l1-aligned topic pairs of KL(p||q) + KL(q||p). Both
    matrices must be strictly positive (pass smoothed estimates)."""
    a = _as_matrix(psi_a)
    b = _as_matrix(psi_b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"matrix shapes differ: {a.shape} vs {b.shape}")
    if np.any(a <= 0) or np.any(b <= 0):
        raise HardLdaError("symmetric KL needs strictly positive entries")
    perm, _ = hungarian_align(a, b)
    p = a[perm]
    q = b
    log_ratio = np.log(p / q)
    sym = np.sum(p * log_ratio, axis=1) + np.sum(-q * log_ratio, axis=1)
    return float(sym.mean())


def hard_predictive_ll(psi: TopicMatrix, heldout: Corpus, lam: float) -> float:
    """Mean per-token log psi[z][w] where z comes from one frozen greedy
    assignment pass per held-out document."""
    if np.any(psi.psi <= 0):
        raise HardLdaError("hard predictive LL needs strictly positive psi")
    n_total = heldout.num_tokens
    if heldout.num_docs == 0 or n_total == 0:
        raise EmptyHeldoutError("no held-out tokens")
    neg = psi.neg_log()
    total = 0.0
    for doc in heldout.docs:
        if doc.length == 0:
            continue
        labels = ufl_assign_document_fast(doc.tokens, psi, lam, neg_log_psi=neg)
        total += float(-neg[labels, doc.tokens].sum())
    return total / n_total


@njit
def _fold_in_doc(words, psi, alpha, sweeps, rng_state, theta_out):
    k = psi.shape[0]
    n = words.shape[0]
    n_topic = np.zeros(k, np.int64)
    z = np.empty(n, np.int32)
    weights = np.empty(k, np.float64)
    # sequential init from the running conditional
    for t in range(n):
        w = words[t]
        total = 0.0
        for i in range(k):
            wt = (n_topic[i] + alpha) * psi[i, w]
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
        n_topic[new] += 1
    for _ in range(sweeps):
        for t in range(n):
            w = words[t]
            old = z[t]
            n_topic[old] -= 1
            total = 0.0
            for i in range(k):
                wt = (n_topic[i] + alpha) * psi[i, w]
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
            n_topic[new] += 1
    denom = n + k * alpha
    for i in range(k):
        theta_out[i] = (n_topic[i] + alpha) / denom


def fold_in_thetas(
    psi: TopicMatrix, heldout: Corpus, alpha: float,
    sweeps: int = 200, seed: int = 0,
) -> list[np.ndarray]:
    """Per-document topic proportions from Gibbs fold-in with frozen
    topics: theta_i = (n_i + alpha) / (N_j + K*alpha) after the final
    sweep. Empty documents get the flat prior."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if np.any(psi.psi <= 0):
        raise HardLdaError("fold-in needs strictly positive psi")
    rng_state = make_state(seed, stream=3)
    k = psi.num_topics
    thetas = []
    with np.errstate(over="ignore"):
        for doc in heldout.docs:
            theta = np.full(k, 1.0 / k)
            if doc.length:
                _fold_in_doc(
                    doc.tokens, psi.psi, float(alpha), int(sweeps), rng_state,
                    theta,
                )
            thetas.append(theta)
    return thetas


def soft_predictive_ll(
    psi: TopicMatrix, heldout: Corpus, alpha: float,
    sweeps: int = 200, seed: int = 0,
) -> float:
    """Fold-in estimate: per document, Gibbs-sample token labels with the
    topics frozen, read theta from the final sweep, and score each token
    under the mixture sum_i theta_i psi[i][w]. Mean per token."""
    n_total = heldout.num_tokens
    if heldout.num_docs == 0 or n_total == 0:
        raise EmptyHeldoutError("no held-out tokens")
    thetas = fold_in_thetas(psi, heldout, alpha, sweeps, seed)
    total = 0.0
    for doc, theta in zip(heldout.docs, thetas):
        if doc.length == 0:
            continue
        mix = theta @ psi.psi[:, doc.tokens]
        total += float(np.log(mix).sum())
    return total / n_total


@dataclass
class EvalReport:
    """Metric bundle; fields are None when their inputs were absent, with
    the reason recorded in ``omitted``."""

    nmi: float | None = None
    arand: float | None = None
    mean_l1: float | None = None
    hard_ll: float | None = None
    soft_ll: float | None = None
    sym_kl: float | None = None
    objective: float | None = None
    per_lambda: tuple = ()
    timing: dict = field(default_factory=dict)
    omitted: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    _METRICS = ("nmi", "arand", "mean_l1", "hard_ll", "soft_ll", "sym_kl", "objective")

    def to_keyvalue(self) -> str:
        buf = io.StringIO()
        for name in self._METRICS:
            value = getattr(self, name)
            if value is not None:
                buf.write(f"{name}={value!r}\n")
        for name, reason in self.omitted.items():
            buf.write(f"omitted.{name}={reason}\n")
        for name, note in self.notes.items():
            buf.write(f"note.{name}={note}\n")
        for lam, metrics in self.per_lambda:
            for name, value in metrics.items():
                buf.write(f"lambda.{lam}.{name}={value!r}\n")
        for phase, seconds in self.timing.items():
            buf.write(f"seconds.{phase}={seconds:.6f}\n")
        return buf.getvalue()

    def to_csv(self) -> str:
        present = [n for n in self._METRICS if getattr(self, n) is not None]
        header = ",".join(present)
        row = ",".join(repr(getattr(self, n)) for n in present)
        return header + "\n" + row + "\n"
