"""The three combinatorial optimizers: basic batch assignment, greedy
facility-location word assignment (naive reference and fast O(NK)
implementation), and incremental mini-topic refinement, plus fit drivers.

The facility-location view: within one document, topics are facilities
with opening cost lam and tokens are clients at distance -log psi[i][w].
Each greedy round opens the (topic, token set) pair with the best
per-token score and marks those tokens; opened topics have zero cost in
later rounds.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._jit import njit
from .corpus import Corpus
from .errors import DimensionMismatchError
from .model import (
    LABEL_DTYPE,
    FitConfig,
    TopicMatrix,
    TopicState,
    compute_objective,
    update_topics,
)
from .trace import TraceRecord

_NIL = -1


@dataclass(frozen=True)
class MiniTopic:
    """All tokens of one document sharing one topic label; positions are
    within-document token indices."""

    doc: int
    topic: int
    positions: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "positions", np.asarray(self.positions, dtype=np.int64)
        )
        if self.positions.size == 0:
            raise ValueError("a mini-topic cannot be empty")


@dataclass
class FitResult:
    state: TopicState
    psi: TopicMatrix
    trace: list[TraceRecord] = field(default_factory=list)

    @property
    def final_objective(self) -> float:
        return self.trace[-1].objective

    def labels_per_doc(self) -> list[np.ndarray]:
        off = self.state.doc_offsets
        return [
            self.state.z[off[j]: off[j + 1]]
            for j in range(self.state.num_docs)
        ]


def init_random(corpus: Corpus, num_topics: int, seed: int, lam: float = 0.0) -> TopicState:
    """Uniform random token labels from a seeded PRNG."""
    if num_topics < 1:
        raise ValueError("num_topics must be >= 1")
    rng = np.random.default_rng(seed)
    z = rng.integers(0, num_topics, size=corpus.num_tokens, dtype=LABEL_DTYPE)
    return TopicState.from_labels(corpus, z, num_topics, lam)


# ---------------------------------------------------------------------------
# Basic batch assignment
# ---------------------------------------------------------------------------

def basic_assign_step(state: TopicState, psi: TopicMatrix) -> tuple[np.ndarray, int]:
    """One batch pass: every token to its argmin penalized distance,
    with the 'topic unused in this document' penalty frozen at the start
    of the pass. Counts are not touched; the caller rebuilds them."""
    neg = psi.neg_log()
    new_z = state.z.copy()
    off = state.doc_offsets
    lam = state.lam
    for j in range(state.num_docs):
        lo, hi = int(off[j]), int(off[j + 1])
        if hi == lo:
            continue
        w = state.words[lo:hi]
        dist = neg[:, w].T.copy()
        dist[:, state.doc_topic[j] == 0] += lam
        new_z[lo:hi] = np.argmin(dist, axis=1).astype(LABEL_DTYPE)
    changed = int(np.count_nonzero(new_z != state.z))
    return new_z, changed


def basic_batch_fit(
    corpus: Corpus, config: FitConfig, init_labels=None
) -> FitResult:
    """Alternate batch assignment and topic re-estimation to a local optimum."""
    state = _initial_state(corpus, config, init_labels)
    psi = update_topics(state, config.gamma)
    trace = [TraceRecord(0, "init", compute_objective(state, psi), 0, 0.0)]
    for it in range(1, config.resolved_iters() + 1):
        t0 = time.perf_counter()
        new_z, changed = basic_assign_step(state, psi)
        state.set_labels(new_z)
        psi = update_topics(state, config.gamma)
        obj = compute_objective(state, psi)
        trace.append(
            TraceRecord(it, "basic", obj, changed, time.perf_counter() - t0)
        )
        if changed == 0 or _converged(trace[-2].objective, obj, config.tol):
            break
    return FitResult(state, psi, trace)


def _initial_state(corpus, config, init_labels) -> TopicState:
    if init_labels is None:
        return init_random(corpus, config.num_topics, config.seed, config.lam)
    z = np.asarray(init_labels, dtype=LABEL_DTYPE)
    if z.shape[0] != corpus.num_tokens:
        raise DimensionMismatchError(
            f"init labels have {z.shape[0]} entries, corpus has "
            f"{corpus.num_tokens} tokens"
        )
    return TopicState.from_labels(corpus, z, config.num_topics, config.lam)


def _converged(prev: float, cur: float, tol: float) -> bool:
    return abs(prev - cur) <= tol * max(1.0, abs(prev))


# ---------------------------------------------------------------------------
# Greedy facility-location word assignment
# ---------------------------------------------------------------------------

def candidate_score_sequence(sorted_distances, open_cost: float) -> np.ndarray:
    """Scores s_t = (f + sum of t nearest distances) / t for t = 1..n.

    Unimodal in t for any non-decreasing distance sequence: once it stops
    decreasing it never decreases again (debug instrumentation relies on
    this; the fast scan stops at the first strict increase).
    """
    sorted_distances = np.asarray(sorted_distances, dtype=np.float64)
    out = np.empty(sorted_distances.shape[0], dtype=np.float64)
    cum = 0.0
    for t in range(sorted_distances.shape[0]):
        cum += float(sorted_distances[t])
        out[t] = (open_cost + cum) / (t + 1)
    return out


def ufl_assign_document_naive(words, psi: TopicMatrix, lam: float, *, neg_log_psi=None) -> np.ndarray:
    """Reference greedy assignment: each round exhaustively evaluates every
    topic and every candidate-set size. Quadratic per round; used as the
    oracle for the fast implementation."""
    words = np.asarray(words, dtype=LABEL_DTYPE)
    n = words.shape[0]
    if n == 0:
        raise ValueError("document must be nonempty")
    neg = psi.neg_log() if neg_log_psi is None else neg_log_psi
    k = neg.shape[0]
    dist = neg[:, words]
    pos = np.arange(n)
    orders = [np.lexsort((pos, words, dist[i])) for i in range(k)]
    unmarked = np.ones(n, dtype=bool)
    labels = np.full(n, -1, dtype=LABEL_DTYPE)
    f = [lam] * k
    remaining = n
    while remaining > 0:
        best_s, best_t, best_i, best_set = np.inf, 0, -1, None
        for i in range(k):
            cand = [int(p) for p in orders[i] if unmarked[p]]
            cum = 0.0
            tb_s, tb_t = np.inf, 0
            for t, p in enumerate(cand, start=1):
                cum += float(dist[i, p])
                s = (f[i] + cum) / t
                if s <= tb_s:
                    tb_s, tb_t = s, t
            if tb_t > 0 and (tb_s < best_s or (tb_s == best_s and tb_t > best_t)):
                best_s, best_t, best_i = tb_s, tb_t, i
                best_set = cand[:tb_t]
        for p in best_set:
            labels[p] = best_i
            unmarked[p] = False
        f[best_i] = 0.0
        remaining -= best_t
    return labels


@njit
def _ufl_rounds(dist, order, lam, labels):
    """Greedy rounds over one document given per-topic candidate orders.

    Scans each topic's candidate list accumulating the score and stops at
    the first strict increase (equal consecutive scores keep scanning, so
    ties prefer the larger set). Returns (tokens examined, rounds).
    """
    k = dist.shape[0]
    n = order.shape[1]
    nxt = np.empty((k, n), np.int32)
    prv = np.empty((k, n), np.int32)
    head = np.empty(k, np.int32)
    for i in range(k):
        prev = _NIL
        head[i] = order[i, 0]
        for r in range(n):
            p = order[i, r]
            prv[i, p] = prev
            if prev != _NIL:
                nxt[i, prev] = p
            prev = p
        nxt[i, prev] = _NIL
    f = np.empty(k, np.float64)
    for i in range(k):
        f[i] = lam
    chosen = np.empty(n, np.int32)
    remaining = n
    work = 0
    rounds = 0
    while remaining > 0:
        rounds += 1
        best_s = np.inf
        best_t = 0
        best_i = -1
        for i in range(k):
            cur = head[i]
            cum = 0.0
            t = 0
            tb_s = np.inf
            tb_t = 0
            prev_s = np.inf
            while cur != _NIL:
                t += 1
                cum += dist[i, cur]
                s = (f[i] + cum) / t
                work += 1
                if t > 1 and s > prev_s:
                    break
                if s <= tb_s:
                    tb_s = s
                    tb_t = t
                prev_s = s
                cur = nxt[i, cur]
            if tb_t > 0 and (tb_s < best_s or (tb_s == best_s and tb_t > best_t)):
                best_s = tb_s
                best_t = tb_t
                best_i = i
        cur = head[best_i]
        for r in range(best_t):
            chosen[r] = cur
            cur = nxt[best_i, cur]
        for r in range(best_t):
            p = chosen[r]
            labels[p] = best_i
            for i in range(k):
                pp = prv[i, p]
                nn = nxt[i, p]
                if pp == _NIL:
                    head[i] = nn
                else:
                    nxt[i, pp] = nn
                if nn != _NIL:
                    prv[i, nn] = pp
        f[best_i] = 0.0
        remaining -= best_t
    return work, rounds


@njit
def _orders_by_count(key, base):
    """Stable counting sort of each topic's tokens by count descending.

    ``key[i, t]`` is the topic-i count of token t's word; ``base`` is the
    token order (word id ascending, position ascending) that ties fall
    back to. O(n + max_count) per topic."""
    k, n = key.shape
    order = np.empty((k, n), np.int32)
    mx_all = 0
    for i in range(k):
        for t in range(n):
            if key[i, t] > mx_all:
                mx_all = key[i, t]
    bucket = np.empty(mx_all + 1, np.int64)
    for i in range(k):
        mx = 0
        for r in range(n):
            c = key[i, base[r]]
            if c > mx:
                mx = c
        for b in range(mx + 1):
            bucket[b] = 0
        for r in range(n):
            bucket[mx - key[i, base[r]]] += 1
        acc = 0
        for b in range(mx + 1):
            cnt = bucket[b]
            bucket[b] = acc
            acc += cnt
        for r in range(n):
            p = base[r]
            b = mx - key[i, p]
            order[i, bucket[b]] = p
            bucket[b] += 1
    return order


@njit
def _ufl_corpus_range(words, offsets, neg, counts, lam, z_out, j0, j1):
    """Fast assignment for documents j0..j1-1 against frozen topics.

    Per document: gather distances and count keys, counting-sort per topic,
    run the greedy rounds. Returns total tokens examined."""
    k = neg.shape[0]
    v = neg.shape[1]
    vbucket = np.empty(v, np.int64)
    work_total = 0
    for j in range(j0, j1):
        lo = offsets[j]
        n = offsets[j + 1] - lo
        if n == 0:
            continue
        dist = np.empty((k, n), np.float64)
        key = np.empty((k, n), np.int64)
        for t in range(n):
            wid = words[lo + t]
            for i in range(k):
                dist[i, t] = neg[i, wid]
                key[i, t] = counts[i, wid]
        # base order (word asc, position asc) via counting sort on word ids
        for u in range(v):
            vbucket[u] = 0
        for t in range(n):
            vbucket[words[lo + t]] += 1
        acc = 0
        for u in range(v):
            cnt = vbucket[u]
            vbucket[u] = acc
            acc += cnt
        base = np.empty(n, np.int32)
        for t in range(n):
            u = words[lo + t]
            base[vbucket[u]] = t
            vbucket[u] += 1
        order = _orders_by_count(key, base)
        labels = np.empty(n, np.int32)
        work, _ = _ufl_rounds(dist, order, lam, labels)
        work_total += work
        for t in range(n):
            z_out[lo + t] = labels[t]
    return work_total


def ufl_assign_document_fast(
    words, psi: TopicMatrix, lam: float, *, counts=None, neg_log_psi=None,
    stats: dict | None = None, debug_oracle: bool = False,
) -> np.ndarray:
    """O(nK) greedy assignment for one document; identical output to the
    naive version.

    With ``counts`` (the topic-word count matrix psi was derived from) the
    per-topic candidate order comes from a linear-time counting sort on
    integer counts. Without counts (e.g. externally estimated topics) the
    order falls back to sorting the distances with the same tie rules.
    ``debug_oracle`` replays the document through the exhaustive-scan
    reference (which does not rely on the early-stop shape) and asserts
    exact label equality.
    """
    words = np.asarray(words, dtype=LABEL_DTYPE)
    n = words.shape[0]
    if n == 0:
        raise ValueError("document must be nonempty")
    neg = psi.neg_log() if neg_log_psi is None else neg_log_psi
    k = neg.shape[0]
    dist = np.ascontiguousarray(neg[:, words])
    base = np.argsort(words, kind="stable").astype(np.int32)
    if counts is not None:
        key = np.ascontiguousarray(counts[:, words])
        order = _orders_by_count(key, base)
    else:
        pos = np.arange(n)
        order = np.vstack(
            [np.lexsort((pos, words, dist[i])) for i in range(k)]
        ).astype(np.int32)
    labels = np.empty(n, dtype=np.int32)
    work, rounds = _ufl_rounds(dist, order, float(lam), labels)
    if stats is not None:
        stats["work"] = stats.get("work", 0) + int(work)
        stats["rounds"] = stats.get("rounds", 0) + int(rounds)
    labels = labels.astype(LABEL_DTYPE)
    if debug_oracle:
        reference = ufl_assign_document_naive(words, psi, lam, neg_log_psi=neg)
        if not np.array_equal(labels, reference):
            raise AssertionError("fast greedy assignment diverged from the reference scan")
    return labels


def _assign_pass_fast(state: TopicState, neg: np.ndarray, threads: int) -> tuple[np.ndarray, int]:
    """Run the fast assignment over every document; psi (and the counts it
    came from) stay frozen for the whole pass. Document-parallel when
    threads > 1; outputs land in disjoint slices so the merge is
    deterministic."""
    z_out = np.empty_like(state.z)
    m = state.num_docs
    args = (state.words, state.doc_offsets, neg, state.topic_word, state.lam, z_out)
    if threads <= 1 or m < 2 * threads:
        return z_out, int(_ufl_corpus_range(*args, 0, m))
    bounds = np.linspace(0, m, threads + 1).astype(np.int64)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(_ufl_corpus_range, *args, int(bounds[t]), int(bounds[t + 1]))
            for t in range(threads)
        ]
        work = sum(f.result() for f in futures)
    return z_out, int(work)


def word_fit(corpus: Corpus, config: FitConfig, init_labels=None) -> FitResult:
    """Batch loop with the greedy facility-location assignment step."""
    state = _initial_state(corpus, config, init_labels)
    psi = update_topics(state, config.gamma)
    trace = [TraceRecord(0, "init", compute_objective(state, psi), 0, 0.0)]
    for it in range(1, config.resolved_iters() + 1):
        t0 = time.perf_counter()
        new_z, work = _assign_pass_fast(state, psi.neg_log(), config.threads)
        changed = int(np.count_nonzero(new_z != state.z))
        state.set_labels(new_z)
        psi = update_topics(state, config.gamma)
        obj = compute_objective(state, psi)
        trace.append(
            TraceRecord(it, "word", obj, changed, time.perf_counter() - t0, work)
        )
        if changed == 0 or _converged(trace[-2].objective, obj, config.tol):
            break
    return FitResult(state, psi, trace)


# ---------------------------------------------------------------------------
# Incremental mini-topic refinement
# ---------------------------------------------------------------------------

def mini_topic(state: TopicState, doc: int, topic: int) -> MiniTopic:
    sl = state.doc_slice(doc)
    positions = np.nonzero(state.z[sl] == topic)[0]
    return MiniTopic(doc, topic, positions)


def _xlog(x, gamma: float):
    """x * log(x + gamma) with the 0 * log(0) limit handled."""
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x * np.log(x + gamma)
    return np.where(x > 0, out, 0.0)


def _source_side(state, topic, uniq_words, s_counts, m_size, gamma):
    gv = gamma * state.vocab_size
    n_i = float(state.topic_total[topic])
    c = state.topic_word[topic, uniq_words].astype(np.float64)
    tot_term = float(_xlog(n_i - m_size, gv)) - float(_xlog(n_i, gv))
    word_term = float(np.sum(_xlog(c, gamma) - _xlog(c - s_counts, gamma)))
    return tot_term + word_term


def delta_move(state: TopicState, mini: MiniTopic, target: int, gamma: float) -> float:
    """Exact objective change if the whole mini-topic moves to ``target``
    and both affected topic rows are re-estimated. O(|S|): only words in S
    and the two totals are touched."""
    j, i = mini.doc, mini.topic
    if target == i:
        raise ValueError("target must differ from the mini-topic's topic")
    if not (0 <= target < state.num_topics):
        raise ValueError(f"target {target} outside [0, {state.num_topics})")
    sl = state.doc_slice(j)
    if mini.positions.size != int(state.doc_topic[j, i]):
        raise ValueError("mini-topic is not complete for its document")
    words = state.words[sl][mini.positions]
    uniq, s_counts = np.unique(words, return_counts=True)
    s_counts = s_counts.astype(np.float64)
    m_size = float(mini.positions.size)
    gv = gamma * state.vocab_size

    src = _source_side(state, i, uniq, s_counts, m_size, gamma)
    n_t = float(state.topic_total[target])
    c_t = state.topic_word[target, uniq].astype(np.float64)
    tgt_tot = float(_xlog(n_t + m_size, gv)) - float(_xlog(n_t, gv))
    tgt_words = float(np.sum(_xlog(c_t, gamma) - _xlog(c_t + s_counts, gamma)))
    penalty = -state.lam if state.doc_topic[j, target] > 0 else 0.0
    return src + tgt_tot + tgt_words + penalty


def _delta_all_targets(state, doc, topic, words_of_mini, gamma):
    """Objective change for moving the complete mini-topic (doc, topic) to
    every other topic at once; entry [topic] is +inf."""
    uniq, s_counts = np.unique(words_of_mini, return_counts=True)
    s_counts = s_counts.astype(np.float64)
    m_size = float(words_of_mini.size)
    gv = gamma * state.vocab_size

    src = _source_side(state, topic, uniq, s_counts, m_size, gamma)
    tot = state.topic_total.astype(np.float64)
    c_all = state.topic_word[:, uniq].astype(np.float64)
    tgt_tot = _xlog(tot + m_size, gv) - _xlog(tot, gv)
    tgt_words = np.sum(_xlog(c_all, gamma) - _xlog(c_all + s_counts, gamma), axis=1)
    penalty = np.where(state.doc_topic[doc] > 0, -state.lam, 0.0)
    deltas = src + tgt_tot + tgt_words + penalty
    deltas[topic] = np.inf
    return deltas


def refine_pass(
    state: TopicState, config: FitConfig, rng
) -> tuple[TopicState, int]:
    """One incremental refinement sweep, mutating state in place.

    Documents are visited in a seeded random permutation; within a
    document, the mini-topics present on entry are tried in ascending
    topic order. Each improving move (strict objective decrease) is
    applied immediately, so later evaluations see the updated counts.
    Mini-topics created inside the same document visit are not revisited
    until the next pass. Returns (state, accepted move count).
    """
    gamma = config.gamma
    accepted = 0
    order = rng.permutation(state.num_docs)
    off = state.doc_offsets
    for j in order:
        j = int(j)
        lo, hi = int(off[j]), int(off[j + 1])
        if hi == lo:
            continue
        w_doc = state.words[lo:hi]
        z_doc = state.z[lo:hi]
        snapshot = np.nonzero(state.doc_topic[j])[0]
        for i in snapshot:
            i = int(i)
            positions = np.nonzero(z_doc == i)[0]
            if positions.size == 0:
                continue
            words_mini = w_doc[positions]
            deltas = _delta_all_targets(state, j, i, words_mini, gamma)
            target = int(np.argmin(deltas))
            if deltas[target] < 0.0:
                _apply_move(state, j, i, target, words_mini, lo, positions)
                accepted += 1
    return state, accepted


def _apply_move(state, doc, source, target, words_mini, doc_lo, positions):
    uniq, s_counts = np.unique(words_mini, return_counts=True)
    state.topic_word[source, uniq] -= s_counts
    state.topic_word[target, uniq] += s_counts
    m_size = int(words_mini.size)
    state.topic_total[source] -= m_size
    state.topic_total[target] += m_size
    state.doc_topic[doc, source] = 0
    state.doc_topic[doc, target] += m_size
    state.z[doc_lo + positions] = target


def word_refine_fit(corpus: Corpus, config: FitConfig, init_labels=None) -> FitResult:
    """Alternate the fast facility-location assignment with a refinement
    sweep; the trace records the objective after each phase."""
    state = _initial_state(corpus, config, init_labels)
    psi = update_topics(state, config.gamma)
    trace = [TraceRecord(0, "init", compute_objective(state, psi), 0, 0.0)]
    refine_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1]))
    prev_obj = trace[0].objective
    for it in range(1, config.resolved_iters() + 1):
        t0 = time.perf_counter()
        new_z, work = _assign_pass_fast(state, psi.neg_log(), config.threads)
        changed = int(np.count_nonzero(new_z != state.z))
        state.set_labels(new_z)
        psi = update_topics(state, config.gamma)
        obj = compute_objective(state, psi)
        trace.append(
            TraceRecord(it, "word", obj, changed, time.perf_counter() - t0, work)
        )

        t0 = time.perf_counter()
        _, accepted = refine_pass(state, config, refine_rng)
        psi = update_topics(state, config.gamma)
        obj = compute_objective(state, psi)
        trace.append(
            TraceRecord(it, "refine", obj, accepted, time.perf_counter() - t0)
        )
        if _converged(prev_obj, obj, config.tol):
            break
        prev_obj = obj
    return FitResult(state, psi, trace)


def fit(corpus: Corpus, config: FitConfig, init_labels=None) -> FitResult:
    """Dispatch on config.schedule."""
    if config.schedule == "basic":
        return basic_batch_fit(corpus, config, init_labels)
    if config.schedule == "word":
        return word_fit(corpus, config, init_labels)
    return word_refine_fit(corpus, config, init_labels)
