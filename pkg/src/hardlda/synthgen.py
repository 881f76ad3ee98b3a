"""Synthetic corpora drawn from the standard LDA generative process, with
the generating topics, topic proportions, and token labels retained.

One shared PRNG stream is consumed in a fixed order (topic rows, then
document-proportion rows, then tokens document-major), so a spec with the
same seed always reproduces bit-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Document, Vocabulary
from .errors import CorpusFormatError
from .model import LABEL_DTYPE

_TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class LdaGenSpec:
    """Generator hyperparameters; doc_len is fixed per document."""

    num_docs: int
    num_topics: int
    vocab_size: int
    alpha: float
    beta: float
    doc_len: int
    seed: int = 0

    def __post_init__(self):
        if min(self.num_docs, self.num_topics, self.vocab_size, self.doc_len) < 1:
            raise ValueError("all counts must be >= 1")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be > 0")


@dataclass(frozen=True)
class GroundTruth:
    """Everything the generator knew: true topics, true per-document
    proportions (None when loaded from disk), and per-token labels laid out
    exactly like the generated corpus."""

    psi_true: np.ndarray
    z_true: tuple[np.ndarray, ...]
    theta_true: np.ndarray | None
    spec: LdaGenSpec

    def flat_z(self) -> np.ndarray:
        if not self.z_true:
            return np.empty(0, dtype=LABEL_DTYPE)
        return np.concatenate(self.z_true)


def sample_dirichlet_symmetric(dim: int, conc: float, rng) -> np.ndarray:
    """One draw from Dir(conc * 1_dim) via normalized Gamma variates.

    For conc < 1 the Gamma draw uses the shape-boost identity
    Gamma(conc) = Gamma(conc + 1) * U^(1/conc), evaluated in log space so
    that even extreme concentrations (e.g. 1e-6, where U^(1/conc)
    underflows to 0 for every coordinate) keep their largest coordinate
    exact.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if conc <= 0:
        raise ValueError("conc must be > 0")
    if conc < 1.0:
        g = rng.standard_gamma(conc + 1.0, size=dim)
        u = rng.random(size=dim)
        with np.errstate(divide="ignore"):
            log_x = np.log(g) + np.log(u) / conc
        x = np.exp(log_x - log_x.max())
    else:
        x = rng.standard_gamma(conc, size=dim)
    x = np.maximum(x, _TINY)
    return x / x.sum()


def _categorical(cumulative: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cumulative, u, side="right")
    return np.minimum(idx, cumulative.shape[0] - 1)


def generate_lda_corpus(spec: LdaGenSpec) -> tuple[Corpus, GroundTruth]:
    """Sample psi rows, theta rows, then every document's tokens."""
    rng = np.random.default_rng(spec.seed)
    k, v, m, n_j = spec.num_topics, spec.vocab_size, spec.num_docs, spec.doc_len

    psi = np.vstack([sample_dirichlet_symmetric(v, spec.beta, rng) for _ in range(k)])
    theta = np.vstack([sample_dirichlet_symmetric(k, spec.alpha, rng) for _ in range(m)])

    psi_cum = np.cumsum(psi, axis=1)
    docs = []
    z_per_doc = []
    for j in range(m):
        theta_cum = np.cumsum(theta[j])
        z = _categorical(theta_cum, rng.random(n_j)).astype(LABEL_DTYPE)
        u_w = rng.random(n_j)
        w = np.empty(n_j, dtype=LABEL_DTYPE)
        for topic in np.unique(z):
            sel = z == topic
            w[sel] = _categorical(psi_cum[topic], u_w[sel])
        docs.append(Document(w))
        z_per_doc.append(z)

    corpus = Corpus(tuple(docs), Vocabulary.generic(v))
    truth = GroundTruth(psi, tuple(z_per_doc), theta, spec)
    return corpus, truth


_HEADER_KEYS = ("num_docs", "num_topics", "vocab_size", "alpha", "beta", "doc_len", "seed")


def write_ground_truth(path, truth: GroundTruth) -> None:
    """Sidecar layout: key=value header, then K psi rows (full-precision
    decimals), then one line of token labels per document."""
    spec = truth.spec
    with open(path, "w", encoding="ascii") as fh:
        for key in _HEADER_KEYS:
            fh.write(f"{key}={getattr(spec, key)}\n")
        for row in truth.psi_true:
            fh.write(" ".join(repr(float(x)) for x in row))
            fh.write("\n")
        for z in truth.z_true:
            fh.write(" ".join(str(int(i)) for i in z))
            fh.write("\n")


def read_ground_truth(path) -> GroundTruth:
    with open(path, "r", encoding="ascii") as fh:
        header: dict[str, str] = {}
        for key in _HEADER_KEYS:
            line = fh.readline()
            if "=" not in line:
                raise CorpusFormatError(f"bad ground-truth header line: {line!r}")
            name, _, value = line.strip().partition("=")
            if name != key:
                raise CorpusFormatError(
                    f"expected header key {key!r}, found {name!r}"
                )
            header[name] = value
        spec = LdaGenSpec(
            num_docs=int(header["num_docs"]),
            num_topics=int(header["num_topics"]),
            vocab_size=int(header["vocab_size"]),
            alpha=float(header["alpha"]),
            beta=float(header["beta"]),
            doc_len=int(header["doc_len"]),
            seed=int(header["seed"]),
        )
        psi = np.empty((spec.num_topics, spec.vocab_size), dtype=np.float64)
        for i in range(spec.num_topics):
            line = fh.readline()
            row = np.array([float(x) for x in line.split()], dtype=np.float64)
            if row.shape[0] != spec.vocab_size:
                raise CorpusFormatError(
                    f"psi row {i} has {row.shape[0]} entries, expected {spec.vocab_size}"
                )
            psi[i] = row
        z_rows = []
        for j in range(spec.num_docs):
            line = fh.readline()
            if line == "":
                raise CorpusFormatError(f"missing label line for document {j}")
            z_rows.append(
                np.array([int(x) for x in line.split()], dtype=LABEL_DTYPE)
            )
    return GroundTruth(psi, tuple(z_rows), None, spec)
