"""Corpus data model, UCI bag-of-words ingestion, and held-out splitting.

The on-disk format is the UCI "bag of words" layout: a docword file whose
first three lines are the integers D (documents), W (vocabulary size) and
NNZ (number of triples), followed by NNZ lines of ``docId wordId count``
with 1-based ids, plus a vocabulary file with one term per line
(line number - 1 = word id).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import CorpusFormatError, CorpusIOError, CorpusRangeError

TOKEN_DTYPE = np.int32


@dataclass(frozen=True)
class Vocabulary:
    """Ordered list of distinct terms; index in the list is the word id."""

    terms: tuple[str, ...]

    def __post_init__(self):
        if len(self.terms) < 1:
            raise ValueError("vocabulary must contain at least one term")
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("vocabulary terms must be unique")

    @property
    def size(self) -> int:
        return len(self.terms)

    @classmethod
    def generic(cls, size: int) -> "Vocabulary":
        """Placeholder vocabulary ``w0 .. w{size-1}`` for synthetic corpora."""
        if size < 1:
            raise ValueError("vocabulary size must be >= 1")
        return cls(tuple(f"w{i}" for i in range(size)))


@dataclass(frozen=True)
class Document:
    """A sequence of word ids. Order fixes determinism only; the model is
    exchangeable within a document."""

    tokens: np.ndarray

    def __post_init__(self):
        toks = np.asarray(self.tokens, dtype=TOKEN_DTYPE)
        object.__setattr__(self, "tokens", toks)

    @property
    def length(self) -> int:
        return int(self.tokens.shape[0])


@dataclass(frozen=True)
class Corpus:
    """All documents over one vocabulary."""

    docs: tuple[Document, ...]
    vocab: Vocabulary
    _flat: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "docs", tuple(self.docs))
        for d in self.docs:
            if d.length and int(d.tokens.max()) >= self.vocab.size:
                raise CorpusRangeError(
                    f"token id {int(d.tokens.max())} outside vocabulary of "
                    f"size {self.vocab.size}"
                )

    @property
    def num_docs(self) -> int:
        return len(self.docs)

    @property
    def num_tokens(self) -> int:
        return int(sum(d.length for d in self.docs))

    @property
    def vocab_size(self) -> int:
        return self.vocab.size

    def flat_words(self) -> np.ndarray:
        """All tokens concatenated document-major, shape (N,)."""
        self._ensure_flat()
        return self._flat["words"]

    def doc_offsets(self) -> np.ndarray:
        """Prefix offsets into flat_words(), shape (M+1,)."""
        self._ensure_flat()
        return self._flat["offsets"]

    def _ensure_flat(self):
        if "words" not in self._flat:
            lengths = np.fromiter(
                (d.length for d in self.docs), count=len(self.docs), dtype=np.int64
            )
            offsets = np.zeros(len(self.docs) + 1, dtype=np.int64)
            np.cumsum(lengths, out=offsets[1:])
            if self.docs:
                words = np.concatenate([d.tokens for d in self.docs])
            else:
                words = np.empty(0, dtype=TOKEN_DTYPE)
            self._flat["words"] = np.ascontiguousarray(words, dtype=TOKEN_DTYPE)
            self._flat["offsets"] = offsets

    def doc_word_counts(self) -> "np.ndarray":
        """Dense (M, V) matrix of per-document word counts."""
        out = np.zeros((self.num_docs, self.vocab_size), dtype=np.int64)
        for j, d in enumerate(self.docs):
            if d.length:
                out[j] = np.bincount(d.tokens, minlength=self.vocab_size)
        return out


@dataclass(frozen=True)
class SplitSpec:
    """How many documents to reserve and the shuffle seed."""

    heldout_count: int
    seed: int = 0

    def __post_init__(self):
        if self.heldout_count < 0:
            raise ValueError("heldout_count must be >= 0")


def _read_int_line(stream, what: str) -> int:
    line = stream.readline()
    if not line:
        raise CorpusFormatError(f"missing {what} header line")
    try:
        return int(line.strip())
    except ValueError as exc:
        raise CorpusFormatError(f"bad {what} header line: {line.strip()!r}") from exc


def load_uci_bag_of_words(docword_stream, vocab_stream=None) -> Corpus:
    """Parse UCI bag-of-words streams into a Corpus.

    Each triple ``docId wordId count`` expands to `count` identical tokens
    appended to document docId-1, in file order. With no vocabulary stream a
    generic vocabulary of the declared size is used.
    """
    n_docs = _read_int_line(docword_stream, "D")
    n_words = _read_int_line(docword_stream, "W")
    nnz = _read_int_line(docword_stream, "NNZ")
    if n_docs < 0 or n_words < 1 or nnz < 0:
        raise CorpusFormatError(
            f"bad header values D={n_docs} W={n_words} NNZ={nnz}"
        )

    buffers: list[list[np.ndarray]] = [[] for _ in range(n_docs)]
    seen = 0
    for line in docword_stream:
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise CorpusFormatError(f"bad triple line: {line!r}")
        try:
            doc_id, word_id, count = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise CorpusFormatError(f"non-integer triple: {line!r}") from exc
        seen += 1
        if seen > nnz:
            raise CorpusFormatError(
                f"more than NNZ={nnz} triples in docword stream"
            )
        if not (1 <= doc_id <= n_docs):
            raise CorpusRangeError(
                f"docId {doc_id} outside [1, {n_docs}] on line {line!r}"
            )
        if not (1 <= word_id <= n_words):
            raise CorpusRangeError(
                f"wordId {word_id} outside [1, {n_words}] on line {line!r}"
            )
        if count <= 0:
            raise CorpusFormatError(f"count must be positive on line {line!r}")
        buffers[doc_id - 1].append(
            np.full(count, word_id - 1, dtype=TOKEN_DTYPE)
        )
    if seen != nnz:
        raise CorpusFormatError(f"expected NNZ={nnz} triples, found {seen}")

    if vocab_stream is None:
        vocab = Vocabulary.generic(n_words)
    else:
        terms = tuple(line.rstrip("\n") for line in vocab_stream)
        if len(terms) != n_words:
            raise CorpusFormatError(
                f"vocabulary has {len(terms)} terms, header says {n_words}"
            )
        vocab = Vocabulary(terms)

    docs = tuple(
        Document(np.concatenate(b) if b else np.empty(0, dtype=TOKEN_DTYPE))
        for b in buffers
    )
    return Corpus(docs, vocab)


def split_heldout(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus]:
    """Deterministic seeded split: the last H documents of a seeded shuffle
    form the held-out half. Both halves share the vocabulary."""
    m = corpus.num_docs
    if spec.heldout_count >= m:
        raise ValueError(
            f"heldout_count {spec.heldout_count} must be < document count {m}"
        )
    order = np.random.default_rng(spec.seed).permutation(m)
    cut = m - spec.heldout_count
    train = Corpus(tuple(corpus.docs[i] for i in order[:cut]), corpus.vocab)
    heldout = Corpus(tuple(corpus.docs[i] for i in order[cut:]), corpus.vocab)
    return train, heldout


def _aggregate_counts(doc: Document) -> tuple[np.ndarray, np.ndarray]:
    if doc.length == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    ids, counts = np.unique(doc.tokens, return_counts=True)
    return ids.astype(np.int64), counts


def write_corpus(corpus: Corpus, docword_path, vocab_path=None) -> None:
    """Write a corpus in UCI bag-of-words format (tokens re-aggregated to
    counts; within-document token order is not preserved)."""
    try:
        per_doc = [_aggregate_counts(d) for d in corpus.docs]
        nnz = sum(len(ids) for ids, _ in per_doc)
        with open(docword_path, "w", encoding="ascii") as fh:
            fh.write(f"{corpus.num_docs}\n{corpus.vocab_size}\n{nnz}\n")
            for j, (ids, counts) in enumerate(per_doc):
                for w, c in zip(ids, counts):
                    fh.write(f"{j + 1} {w + 1} {c}\n")
        if vocab_path is not None:
            with open(vocab_path, "w", encoding="utf-8") as fh:
                for term in corpus.vocab.terms:
                    fh.write(term + "\n")
    except OSError as exc:
        raise CorpusIOError(f"writing corpus to {docword_path}: {exc}") from exc


def read_corpus(docword_path, vocab_path=None) -> Corpus:
    """Read a corpus written by write_corpus (or any UCI bag-of-words dump)."""
    try:
        with open(docword_path, "r", encoding="utf-8") as dw:
            if vocab_path is None:
                return load_uci_bag_of_words(dw, None)
            with open(vocab_path, "r", encoding="utf-8") as vs:
                return load_uci_bag_of_words(dw, vs)
    except OSError as exc:
        raise CorpusIOError(f"reading corpus from {docword_path}: {exc}") from exc


def corpus_from_token_lists(token_lists, vocab_size: int) -> Corpus:
    """Build a corpus from in-memory token id lists (test and synthgen helper)."""
    docs = tuple(Document(np.asarray(t, dtype=TOKEN_DTYPE)) for t in token_lists)
    return Corpus(docs, Vocabulary.generic(vocab_size))


def dumps_uci(corpus: Corpus) -> str:
    """The docword file contents as a string (diagnostics and tests)."""
    buf = io.StringIO()
    per_doc = [_aggregate_counts(d) for d in corpus.docs]
    nnz = sum(len(ids) for ids, _ in per_doc)
    buf.write(f"{corpus.num_docs}\n{corpus.vocab_size}\n{nnz}\n")
    for j, (ids, counts) in enumerate(per_doc):
        for w, c in zip(ids, counts):
            buf.write(f"{j + 1} {w + 1} {c}\n")
    return buf.getvalue()
