import numpy as np
import pytest

from hardlda.corpus import corpus_from_token_lists
from hardlda.model import TopicState


def random_corpus(rng, max_docs=12, max_vocab=25, max_len=30, min_len=1):
    m = int(rng.integers(2, max_docs))
    v = int(rng.integers(3, max_vocab))
    docs = [
        rng.integers(0, v, size=int(rng.integers(min_len, max_len)))
        for _ in range(m)
    ]
    return corpus_from_token_lists(docs, v)


def random_state(rng, corpus, num_topics, lam=1.0):
    z = rng.integers(0, num_topics, size=corpus.num_tokens).astype(np.int32)
    return TopicState.from_labels(corpus, z, num_topics, lam)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
