"""hardlda: combinatorial (hard) topic modeling.

Minimizes a penalized KL objective over token-topic assignments — the
per-token distance to its topic plus a per-document cost for each topic
the document uses — with a basic batch optimizer, a greedy
facility-location word assignment, and an incremental mini-topic
refinement, alongside collapsed-Gibbs and KL-k-means baselines and a full
evaluation harness.
"""

from .corpus import (
    Corpus,
    Document,
    SplitSpec,
    Vocabulary,
    load_uci_bag_of_words,
    read_corpus,
    split_heldout,
    write_corpus,
)
from .model import (
    FitConfig,
    TopicMatrix,
    TopicState,
    compute_objective,
    dirichlet_multinomial_neg_log,
    read_matrix,
    token_topic_distance,
    update_topics,
    verify_lemma1_ratio,
    write_matrix,
)
from .synthgen import (
    GroundTruth,
    LdaGenSpec,
    generate_lda_corpus,
    read_ground_truth,
    sample_dirichlet_symmetric,
    write_ground_truth,
)
from .sva import (
    FitResult,
    MiniTopic,
    basic_assign_step,
    basic_batch_fit,
    candidate_score_sequence,
    delta_move,
    fit,
    init_random,
    mini_topic,
    refine_pass,
    ufl_assign_document_fast,
    ufl_assign_document_naive,
    word_fit,
    word_refine_fit,
)
from .baselines import (
    CgsConfig,
    CgsSample,
    cgs_fit,
    estimate_psi_from_sample,
    expand_doc_labels,
    kl_kmeans_fit,
)
from .evaluation import (
    EvalReport,
    adjusted_rand,
    hard_predictive_ll,
    hungarian_align,
    nmi,
    soft_predictive_ll,
    symmetric_kl_topics,
    topic_l1_error,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "Corpus", "Document", "SplitSpec", "Vocabulary",
    "load_uci_bag_of_words", "read_corpus", "split_heldout", "write_corpus",
    "FitConfig", "TopicMatrix", "TopicState", "compute_objective",
    "dirichlet_multinomial_neg_log", "read_matrix", "token_topic_distance",
    "update_topics", "verify_lemma1_ratio", "write_matrix",
    "GroundTruth", "LdaGenSpec", "generate_lda_corpus", "read_ground_truth",
    "sample_dirichlet_symmetric", "write_ground_truth",
    "FitResult", "MiniTopic", "basic_assign_step", "basic_batch_fit",
    "candidate_score_sequence", "delta_move", "fit", "init_random",
    "mini_topic", "refine_pass", "ufl_assign_document_fast",
    "ufl_assign_document_naive", "word_fit", "word_refine_fit",
    "CgsConfig", "CgsSample", "cgs_fit", "estimate_psi_from_sample",
    "expand_doc_labels", "kl_kmeans_fit",
    "EvalReport", "adjusted_rand", "hard_predictive_ll", "hungarian_align",
    "nmi", "soft_predictive_ll", "symmetric_kl_topics", "topic_l1_error",
    "errors",
]
