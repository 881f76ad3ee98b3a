"""Command-line pipelines: synthetic corpus generation, fitting (all five
algorithms, with lambda sweeps and warm starts), evaluation reports, and
per-iteration timing benchmarks.

Exit codes: 0 success, 2 usage errors, 3 data/format errors, 1 internal.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from pathlib import Path

import numpy as np

from . import baselines, evaluation, model, sva, synthgen, trace as trace_mod
from .corpus import Corpus, read_corpus, write_corpus
from .errors import DimensionMismatchError, HardLdaError
from .model import LABEL_DTYPE, FitConfig, TopicMatrix

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_DATA = 3


# ---------------------------------------------------------------------------
# Shared file helpers
# ---------------------------------------------------------------------------

def write_labels(path, per_doc_labels) -> None:
    """One line per document of space-separated token labels."""
    with open(path, "w", encoding="ascii") as fh:
        for row in per_doc_labels:
            fh.write(" ".join(str(int(x)) for x in row))
            fh.write("\n")


def read_labels(path) -> list[np.ndarray]:
    with open(path, "r", encoding="ascii") as fh:
        return [
            np.array([int(x) for x in line.split()], dtype=LABEL_DTYPE)
            for line in fh
        ]


def flat_labels(per_doc) -> np.ndarray:
    if not per_doc:
        return np.empty(0, dtype=LABEL_DTYPE)
    return np.concatenate(per_doc)


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class RunManifest:
    """Everything needed to re-run the identical experiment, plus wall
    clock per phase."""

    def __init__(self, command: str, args: dict):
        self.command = command
        self.args = dict(args)
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.phases: dict[str, float] = {}

    def add_input(self, name, path):
        if path is not None:
            self.inputs[name] = f"{path} sha256={_digest(path)}"

    def add_output(self, path):
        self.outputs.append(str(path))

    def add_phase(self, name, seconds):
        self.phases[name] = self.phases.get(name, 0.0) + seconds

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"command={self.command}\n")
            for key in sorted(self.args):
                fh.write(f"arg.{key}={self.args[key]}\n")
            for name, desc in self.inputs.items():
                fh.write(f"input.{name}={desc}\n")
            for out in self.outputs:
                fh.write(f"output={out}\n")
            for name, seconds in self.phases.items():
                fh.write(f"seconds.{name}={seconds:.6f}\n")


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{text} must be > 0")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} must be >= 0")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"{text} must be > 0")
    return value


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from exc


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest("generate", vars(args))
    spec = synthgen.LdaGenSpec(
        num_docs=args.docs, num_topics=args.topics, vocab_size=args.vocab,
        alpha=args.alpha, beta=args.beta, doc_len=args.doc_len, seed=args.seed,
    )
    t0 = time.perf_counter()
    corpus, truth = synthgen.generate_lda_corpus(spec)
    manifest.add_phase("generate", time.perf_counter() - t0)

    t0 = time.perf_counter()
    docword = out / "docword.txt"
    vocab = out / "vocab.txt"
    gt = out / "ground_truth.txt"
    write_corpus(corpus, docword, vocab)
    synthgen.write_ground_truth(gt, truth)
    manifest.add_phase("write", time.perf_counter() - t0)
    for p in (docword, vocab, gt):
        manifest.add_output(p)
    manifest.write(out / "manifest.txt")
    print(f"wrote corpus with {corpus.num_docs} docs / {corpus.num_tokens} tokens to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def _load_corpus(args) -> Corpus:
    return read_corpus(args.corpus, args.vocab)


def _load_init(args, corpus) -> np.ndarray | None:
    if args.init_from is None:
        return None
    per_doc = read_labels(args.init_from)
    if len(per_doc) != corpus.num_docs:
        raise DimensionMismatchError(
            f"init file has {len(per_doc)} documents, corpus has {corpus.num_docs}"
        )
    flat = flat_labels(per_doc)
    if flat.shape[0] != corpus.num_tokens:
        raise DimensionMismatchError(
            f"init file has {flat.shape[0]} labels, corpus has {corpus.num_tokens} tokens"
        )
    return flat


def _write_fit_outputs(outdir, result: sva.FitResult, manifest):
    outdir.mkdir(parents=True, exist_ok=True)
    labels_path = outdir / "labels.txt"
    psi_path = outdir / "psi.txt"
    trace_path = outdir / "trace.txt"
    write_labels(labels_path, result.labels_per_doc())
    model.write_matrix(psi_path, result.psi.psi)
    trace_mod.write_trace(trace_path, result.trace)
    for p in (labels_path, psi_path, trace_path):
        manifest.add_output(p)


def _fit_sva(args, corpus, manifest) -> None:
    lams = args.lambda_sweep if args.lambda_sweep else [args.lam]
    init = _load_init(args, corpus)
    schedule = {"basic": "basic", "word": "word", "word-refine": "word+refine"}[args.algo]
    multi = len(lams) > 1
    for lam in lams:
        config = FitConfig(
            num_topics=args.topics, lam=lam, max_iters=args.iters,
            seed=args.seed, gamma=args.gamma, tol=args.tol,
            schedule=schedule, threads=args.threads,
        )
        t0 = time.perf_counter()
        result = sva.fit(corpus, config, init_labels=init)
        manifest.add_phase(f"fit.lambda_{lam:g}", time.perf_counter() - t0)
        outdir = Path(args.out) / f"lambda_{lam:g}" if multi else Path(args.out)
        _write_fit_outputs(outdir, result, manifest)
        print(
            f"{args.algo} lambda={lam:g}: objective {result.final_objective:.6g} "
            f"after {result.trace[-1].iteration} iterations -> {outdir}"
        )


def _fit_cgs(args, corpus, manifest) -> None:
    init = _load_init(args, corpus)
    config = baselines.CgsConfig(
        num_topics=args.topics, alpha=args.alpha, beta=args.beta,
        burnin=args.burnin, n_samples=args.samples, thinning=args.thinning,
        seed=args.seed, init_labels=init,
    )
    t0 = time.perf_counter()
    samples, records = baselines.cgs_fit(corpus, config, return_trace=True)
    manifest.add_phase("fit.cgs", time.perf_counter() - t0)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    offsets = corpus.doc_offsets()

    def per_doc(z):
        return [z[offsets[j]: offsets[j + 1]] for j in range(corpus.num_docs)]

    for sample in samples:
        p = outdir / f"labels_sample_{sample.index}.txt"
        write_labels(p, per_doc(sample.labels))
        manifest.add_output(p)
    last = samples[-1]
    write_labels(outdir / "labels.txt", per_doc(last.labels))
    psi = baselines.estimate_psi_from_sample(last, args.beta)
    model.write_matrix(outdir / "psi.txt", psi.psi)
    trace_mod.write_trace(outdir / "trace.txt", records)
    for name in ("labels.txt", "psi.txt", "trace.txt"):
        manifest.add_output(outdir / name)
    print(f"cgs: {len(samples)} samples -> {outdir}")


def _fit_kmeans(args, corpus, manifest) -> None:
    t0 = time.perf_counter()
    doc_labels, psi, records = baselines.kl_kmeans_fit(
        corpus, args.topics, seed=args.seed,
        max_iters=args.iters if args.iters else 50,
        gamma=args.gamma, return_trace=True,
    )
    manifest.add_phase("fit.kmeans", time.perf_counter() - t0)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    token_labels = baselines.expand_doc_labels(corpus, doc_labels)
    offsets = corpus.doc_offsets()
    write_labels(
        outdir / "labels.txt",
        [token_labels[offsets[j]: offsets[j + 1]] for j in range(corpus.num_docs)],
    )
    model.write_matrix(outdir / "psi.txt", psi.psi)
    trace_mod.write_trace(outdir / "trace.txt", records)
    for name in ("labels.txt", "psi.txt", "trace.txt"):
        manifest.add_output(outdir / name)
    print(f"kmeans: objective {records[-1].objective:.6g} -> {outdir}")


def cmd_fit(args) -> int:
    manifest = RunManifest("fit", vars(args))
    manifest.add_input("corpus", args.corpus)
    if args.vocab:
        manifest.add_input("vocab", args.vocab)
    if args.init_from:
        manifest.add_input("init_from", args.init_from)
    corpus = _load_corpus(args)
    if args.algo in ("basic", "word", "word-refine"):
        _fit_sva(args, corpus, manifest)
    elif args.algo == "cgs":
        _fit_cgs(args, corpus, manifest)
    else:
        _fit_kmeans(args, corpus, manifest)
    Path(args.out).mkdir(parents=True, exist_ok=True)
    manifest.write(Path(args.out) / "manifest.txt")
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _metric(report, name, func):
    """Run one metric; a dimension mismatch is reported, not fatal."""
    t0 = time.perf_counter()
    try:
        setattr(report, name, func())
        report.timing[name] = time.perf_counter() - t0
    except DimensionMismatchError as exc:
        report.omitted[name] = f"dimension mismatch: {exc}"


def _evaluate_model(args, corpus, labels, psi, truth) -> evaluation.EvalReport:
    report = evaluation.EvalReport()
    if args.lam is not None:
        state = model.TopicState.from_labels(
            corpus, labels, psi.num_topics, args.lam
        )
        _metric(report, "objective", lambda: model.compute_objective(state, psi))
    else:
        report.omitted["objective"] = "needs --lambda"

    if truth is not None:
        _metric(report, "nmi", lambda: evaluation.nmi(labels, truth.flat_z()))
        _metric(
            report, "arand",
            lambda: evaluation.adjusted_rand(labels, truth.flat_z()),
        )
        _metric(
            report, "mean_l1",
            lambda: evaluation.topic_l1_error(psi, truth.psi_true),
        )
    else:
        for name in ("nmi", "arand", "mean_l1"):
            report.omitted[name] = "needs --truth"

    if args.psi_ref:
        ref = TopicMatrix(model.read_matrix(args.psi_ref))
        _metric(
            report, "sym_kl", lambda: evaluation.symmetric_kl_topics(psi, ref)
        )
        report.notes["sym_kl"] = (
            "compared against --psi-ref; topic pairing by l1 alignment"
        )
    elif truth is not None and np.all(truth.psi_true > 0) and np.all(psi.psi > 0):
        _metric(
            report, "sym_kl",
            lambda: evaluation.symmetric_kl_topics(psi, truth.psi_true),
        )
        report.notes["sym_kl"] = "compared against ground-truth topics"
    else:
        report.omitted["sym_kl"] = "needs --psi-ref or strictly positive --truth topics"

    if args.heldout:
        heldout = read_corpus(args.heldout, args.vocab)
        if args.lam is not None:
            _metric(
                report, "hard_ll",
                lambda: evaluation.hard_predictive_ll(psi, heldout, args.lam),
            )
        else:
            report.omitted["hard_ll"] = "needs --lambda"
        _metric(
            report, "soft_ll",
            lambda: evaluation.soft_predictive_ll(
                psi, heldout, args.alpha, sweeps=args.fold_in_sweeps,
                seed=args.seed,
            ),
        )
    else:
        report.omitted["hard_ll"] = "needs --heldout"
        report.omitted["soft_ll"] = "needs --heldout"
    return report


def _read_model_files(corpus, labels_path, psi_path):
    per_doc = read_labels(labels_path)
    if len(per_doc) != corpus.num_docs:
        raise DimensionMismatchError(
            f"labels file has {len(per_doc)} documents, corpus has {corpus.num_docs}"
        )
    labels = flat_labels(per_doc)
    if labels.shape[0] != corpus.num_tokens:
        raise DimensionMismatchError(
            f"labels file has {labels.shape[0]} labels, corpus has "
            f"{corpus.num_tokens} tokens"
        )
    return labels, TopicMatrix(model.read_matrix(psi_path))


def cmd_eval(args) -> int:
    manifest = RunManifest("eval", vars(args))
    for name in ("corpus", "labels", "psi", "truth", "heldout", "psi_ref"):
        value = getattr(args, name, None)
        if value:
            manifest.add_input(name, value)
    corpus = read_corpus(args.corpus, args.vocab)
    truth = synthgen.read_ground_truth(args.truth) if args.truth else None
    labels, psi = _read_model_files(corpus, args.labels, args.psi)
    report = _evaluate_model(args, corpus, labels, psi, truth)

    if args.sweep_root:
        # every lambda_*/ subdirectory becomes one sweep record; selection
        # among sweep points is left to the reader
        per_lambda = []
        root = Path(args.sweep_root)
        for sub in sorted(root.glob("lambda_*")):
            lam_tag = sub.name.removeprefix("lambda_")
            sweep_labels, sweep_psi = _read_model_files(
                corpus, sub / "labels.txt", sub / "psi.txt"
            )
            sweep_args = argparse.Namespace(**{**vars(args), "lam": float(lam_tag)})
            sub_report = _evaluate_model(
                sweep_args, corpus, sweep_labels, sweep_psi, truth
            )
            metrics = {
                name: getattr(sub_report, name)
                for name in evaluation.EvalReport._METRICS
                if getattr(sub_report, name) is not None
            }
            per_lambda.append((lam_tag, metrics))
        report.per_lambda = tuple(per_lambda)

    kv = report.to_keyvalue()
    sys.stdout.write(kv)
    if args.top_words > 0:
        lines = []
        order = np.argsort(-psi.psi, axis=1)[:, : args.top_words]
        for i, row in enumerate(order):
            words = " ".join(corpus.vocab.terms[w] for w in row)
            lines.append(f"topic {i}: {words}")
        sys.stdout.write("\n".join(lines) + "\n")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    kv_path = Path(str(out) + ".kv")
    csv_path = Path(str(out) + ".csv")
    kv_path.write_text(kv, encoding="ascii")
    csv_path.write_text(report.to_csv(), encoding="ascii")
    manifest.add_output(kv_path)
    manifest.add_output(csv_path)
    manifest.write(Path(str(out) + ".manifest.txt"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def _bench_word(state, psi, config, reps):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        new_z, _ = sva._assign_pass_fast(state, psi.neg_log(), config.threads)
        state.set_labels(new_z)
        psi = model.update_topics(state, config.gamma)
        times.append(time.perf_counter() - t0)
    return float(np.mean(times)), psi


def _bench_refine(state, psi, config, reps, rng):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        sva.refine_pass(state, config, rng)
        psi = model.update_topics(state, config.gamma)
        times.append(time.perf_counter() - t0)
    return float(np.mean(times)), psi


def cmd_bench(args) -> int:
    manifest = RunManifest("bench", vars(args))
    reps = max(3, args.iters)
    algos = args.algos
    rows = []
    # absorb JIT compilation outside the timed region
    warm, _ = synthgen.generate_lda_corpus(
        synthgen.LdaGenSpec(8, args.topics, args.vocab, args.alpha, args.beta,
                            args.doc_len, seed=1)
    )
    warm_cfg = FitConfig(num_topics=args.topics, lam=args.lam, max_iters=1,
                         seed=0, schedule="word+refine")
    sva.word_refine_fit(warm, warm_cfg)
    baselines.cgs_fit(warm, baselines.CgsConfig(
        args.topics, args.cgs_alpha, args.cgs_beta, burnin=1, n_samples=1,
        thinning=1, seed=0,
    ))

    for size in args.sizes:
        spec = synthgen.LdaGenSpec(
            num_docs=size, num_topics=args.topics, vocab_size=args.vocab,
            alpha=args.alpha, beta=args.beta, doc_len=args.doc_len,
            seed=args.seed,
        )
        corpus, _ = synthgen.generate_lda_corpus(spec)
        config = FitConfig(
            num_topics=args.topics, lam=args.lam, max_iters=2, seed=args.seed,
            schedule="word", threads=args.threads,
        )
        # two warm iterations so timing sees realistic topic concentration
        warm_fit = sva.word_fit(corpus, config)
        row = {"size": size}
        t_start = time.perf_counter()
        if "word" in algos or "refine" in algos:
            state = warm_fit.state
            psi = warm_fit.psi
            if "word" in algos:
                mean_s, psi = _bench_word(state, psi, config, reps)
                row["word_s"] = mean_s
            if "refine" in algos:
                rng = np.random.default_rng(args.seed)
                mean_s, psi = _bench_refine(state, psi, config, reps, rng)
                row["refine_s"] = mean_s
        if "cgs" in algos:
            words = corpus.flat_words()
            offsets = corpus.doc_offsets()
            cfg = baselines.CgsConfig(
                args.topics, args.cgs_alpha, args.cgs_beta,
                burnin=0, n_samples=reps, thinning=1, seed=args.seed,
            )
            t0 = time.perf_counter()
            baselines.cgs_fit(corpus, cfg)
            row["cgs_s"] = (time.perf_counter() - t0) / reps
        manifest.add_phase(f"bench.size_{size}", time.perf_counter() - t_start)
        if "cgs_s" in row and "word_s" in row:
            row["word_over_cgs"] = row["word_s"] / row["cgs_s"]
        if "cgs_s" in row and "refine_s" in row:
            row["refine_over_cgs"] = row["refine_s"] / row["cgs_s"]
        rows.append(row)

    columns = ["size", "cgs_s", "word_s", "word_over_cgs", "refine_s", "refine_over_cgs"]
    columns = [c for c in columns if any(c in r for r in rows)]
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for c in columns:
            if c not in row:
                cells.append("")
            elif c == "size":
                cells.append(str(row[c]))
            elif c.endswith("_over_cgs"):
                cells.append(f"{row[c]:.2f}")
            else:
                cells.append(f"{row[c]:.6f}")
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="ascii")
    manifest.add_output(out)
    manifest.write(Path(str(out) + ".manifest.txt"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardlda",
        description="Combinatorial hard topic modeling and benchmark pipelines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample a synthetic corpus with ground truth")
    gen.add_argument("--docs", type=_positive_int, required=True)
    gen.add_argument("--topics", type=_positive_int, required=True)
    gen.add_argument("--vocab", type=_positive_int, required=True)
    gen.add_argument("--alpha", type=_positive_float, required=True)
    gen.add_argument("--beta", type=_positive_float, required=True)
    gen.add_argument("--doc-len", type=_positive_int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    fit = sub.add_parser("fit", help="fit a model to a corpus")
    fit.add_argument("--algo", required=True,
                     choices=["basic", "word", "word-refine", "cgs", "kmeans"])
    fit.add_argument("--corpus", required=True)
    fit.add_argument("--vocab")
    fit.add_argument("--topics", type=_positive_int, required=True)
    fit.add_argument("--lambda", dest="lam", type=_nonneg_float,
                     help="topic-use penalty (required for basic/word/word-refine)")
    fit.add_argument("--lambda-sweep", dest="lambda_sweep", type=_float_list,
                     help="comma-separated penalties, e.g. 6,7,8,9,10,11,12")
    fit.add_argument("--iters", type=_positive_int,
                     help="max iterations (default: 20 basic/word, 10 word-refine)")
    fit.add_argument("--gamma", type=_nonneg_float, default=0.01,
                     help="topic smoothing pseudocount")
    fit.add_argument("--tol", type=_nonneg_float, default=1e-12)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--threads", type=_positive_int, default=1)
    fit.add_argument("--init-from", dest="init_from",
                     help="labels file for warm starts")
    fit.add_argument("--alpha", type=_positive_float,
                     help="document-topic prior (cgs)")
    fit.add_argument("--beta", type=_positive_float,
                     help="topic-word prior (cgs)")
    fit.add_argument("--burnin", type=int, default=500,
                     help="cgs burn-in sweeps (reference full-scale setting: 3000)")
    fit.add_argument("--samples", type=_positive_int, default=5,
                     help="cgs samples to keep (reference: 10)")
    fit.add_argument("--thinning", type=_positive_int, default=10,
                     help="cgs sweeps between samples (reference: 30)")
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=cmd_fit)

    ev = sub.add_parser("eval", help="score model files against a corpus")
    ev.add_argument("--corpus", required=True)
    ev.add_argument("--vocab")
    ev.add_argument("--labels", required=True)
    ev.add_argument("--psi", required=True)
    ev.add_argument("--truth", help="ground-truth sidecar from generate")
    ev.add_argument("--heldout", help="held-out docword file")
    ev.add_argument("--psi-ref", dest="psi_ref",
                    help="second learned topic matrix for symmetric KL")
    ev.add_argument("--sweep-root", dest="sweep_root",
                    help="fit output directory with lambda_*/ subdirectories; "
                         "adds one record per sweep point to the report")
    ev.add_argument("--lambda", dest="lam", type=_nonneg_float,
                    help="penalty for the objective and hard LL")
    ev.add_argument("--alpha", type=_positive_float, default=0.1,
                    help="fold-in prior for the soft LL")
    ev.add_argument("--fold-in-sweeps", type=_positive_int, default=200)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--top-words", type=int, default=10,
                    help="print the top words per topic (0 disables)")
    ev.add_argument("--out", required=True, help="report path prefix")
    ev.set_defaults(func=cmd_eval)

    bench = sub.add_parser("bench", help="per-iteration timing table")
    bench.add_argument("--sizes", type=_int_list, required=True,
                       help="document counts, e.g. 500,1000,2000")
    bench.add_argument("--algos", type=lambda s: s.split(","),
                       default=["word", "refine", "cgs"])
    bench.add_argument("--topics", type=_positive_int, default=20)
    bench.add_argument("--vocab", type=_positive_int, default=2000)
    bench.add_argument("--alpha", type=_positive_float, default=0.04)
    bench.add_argument("--beta", type=_positive_float, default=0.05)
    bench.add_argument("--doc-len", type=_positive_int, default=150)
    bench.add_argument("--lambda", dest="lam", type=_nonneg_float, default=10.0)
    bench.add_argument("--cgs-alpha", type=_positive_float, default=0.04)
    bench.add_argument("--cgs-beta", type=_positive_float, default=0.05)
    bench.add_argument("--iters", type=_positive_int, default=3,
                       help="timing repetitions per algorithm (min 3)")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--threads", type=_positive_int, default=1)
    bench.add_argument("--out", required=True)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "fit" and args.algo in ("basic", "word", "word-refine"):
        if args.lam is None and not args.lambda_sweep:
            parser.error(f"--algo {args.algo} requires --lambda or --lambda-sweep")
    if args.command == "fit" and args.algo == "cgs":
        if args.alpha is None or args.beta is None:
            parser.error("--algo cgs requires --alpha and --beta")
    try:
        return args.func(args)
    except (HardLdaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
