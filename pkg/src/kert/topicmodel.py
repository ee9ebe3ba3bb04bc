"""Background-aware topic inference for title corpora.

Standard LDA is extended with one extra topic, index 0, shared by the whole
corpus: each token first flips a Bernoulli coin to decide whether it is a
background word (drawn from topic 0 regardless of the title) or a foreground
word (drawn through the title's topic mixture over topics 1..k).  Inference
is collapsed Gibbs sampling over the joint (switch, topic) choice per token,
followed by a maximum a posteriori labeling read off per-token sample
histograms after burn-in.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, Title, corpus_from_lines


@dataclass(frozen=True)
class ModelConfig:
    """Sampler hyperparameters.

    ``foreground_prior`` is the Bernoulli prior probability that a token is
    topical rather than background.  The per-token prior is weak, so on a
    sizable corpus the likelihood decides which words are background; on very
    small corpora a low value can pull everything into the background topic,
    in which case raise it (the bundled sample config uses 0.9).
    """

    n_topics: int
    alpha: float = 1.0
    beta: float = 0.07
    foreground_prior: float = 0.1
    burn_in: int = 200
    n_sweeps: int = 500
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_topics < 1:
            raise ValueError("n_topics must be >= 1")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if not 0.0 < self.foreground_prior < 1.0:
            raise ValueError("foreground_prior must lie strictly between 0 and 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.n_sweeps <= self.burn_in:
            raise ValueError("n_sweeps must exceed burn_in")


@dataclass
class AssignmentState:
    """Current token assignments plus the count caches the sampler reads.

    ``z[d][i]`` is the topic of token i of title d, 0 meaning background;
    ``y[d][i]`` is its foreground indicator, kept in lockstep with z.
    Counts are plain nested lists: the sampler touches them one cell at a
    time, where list indexing beats array indexing by a wide margin.
    """

    y: list[list[int]]
    z: list[list[int]]
    count_topic_word: list[list[int]]      # (k+1) x V
    count_doc_topic: list[list[int]]       # D x k, foreground topics only
    count_topic_total: list[int]           # k+1
    count_doc_foreground: list[int]
    count_doc_background: list[int]
    n_topics: int
    rng: random.Random = field(repr=False, default_factory=random.Random)


@dataclass
class LabeledCorpus:
    """A corpus with one topic label per token (0 = background)."""

    corpus: Corpus
    n_topics: int
    map_labels: list[list[int]]
    phi_hat: np.ndarray | None = None    # (k+1, V), rows sum to 1
    theta_hat: np.ndarray | None = None  # (D, k), rows sum to 1
    config: ModelConfig | None = None


def init_assignments(corpus: Corpus, config: ModelConfig) -> AssignmentState:
    """Draw the initial assignment: switch from the prior, topic uniform."""
    k = config.n_topics
    V = corpus.n_words
    rng = random.Random(config.seed)
    lam = config.foreground_prior

    y: list[list[int]] = []
    z: list[list[int]] = []
    ctw = [[0] * V for _ in range(k + 1)]
    cdt = [[0] * k for _ in range(corpus.n_titles)]
    ctt = [0] * (k + 1)
    cdf = [0] * corpus.n_titles
    cdb = [0] * corpus.n_titles

    for d, title in enumerate(corpus.titles):
        y_d: list[int] = []
        z_d: list[int] = []
        for w in title.tokens:
            if rng.random() < lam:
                t = 1 + int(rng.random() * k)
                if t > k:  # guard the measure-zero edge of float truncation
                    t = k
                y_d.append(1)
                z_d.append(t)
                cdt[d][t - 1] += 1
                cdf[d] += 1
            else:
                t = 0
                y_d.append(0)
                z_d.append(0)
                cdb[d] += 1
            ctw[t][w] += 1
            ctt[t] += 1
        y.append(y_d)
        z.append(z_d)

    return AssignmentState(
        y=y, z=z,
        count_topic_word=ctw,
        count_doc_topic=cdt,
        count_topic_total=ctt,
        count_doc_foreground=cdf,
        count_doc_background=cdb,
        n_topics=k,
        rng=rng,
    )


def gibbs_sweep(state: AssignmentState, corpus: Corpus, config: ModelConfig) -> AssignmentState:
    """Resample every token's (switch, topic) pair once, in corpus order.

    For each token the current assignment is removed from the counts and a
    joint proposal is sampled:

        P(background)   prop. to  (1 - lam) * (n0_w + beta) / (n0 + V*beta)
        P(topic t)      prop. to  lam * (nd_t + alpha) / (nd_fg + k*alpha)
                                      * (nt_w + beta) / (nt + V*beta)

    with the smoothed counts taken over all other tokens.  The switch prior
    ``lam`` is a fixed parameter, never resampled.  Inconsistent bookkeeping
    (a count driven negative, or totals that stop adding up) raises
    ValueError rather than sampling on from a corrupt state.
    """
    k = state.n_topics
    lam = config.foreground_prior
    one_minus_lam = 1.0 - lam
    alpha = config.alpha
    beta = config.beta
    vbeta = corpus.n_words * beta
    kalpha = k * alpha
    rand = state.rng.random

    ctw = state.count_topic_word
    ctt = state.count_topic_total
    cdf = state.count_doc_foreground
    cdb = state.count_doc_background
    bg_row = ctw[0]
    weights = [0.0] * (k + 1)

    for d, title in enumerate(corpus.titles):
        toks = title.tokens
        if not toks:
            continue
        z_d = state.z[d]
        y_d = state.y[d]
        cdt_d = state.count_doc_topic[d]
        for i, w in enumerate(toks):
            old = z_d[i]
            if old == 0:
                bg_row[w] -= 1
                ctt[0] -= 1
                cdb[d] -= 1
                if bg_row[w] < 0:
                    raise ValueError("count bookkeeping went negative (background)")
            else:
                row = ctw[old]
                row[w] -= 1
                ctt[old] -= 1
                cdt_d[old - 1] -= 1
                cdf[d] -= 1
                if row[w] < 0 or cdt_d[old - 1] < 0:
                    raise ValueError("count bookkeeping went negative (topic %d)" % old)

            total = one_minus_lam * (bg_row[w] + beta) / (ctt[0] + vbeta)
            weights[0] = total
            fg_scale = lam / (cdf[d] + kalpha)
            for t in range(1, k + 1):
                wt = fg_scale * (cdt_d[t - 1] + alpha) * (ctw[t][w] + beta) / (ctt[t] + vbeta)
                weights[t] = wt
                total += wt

            u = rand() * total
            new = 0
            acc = weights[0]
            while u > acc and new < k:
                new += 1
                acc += weights[new]

            if new == 0:
                bg_row[w] += 1
                ctt[0] += 1
                cdb[d] += 1
                y_d[i] = 0
            else:
                ctw[new][w] += 1
                ctt[new] += 1
                cdt_d[new - 1] += 1
                cdf[d] += 1
                y_d[i] = 1
            z_d[i] = new

    if sum(ctt) != corpus.n_tokens:
        raise ValueError("token count no longer conserved after sweep")
    return state


def conditional_distribution(
    state: AssignmentState,
    corpus: Corpus,
    config: ModelConfig,
    d: int,
    i: int,
) -> list[float]:
    """Normalized proposal probabilities for one token, labels 0..k.

    This is the reference form of the quantity :func:`gibbs_sweep` samples
    from: the token's own contribution is removed from the counts before
    evaluating.  Useful for diagnostics and for checking properties of the
    sampler (the distribution is equivariant under topic relabeling).
    """
    k = state.n_topics
    w = corpus.titles[d].tokens[i]
    cur = state.z[d][i]
    lam = config.foreground_prior
    beta = config.beta
    alpha = config.alpha
    vbeta = corpus.n_words * beta

    def less_current(value: int, label: int) -> int:
        return value - 1 if cur == label else value

    weights = [
        (1.0 - lam)
        * (less_current(state.count_topic_word[0][w], 0) + beta)
        / (less_current(state.count_topic_total[0], 0) + vbeta)
    ]
    fg = state.count_doc_foreground[d] - (1 if cur != 0 else 0)
    for t in range(1, k + 1):
        cdt = less_current(state.count_doc_topic[d][t - 1], t)
        weights.append(
            lam
            * (cdt + alpha) / (fg + k * alpha)
            * (less_current(state.count_topic_word[t][w], t) + beta)
            / (less_current(state.count_topic_total[t], t) + vbeta)
        )
    # fsum makes the normalizer independent of summation order, so relabeling
    # topics permutes the probabilities bit-for-bit.
    total = math.fsum(weights)
    return [x / total for x in weights]


def map_label(histogram: list[int]) -> int:
    """Mode of a per-token label histogram, ties resolved to the lower label."""
    best = 0
    for t in range(1, len(histogram)):
        if histogram[t] > histogram[best]:
            best = t
    return best


def verify_counts(state: AssignmentState, corpus: Corpus) -> None:
    """Recount everything from the raw assignments and compare.

    This is the independent bookkeeping check: any divergence between the
    incremental caches and a from-scratch recount signals an internal bug
    and raises immediately.
    """
    k = state.n_topics
    V = corpus.n_words
    ctw = [[0] * V for _ in range(k + 1)]
    cdt = [[0] * k for _ in range(corpus.n_titles)]
    ctt = [0] * (k + 1)
    cdf = [0] * corpus.n_titles
    cdb = [0] * corpus.n_titles
    for d, title in enumerate(corpus.titles):
        for i, w in enumerate(title.tokens):
            t = state.z[d][i]
            if (t == 0) != (state.y[d][i] == 0):
                raise ValueError(f"switch/topic mismatch at doc {d} token {i}")
            ctw[t][w] += 1
            ctt[t] += 1
            if t == 0:
                cdb[d] += 1
            else:
                cdt[d][t - 1] += 1
                cdf[d] += 1
    checks = [
        ("count_topic_word", ctw, state.count_topic_word),
        ("count_doc_topic", cdt, state.count_doc_topic),
        ("count_topic_total", ctt, state.count_topic_total),
        ("count_doc_foreground", cdf, state.count_doc_foreground),
        ("count_doc_background", cdb, state.count_doc_background),
    ]
    for name, expected, actual in checks:
        if expected != actual:
            raise ValueError(f"inconsistent counts detected in {name}")


def run_inference(corpus: Corpus, config: ModelConfig) -> LabeledCorpus:
    """Run the full chain and label each token with its most sampled topic.

    After ``burn_in`` sweeps, every further sweep contributes one sample to
    a per-token label histogram and to running count sums.  The returned
    labels are the per-token histogram modes (ties resolved toward the
    lower label, so background wins disputes with topic 1), and the
    posterior summaries phi/theta are smoothed normalizations of the
    averaged counts.
    """
    k = config.n_topics
    V = corpus.n_words
    state = init_assignments(corpus, config)

    hist = [[[0] * (k + 1) for _ in title.tokens] for title in corpus.titles]
    sum_ctw = np.zeros((k + 1, V), dtype=np.int64)
    sum_cdt = np.zeros((corpus.n_titles, k), dtype=np.int64)
    sum_cdf = np.zeros(corpus.n_titles, dtype=np.int64)
    n_samples = 0

    for sweep in range(config.n_sweeps):
        gibbs_sweep(state, corpus, config)
        if sweep < config.burn_in:
            continue
        n_samples += 1
        for d, title in enumerate(corpus.titles):
            z_d = state.z[d]
            h_d = hist[d]
            for i in range(len(title.tokens)):
                h_d[i][z_d[i]] += 1
        sum_ctw += np.asarray(state.count_topic_word, dtype=np.int64)
        sum_cdt += np.asarray(state.count_doc_topic, dtype=np.int64)
        sum_cdf += np.asarray(state.count_doc_foreground, dtype=np.int64)

    map_labels = []
    for d, title in enumerate(corpus.titles):
        labels = [map_label(hist[d][i]) for i in range(len(title.tokens))]
        map_labels.append(labels)

    avg_ctw = sum_ctw / n_samples
    avg_cdt = sum_cdt / n_samples
    avg_cdf = sum_cdf / n_samples
    phi = (avg_ctw + config.beta) / (avg_ctw.sum(axis=1, keepdims=True) + V * config.beta)
    theta = (avg_cdt + config.alpha) / (avg_cdf[:, None] + k * config.alpha)

    return LabeledCorpus(
        corpus=corpus,
        n_topics=k,
        map_labels=map_labels,
        phi_hat=phi,
        theta_hat=theta,
        config=config,
    )


def write_labeled_corpus(
    labeled: LabeledCorpus,
    path: str | Path,
    config_hash: str | None = None,
    upstream_hash: str | None = None,
) -> None:
    """Write one line per title of space-separated ``token:label`` pairs.

    Header comment lines carry the topic count and provenance so the file is
    self-describing; titles emptied by stopword removal come out as empty
    lines, which keeps document ids aligned on reload.
    """
    corpus = labeled.corpus
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("# labeled-corpus v1\n")
        fh.write(f"# k={labeled.n_topics}\n")
        fh.write(f"# stopword_list={corpus.stopword_list_id}\n")
        if labeled.config is not None:
            c = labeled.config
            fh.write(
                f"# model alpha={c.alpha} beta={c.beta} foreground_prior={c.foreground_prior}"
                f" burn_in={c.burn_in} sweeps={c.n_sweeps} seed={c.seed}\n"
            )
        if config_hash is not None:
            fh.write(f"# config_hash={config_hash}\n")
        if upstream_hash is not None:
            fh.write(f"# upstream_hash={upstream_hash}\n")
        for title, labels in zip(corpus.titles, labeled.map_labels):
            pairs = [
                f"{corpus.id_to_word[w]}:{t}"
                for w, t in zip(title.tokens, labels)
            ]
            fh.write(" ".join(pairs) + "\n")


def read_labeled_corpus(path: str | Path) -> tuple[LabeledCorpus, dict[str, str]]:
    """Reload a labeled corpus file written by :func:`write_labeled_corpus`.

    Returns the labeled corpus plus the raw header fields (config hash and
    friends) for provenance checks.  Token ids are re-interned in reading
    order, which reproduces the original ids exactly because every token
    occurrence is present in the file.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"labeled corpus file not found: {path}")
    header: dict[str, str] = {}
    token_lines: list[list[tuple[str, int]]] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body and " " not in body.split("=", 1)[0]:
                    key, value = body.split("=", 1)
                    header[key.strip()] = value.strip()
                continue
            pairs = []
            for item in line.split():
                tok, sep, lab = item.rpartition(":")
                if not sep or not lab.lstrip("-").isdigit():
                    raise ValueError(f"{path}: malformed token:label pair {item!r} on line {lineno}")
                pairs.append((tok, int(lab)))
            token_lines.append(pairs)
    if "k" not in header:
        raise ValueError(f"{path}: missing '# k=' header")
    k = int(header["k"])

    lines = [" ".join(tok for tok, _ in pairs) for pairs in token_lines]
    corpus = corpus_from_lines(
        lines,
        stopwords=frozenset(),
        lowercase=False,
        min_token_len=1,
        stopword_list_id=header.get("stopword_list", "none"),
    )
    map_labels = []
    for pairs in token_lines:
        labels = [lab for _, lab in pairs]
        for lab in labels:
            if lab < 0 or lab > k:
                raise ValueError(f"{path}: label {lab} outside 0..{k}")
        map_labels.append(labels)
    labeled = LabeledCorpus(corpus=corpus, n_topics=k, map_labels=map_labels)
    return labeled, header
