"""Ranking quality metrics: judged relevance (nKQM@K) and label coupling (MI).

nKQM@K is a discounted-gain score over human judgments.  Each judge's
influence is their mean pairwise linearly-weighted Cohen's kappa against the
other judges, so an unreliable judge is down-weighted but never silenced
(weights are floored at a small positive epsilon).  Per topic, the
discounted gain of the submitted top-K list is normalized by the ideal gain
achievable from that topic's full judged pool, then averaged over topics.

MI@K needs no judges: pool every topic's top K phrases, stick each phrase to
the single topic that ranks it best, match phrases into titles as order-free
word-set containment, and measure the mutual information between the induced
topic votes and known title categories.  Titles matching nothing contribute
a uniform vote so the metric cannot be gamed by matching almost no titles.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus

KAPPA_WEIGHT_FLOOR = 1e-6
_SCALE = (1, 2, 3, 4, 5)

Phrase = frozenset  # frozenset[str]: order-free surface word set


def _phrase_key(surface: str) -> Phrase:
    return frozenset(surface.split())


@dataclass
class JudgeScores:
    """Relevance judgments on a 1..5 scale, keyed by (topic, phrase, judge)."""

    scores: dict[tuple[int, Phrase], dict[str, int]] = field(default_factory=dict)

    def add(self, topic: int, phrase: Phrase, judge: str, score: int) -> None:
        if score not in _SCALE:
            raise ValueError(f"judge score {score} outside the 1..5 scale")
        cell = self.scores.setdefault((topic, phrase), {})
        if judge in cell:
            raise ValueError(
                f"duplicate judgment by {judge!r} for topic {topic} phrase {sorted(phrase)}"
            )
        cell[judge] = score

    @property
    def judges(self) -> list[str]:
        seen = set()
        for cell in self.scores.values():
            seen.update(cell)
        return sorted(seen)

    def topics(self) -> list[int]:
        return sorted({t for t, _ in self.scores})

    def pool(self, topic: int) -> dict[Phrase, dict[str, int]]:
        return {p: cell for (t, p), cell in self.scores.items() if t == topic}


def read_judge_scores(path: str | Path) -> JudgeScores:
    """Read a TSV of (topic, phrase, judge, score) rows."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"judge score file not found: {path}")
    out = JudgeScores()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}: expected 4 tab-separated fields on line {lineno}")
            topic_s, surface, judge, score_s = parts
            out.add(int(topic_s), _phrase_key(surface), judge, int(score_s))
    return out


def read_category_labels(path: str | Path) -> dict[int, str]:
    """Read a TSV of (doc_id, category) rows."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"category label file not found: {path}")
    labels: dict[int, str] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}: expected 2 tab-separated fields on line {lineno}")
            doc_id = int(parts[0])
            if doc_id in labels:
                raise ValueError(f"{path}: duplicate doc id {doc_id} on line {lineno}")
            labels[doc_id] = parts[1]
    return labels


def linear_weighted_kappa(a: list[int], b: list[int]) -> float:
    """Cohen's kappa with linear disagreement weights on the 1..5 scale.

    Degenerate pairs (expected disagreement zero, i.e. both raters constant)
    return 0.0: there is no evidence of chance-corrected agreement either way.
    """
    if len(a) != len(b):
        raise ValueError("rating lists must be parallel")
    n = len(a)
    if n == 0:
        raise ValueError("no co-rated items")
    c = len(_SCALE)
    obs = [[0] * c for _ in range(c)]
    for x, y in zip(a, b):
        obs[x - 1][y - 1] += 1
    marg_a = [sum(row) for row in obs]
    marg_b = [sum(obs[i][j] for i in range(c)) for j in range(c)]
    d_obs = 0.0
    d_exp = 0.0
    for i in range(c):
        for j in range(c):
            w = abs(i - j) / (c - 1)
            d_obs += w * obs[i][j] / n
            d_exp += w * marg_a[i] * marg_b[j] / (n * n)
    if d_exp == 0.0:
        return 0.0
    return 1.0 - d_obs / d_exp


def judge_weights(judged: JudgeScores) -> dict[str, float]:
    """Weight each judge by mean pairwise kappa over the whole judged pool.

    A lone judge gets weight 1.  Kappa can be negative, so every weight is
    floored at a small positive value to keep the weighted mean defined.
    """
    judges = judged.judges
    if not judges:
        raise ValueError("no judgments present")
    if len(judges) == 1:
        return {judges[0]: 1.0}
    by_pair: dict[tuple[str, str], tuple[list[int], list[int]]] = defaultdict(
        lambda: ([], [])
    )
    for cell in judged.scores.values():
        present = sorted(cell)
        for i, ja in enumerate(present):
            for jb in present[i + 1:]:
                pa, pb = by_pair[(ja, jb)]
                pa.append(cell[ja])
                pb.append(cell[jb])
    weights = {}
    for j in judges:
        kappas = []
        for other in judges:
            if other == j:
                continue
            pair = (j, other) if j < other else (other, j)
            if pair not in by_pair:
                continue
            a, b = by_pair[pair]
            if pair[0] == j:
                kappas.append(linear_weighted_kappa(a, b))
            else:
                kappas.append(linear_weighted_kappa(b, a))
        mean = sum(kappas) / len(kappas) if kappas else 0.0
        weights[j] = max(mean, KAPPA_WEIGHT_FLOOR)
    return weights


def agreement_weighted_score(cell: dict[str, int], weights: dict[str, float]) -> float:
    """Weighted mean of one phrase's judgments."""
    if not cell:
        raise ValueError("phrase has no judgments")
    total_w = 0.0
    total = 0.0
    for judge, score in cell.items():
        w = weights.get(judge)
        if w is None:
            raise ValueError(f"no weight for judge {judge!r}")
        total_w += w
        total += w * score
    return total / total_w


def nkqm_at_k(
    rankings: dict[int, list[Phrase]],
    judged: JudgeScores,
    k: int,
) -> float:
    """Normalized discounted judged quality of per-topic top-K lists.

    Every submitted phrase down to rank K must be judged; K must not exceed
    any topic's judged pool, since the normalizer is the ideal discounted
    gain over that pool.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not rankings:
        raise ValueError("no rankings given")
    weights = judge_weights(judged)
    total = 0.0
    for topic in sorted(rankings):
        pool = judged.pool(topic)
        if k > len(pool):
            raise ValueError(
                f"k={k} exceeds the judged pool ({len(pool)} phrases) for topic {topic}"
            )
        pool_scores = {p: agreement_weighted_score(cell, weights) for p, cell in pool.items()}
        ideal = sorted(pool_scores.values(), reverse=True)
        ideal_gain = sum(s / math.log2(j + 2) for j, s in enumerate(ideal[:k]))
        ranked = rankings[topic]
        if len(ranked) < k:
            raise ValueError(f"ranking for topic {topic} has fewer than k={k} phrases")
        gain = 0.0
        for j, phrase in enumerate(ranked[:k]):
            if phrase not in pool_scores:
                raise ValueError(
                    f"phrase {' '.join(sorted(phrase))!r} at rank {j + 1} of topic {topic}"
                    " has no judgments"
                )
            gain += pool_scores[phrase] / math.log2(j + 2)
        total += gain / ideal_gain
    return total / len(rankings)


def assign_phrases(rankings: dict[int, list[Phrase]], k: int) -> dict[Phrase, int]:
    """Pool top-K phrases and give each to the topic ranking it best.

    Rank ties go to the lower topic id, so the assignment is deterministic
    regardless of dict ordering.
    """
    best: dict[Phrase, tuple[int, int]] = {}
    for topic in sorted(rankings):
        for pos, phrase in enumerate(rankings[topic][:k]):
            cur = best.get(phrase)
            if cur is None or pos < cur[0]:
                best[phrase] = (pos, topic)
    return {p: t for p, (_, t) in best.items()}


def mi_at_k(
    rankings: dict[int, list[Phrase]],
    corpus: Corpus,
    labels: dict[int, str],
    k: int,
) -> float:
    """Mutual information between phrase-vote topics and title categories.

    Each title votes for the topics of the pooled phrases it contains
    (order-free word-set containment), splitting one unit of mass evenly
    among them; titles containing none spread their unit over all topics.
    The joint distribution of (topic vote, category) is then scored with
    base-2 mutual information, with the usual 0 log 0 = 0 convention.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not corpus.titles:
        raise ValueError("empty corpus")
    if not rankings:
        raise ValueError("no rankings given")
    topics = sorted(rankings)
    assignment = assign_phrases(rankings, k)
    # Single-word phrases match by plain membership; only true multiword
    # sets need the subset test.
    single: dict[str, int] = {}
    multi: list[tuple[Phrase, int]] = []
    for phrase, t in assignment.items():
        if len(phrase) == 1:
            single[next(iter(phrase))] = t
        else:
            multi.append((phrase, t))

    mass: dict[tuple[int, str], float] = defaultdict(float)
    n = 0
    for title in corpus.titles:
        if title.doc_id not in labels:
            raise ValueError(f"no category label for doc id {title.doc_id}")
        cat = labels[title.doc_id]
        toks = {corpus.id_to_word[w] for w in title.tokens}
        hits = [single[w] for w in toks if w in single]
        hits.extend(t for phrase, t in multi if phrase <= toks)
        n += 1
        if hits:
            share = 1.0 / len(hits)
            for t in hits:
                mass[(t, cat)] += share
        else:
            share = 1.0 / len(topics)
            for t in topics:
                mass[(t, cat)] += share

    p_topic: dict[int, float] = defaultdict(float)
    p_cat: dict[str, float] = defaultdict(float)
    for (t, c), m in mass.items():
        p_topic[t] += m / n
        p_cat[c] += m / n
    mi = 0.0
    for (t, c), m in mass.items():
        p = m / n
        if p > 0.0:
            mi += p * math.log2(p / (p_topic[t] * p_cat[c]))
    return mi


@dataclass
class MetricReport:
    """One metric evaluated at several cutoffs, with provenance metadata."""

    metric: str
    values: dict[int, float]
    metadata: dict[str, str] = field(default_factory=dict)

    def write_tsv(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write(f"# metric={self.metric}\n")
            for key in sorted(self.metadata):
                fh.write(f"# {key}={self.metadata[key]}\n")
            for k in sorted(self.values):
                fh.write(f"{k}\t{self.values[k]:.12g}\n")
