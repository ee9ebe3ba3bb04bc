"""Keyphrase quality measures and ranked list assembly.

Four measures are computed per candidate, all from exact transaction
supports.  Writing f for support within the candidate's own topic and D for
that topic's transaction count:

  coverage      f(p) / D                      -- how much of the topic p reaches
  phraseness    log of f(p)/D over the product of its words' unigram rates
                                              -- colocation beyond independence
  purity        log of f(p)/D over the best mixed rate (f(p)+f'(p))/(D+D')
                against every other topic, background included
                                              -- exclusivity to the topic
  completeness  1 - (best single-word extension support)/f(p)
                                              -- is p swallowed by a superset

The combined score multiplies coverage into a phraseness/purity blend and
zeroes out candidates whose completeness falls at or below a cutoff.
Ablation variants drop one ingredient at a time so their contributions can
be measured downstream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus
from .miner import CandidateKeyphrase, TopicTransactions, TransactionIndex

VARIANTS = (
    "full",       # completeness filter, cov * ((1-omega)*pur + omega*phr)
    "no_com",     # same blend, filter skipped
    "no_cov",     # filter kept, coverage multiplier dropped
    "no_pur",     # filter kept, omega forced to 1 (cov * phr)
    "no_phr",     # filter kept, omega forced to 0 (cov * pur)
    "cov_only",   # raw coverage, no filter
    "pur_only",   # raw purity, no filter
    "cov_pur",    # cov * pur, no filter
)


@dataclass(frozen=True)
class RankingConfig:
    completeness_cutoff: float = 0.5   # filter when completeness <= this
    phraseness_weight: float = 0.5     # blend weight on phraseness vs purity
    variant: str = "full"

    def __post_init__(self) -> None:
        if not 0.0 <= self.completeness_cutoff <= 1.0:
            raise ValueError("completeness_cutoff must lie in [0, 1]")
        if not 0.0 <= self.phraseness_weight <= 1.0:
            raise ValueError("phraseness_weight must lie in [0, 1]")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")


@dataclass
class ScoredKeyphrase:
    topic: int
    words: frozenset[int]
    surface: str
    freq: int
    coverage: float
    purity: float
    phraseness: float
    completeness: float
    score: float
    filtered: bool
    rank: int = 0


def coverage(candidate: CandidateKeyphrase, index: TransactionIndex) -> float:
    if index.n_transactions == 0:
        raise ValueError(f"topic {candidate.topic} has no transactions")
    return candidate.freq / index.n_transactions


def purity_value(freq: int, n_docs: int, contrasts: list[tuple[int, int]]) -> float:
    """Purity arithmetic on raw counts: own (freq, n_docs) vs contrast pairs.

    Each contrast pair (freq', n_docs') pools with the own collection into a
    mixed rate (freq + freq') / (n_docs + n_docs'); the score is the log
    ratio of the own rate to the worst (largest) mixed rate.
    """
    if n_docs == 0:
        raise ValueError("purity undefined for an empty topic")
    if not contrasts:
        raise ValueError("purity needs at least one contrast collection")
    best = max((freq + f2) / (n_docs + d2) for f2, d2 in contrasts)
    return math.log(freq / n_docs) - math.log(best)


def purity(candidate: CandidateKeyphrase, indexes: list[TransactionIndex]) -> float:
    """Log ratio of the own-topic rate to the best contrast-mix rate.

    The contrast for topic t' pools both collections: (f + f') successes out
    of (D + D') transactions.  Maximizing over every other topic, background
    included, means a phrase only scores high when no other topic shares it.
    """
    own = indexes[candidate.topic]
    if own.n_transactions == 0:
        raise ValueError(f"topic {candidate.topic} has no transactions")
    contrasts = [
        (other.support(candidate.words), other.n_transactions)
        for other in indexes
        if other.topic != candidate.topic
    ]
    return purity_value(candidate.freq, own.n_transactions, contrasts)


def phraseness(candidate: CandidateKeyphrase, index: TransactionIndex) -> float:
    """Pointwise divergence of the set's rate from its words' independent rates.

    Exactly 0.0 for unigrams by construction (the sum collapses to the same
    term), positive when the words co-occur more than independence predicts.
    """
    f = candidate.freq
    d = index.n_transactions
    if len(candidate.words) == 1:
        return 0.0
    total = 0.0
    for w in candidate.words:
        fw = index.support((w,))
        if fw < f or fw == 0:
            raise ValueError(
                f"unigram support {fw} below phrase support {f} for word {w}: "
                "inconsistent transaction index"
            )
        total += math.log(fw / d)
    return math.log(f / d) - total


def completeness(candidate: CandidateKeyphrase, index: TransactionIndex) -> float:
    """1 minus the containment ratio of the best single-word extension.

    Extension supports are counted exactly, however rare the extension; a
    phrase that never occurs without some extra word scores 0, one whose
    extensions never occur scores 1.
    """
    ext = index.extension_supports(candidate.words)
    if not ext:
        return 1.0
    best = max(ext.values())
    return 1.0 - best / candidate.freq


def combined_score(
    cov: float,
    pur: float,
    phr: float,
    com: float,
    config: RankingConfig,
) -> tuple[float, bool]:
    """Apply one scoring variant; returns (score, filtered).

    Filtered candidates always come back with score 0.0 so every variant
    yields directly comparable output rows.
    """
    variant = config.variant
    omega = config.phraseness_weight
    uses_filter = variant in ("full", "no_cov", "no_pur", "no_phr")
    if uses_filter and com <= config.completeness_cutoff:
        return 0.0, True
    if variant == "full" or variant == "no_com":
        return cov * ((1.0 - omega) * pur + omega * phr), False
    if variant == "no_cov":
        return (1.0 - omega) * pur + omega * phr, False
    if variant == "no_pur":
        return cov * phr, False
    if variant == "no_phr":
        return cov * pur, False
    if variant == "cov_only":
        return cov, False
    if variant == "pur_only":
        return pur, False
    if variant == "cov_pur":
        return cov * pur, False
    raise ValueError(f"unknown variant {variant!r}")


def score_candidates(
    candidates: list[CandidateKeyphrase],
    indexes: list[TransactionIndex],
    config: RankingConfig,
    corpus: Corpus,
) -> list[ScoredKeyphrase]:
    """Compute all four measures and the combined score, without ordering."""
    out = []
    for c in candidates:
        own = indexes[c.topic]
        cov = coverage(c, own)
        pur = purity(c, indexes)
        phr = phraseness(c, own)
        com = completeness(c, own)
        score, filtered = combined_score(cov, pur, phr, com, config)
        out.append(
            ScoredKeyphrase(
                topic=c.topic,
                words=c.words,
                surface=corpus.phrase_surface(c.words),
                freq=c.freq,
                coverage=cov,
                purity=pur,
                phraseness=phr,
                completeness=com,
                score=score,
                filtered=filtered,
            )
        )
    return out


def rank_topic(
    candidates: list[CandidateKeyphrase],
    indexes: list[TransactionIndex],
    config: RankingConfig,
    corpus: Corpus,
) -> list[ScoredKeyphrase]:
    """Score one topic's candidates and order them into a ranked list.

    Descending score; ties broken by higher support, then by surface form.
    Filtered candidates keep their measure columns but sort after everything
    else, so consumers can drop or inspect them at will.
    """
    if not candidates:
        return []
    if any(c.topic != candidates[0].topic for c in candidates[1:]):
        raise ValueError("rank_topic expects candidates from a single topic")
    scored = score_candidates(candidates, indexes, config, corpus)
    scored.sort(key=lambda s: (s.filtered, -s.score, -s.freq, s.surface))
    for pos, s in enumerate(scored, start=1):
        s.rank = pos
    return scored


def build_indexes(all_txns: list[TopicTransactions]) -> list[TransactionIndex]:
    return [TransactionIndex(t) for t in all_txns]


_TSV_COLUMNS = "rank\tphrase\tcoverage\tpurity\tphraseness\tcompleteness\tscore\tfiltered"


def write_ranked(
    scored: list[ScoredKeyphrase],
    topic: int,
    tsv_path: str | Path,
    jsonl_path: str | Path,
    config: RankingConfig,
    config_hash: str | None = None,
    upstream_hash: str | None = None,
    top: int = 0,
) -> None:
    """Write one topic's ranked list as TSV plus a JSON-lines twin."""
    rows = scored if top <= 0 else scored[:top]
    header = [
        "# ranked v1",
        f"# topic={topic}",
        f"# gamma={config.completeness_cutoff} omega={config.phraseness_weight} variant={config.variant}",
    ]
    if config_hash is not None:
        header.append(f"# config_hash={config_hash}")
    if upstream_hash is not None:
        header.append(f"# upstream_hash={upstream_hash}")

    with Path(tsv_path).open("w", encoding="utf-8") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write("# " + _TSV_COLUMNS + "\n")
        for s in rows:
            fh.write(
                f"{s.rank}\t{s.surface}\t{s.coverage:.12g}\t{s.purity:.12g}"
                f"\t{s.phraseness:.12g}\t{s.completeness:.12g}\t{s.score:.12g}"
                f"\t{int(s.filtered)}\n"
            )
    with Path(jsonl_path).open("w", encoding="utf-8") as fh:
        for s in rows:
            fh.write(json.dumps({
                "rank": s.rank,
                "topic": s.topic,
                "phrase": s.surface,
                "words": sorted(s.surface.split()),
                "freq": s.freq,
                "coverage": s.coverage,
                "purity": s.purity,
                "phraseness": s.phraseness,
                "completeness": s.completeness,
                "score": s.score,
                "filtered": s.filtered,
            }, sort_keys=True) + "\n")


def read_ranked_phrases(jsonl_path: str | Path) -> tuple[int, list[frozenset[str]]]:
    """Read one topic's ordered phrase list (as surface-word sets) back in."""
    path = Path(jsonl_path)
    if not path.exists():
        raise FileNotFoundError(f"ranked file not found: {path}")
    topic = None
    phrases: list[frozenset[str]] = []
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            if topic is None:
                topic = int(row["topic"])
            phrases.append(frozenset(row["words"]))
    if topic is None:
        raise ValueError(f"{path}: no rows")
    return topic, phrases
