"""Frequent word-set mining over topic-labeled titles.

Each title contributes to topic t the set of its words labeled t; duplicate
words inside one title collapse, so candidate phrases are order-free word
sets and support counts transactions, not token occurrences.  Mining is a
level-wise join-and-prune sweep with exact support counting throughout: no
sampling, no approximation.  The background topic's transactions are built
like any other topic's (the ranking stage needs them as a contrast
collection) but are never mined for candidates.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

from .corpus import Corpus
from .topicmodel import LabeledCorpus


@dataclass
class TopicTransactions:
    """All transactions of one topic: parallel doc id and word-set lists."""

    topic: int
    doc_ids: list[int]
    transactions: list[frozenset[int]]

    @property
    def d_t_size(self) -> int:
        return len(self.transactions)


@dataclass(frozen=True)
class CandidateKeyphrase:
    words: frozenset[int]
    freq: int
    topic: int


def build_transactions(labeled: LabeledCorpus) -> list[TopicTransactions]:
    """Group each title's words by label into per-topic transactions.

    Returns one entry per topic 0..k, index equal to topic id.  A title
    appears in topic t only if at least one of its tokens is labeled t, so
    one title can feed several topics and empty transactions never occur.
    """
    k = labeled.n_topics
    per_topic: list[list[tuple[int, frozenset[int]]]] = [[] for _ in range(k + 1)]
    for title, labels in zip(labeled.corpus.titles, labeled.map_labels):
        if not title.tokens:
            continue
        buckets: dict[int, set[int]] = {}
        for w, t in zip(title.tokens, labels):
            buckets.setdefault(t, set()).add(w)
        for t, words in buckets.items():
            per_topic[t].append((title.doc_id, frozenset(words)))
    return [
        TopicTransactions(
            topic=t,
            doc_ids=[d for d, _ in rows],
            transactions=[ws for _, ws in rows],
        )
        for t, rows in enumerate(per_topic)
    ]


def mine_candidates(
    txns: TopicTransactions,
    min_support: int,
    max_size: int,
) -> list[CandidateKeyphrase]:
    """Enumerate every word set of size 1..max_size with exact support >= min_support.

    Classic level-wise mining: level 1 counts unigrams directly; level n
    candidates are joins of level n-1 survivors sharing an (n-2)-prefix,
    pruned unless all their subsets survived, then counted exactly against
    the transactions.  Anti-monotonicity makes this exhaustive.
    """
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    if max_size < 1:
        raise ValueError("max_size must be >= 1")

    unigram_counts = Counter()
    for t in txns.transactions:
        unigram_counts.update(t)
    frequent_words = {w for w, n in unigram_counts.items() if n >= min_support}

    found: list[tuple[frozenset[int], int]] = [
        (frozenset((w,)), unigram_counts[w]) for w in sorted(frequent_words)
    ]

    # Pre-filter transactions to frequent words; anything else can never
    # appear in a frequent set.
    filtered = [tuple(sorted(w for w in t if w in frequent_words)) for t in txns.transactions]
    prev_level = [(w,) for w in sorted(frequent_words)]

    for size in range(2, max_size + 1):
        if not prev_level:
            break
        prev_set = set(prev_level)
        candidates = set()
        for i, a in enumerate(prev_level):
            prefix = a[:-1]
            for b in prev_level[i + 1:]:
                if b[:-1] != prefix:
                    break  # prev_level is sorted, shared prefixes are contiguous
                cand = a + (b[-1],)
                if all(cand[:j] + cand[j + 1:] in prev_set for j in range(size)):
                    candidates.add(cand)
        if not candidates:
            break
        counts: Counter = Counter()
        for t in filtered:
            if len(t) < size:
                continue
            for combo in combinations(t, size):
                if combo in candidates:
                    counts[combo] += 1
        level = [(c, n) for c, n in counts.items() if n >= min_support]
        level.sort()
        found.extend((frozenset(c), n) for c, n in level)
        prev_level = [c for c, _ in level]

    out = [CandidateKeyphrase(words=ws, freq=n, topic=txns.topic) for ws, n in found]
    out.sort(key=lambda c: (-c.freq, len(c.words), sorted(c.words)))
    return out


class TransactionIndex:
    """Inverted word -> transaction postings for exact support queries.

    Support of any word set, frequent or not, is the size of the postings
    intersection; the ranking measures need that exactness for sets well
    below the mining threshold.
    """

    def __init__(self, txns: TopicTransactions):
        self.topic = txns.topic
        self.transactions = txns.transactions
        self.n_transactions = len(txns.transactions)
        self.postings: dict[int, set[int]] = {}
        for idx, t in enumerate(txns.transactions):
            for w in t:
                self.postings.setdefault(w, set()).add(idx)

    def support(self, words) -> int:
        return len(self._matching(words))

    def _matching(self, words) -> set[int]:
        rows = [self.postings.get(w) for w in words]
        if any(r is None for r in rows):
            return set()
        rows.sort(key=len)
        acc = rows[0]
        for r in rows[1:]:
            acc = acc & r
            if not acc:
                break
        return acc

    def extension_supports(self, words: frozenset[int]) -> Counter:
        """Counts of every single-word superset: word w -> support(words + {w})."""
        ext: Counter = Counter()
        for idx in self._matching(words):
            for w in self.transactions[idx]:
                if w not in words:
                    ext[w] += 1
        return ext


def write_candidates(
    candidates: list[CandidateKeyphrase],
    corpus: Corpus,
    path: str | Path,
    min_support: int,
    max_size: int,
    config_hash: str | None = None,
    upstream_hash: str | None = None,
) -> None:
    """Write one topic's candidates as TSV: surface phrase, support."""
    if not candidates:
        topic = -1
    else:
        topic = candidates[0].topic
        if any(c.topic != topic for c in candidates):
            raise ValueError("candidates from multiple topics in one file")
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("# candidates v1\n")
        fh.write(f"# topic={topic}\n")
        fh.write(f"# min_support={min_support} max_size={max_size}\n")
        if config_hash is not None:
            fh.write(f"# config_hash={config_hash}\n")
        if upstream_hash is not None:
            fh.write(f"# upstream_hash={upstream_hash}\n")
        for c in candidates:
            fh.write(f"{corpus.phrase_surface(c.words)}\t{c.freq}\n")


def read_candidates(
    path: str | Path,
    corpus: Corpus,
) -> tuple[list[CandidateKeyphrase], dict[str, str]]:
    """Reload a candidates file, mapping surfaces back to word ids."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"candidates file not found: {path}")
    header: dict[str, str] = {}
    rows: list[CandidateKeyphrase] = []
    topic = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                for part in body.split():
                    if "=" in part:
                        key, value = part.split("=", 1)
                        header[key] = value
                continue
            if topic is None:
                if "topic" not in header:
                    raise ValueError(f"{path}: missing '# topic=' header")
                topic = int(header["topic"])
            try:
                surface, freq_s = line.split("\t")
            except ValueError:
                raise ValueError(f"{path}: expected 'phrase<TAB>support' on line {lineno}")
            words = set()
            for tok in surface.split():
                wid = corpus.word_to_id.get(tok)
                if wid is None:
                    raise ValueError(f"{path}: word {tok!r} (line {lineno}) not in corpus vocabulary")
                words.add(wid)
            rows.append(CandidateKeyphrase(words=frozenset(words), freq=int(freq_s), topic=topic))
    return rows, header
