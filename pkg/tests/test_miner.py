"""Transaction building and frequent word-set mining."""

import random

import pytest

from oracles import enumerate_frequent, support_of
from synthetic import labeled_from_token_lists, random_labeled_corpus
from kert.miner import (
    TransactionIndex,
    build_transactions,
    mine_candidates,
    read_candidates,
    write_candidates,
)


def as_word_sets(corpus, transactions):
    return [frozenset(corpus.id_to_word[w] for w in t) for t in transactions]


def test_three_transaction_example():
    labeled = labeled_from_token_lists(
        [["a", "b"], ["a", "b"], ["a", "c"]],
        [[1, 1], [1, 1], [1, 1]],
        n_topics=1,
    )
    txns = build_transactions(labeled)
    cands = mine_candidates(txns[1], min_support=2, max_size=3)
    surfaces = {
        frozenset(labeled.corpus.id_to_word[w] for w in c.words): c.freq for c in cands
    }
    assert surfaces == {
        frozenset({"a"}): 3,
        frozenset({"b"}): 2,
        frozenset({"a", "b"}): 2,
    }
    # output ordering: support descending, then smaller sets first
    assert [c.freq for c in cands] == [3, 2, 2]
    assert [len(c.words) for c in cands] == [1, 1, 2]


def test_duplicate_tokens_collapse_to_one_transaction_element():
    labeled = labeled_from_token_lists(
        [["a", "a", "b"], ["a"]],
        [[1, 1, 1], [1]],
        n_topics=1,
    )
    txns = build_transactions(labeled)
    assert as_word_sets(labeled.corpus, txns[1].transactions) == [
        frozenset({"a", "b"}),
        frozenset({"a"}),
    ]
    cands = mine_candidates(txns[1], min_support=2, max_size=2)
    # "a" occurs three times as a token but in only two titles
    assert [(c.freq, len(c.words)) for c in cands] == [(2, 1)]


def test_build_transactions_splits_titles_by_label():
    labeled = labeled_from_token_lists(
        [["a", "b", "c"], ["b", "c"], []],
        [[1, 2, 0], [2, 2], []],
        n_topics=2,
    )
    txns = build_transactions(labeled)
    assert len(txns) == 3  # background plus two topics, indexed by topic id
    assert [t.topic for t in txns] == [0, 1, 2]
    assert as_word_sets(labeled.corpus, txns[0].transactions) == [frozenset({"c"})]
    assert txns[0].doc_ids == [0]
    assert as_word_sets(labeled.corpus, txns[1].transactions) == [frozenset({"a"})]
    assert as_word_sets(labeled.corpus, txns[2].transactions) == [
        frozenset({"b"}),
        frozenset({"b", "c"}),
    ]
    assert txns[2].doc_ids == [0, 1]
    assert txns[2].d_t_size == 2


def test_mining_parameter_validation():
    labeled = labeled_from_token_lists([["a"]], [[1]], n_topics=1)
    txns = build_transactions(labeled)
    with pytest.raises(ValueError, match="min_support"):
        mine_candidates(txns[1], min_support=0, max_size=2)
    with pytest.raises(ValueError, match="max_size"):
        mine_candidates(txns[1], min_support=1, max_size=0)


def test_max_size_caps_set_size():
    labeled = labeled_from_token_lists(
        [["a", "b", "c", "d"]] * 4,
        [[1, 1, 1, 1]] * 4,
        n_topics=1,
    )
    txns = build_transactions(labeled)
    cands = mine_candidates(txns[1], min_support=2, max_size=2)
    assert max(len(c.words) for c in cands) == 2
    assert len(cands) == 4 + 6  # all unigrams and all pairs, support 4 each
    assert all(c.freq == 4 for c in cands)


def test_mining_matches_powerset_oracle_on_random_corpora():
    rng = random.Random(99)
    for _ in range(40):
        labeled = random_labeled_corpus(rng)
        txns = build_transactions(labeled)
        min_support = rng.randint(1, 4)
        max_size = rng.randint(1, 5)
        for per_topic in txns[1:]:
            got = {
                c.words: c.freq
                for c in mine_candidates(per_topic, min_support, max_size)
            }
            want = enumerate_frequent(per_topic.transactions, min_support, max_size)
            assert got == want


def test_mining_invariants_on_random_corpora():
    rng = random.Random(7)
    for _ in range(25):
        labeled = random_labeled_corpus(rng)
        txns = build_transactions(labeled)
        mu = rng.randint(1, 3)
        for per_topic in txns[1:]:
            cands = mine_candidates(per_topic, mu, max_size=4)
            by_set = {c.words: c.freq for c in cands}
            unigram_support = {}
            for t in per_topic.transactions:
                for w in t:
                    unigram_support[w] = unigram_support.get(w, 0) + 1
            for c in cands:
                assert c.freq >= mu
                assert c.topic == per_topic.topic
                # anti-monotonicity against every returned subset
                for other, freq in by_set.items():
                    if other < c.words:
                        assert c.freq <= freq
            # every frequent unigram is present
            for w, n in unigram_support.items():
                if n >= mu:
                    assert frozenset({w}) in by_set


def test_index_support_matches_counting():
    rng = random.Random(31)
    for _ in range(20):
        labeled = random_labeled_corpus(rng)
        txns = build_transactions(labeled)
        for per_topic in txns:
            if not per_topic.transactions:
                continue
            index = TransactionIndex(per_topic)
            assert index.n_transactions == len(per_topic.transactions)
            vocab = sorted(set().union(*per_topic.transactions))
            for _ in range(15):
                probe = frozenset(rng.sample(vocab, min(len(vocab), rng.randint(1, 3))))
                assert index.support(probe) == support_of(probe, per_topic.transactions)
            # absent words give zero support
            assert index.support(frozenset({10_000})) == 0


def test_extension_supports_match_counting():
    rng = random.Random(13)
    for _ in range(15):
        labeled = random_labeled_corpus(rng)
        txns = build_transactions(labeled)
        for per_topic in txns:
            if not per_topic.transactions:
                continue
            index = TransactionIndex(per_topic)
            vocab = sorted(set().union(*per_topic.transactions))
            probe = frozenset(rng.sample(vocab, min(len(vocab), 2)))
            ext = index.extension_supports(probe)
            for w in vocab:
                if w in probe:
                    assert w not in ext
                    continue
                expected = support_of(probe | {w}, per_topic.transactions)
                assert ext.get(w, 0) == expected


def test_candidates_file_round_trip(tmp_path):
    labeled = labeled_from_token_lists(
        [["a", "b"], ["a", "b"], ["a", "c"]],
        [[1, 1], [1, 1], [1, 1]],
        n_topics=1,
    )
    txns = build_transactions(labeled)
    cands = mine_candidates(txns[1], min_support=2, max_size=2)
    path = tmp_path / "candidates_topic1.tsv"
    write_candidates(cands, labeled.corpus, path, min_support=2, max_size=2,
                     config_hash="beef", upstream_hash="cafe")
    back, header = read_candidates(path, labeled.corpus)
    assert header["topic"] == "1"
    assert header["min_support"] == "2"
    assert header["max_size"] == "2"
    assert header["config_hash"] == "beef"
    assert header["upstream_hash"] == "cafe"
    assert back == cands


def test_candidates_reader_rejects_unknown_words(tmp_path):
    labeled = labeled_from_token_lists([["a"]], [[1]], n_topics=1)
    path = tmp_path / "c.tsv"
    path.write_text("# topic=1\nzzz\t3\n", encoding="utf-8")
    with pytest.raises(ValueError, match="'zzz'"):
        read_candidates(path, labeled.corpus)


def test_candidates_reader_requires_topic_header(tmp_path):
    labeled = labeled_from_token_lists([["a"]], [[1]], n_topics=1)
    path = tmp_path / "c.tsv"
    path.write_text("a\t3\n", encoding="utf-8")
    with pytest.raises(ValueError, match="topic"):
        read_candidates(path, labeled.corpus)


def test_candidates_reader_missing_file():
    labeled = labeled_from_token_lists([["a"]], [[1]], n_topics=1)
    with pytest.raises(FileNotFoundError):
        read_candidates("/nonexistent/c.tsv", labeled.corpus)
