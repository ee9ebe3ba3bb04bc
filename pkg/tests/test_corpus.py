"""Tokenization, vocabulary interning, and corpus I/O."""

import pytest
from hypothesis import given, strategies as st

from kert.corpus import (
    corpus_from_lines,
    load_corpus,
    load_stopwords,
    tokenize,
    write_vocabulary,
)


def test_tokenize_splits_hyphens_and_lowercases():
    assert tokenize("Mining Top-K Frequent Closed Patterns") == [
        "mining", "top", "k", "frequent", "closed", "patterns",
    ]


def test_tokenize_strips_punctuation_and_underscores():
    assert tokenize("graphs, trees & streams!") == ["graphs", "trees", "streams"]
    assert tokenize("foo_bar baz") == ["foo", "bar", "baz"]


def test_tokenize_stopwords_checked_after_lowercasing():
    assert tokenize("The Theory", stopwords=frozenset({"the"})) == ["theory"]
    assert tokenize("The Theory", stopwords=frozenset({"the"}), lowercase=False) == [
        "The", "Theory",
    ]


def test_tokenize_min_token_len():
    assert tokenize("a bb ccc", min_token_len=2) == ["bb", "ccc"]


def test_load_corpus_stopword_removal_keeps_empty_titles(tmp_path):
    titles = tmp_path / "titles.txt"
    titles.write_text("support vector machines for text\nthe the the\n", encoding="utf-8")
    stops = tmp_path / "stop.txt"
    stops.write_text("the\nfor\n", encoding="utf-8")
    corpus = load_corpus(titles, stops)
    assert corpus.n_titles == 2
    assert corpus.surfaces(corpus.titles[0]) == ["support", "vector", "machines", "text"]
    assert corpus.titles[1].tokens == []
    assert corpus.titles[0].doc_id == 0
    assert corpus.titles[1].doc_id == 1


def test_word_ids_follow_first_appearance():
    corpus = corpus_from_lines(["b a", "a c"])
    assert corpus.id_to_word == ["b", "a", "c"]
    assert corpus.word_to_id == {"b": 0, "a": 1, "c": 2}
    assert corpus.word_freq == [1, 2, 1]
    assert corpus.n_tokens == 4


def test_two_loads_are_identical():
    lines = ["alpha beta", "beta gamma alpha", "gamma"]
    a = corpus_from_lines(lines)
    b = corpus_from_lines(lines)
    assert a.id_to_word == b.id_to_word
    assert [t.tokens for t in a.titles] == [t.tokens for t in b.titles]
    assert a.word_freq == b.word_freq


def test_phrase_surface_orders_by_frequency_then_alphabet():
    corpus = corpus_from_lines(["rare common", "common", "common zebra", "apple zebra"])
    wid = corpus.word_to_id
    assert corpus.phrase_surface({wid["rare"], wid["common"]}) == "common rare"
    assert corpus.phrase_surface({wid["zebra"], wid["apple"]}) == "zebra apple"
    # rare and apple tie at frequency 1: alphabetical order breaks the tie
    assert corpus.phrase_surface({wid["rare"], wid["apple"]}) == "apple rare"


def test_surfaces_round_trip_through_tokenizer():
    corpus = corpus_from_lines(["mining frequent patterns", "top k lists"])
    for title in corpus.titles:
        for surface in corpus.surfaces(title):
            assert tokenize(surface) == [surface]


def test_invalid_utf8_names_the_line(tmp_path):
    path = tmp_path / "titles.txt"
    path.write_bytes(b"good line\nbad \xff line\n")
    with pytest.raises(ValueError, match="line 2"):
        load_corpus(path)


def test_missing_files_are_reported():
    with pytest.raises(FileNotFoundError):
        load_corpus("/nonexistent/titles.txt")
    with pytest.raises(FileNotFoundError):
        load_stopwords("/nonexistent/stop.txt")


def test_load_stopwords_id_carries_name_and_digest(tmp_path):
    path = tmp_path / "mystops.txt"
    path.write_text("The\nof\n", encoding="utf-8")
    words, list_id = load_stopwords(path)
    assert words == frozenset({"the", "of"})
    name, _, digest = list_id.partition("@")
    assert name == "mystops.txt"
    assert len(digest) == 12
    assert load_stopwords(None) == (frozenset(), "none")


def test_stopword_list_id_recorded_on_corpus(tmp_path):
    titles = tmp_path / "t.txt"
    titles.write_text("a b\n", encoding="utf-8")
    stops = tmp_path / "s.txt"
    stops.write_text("b\n", encoding="utf-8")
    corpus = load_corpus(titles, stops)
    assert corpus.stopword_list_id.startswith("s.txt@")
    assert load_corpus(titles).stopword_list_id == "none"


def test_write_vocabulary(tmp_path):
    corpus = corpus_from_lines(["b a", "a c"])
    out = tmp_path / "vocab.tsv"
    write_vocabulary(corpus, out)
    assert out.read_text(encoding="utf-8") == "0\tb\t1\n1\ta\t2\n2\tc\t1\n"


def test_empty_input():
    corpus = corpus_from_lines([])
    assert corpus.n_titles == 0
    assert corpus.n_words == 0


_words = st.text(alphabet="abcdefg", min_size=1, max_size=5)


@given(
    lines=st.lists(st.lists(_words, max_size=6).map(" ".join), max_size=8),
    stop=st.frozensets(_words, max_size=4),
)
def test_no_stopword_survives_and_ids_are_dense(lines, stop):
    corpus = corpus_from_lines(lines, stopwords=stop)
    seen = set()
    for title in corpus.titles:
        for w in title.tokens:
            assert corpus.id_to_word[w] not in stop
            seen.add(w)
    # every vocabulary id is used by some token, and ids are dense
    assert seen == set(range(corpus.n_words))
    assert [corpus.word_to_id[w] for w in corpus.id_to_word] == list(range(corpus.n_words))
