"""Corpus loading and tokenization for short-text collections.

A corpus is a list of titles (one per input line) over an integer word
vocabulary.  Tokenization is deliberately aggressive: text is split on
whitespace and punctuation boundaries, so hyphenated terms fall apart into
their constituent words and surrounding punctuation never survives.  Numerals
and single-character tokens are kept; callers who want them gone can raise
``min_token_len``.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

# Runs of word characters, underscore excluded.  Everything else --
# whitespace, punctuation, hyphens -- is a boundary.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(
    text: str,
    stopwords: frozenset[str] = frozenset(),
    lowercase: bool = True,
    min_token_len: int = 1,
) -> list[str]:
    """Split one title into surface tokens.

    Lowercasing (when enabled) happens before stopword matching, so the
    stopword set is expected in the same case convention.  Tokens shorter
    than ``min_token_len`` are dropped after case folding.
    """
    if lowercase:
        text = text.lower()
    out = []
    for tok in _TOKEN_RE.findall(text):
        if len(tok) < min_token_len:
            continue
        if tok in stopwords:
            continue
        out.append(tok)
    return out


@dataclass
class Title:
    doc_id: int
    tokens: list[int]


@dataclass
class Corpus:
    """Tokenized titles over a bidirectional integer vocabulary.

    ``id_to_word[i]`` is the surface form of word id ``i``;
    ``word_freq[i]`` is its total token count across all titles.  Word ids
    are assigned in first-appearance order, so loading the same input with
    the same stopword list always yields the same mapping.
    """

    titles: list[Title]
    id_to_word: list[str]
    word_to_id: dict[str, int]
    word_freq: list[int]
    stopword_list_id: str = "none"
    lowercase: bool = True
    min_token_len: int = 1

    @property
    def n_titles(self) -> int:
        return len(self.titles)

    @property
    def n_words(self) -> int:
        return len(self.id_to_word)

    @property
    def n_tokens(self) -> int:
        return sum(len(t.tokens) for t in self.titles)

    def surfaces(self, title: Title) -> list[str]:
        return [self.id_to_word[w] for w in title.tokens]

    def phrase_surface(self, words) -> str:
        """Render an order-free word set for display.

        Words are joined most-frequent-first (corpus frequency), with ties
        broken alphabetically, so the same set always renders the same way.
        """
        ordered = sorted(words, key=lambda w: (-self.word_freq[w], self.id_to_word[w]))
        return " ".join(self.id_to_word[w] for w in ordered)


def corpus_from_lines(
    lines,
    stopwords: frozenset[str] = frozenset(),
    lowercase: bool = True,
    min_token_len: int = 1,
    stopword_list_id: str = "none",
) -> Corpus:
    """Build a corpus from already-decoded title strings.

    Titles whose every token is a stopword stay in the corpus as empty
    token lists; downstream stages skip them but document ids keep lining
    up with input line numbers.
    """
    titles: list[Title] = []
    id_to_word: list[str] = []
    word_to_id: dict[str, int] = {}
    word_freq: list[int] = []
    for doc_id, line in enumerate(lines):
        toks = tokenize(line, stopwords, lowercase, min_token_len)
        ids = []
        for tok in toks:
            wid = word_to_id.get(tok)
            if wid is None:
                wid = len(id_to_word)
                word_to_id[tok] = wid
                id_to_word.append(tok)
                word_freq.append(0)
            word_freq[wid] += 1
            ids.append(wid)
        titles.append(Title(doc_id=doc_id, tokens=ids))
    return Corpus(
        titles=titles,
        id_to_word=id_to_word,
        word_to_id=word_to_id,
        word_freq=word_freq,
        stopword_list_id=stopword_list_id,
        lowercase=lowercase,
        min_token_len=min_token_len,
    )


def _read_lines(path: Path) -> list[str]:
    # Decode line by line so a bad byte can be reported with its line number.
    raw = path.read_bytes()
    lines = raw.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    decoded = []
    for i, line in enumerate(lines, start=1):
        try:
            decoded.append(line.decode("utf-8").rstrip("\r"))
        except UnicodeDecodeError as exc:
            raise ValueError(f"{path}: line {i} is not valid UTF-8") from exc
    return decoded


def load_stopwords(path: str | Path | None, lowercase: bool = True) -> tuple[frozenset[str], str]:
    """Read a one-word-per-line stopword file.

    Returns the stopword set together with a provenance id (file name plus
    a content digest prefix) that gets recorded on the corpus, so runs can
    be traced back to the exact list they used.
    """
    if path is None:
        return frozenset(), "none"
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"stopword file not found: {path}")
    raw = path.read_bytes()
    digest = hashlib.sha256(raw).hexdigest()[:12]
    words = set()
    for line in _read_lines(path):
        word = line.strip()
        if not word:
            continue
        words.add(word.lower() if lowercase else word)
    return frozenset(words), f"{path.name}@{digest}"


def load_corpus(
    titles_path: str | Path,
    stopwords_path: str | Path | None = None,
    lowercase: bool = True,
    min_token_len: int = 1,
) -> Corpus:
    """Load a one-title-per-line UTF-8 file into a :class:`Corpus`."""
    titles_path = Path(titles_path)
    if not titles_path.exists():
        raise FileNotFoundError(f"titles file not found: {titles_path}")
    stopwords, sw_id = load_stopwords(stopwords_path, lowercase=lowercase)
    lines = _read_lines(titles_path)
    return corpus_from_lines(
        lines,
        stopwords=stopwords,
        lowercase=lowercase,
        min_token_len=min_token_len,
        stopword_list_id=sw_id,
    )


def write_vocabulary(corpus: Corpus, path: str | Path) -> None:
    """Dump the vocabulary as TSV: word id, surface form, corpus frequency."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for wid, word in enumerate(corpus.id_to_word):
            fh.write(f"{wid}\t{word}\t{corpus.word_freq[wid]}\n")
