"""Prefix-tree word completion over a frequency-ranked lexicon.

The non-LLM baseline: completion returns the five most frequent lexicon
words with the typed prefix, prediction the five most frequent words
overall. It has no sentence model, so sentence slots stay empty.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .base import N_WORDS, SuggestionRequest, SuggestionSet


class _Node:
    __slots__ = ("children", "count")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.count = 0  # > 0 marks a word end


class TrieLexicon:
    def __init__(self, corpus: dict[str, int] | list[tuple[str, int]]):
        items = corpus.items() if isinstance(corpus, dict) else corpus
        self._root = _Node()
        self._top: list[tuple[int, str]] = []
        n = 0
        for word, count in items:
            word = word.strip().lower()
            if not word:
                continue
            if count < 0:
                raise ValueError(f"negative frequency for {word!r}")
            node = self._root
            for ch in word:
                node = node.children.setdefault(ch, _Node())
            node.count += int(count)
            n += 1
        if n == 0:
            raise ValueError("lexicon corpus is empty")
        self._top = sorted(self._walk(self._root, ""), key=lambda t: (-t[0], t[1]))[:N_WORDS]

    def _walk(self, node: _Node, prefix: str):
        if node.count > 0:
            yield node.count, prefix
        for ch in sorted(node.children):
            yield from self._walk(node.children[ch], prefix + ch)

    def complete(self, prefix: str, limit: int = N_WORDS) -> list[str]:
        """Words starting with ``prefix``, by descending count then lexicographic."""
        node = self._root
        for ch in prefix.lower():
            node = node.children.get(ch)
            if node is None:
                return []
        found = sorted(self._walk(node, prefix.lower()), key=lambda t: (-t[0], t[1]))
        return [w for _, w in found[:limit]]

    def most_frequent(self, limit: int = N_WORDS) -> list[str]:
        return [w for _, w in self._top[:limit]]


def load_lexicon_tsv(path: str | Path) -> TrieLexicon:
    """Lexicon from a (word, count) TSV file; '#' lines are comments."""
    pairs = []
    with Path(path).open() as fh:
        for row in csv.reader(fh, delimiter="\t"):
            if not row or row[0].startswith("#"):
                continue
            pairs.append((row[0], int(row[1])))
    return TrieLexicon(pairs)


def trie_suggest(lexicon: TrieLexicon, req: SuggestionRequest) -> SuggestionSet:
    mode = req.mode
    if mode.kind == "completion":
        words = lexicon.complete(mode.prefix)
    else:
        words = lexicon.most_frequent()
    return SuggestionSet.of(words=words)


class TrieSuggester:
    def __init__(self, lexicon: TrieLexicon):
        self.lexicon = lexicon

    def suggest(self, req: SuggestionRequest) -> SuggestionSet:
        return trie_suggest(self.lexicon, req)
