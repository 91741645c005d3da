"""Deterministic suggestion oracle for reproducible copy-spelling evaluation.

Stands in for a live language model: it reveals the true next reference word
once enough of that word has been typed, and the full reference sentence once
enough of the utterance has been typed. Every other slot holds a decoy that
can never fit the reference, so planner behavior is fully controlled by the
two thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import InconsistentState
from .base import N_SENTENCES, N_WORDS, SuggestionRequest, SuggestionSet, trailing_word

_DECOY_WORDS = (
    "xylophone", "quagmire", "bivouac", "eiderdown",
    "zeppelin", "yodeling", "juniper", "kumquat",
)
_DECOY_SENTENCES = (
    "the quick brown fox jumps over the lazy dog",
    "pack my box with five dozen liquor jugs",
    "sphinx of black quartz, judge my vow",
)


@dataclass(frozen=True)
class OracleProfile:
    """Assistance thresholds; ``inf`` disables the corresponding channel."""

    word_after: float = 1.0  # typed chars of the next word before it is offered
    sentence_after: float = 3.0  # typed chars of the utterance before the sentence


def _tokens(text: str) -> list[str]:
    return text.split()


def _next_word(current_text: str, reference: str) -> tuple[str, int]:
    """(upcoming reference word, chars of it already typed).

    Words are whitespace tokens of the reference, so trailing punctuation
    rides along ("muscle?" is one word). A fully typed word counts as zero
    typed characters of the word after it.
    """
    partial = trailing_word(current_text)
    consumed = len(current_text)
    if partial:
        tail = _tokens(reference[consumed - len(partial):])
        if tail and len(partial) < len(tail[0]):
            return tail[0], len(partial)
    rest = _tokens(reference[consumed:])
    return (rest[0], 0) if rest else ("", 0)


def _safe_word_decoys(avoid: str, count: int) -> list[str]:
    avoid_l = avoid.lower()
    picked = []
    for d in _DECOY_WORDS:
        if avoid_l and (d.startswith(avoid_l) or avoid_l.startswith(d)):
            continue
        picked.append(d)
        if len(picked) == count:
            break
    return picked


def _safe_sentence_decoys(reference: str, count: int) -> list[str]:
    ref_head = _tokens(reference.lower())[:-1]
    picked = []
    for d in _DECOY_SENTENCES:
        if d.lower() == reference.lower() or _tokens(d.lower())[:-1] == ref_head:
            continue
        picked.append(d)
        if len(picked) == count:
            break
    return picked


def oracle_suggest(req: SuggestionRequest, reference: str,
                   profile: OracleProfile) -> SuggestionSet:
    text = req.current_text
    if not reference.lower().startswith(text.lower()):
        raise InconsistentState(
            f"text {text!r} is not a prefix of the reference"
        )

    word, typed = _next_word(text, reference)
    words: list[str] = []
    if word and not math.isinf(profile.word_after) and typed >= profile.word_after:
        words.append(word)
    words += _safe_word_decoys(word, N_WORDS - len(words))

    sentences: list[str] = []
    if not math.isinf(profile.sentence_after) and len(text) >= profile.sentence_after:
        sentences.append(reference)
    sentences += _safe_sentence_decoys(reference, N_SENTENCES - len(sentences))

    return SuggestionSet.of(words=words, sentences=sentences)


class OracleSuggester:
    def __init__(self, reference: str, profile: OracleProfile | None = None):
        self.reference = reference
        self.profile = profile or OracleProfile()

    def suggest(self, req: SuggestionRequest) -> SuggestionSet:
        return oracle_suggest(req, self.reference, self.profile)
