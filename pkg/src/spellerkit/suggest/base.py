"""Suggestion types shared by every backend.

A suggestion set always has the fixed 5 words + 2 sentences arity matching
key slots 33-39; empty strings mark unavailable slots. Sets optionally carry
the hash of the speller state they were computed for, so a session can reject
stale sets produced by overlapping fetches.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

N_WORDS = 5
N_SENTENCES = 2

#: Characters that belong to a word while typing; apostrophe is word-internal
#: ("what's" is one token), comma and question mark end one.
WORD_CHARS = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ'")


def _clean(entry: str | None) -> str:
    if not entry:
        return ""
    return " ".join(str(entry).split())


@dataclass(frozen=True)
class SuggestionSet:
    words: tuple[str, ...] = ("",) * N_WORDS
    sentences: tuple[str, ...] = ("",) * N_SENTENCES
    state_hash: str | None = None
    degraded: bool = False

    def __post_init__(self):
        if len(self.words) != N_WORDS or len(self.sentences) != N_SENTENCES:
            raise ValueError("suggestion sets are exactly 5 words + 2 sentences")

    @classmethod
    def of(cls, words=(), sentences=(), state_hash=None, degraded=False) -> "SuggestionSet":
        """Build a set from loose lists: pad with empties, truncate extras."""
        w = [_clean(x) for x in list(words)[:N_WORDS]]
        s = [_clean(x) for x in list(sentences)[:N_SENTENCES]]
        w += [""] * (N_WORDS - len(w))
        s += [""] * (N_SENTENCES - len(s))
        return cls(tuple(w), tuple(s), state_hash, degraded)

    def with_state_hash(self, state_hash: str) -> "SuggestionSet":
        return replace(self, state_hash=state_hash)

    def is_empty(self) -> bool:
        return not any(self.words) and not any(self.sentences)


@dataclass(frozen=True)
class SuggestMode:
    kind: str  # "completion" | "prediction"
    prefix: str = ""

    @classmethod
    def completion(cls, prefix: str) -> "SuggestMode":
        if not prefix or " " in prefix:
            raise ValueError("completion prefix must be nonempty and space-free")
        return cls("completion", prefix)

    @classmethod
    def prediction(cls) -> "SuggestMode":
        return cls("prediction")


def trailing_word(text: str) -> str:
    """Maximal trailing run of word characters."""
    i = len(text)
    while i > 0 and text[i - 1] in WORD_CHARS:
        i -= 1
    return text[i:]


def mode_of(current_text: str) -> SuggestMode:
    """Completion of the trailing partial word, or prediction of the next one.

    Empty text, or text ending in space or sentence punctuation, asks for the
    next word; anything else asks to complete the trailing word-character run.
    """
    prefix = trailing_word(current_text)
    if prefix:
        return SuggestMode.completion(prefix)
    return SuggestMode.prediction()


@dataclass(frozen=True)
class SuggestionRequest:
    current_text: str
    dialogue_context: tuple[tuple[str, str], ...] = ()
    category: str = ""

    @property
    def mode(self) -> SuggestMode:
        return mode_of(self.current_text)


def state_fingerprint(*parts: str) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode())
        h.update(b"\x1f")
    return h.hexdigest()[:16]


@dataclass
class ScriptedSuggester:
    """Fixed buffer-text -> suggestion-set mapping; empty set when unscripted.

    Used to replay a recorded suggestion stream deterministically.
    """

    script: dict[str, SuggestionSet] = field(default_factory=dict)

    def suggest(self, req: SuggestionRequest) -> SuggestionSet:
        return self.script.get(req.current_text, SuggestionSet())
