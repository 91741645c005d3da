"""Speller state machine and the trial loop around it.

Editing semantics:

* Letters, punctuation, and space append. Accepting a word suggestion leaves
  the buffer ending on that word and arms a word-boundary flag; the next
  typed letter inserts the separating space itself. This keeps a freshly
  accepted word replaceable by a longer completion of it (typing "w",
  accepting "what", then accepting "What's" leaves exactly "What's"), which
  is how users chain completions.
* Word slots replace the trailing partial word; at a word boundary they
  replace only when the new word extends the current one, otherwise they
  append as a next-word prediction.
* Sentence slots replace the whole buffer. Delete drops the trailing word.
  Undo restores the previous state exactly, one action at a time; enter
  finalizes and is itself undoable so an accidental enter can be corrected.

All transitions are pure: ``apply_key`` returns a new state.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .errors import AlreadyFinalized, EmptySlotSelected, SpellerError, StaleSuggestions
from .keyboard import KeyboardLayout, Role, build_layout
from .suggest import SuggestionRequest, SuggestionSet
from .suggest.base import state_fingerprint, trailing_word

_LAYOUT = build_layout()


@dataclass(frozen=True)
class SpellerState:
    buffer: str = ""
    word_boundary: bool = False  # next letter opens a new word (auto-space)
    finalized: bool = False
    history: tuple[tuple[str, bool], ...] = ()

    @property
    def state_hash(self) -> str:
        return state_fingerprint(self.buffer, "b" if self.word_boundary else "-")

    def _push(self, buffer: str, word_boundary: bool, finalized: bool = False) -> "SpellerState":
        return SpellerState(
            buffer=buffer,
            word_boundary=word_boundary,
            finalized=finalized,
            history=self.history + ((self.buffer, self.word_boundary),),
        )


def _delete_trailing_word(buffer: str) -> str:
    s = buffer.rstrip()
    i = len(s)
    while i > 0 and not s[i - 1].isspace():
        i -= 1
    return s[:i].rstrip()


def apply_key(state: SpellerState, key: int, sugg: SuggestionSet | None = None,
              layout: KeyboardLayout | None = None) -> SpellerState:
    """Apply one decoded key. No-op actions (undo with no history, delete on an
    empty buffer, selecting an empty slot is an error) leave the state as is."""
    layout = layout or _LAYOUT
    k = layout.key(key)

    if state.finalized and k.role is not Role.UNDO:
        raise AlreadyFinalized("session already finalized; only undo is accepted")
    if sugg is not None and sugg.state_hash is not None and sugg.state_hash != state.state_hash:
        raise StaleSuggestions(
            f"suggestions were computed for state {sugg.state_hash}, "
            f"current is {state.state_hash}"
        )

    if k.role is Role.LETTER:
        ch = k.char
        if state.word_boundary and state.buffer:
            return state._push(state.buffer + " " + ch, False)
        return state._push(state.buffer + ch, False)

    if k.role in (Role.COMMA, Role.QUESTION, Role.APOSTROPHE, Role.SPACE):
        return state._push(state.buffer + k.char, False)

    if k.role is Role.UNDO:
        if not state.history:
            return state
        buffer, boundary = state.history[-1]
        return SpellerState(buffer=buffer, word_boundary=boundary,
                            finalized=False, history=state.history[:-1])

    if k.role is Role.DELETE:
        if not state.buffer:
            return state
        return state._push(_delete_trailing_word(state.buffer), True)

    if k.role is Role.WORD_SLOT:
        if sugg is None or not sugg.words[k.slot]:
            raise EmptySlotSelected(f"word slot {k.slot + 1} is empty")
        word = sugg.words[k.slot]
        run = trailing_word(state.buffer)
        if run and (not state.word_boundary or word.lower().startswith(run.lower())):
            new = state.buffer[: len(state.buffer) - len(run)] + word
        elif state.buffer and not state.buffer.endswith(" "):
            new = state.buffer + " " + word
        else:
            new = state.buffer + word
        return state._push(new, True)

    if k.role is Role.SENTENCE_SLOT:
        if sugg is None or not sugg.sentences[k.slot]:
            raise EmptySlotSelected(f"sentence slot {k.slot + 1} is empty")
        return state._push(sugg.sentences[k.slot], True)

    if k.role is Role.ENTER:
        return state._push(state.buffer, state.word_boundary, finalized=True)

    raise SpellerError(f"unhandled key role {k.role}")  # pragma: no cover


@dataclass
class SessionEvent:
    kind: str  # trial_started | key_decoded | suggestions_updated | finalized
    payload: dict
    timestamp: float
    seq: int

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": self.payload,
                "timestamp": self.timestamp, "seq": self.seq}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class SpellerSession:
    """Single-writer trial loop: apply a decoded key, refresh suggestions,
    log ordered events. Suggestion sets are tagged with the hash of the state
    they were computed for and are re-fetched if the state moved on."""

    def __init__(self, suggester=None, dialogue_context=(), category: str = "",
                 clock=time.time, layout: KeyboardLayout | None = None):
        self.layout = layout or _LAYOUT
        self.suggester = suggester
        self.dialogue_context = tuple(dialogue_context)
        self.category = category
        self.clock = clock
        self.state = SpellerState()
        self.suggestions = SuggestionSet(state_hash=self.state.state_hash)
        self.events: list[SessionEvent] = []
        self._seq = 0
        self._trial = 0

    def _emit(self, kind: str, **payload) -> SessionEvent:
        event = SessionEvent(kind=kind, payload=payload,
                             timestamp=self.clock(), seq=self._seq)
        self._seq += 1
        self.events.append(event)
        return event

    def fetch_suggestions(self) -> SuggestionSet:
        """Suggestions for the current state, tagged with its hash."""
        target_hash = self.state.state_hash
        if self.suggester is None:
            return SuggestionSet(state_hash=target_hash)
        req = SuggestionRequest(
            current_text=self.state.buffer,
            dialogue_context=self.dialogue_context,
            category=self.category,
        )
        try:
            result = self.suggester.suggest(req)
        except SpellerError:
            result = SuggestionSet(degraded=True)
        return result.with_state_hash(target_hash)

    def start(self) -> list[SessionEvent]:
        self.suggestions = self.fetch_suggestions()
        return [self._emit("suggestions_updated",
                           suggestions=suggestion_dict(self.suggestions))]

    def run_trial(self, decoded_key: int) -> list[SessionEvent]:
        """One selection cycle: apply the decoded key, update suggestions,
        arm the next trial. Raises AlreadyFinalized once the session is done."""
        if self.state.finalized:
            raise AlreadyFinalized("no further trials accepted")
        first = len(self.events)
        self._trial += 1
        self._emit("trial_started", trial=self._trial)

        if self.suggestions.state_hash != self.state.state_hash:
            self.suggestions = self.fetch_suggestions()  # stale overlap: refetch
        self.state = apply_key(self.state, decoded_key, self.suggestions, self.layout)
        self._emit("key_decoded", key=decoded_key, buffer=self.state.buffer)

        if self.state.finalized:
            self._emit("finalized", text=self.state.buffer)
        else:
            self.suggestions = self.fetch_suggestions()
            self._emit("suggestions_updated",
                       suggestions=suggestion_dict(self.suggestions),
                       degraded=self.suggestions.degraded)
        return self.events[first:]

    def event_log_jsonl(self) -> str:
        return "\n".join(e.to_json() for e in self.events)


def suggestion_dict(s: SuggestionSet) -> dict:
    return {"words": list(s.words), "sentences": list(s.sentences)}


def replay(keys: list[int], suggester=None, dialogue_context=(),
           category: str = "") -> list[str]:
    """Run a key sequence through a fresh session; returns the buffer after
    each key."""
    session = SpellerSession(suggester=suggester, dialogue_context=dialogue_context,
                             category=category, clock=lambda: 0.0)
    session.start()
    buffers = []
    for key in keys:
        session.run_trial(key)
        buffers.append(session.state.buffer)
    return buffers
