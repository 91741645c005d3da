"""40-key speller board: key roles, character mapping, and per-key stimulus coding.

Key index assignment: 1-26 letters a-z, 27 comma, 28 question mark,
29 apostrophe, 30 space, 31 undo, 32 delete, 33-37 word slots,
38-39 sentence slots, 40 enter.

Stimulus coding is frequency/phase based: key i flickers at
8.0 + 0.2*(i-1) Hz with phase cycling through {0, 0.5pi, 1.5pi} by index.
The board itself never assigns meanings to frequencies beyond this rule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

from .errors import UnsupportedCharacter

N_KEYS = 40

FIRST_WORD_SLOT = 33
N_WORD_SLOTS = 5
FIRST_SENTENCE_SLOT = 38
N_SENTENCE_SLOTS = 2

KEY_UNDO = 31
KEY_DELETE = 32
KEY_ENTER = 40

PHASES = (0.0, 0.5 * math.pi, 1.5 * math.pi)

#: Characters a literal key can produce, lowercase letters plus punctuation.
SUPPORTED_CHARS = "abcdefghijklmnopqrstuvwxyz,?' "


class Role(Enum):
    LETTER = "letter"
    COMMA = "comma"
    QUESTION = "question"
    APOSTROPHE = "apostrophe"
    SPACE = "space"
    UNDO = "undo"
    DELETE = "delete"
    WORD_SLOT = "word"
    SENTENCE_SLOT = "sentence"
    ENTER = "enter"


@dataclass(frozen=True)
class StimulusSpec:
    frequency: float  # Hz
    phase: float  # radians


@dataclass(frozen=True)
class Key:
    index: int  # 1-based, 1..40
    role: Role
    char: str | None  # literal character, None for function/slot keys
    slot: int | None  # 0-based slot position for word/sentence keys
    stimulus: StimulusSpec


class KeyboardLayout:
    """Immutable canonical board; safe to share across threads."""

    def __init__(self, keys: tuple[Key, ...]):
        self.keys = keys
        self._by_char = {k.char: k for k in keys if k.char is not None}

    def key(self, index: int) -> Key:
        if not 1 <= index <= N_KEYS:
            raise KeyError(f"key index {index} out of range 1..{N_KEYS}")
        return self.keys[index - 1]

    def key_for_char(self, c: str) -> Key:
        """Literal key producing ``c``; letters are matched case-insensitively."""
        if len(c) != 1:
            raise UnsupportedCharacter(f"expected a single character, got {c!r}")
        k = self._by_char.get(c.lower())
        if k is None:
            raise UnsupportedCharacter(f"no key produces {c!r}")
        return k

    def frequencies(self) -> list[float]:
        return [k.stimulus.frequency for k in self.keys]

    def to_json(self) -> str:
        """Layout export for the UI and documentation."""
        rows = [
            {
                "index": k.index,
                "role": k.role.value,
                "char": k.char,
                "slot": k.slot,
                "frequency": round(k.stimulus.frequency, 4),
                "phase": k.stimulus.phase,
            }
            for k in self.keys
        ]
        return json.dumps({"keys": rows}, indent=2)


def _role_for_index(i: int) -> tuple[Role, str | None, int | None]:
    if 1 <= i <= 26:
        return Role.LETTER, chr(ord("a") + i - 1), None
    if i == 27:
        return Role.COMMA, ",", None
    if i == 28:
        return Role.QUESTION, "?", None
    if i == 29:
        return Role.APOSTROPHE, "'", None
    if i == 30:
        return Role.SPACE, " ", None
    if i == KEY_UNDO:
        return Role.UNDO, None, None
    if i == KEY_DELETE:
        return Role.DELETE, None, None
    if FIRST_WORD_SLOT <= i < FIRST_WORD_SLOT + N_WORD_SLOTS:
        return Role.WORD_SLOT, None, i - FIRST_WORD_SLOT
    if FIRST_SENTENCE_SLOT <= i < FIRST_SENTENCE_SLOT + N_SENTENCE_SLOTS:
        return Role.SENTENCE_SLOT, None, i - FIRST_SENTENCE_SLOT
    if i == KEY_ENTER:
        return Role.ENTER, None, None
    raise ValueError(f"bad key index {i}")


def build_layout() -> KeyboardLayout:
    """Canonical 40-key layout; deterministic, identical on every call."""
    keys = []
    for i in range(1, N_KEYS + 1):
        role, char, slot = _role_for_index(i)
        stim = StimulusSpec(frequency=8.0 + 0.2 * (i - 1), phase=PHASES[(i - 1) % 3])
        keys.append(Key(index=i, role=role, char=char, slot=slot, stimulus=stim))
    return KeyboardLayout(tuple(keys))


def key_for_char(c: str) -> int:
    """Index of the unique literal key producing ``c``."""
    return build_layout().key_for_char(c).index
