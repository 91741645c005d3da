"""Dialogue dataset: schema, normalization, loading, and summary statistics.

Items are stored as JSON lines, one dialogue per line:

    {"category": "MT-daily", "turns": [["them", "..."], ["me", "..."]],
     "target_index": 1}

The turn at ``target_index`` is the copy-spelling reference; earlier turns are
preserved as dialogue context for context-aware suggesters. Target utterances
must be typeable on the 40-key board, so ingestion normalizes punctuation and
rejects anything it cannot map losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptySet, SchemaError, UnsupportedUtterance

CATEGORIES = ("ST-daily", "ST-healthcare", "MT-daily", "MT-healthcare")

_QUOTE_MAP = {"‘": "'", "’": "'", "ʼ": "'"}
_TYPEABLE = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ,?' ")


def normalize_utterance(text: str) -> str:
    """Map an utterance onto the supported charset, or refuse.

    Curly apostrophes become straight ones, whitespace runs collapse to a
    single space, and trailing periods/exclamations (keyless but droppable
    without changing the words) are stripped. Anything else without a key,
    digits included, raises UnsupportedUtterance.
    """
    for src, dst in _QUOTE_MAP.items():
        text = text.replace(src, dst)
    text = " ".join(text.split())
    text = text.rstrip(".!").rstrip()
    if not text:
        raise UnsupportedUtterance("utterance is empty after normalization")
    bad = sorted({c for c in text if c not in _TYPEABLE})
    if bad:
        raise UnsupportedUtterance(f"no key for character(s) {bad!r} in {text!r}")
    return text


def _light_clean(text: str) -> str:
    for src, dst in _QUOTE_MAP.items():
        text = text.replace(src, dst)
    return " ".join(text.split())


@dataclass(frozen=True)
class DialogueItem:
    category: str
    turns: tuple[tuple[str, str], ...]
    target_index: int

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise SchemaError(f"unknown category {self.category!r}")
        if not 0 <= self.target_index < len(self.turns):
            raise SchemaError(
                f"target_index {self.target_index} out of range for "
                f"{len(self.turns)} turns"
            )
        if self.category.startswith("MT") and len(self.turns) < 2:
            raise SchemaError("multi-turn items need at least 2 turns")
        if self.category.startswith("ST") and self.target_index > 1:
            raise SchemaError("single-turn items carry at most one context turn")

    @property
    def target(self) -> str:
        return self.turns[self.target_index][1]

    @property
    def context(self) -> tuple[tuple[str, str], ...]:
        return self.turns[: self.target_index]

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "turns": [list(t) for t in self.turns],
            "target_index": self.target_index,
        }


def _item_from_record(record: dict, where: str) -> DialogueItem:
    if not isinstance(record, dict):
        raise SchemaError(f"{where}: record is not an object")
    missing = [k for k in ("category", "turns", "target_index") if k not in record]
    if missing:
        raise SchemaError(f"{where}: missing field(s) {missing}")
    turns_raw = record["turns"]
    if (not isinstance(turns_raw, list) or not turns_raw
            or any(not isinstance(t, (list, tuple)) or len(t) != 2 for t in turns_raw)):
        raise SchemaError(f"{where}: turns must be a nonempty list of [speaker, text]")
    if not isinstance(record["target_index"], int):
        raise SchemaError(f"{where}: target_index must be an integer")
    idx = record["target_index"]
    turns = []
    for i, (speaker, text) in enumerate(turns_raw):
        cleaned = normalize_utterance(text) if i == idx else _light_clean(text)
        turns.append((str(speaker), cleaned))
    return DialogueItem(category=record["category"], turns=tuple(turns), target_index=idx)


def load_dataset(path: str | Path) -> list[DialogueItem]:
    """Load and validate a JSON-lines dataset; problems name their record."""
    items, problems = [], []
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{Path(path).name}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                problems.append(f"{where}: invalid JSON ({exc})")
                continue
            try:
                items.append(_item_from_record(record, where))
            except (SchemaError, UnsupportedUtterance) as exc:
                problems.append(str(exc))
    if problems:
        raise SchemaError("; ".join(problems))
    return items


def save_dataset(items: list[DialogueItem], path: str | Path) -> None:
    with Path(path).open("w") as fh:
        for item in items:
            fh.write(json.dumps(item.to_dict()) + "\n")


@dataclass
class DatasetStats:
    per_category: dict[str, tuple[int, int, int]]  # utterances, words, characters

    @property
    def totals(self) -> tuple[int, int, int]:
        cols = list(zip(*self.per_category.values())) or [(), (), ()]
        return tuple(sum(c) for c in cols)

    def to_csv(self) -> str:
        lines = ["category,utterances,words,characters"]
        for cat in CATEGORIES:
            if cat in self.per_category:
                u, w, c = self.per_category[cat]
                lines.append(f"{cat},{u},{w},{c}")
        u, w, c = self.totals
        lines.append(f"total,{u},{w},{c}")
        return "\n".join(lines) + "\n"


def dataset_stats(items: list[DialogueItem]) -> DatasetStats:
    """Utterance, word, and character counts of the targets, per category."""
    if not items:
        raise EmptySet("no dialogue items")
    per: dict[str, list[int]] = {}
    for item in items:
        u, w, c = per.setdefault(item.category, [0, 0, 0])
        per[item.category] = [u + 1, w + len(item.target.split()), c + len(item.target)]
    return DatasetStats({k: tuple(v) for k, v in per.items()})


def bundled_dataset_path() -> Path:
    return Path(__file__).parent / "data" / "sample_dialogues.jsonl"


def load_bundled_dataset() -> list[DialogueItem]:
    return load_dataset(bundled_dataset_path())
