import json

import pytest

from spellerkit.dialogue import (
    CATEGORIES,
    DialogueItem,
    dataset_stats,
    load_bundled_dataset,
    load_dataset,
    normalize_utterance,
    save_dataset,
)
from spellerkit.errors import EmptySet, SchemaError, UnsupportedUtterance
from spellerkit.keyboard import build_layout


def test_normalize_collapses_whitespace():
    assert normalize_utterance("What's  up?") == "What's up?"
    assert normalize_utterance("  hi \t there \n") == "hi there"


def test_normalize_maps_curly_quotes():
    assert normalize_utterance("what’s new") == "what's new"


def test_normalize_strips_terminal_period():
    assert normalize_utterance("Tell a joke.") == "Tell a joke"
    assert normalize_utterance("wow!!") == "wow"
    assert normalize_utterance("really?") == "really?"


def test_normalize_rejects_digits():
    with pytest.raises(UnsupportedUtterance):
        normalize_utterance("I have 3 cats")


def test_normalize_rejects_inner_period():
    with pytest.raises(UnsupportedUtterance):
        normalize_utterance("Dr. Smith is here")


def test_normalize_rejects_empty():
    with pytest.raises(UnsupportedUtterance):
        normalize_utterance("...")


def test_item_validation():
    with pytest.raises(SchemaError):
        DialogueItem(category="weird", turns=(("me", "hi"),), target_index=0)
    with pytest.raises(SchemaError):
        DialogueItem(category="ST-daily", turns=(("me", "hi"),), target_index=3)
    with pytest.raises(SchemaError):
        DialogueItem(category="MT-daily", turns=(("me", "hi"),), target_index=0)
    st = DialogueItem(category="ST-daily", turns=(("them", "a"), ("me", "b")),
                      target_index=1)
    assert st.context == (("them", "a"),)
    with pytest.raises(SchemaError):
        DialogueItem(category="ST-daily",
                     turns=(("a", "x"), ("b", "y"), ("me", "z")), target_index=2)


def test_bundled_dataset_shape():
    items = load_bundled_dataset()
    assert len(items) == 16
    by_cat = {c: sum(1 for i in items if i.category == c) for c in CATEGORIES}
    assert all(v == 4 for v in by_cat.values())
    for item in items:
        if item.category.startswith("MT"):
            assert len(item.context) >= 1


def test_bundled_targets_typeable():
    layout = build_layout()
    for item in load_bundled_dataset():
        for ch in item.target:
            assert layout.key_for_char(ch)  # raises if unsupported


def test_load_rejects_malformed_record(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps({"category": "ST-daily", "turns": [["me", "hi"]]}) + "\n")
    with pytest.raises(SchemaError, match="bad.jsonl:1.*target_index"):
        load_dataset(path)


def test_load_rejects_invalid_json(tmp_path):
    path = tmp_path / "b.jsonl"
    path.write_text("{not json\n")
    with pytest.raises(SchemaError, match="invalid JSON"):
        load_dataset(path)


def test_load_collects_unsupported_target(tmp_path):
    path = tmp_path / "c.jsonl"
    rec = {"category": "ST-daily", "turns": [["me", "call me at 5pm"]],
           "target_index": 0}
    path.write_text(json.dumps(rec) + "\n")
    with pytest.raises(SchemaError, match="no key"):
        load_dataset(path)


def test_save_load_round_trip(tmp_path):
    items = load_bundled_dataset()
    out = tmp_path / "ds.jsonl"
    save_dataset(items, out)
    assert load_dataset(out) == items


def test_stats_hand_count():
    item = DialogueItem(category="ST-daily", turns=(("me", "hi there"),),
                        target_index=0)
    stats = dataset_stats([item])
    assert stats.per_category["ST-daily"] == (1, 2, 8)


def test_stats_additive():
    items = load_bundled_dataset()
    whole = dataset_stats(items)
    left, right = dataset_stats(items[:7]), dataset_stats(items[7:])
    for cat in whole.per_category:
        l = left.per_category.get(cat, (0, 0, 0))
        r = right.per_category.get(cat, (0, 0, 0))
        assert tuple(a + b for a, b in zip(l, r)) == whole.per_category[cat]
    assert whole.totals == tuple(
        a + b for a, b in zip(left.totals, right.totals)
    )


def test_stats_empty():
    with pytest.raises(EmptySet):
        dataset_stats([])


def test_stats_csv_layout():
    csv_text = dataset_stats(load_bundled_dataset()).to_csv()
    lines = csv_text.strip().splitlines()
    assert lines[0] == "category,utterances,words,characters"
    assert len(lines) == 6  # four categories + total
    assert lines[-1].startswith("total,16,")
