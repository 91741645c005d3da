#!/usr/bin/env python3
"""Build dialogue items from a DailyDialog-style text dump.

Expects the released ``dialogues_text.txt`` format: one dialogue per line,
utterances separated by ``__eou__``. For each dialogue, picks the first
utterance that survives normalization and has a sensible copy-spelling
length; preceding utterances become context. Multi-turn categories keep the
full history (at least two context turns), single-turn categories keep one.
Use --keywords to carve out topical subsets (e.g. healthcare).

Example:
    python scripts/ingest_dailydialog.py dialogues_text.txt \
        --category MT-daily --limit 50 --out mt_daily.jsonl
"""

import argparse
from pathlib import Path

from spellerkit.dialogue import CATEGORIES, DialogueItem, normalize_utterance, save_dataset
from spellerkit.errors import SchemaError, UnsupportedUtterance

HEALTH_KEYWORDS = (
    "health", "doctor", "hospital", "symptom", "medicin", "medical", "pain",
    "diet", "exercise", "sleep", "blood", "muscle", "injur", "vitamin",
    "stress", "allerg", "fever", "pharma", "dentist", "nurse", "clinic",
)


def parse_dialogues(path: Path):
    for line in path.read_text(encoding="utf-8").splitlines():
        turns = [t.strip() for t in line.split("__eou__") if t.strip()]
        if len(turns) >= 2:
            yield turns


def pick_target(turns, min_len, max_len, min_index):
    for i in range(min_index, len(turns)):
        try:
            norm = normalize_utterance(turns[i])
        except UnsupportedUtterance:
            continue
        if min_len <= len(norm) <= max_len:
            return i
    return None


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("source", type=Path, help="dialogues_text.txt")
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--category", choices=CATEGORIES, required=True)
    ap.add_argument("--limit", type=int, default=50)
    ap.add_argument("--keywords", nargs="*", default=None,
                    help="topic filter; defaults to healthcare terms for "
                         "*-healthcare categories, none otherwise")
    ap.add_argument("--min-len", type=int, default=25)
    ap.add_argument("--max-len", type=int, default=60)
    args = ap.parse_args()

    single = args.category.startswith("ST")
    keywords = args.keywords
    if keywords is None:
        keywords = HEALTH_KEYWORDS if args.category.endswith("healthcare") else ()

    items, skipped = [], 0
    for turns in parse_dialogues(args.source):
        if len(items) >= args.limit:
            break
        if keywords and not any(k in " ".join(turns).lower() for k in keywords):
            continue
        idx = pick_target(turns, args.min_len, args.max_len, 1 if single else 2)
        if idx is None:
            skipped += 1
            continue
        speakers = ["them" if (idx - i) % 2 else "me" for i in range(idx + 1)]
        kept = turns[: idx + 1]
        if single:
            kept, speakers, idx = kept[idx - 1:], speakers[idx - 1:], 1
        try:
            items.append(DialogueItem(
                category=args.category,
                turns=tuple(
                    (s, normalize_utterance(t) if i == idx else " ".join(t.split()))
                    for i, (s, t) in enumerate(zip(speakers, kept))
                ),
                target_index=idx,
            ))
        except (SchemaError, UnsupportedUtterance):
            skipped += 1

    save_dataset(items, args.out)
    print(f"wrote {len(items)} {args.category} items to {args.out} "
          f"(skipped {skipped} dialogues)")
    if len(items) < args.limit:
        print("warning: source exhausted before reaching the limit")


if __name__ == "__main__":
    main()
