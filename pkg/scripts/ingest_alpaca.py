#!/usr/bin/env python3
"""Build single-turn dialogue items from an Alpaca-style JSON dump.

Expects a JSON array of {"instruction": ..., "input": ..., "output": ...}
records. The instruction becomes the copy-spelling target (the user composes
the question), with no prior context. Multi-turn categories need a real
dialogue corpus; see ingest_dailydialog.py.

Healthcare filtering is keyword-based; pass --keywords to adjust.

Example:
    python scripts/ingest_alpaca.py alpaca_data.json \
        --category ST-healthcare --limit 50 --out st_health.jsonl
"""

import argparse
import json
from pathlib import Path

from spellerkit.dialogue import DialogueItem, normalize_utterance, save_dataset
from spellerkit.errors import UnsupportedUtterance

HEALTH_KEYWORDS = (
    "health", "doctor", "symptom", "medicin", "medical", "pain", "diet",
    "exercise", "sleep", "therapy", "disease", "blood", "muscle", "injur",
    "vitamin", "stress", "allerg", "fever", "pharma",
)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("source", type=Path, help="alpaca-style JSON array")
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--category", choices=["ST-daily", "ST-healthcare"],
                    required=True)
    ap.add_argument("--limit", type=int, default=50)
    ap.add_argument("--keywords", nargs="*", default=None,
                    help="topic filter; defaults to healthcare terms for "
                         "ST-healthcare, none otherwise")
    ap.add_argument("--min-len", type=int, default=25)
    ap.add_argument("--max-len", type=int, default=60)
    args = ap.parse_args()

    keywords = args.keywords
    if keywords is None:
        keywords = HEALTH_KEYWORDS if args.category.endswith("healthcare") else ()

    records = json.loads(args.source.read_text(encoding="utf-8"))
    items, skipped = [], 0
    for rec in records:
        if len(items) >= args.limit:
            break
        instruction = " ".join(str(rec.get("instruction", "")).split())
        output = " ".join(str(rec.get("output", "")).split())
        if keywords and not any(k in (instruction + " " + output).lower()
                                for k in keywords):
            continue
        try:
            target = normalize_utterance(instruction)
        except UnsupportedUtterance:
            skipped += 1
            continue
        if not args.min_len <= len(target) <= args.max_len:
            skipped += 1
            continue
        items.append(DialogueItem(category=args.category,
                                  turns=(("me", target),), target_index=0))

    save_dataset(items, args.out)
    print(f"wrote {len(items)} {args.category} items to {args.out} "
          f"(skipped {skipped})")
    if len(items) < args.limit:
        print("warning: source exhausted before reaching the limit")


if __name__ == "__main__":
    main()
