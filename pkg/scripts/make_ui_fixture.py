#!/usr/bin/env python3
"""Regenerate the frontend e2e replay fixture.

Runs a fixed key sequence through the speller session directly (same trie
lexicon the service uses) and records the buffer after every key. The
headless client test drives the same keys through the socket protocol and
the transcripts must be byte-identical.
"""

import json
from pathlib import Path

from spellerkit.session import SpellerSession
from spellerkit.suggest import TrieSuggester, load_lexicon_tsv

# spells "how are you?": literal keys, one trie word acceptance, enter
KEYS = [8, 15, 23, 30, 1, 18, 5, 30, 25, 33, 28, 40]


def main() -> None:
    root = Path(__file__).resolve().parents[1]
    lexicon = load_lexicon_tsv(root / "src" / "spellerkit" / "data" / "wordfreq.tsv")
    session = SpellerSession(suggester=TrieSuggester(lexicon), clock=lambda: 0.0)
    session.start()
    buffers = []
    for key in KEYS:
        session.run_trial(key)
        buffers.append(session.state.buffer)
    fixture = {"keys": KEYS, "buffers": buffers,
               "final": session.state.buffer, "finalized": session.state.finalized}
    out = root / "frontend" / "test" / "fixtures" / "replay.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(fixture, indent=2) + "\n")
    print(f"wrote {out}")
    print(json.dumps(fixture, indent=2))


if __name__ == "__main__":
    main()
