"""Chat-completion suggestion backend (OpenAI-compatible wire format).

The model is prompted to return a strict JSON object with exactly five
candidate words and two candidate sentences. Replies are parsed defensively:
wrong arity is padded or truncated, completion candidates that ignore the
typed prefix are dropped, and any transport or parse failure degrades to the
configured fallback instead of surfacing into the trial loop.

A fixture store supports record/replay keyed by a hash of the request, which
doubles as the cache for repeated states (undo loops re-bill nothing).
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

import requests

from ..errors import Unparseable
from .base import SuggestionRequest, SuggestionSet, mode_of

logger = logging.getLogger(__name__)

API_KEY_ENV = "SPELLERKIT_API_KEY"
_FALLBACK_KEY_ENV = "OPENAI_API_KEY"

SYSTEM_PROMPT = """\
You are the predictive-text engine of an assistive on-screen speller. The user \
composes one chat utterance at a time using lowercase letters, comma, question \
mark, apostrophe, and space. Given the dialogue so far and the text typed for \
the current utterance, you suggest likely continuations.

Reply with a single JSON object and nothing else, in the form
{"words": ["w1", "w2", "w3", "w4", "w5"], "sentences": ["s1", "s2"]}.

Rules:
- "words" holds exactly 5 single words, most likely first. If the current text \
ends mid-word you MUST complete that word: every candidate starts with the \
typed prefix (matching case-insensitively) and extends it to a full word. If \
the current text ends at a word boundary, predict the most likely next words \
instead.
- "sentences" holds exactly 2 complete versions of the whole utterance the \
user is most likely composing, each consistent with the text typed so far and \
appropriate to the dialogue.
- Candidates may use capitals and the punctuation listed above. Use an empty \
string for any slot you cannot fill. No explanations."""

FEW_SHOT = (
    (
        {"context": [("them", "what should i get her for her birthday?")],
         "text": "maybe some flo"},
        {"words": ["flowers", "floral", "flowering", "florals", "florist"],
         "sentences": ["maybe some flowers would be nice",
                       "maybe some flowers and a card"]},
    ),
    (
        {"context": [], "text": "tell a j"},
        {"words": ["joke", "jolly", "jazzy", "joyful", "jumbled"],
         "sentences": ["tell a joke about cats, please",
                       "tell a joke to cheer me up"]},
    ),
    (
        {"context": [("them", "how was your appointment?")],
         "text": "the doctor said "},
        {"words": ["it", "everything", "that", "my", "results"],
         "sentences": ["the doctor said everything looks fine",
                       "the doctor said it was nothing serious"]},
    ),
)


@dataclass
class LlmConfig:
    endpoint: str = "https://api.openai.com/v1"
    model: str = "gpt-4o-2024-08-06"
    timeout: float = 10.0
    max_retries: int = 2
    temperature: float = 0.0
    few_shot: tuple = FEW_SHOT
    api_key_env: str = API_KEY_ENV
    retry_backoff: float = 0.5

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    def api_key(self) -> str:
        return os.environ.get(self.api_key_env) or os.environ.get(_FALLBACK_KEY_ENV, "")


def _example_user_message(context, text) -> str:
    lines = [f"{speaker}: {utterance}" for speaker, utterance in context]
    lines.append(f"typed: {text!r}")
    return "\n".join(lines)


def build_prompt(req: SuggestionRequest, cfg: LlmConfig) -> list[dict]:
    """Chat messages: system contract, few-shot exchanges, then the live state."""
    mode = mode_of(req.current_text)
    messages = [{"role": "system", "content": SYSTEM_PROMPT}]
    for example_req, example_reply in cfg.few_shot:
        messages.append({
            "role": "user",
            "content": _example_user_message(example_req["context"], example_req["text"]),
        })
        messages.append({"role": "assistant", "content": json.dumps(example_reply)})

    task = (
        f"Complete the last word (prefix: {mode.prefix!r}) and the utterance."
        if mode.kind == "completion"
        else "Predict the next words and the complete utterance."
    )
    content = _example_user_message(req.dialogue_context, req.current_text)
    messages.append({"role": "user", "content": f"{content}\n{task}"})
    return messages


_JSON_BLOCK = re.compile(r"\{.*\}", re.DOTALL)


def parse_suggestions(raw: str, completion_prefix: str | None = None) -> SuggestionSet:
    """Parse a model reply into the fixed 5+2 shape.

    Raises Unparseable when no JSON object with usable fields is found; the
    caller is expected to fall back rather than propagate.
    """
    if not isinstance(raw, str) or not raw.strip():
        raise Unparseable("empty reply")
    text = raw.strip()
    if text.startswith("```"):
        text = re.sub(r"^```[a-zA-Z]*\n?|```$", "", text).strip()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        match = _JSON_BLOCK.search(text)
        if match is None:
            raise Unparseable("no JSON object in reply")
        try:
            doc = json.loads(match.group(0))
        except json.JSONDecodeError as exc:
            raise Unparseable(f"malformed JSON in reply: {exc}") from exc
    if not isinstance(doc, dict):
        raise Unparseable("reply JSON is not an object")

    words = doc.get("words", [])
    sentences = doc.get("sentences", [])
    if not isinstance(words, list) or not isinstance(sentences, list):
        raise Unparseable("words/sentences fields are not lists")
    words = [w for w in words if isinstance(w, str)]
    sentences = [s for s in sentences if isinstance(s, str)]
    if completion_prefix:
        words = [w for w in words if w.lower().startswith(completion_prefix.lower())]
    return SuggestionSet.of(words=words, sentences=sentences)


class FixtureStore:
    """request-hash -> raw reply map persisted as JSON, for record/replay."""

    def __init__(self, path: str | Path, record: bool = False):
        self.path = Path(path)
        self.record = record
        self._replies: dict[str, str] = {}
        if self.path.exists():
            self._replies = json.loads(self.path.read_text())

    def get(self, key: str) -> str | None:
        return self._replies.get(key)

    def put(self, key: str, raw: str) -> None:
        self._replies[key] = raw
        if self.record:
            self.path.write_text(json.dumps(self._replies, indent=2, sort_keys=True))


def request_key(messages: list[dict], cfg: LlmConfig) -> str:
    blob = json.dumps({"messages": messages, "model": cfg.model}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _chat_completion(messages: list[dict], cfg: LlmConfig) -> str:
    url = cfg.endpoint.rstrip("/") + "/chat/completions"
    headers = {"Content-Type": "application/json"}
    key = cfg.api_key()
    if key:
        headers["Authorization"] = f"Bearer {key}"
    payload = {"model": cfg.model, "messages": messages, "temperature": cfg.temperature}
    last_exc: Exception | None = None
    for attempt in range(cfg.max_retries + 1):
        try:
            resp = requests.post(url, json=payload, headers=headers, timeout=cfg.timeout)
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
            last_exc = exc
            if attempt < cfg.max_retries:
                time.sleep(cfg.retry_backoff * (2**attempt))
    raise Unparseable(f"chat completion failed after retries: {last_exc}")


def llm_suggest(req: SuggestionRequest, cfg: LlmConfig,
                fallback=None, fixtures: FixtureStore | None = None,
                cache: dict | None = None) -> SuggestionSet:
    """Fetch suggestions; degrade to the fallback suggester instead of raising."""
    messages = build_prompt(req, cfg)
    key = request_key(messages, cfg)
    if cache is not None and key in cache:
        return cache[key]

    mode = mode_of(req.current_text)
    prefix = mode.prefix if mode.kind == "completion" else None
    result = None
    try:
        raw = fixtures.get(key) if fixtures is not None else None
        if raw is None:
            raw = _chat_completion(messages, cfg)
            if fixtures is not None:
                fixtures.put(key, raw)
        result = parse_suggestions(raw, completion_prefix=prefix)
    except Unparseable as exc:
        logger.warning("suggestion fetch degraded: %s", exc)
        if fallback is not None:
            base = fallback.suggest(req)
            result = SuggestionSet(base.words, base.sentences, degraded=True)
        else:
            result = SuggestionSet(degraded=True)
    if cache is not None:
        cache[key] = result
    return result


class LlmSuggester:
    def __init__(self, cfg: LlmConfig, fallback=None,
                 fixtures: FixtureStore | None = None):
        self.cfg = cfg
        self.fallback = fallback
        self.fixtures = fixtures
        self.cache: dict[str, SuggestionSet] = {}

    def suggest(self, req: SuggestionRequest) -> SuggestionSet:
        return llm_suggest(req, self.cfg, fallback=self.fallback,
                           fixtures=self.fixtures, cache=self.cache)
