"""Pseudo-online copy-spelling evaluation.

Replays the trial loop against reference utterances under a configurable
decoding accuracy p: each intended key is decoded correctly with probability
p, otherwise one of the 39 other keys lands uniformly at random. Decode
errors are corrected with undo before spelling resumes; undo presses are
subject to the same error model. Every decoded trial counts as one keystroke
and one entry in the per-trial time model.

The planner prioritizes candidates that fit the reference: finish with enter,
accept an exactly-matching sentence, take the delete-one-word shortcut on a
sentence that misses only its final word, accept a word that extends the
matched prefix, and only then press the next literal key.

``analytic_naive_keystrokes`` independently derives the expected keystroke
count of naive mode from the renewal structure of this exact error model and
is cross-checked against the Monte Carlo mean in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dialogue import DialogueItem, normalize_utterance
from .errors import (
    AlreadyFinalized,
    EmptySlotSelected,
    InconsistentState,
    InvalidConfig,
    StuckState,
)
from .keyboard import (
    FIRST_SENTENCE_SLOT,
    FIRST_WORD_SLOT,
    KEY_DELETE,
    KEY_ENTER,
    KEY_UNDO,
    N_KEYS,
    build_layout,
)
from .session import SpellerState, apply_key
from .suggest import OracleProfile, OracleSuggester, SuggestionRequest, SuggestionSet

_LAYOUT = build_layout()

MODES = ("naive", "dwg", "llm", "oracle")


@dataclass(frozen=True)
class TimeModel:
    t_shift: float = 0.5  # gaze shift to the target key
    t_stim: float = 1.5  # stimulation/decoding window
    t_decide: float = 3.0  # considering suggestions, assisted modes only
    t_llm: float = 1.5  # waiting on the language model, llm mode only

    def __post_init__(self):
        if min(self.t_shift, self.t_stim, self.t_decide, self.t_llm) < 0:
            raise InvalidConfig("time model durations must be nonnegative")


def trial_time(kind: str, tm: TimeModel, llm_mode: bool = False,
               pipelined: bool = True) -> float:
    """Seconds charged for one trial. The language-model wait is hidden when
    the fetch for the new state overlapped the previous decision window."""
    if kind == "plain":
        return tm.t_shift + tm.t_stim
    if kind == "assisted":
        extra = tm.t_llm if (llm_mode and not pipelined) else 0.0
        return tm.t_shift + tm.t_stim + tm.t_decide + extra
    raise InvalidConfig(f"unknown trial kind {kind!r}")


@dataclass(frozen=True)
class PolicyFlags:
    use_words: bool = True
    use_sentences: bool = True
    shortcut_enabled: bool = True


@dataclass
class SimConfig:
    accuracy_p: float = 1.0
    mode: str = "naive"
    time: TimeModel = field(default_factory=TimeModel)
    policy: PolicyFlags = field(default_factory=PolicyFlags)
    seed: int = 0
    monte_carlo_runs: int = 1
    pipelined: bool = True
    oracle_profile: OracleProfile = field(default_factory=OracleProfile)
    # when set, used for MT-* items (earlier sentence firing thanks to context)
    oracle_profile_mt: OracleProfile | None = None
    runaway_factor: float = 50.0

    def __post_init__(self):
        if not 0 < self.accuracy_p <= 1:
            raise InvalidConfig("accuracy_p must be in (0, 1]")
        if self.mode not in MODES:
            raise InvalidConfig(f"mode must be one of {MODES}")
        if self.monte_carlo_runs < 1:
            raise InvalidConfig("monte_carlo_runs must be >= 1")

    def profile_for(self, category: str) -> OracleProfile:
        if self.oracle_profile_mt is not None and category.startswith("MT"):
            return self.oracle_profile_mt
        return self.oracle_profile


@dataclass
class TraceStep:
    buffer: str
    key: int
    was_error: bool


@dataclass
class UtteranceResult:
    keystrokes: int
    time_s: float
    trace: list[TraceStep]
    completed: bool
    aborted: bool = False


def _is_consistent(buffer: str, reference: str) -> bool:
    return reference.lower().startswith(buffer.lower())


def _matches(buffer: str, reference: str) -> bool:
    return buffer.lower() == reference.lower()


def _shortcut_landing(candidate: str, reference: str) -> str | None:
    """Where accept-then-delete lands, if the candidate misses only from its
    final word on: every word before the candidate's last must match the
    reference word-for-word."""
    ct, rt = candidate.split(), reference.split()
    head = ct[:-1]
    if not head or len(head) >= len(rt):
        return None
    if [w.lower() for w in head] != [w.lower() for w in rt[: len(head)]]:
        return None
    return " ".join(head)


def plan_next_key(state: SpellerState, reference: str, sugg: SuggestionSet,
                  policy: PolicyFlags) -> int:
    """Intended key for the next trial while copy-spelling ``reference``.

    Assumes a planner-reachable state: a consistent partial spelling, the
    completed utterance, or the aftermath of the sentence shortcut (fixed by
    delete). Candidate fit checks are case-insensitive; word acceptance is
    simulated through ``apply_key`` so fit means "yields a strictly longer
    consistent prefix".
    """
    buffer = state.buffer

    if _matches(buffer, reference):
        return KEY_ENTER

    if not _is_consistent(buffer, reference):
        # the sentence shortcut lands here deliberately: a whole trailing word
        # is wrong and delete fixes it; anything else is an error to undo
        if state.word_boundary:
            after = apply_key(SpellerState(buffer=buffer), KEY_DELETE).buffer
            if _is_consistent(after, reference):
                return KEY_DELETE
        return KEY_UNDO

    if policy.use_sentences:
        for j, sent in enumerate(sugg.sentences):
            if sent and _matches(sent, reference):
                return FIRST_SENTENCE_SLOT + j
        if policy.shortcut_enabled:
            for j, sent in enumerate(sugg.sentences):
                if not sent or _matches(sent, reference):
                    continue
                landing = _shortcut_landing(sent, reference)
                if landing is not None and len(landing) > len(buffer):
                    return FIRST_SENTENCE_SLOT + j  # gains ground, fixed by delete

    if policy.use_words:
        best_key, best_gain = None, 0
        for j, word in enumerate(sugg.words):
            if not word:
                continue
            key = FIRST_WORD_SLOT + j
            outcome = apply_key(state, key, sugg)
            after = outcome.buffer
            gain = len(after) - len(buffer)
            if not _is_consistent(after, reference) or gain <= best_gain:
                continue
            # an accepted word ends on a boundary; landing mid-token before a
            # letter would strand the spelling (the following letter key would
            # bring a space along), so such candidates do not fit
            nxt = reference[len(after)] if len(after) < len(reference) else ""
            if nxt.isalpha():
                continue
            best_key, best_gain = key, gain
        if best_key is not None:
            return best_key

    next_char = reference[len(buffer)]
    if next_char == " ":
        follower = reference[len(buffer) + 1] if len(buffer) + 1 < len(reference) else ""
        if state.word_boundary and follower.isalpha():
            return _LAYOUT.key_for_char(follower).index  # letter brings its own space
        return _LAYOUT.key_for_char(" ").index
    if state.word_boundary and next_char.isalpha() and buffer:
        return KEY_DELETE  # mid-word boundary: drop the partial word, retype it
    try:
        return _LAYOUT.key_for_char(next_char).index
    except Exception as exc:  # reference was normalized, so this is a bug
        raise StuckState(f"no key advances {buffer!r} toward {reference!r}") from exc


def _wrong_key(rng: np.random.Generator, intended: int) -> int:
    k = int(rng.integers(1, N_KEYS))  # 1..39
    return k if k < intended else k + 1


class _SimSuggester:
    """Wraps a backend suggester; inconsistent oracle states yield empty sets."""

    def __init__(self, backend, context, category):
        self.backend = backend
        self.context = context
        self.category = category

    def fetch(self, buffer: str) -> SuggestionSet:
        if self.backend is None:
            return SuggestionSet()
        req = SuggestionRequest(current_text=buffer, dialogue_context=self.context,
                                category=self.category)
        try:
            return self.backend.suggest(req)
        except InconsistentState:
            return SuggestionSet()


def simulate_utterance(item: DialogueItem, cfg: SimConfig, suggester=None,
                       seed=None) -> UtteranceResult:
    """Simulate copy-spelling one reference utterance.

    Deterministic given the config seed (or an explicit ``seed`` override).
    Aborts with the ``aborted`` flag set if keystrokes exceed
    ``runaway_factor`` times the naive count.
    """
    reference = normalize_utterance(item.target)
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    source = _SimSuggester(suggester, item.context, item.category)
    kind = "plain" if cfg.mode == "naive" else "assisted"
    per_trial = trial_time(kind, cfg.time, llm_mode=(cfg.mode == "llm"),
                           pipelined=cfg.pipelined)
    guard = cfg.runaway_factor * (len(reference) + 1)

    state = SpellerState()
    sugg = source.fetch(state.buffer)
    trace: list[TraceStep] = []
    time_s = 0.0
    pending_undos = 0

    while True:
        if state.finalized and pending_undos == 0:
            break
        if len(trace) > guard:
            return UtteranceResult(keystrokes=len(trace), time_s=time_s, trace=trace,
                                   completed=False, aborted=True)

        if pending_undos > 0:
            intended = KEY_UNDO
        else:
            intended = plan_next_key(state, reference, sugg, cfg.policy)

        decoded = intended
        if cfg.accuracy_p < 1 and rng.random() >= cfg.accuracy_p:
            decoded = _wrong_key(rng, intended)
        was_error = decoded != intended

        previous = state
        try:
            state = apply_key(state, decoded, sugg)
        except (EmptySlotSelected, AlreadyFinalized):
            pass  # empty slot or key refused post-finalize: wasted trial
        changed = state is not previous

        trace.append(TraceStep(buffer=state.buffer, key=decoded, was_error=was_error))
        time_s += per_trial

        if was_error:
            if changed and decoded != KEY_UNDO:
                pending_undos += 1  # undoable damage, accidental enter included
            # an erroneous undo loses ground but needs no correction
        elif decoded == KEY_UNDO and pending_undos > 0 and changed:
            pending_undos -= 1

        if changed and not state.finalized:
            sugg = source.fetch(state.buffer)

    completed = _matches(state.buffer, reference)
    return UtteranceResult(keystrokes=len(trace), time_s=time_s, trace=trace,
                           completed=completed)


def make_suggester(item: DialogueItem, cfg: SimConfig, lexicon=None,
                   llm_suggester=None):
    """Per-item suggestion backend for the configured mode."""
    if cfg.mode == "naive":
        return None
    if cfg.mode == "dwg":
        if lexicon is None:
            raise InvalidConfig("dwg mode needs a lexicon")
        from .suggest import TrieSuggester
        return TrieSuggester(lexicon)
    if cfg.mode == "llm":
        if llm_suggester is None:
            raise InvalidConfig("llm mode needs an llm suggester")
        return llm_suggester
    reference = normalize_utterance(item.target)
    return OracleSuggester(reference, cfg.profile_for(item.category))


def run_copy_task(items: list[DialogueItem], cfg: SimConfig, lexicon=None,
                  llm_suggester=None) -> dict[int, list[UtteranceResult]]:
    """All items x monte_carlo_runs; per-run seeds derive from (seed, item, run)."""
    results: dict[int, list[UtteranceResult]] = {}
    for i, item in enumerate(items):
        suggester = make_suggester(item, cfg, lexicon=lexicon,
                                   llm_suggester=llm_suggester)
        runs = []
        for r in range(cfg.monte_carlo_runs):
            runs.append(simulate_utterance(item, cfg, suggester,
                                           seed=(cfg.seed, i, r)))
        results[i] = runs
    return results


@dataclass
class MetricsRow:
    category: str
    mode: str
    mean_keystrokes: float
    mean_time_s: float
    savings_keystrokes: float | None = None  # vs naive; None for naive itself
    savings_time: float | None = None


@dataclass
class Metrics:
    rows: list[MetricsRow]

    def row(self, category: str, mode: str) -> MetricsRow:
        for r in self.rows:
            if r.category == category and r.mode == mode:
                return r
        raise KeyError((category, mode))

    def to_csv(self) -> str:
        lines = ["category,mode,mean_keystrokes,mean_time_s,"
                 "savings_keystrokes,savings_time"]
        for r in self.rows:
            sk = "" if r.savings_keystrokes is None else f"{r.savings_keystrokes:.4f}"
            st = "" if r.savings_time is None else f"{r.savings_time:.4f}"
            lines.append(f"{r.category},{r.mode},{r.mean_keystrokes:.4f},"
                         f"{r.mean_time_s:.4f},{sk},{st}")
        return "\n".join(lines) + "\n"

    def to_dicts(self) -> list[dict]:
        return [vars(r).copy() for r in self.rows]


def savings(naive: float, assisted: float) -> float:
    """1 - assisted/naive; positive when assistance helps."""
    if naive <= 0:
        raise InvalidConfig("naive baseline must be positive")
    return 1.0 - assisted / naive


def aggregate(per_mode: dict[str, dict[int, list[UtteranceResult]]],
              items: list[DialogueItem]) -> Metrics:
    """Mean keystrokes/time per (category, mode) plus overall, with savings
    relative to naive when a naive run is present."""
    if not per_mode or not items:
        raise InvalidConfig("aggregate needs at least one mode and one item")
    categories = sorted({it.category for it in items})
    means: dict[tuple[str, str], tuple[float, float]] = {}
    for mode, by_item in per_mode.items():
        for cat in categories + ["overall"]:
            picked = [
                res
                for i, runs in by_item.items()
                for res in runs
                if cat == "overall" or items[i].category == cat
            ]
            if not picked:
                continue
            means[(cat, mode)] = (
                float(np.mean([r.keystrokes for r in picked])),
                float(np.mean([r.time_s for r in picked])),
            )

    rows = []
    for (cat, mode), (ks, ts) in means.items():
        base = means.get((cat, "naive"))
        row = MetricsRow(category=cat, mode=mode, mean_keystrokes=ks, mean_time_s=ts)
        if base is not None and mode != "naive":
            row.savings_keystrokes = savings(base[0], ks)
            row.savings_time = savings(base[1], ts)
        rows.append(row)
    order = {c: i for i, c in enumerate(categories + ["overall"])}
    rows.sort(key=lambda r: (order[r.category], r.mode))
    return Metrics(rows)


def analytic_naive_keystrokes(length: int, p: float) -> float:
    """Expected naive-mode keystrokes for a reference of ``length`` characters.

    Renewal analysis of the exact simulator model. Wrong keys split into:
    29 or 30 other literals and delete (state changes undone at plain-state
    cost C_p), enter (finalized-state cost C_f, where every key but undo is
    refused), 7 empty slots (wasted press), and undo (drops one position,
    re-earned at the positional cost). Recovery presses face the same split,
    which gives C_p its own fixed point. The empty-buffer corner during
    recovery (delete becoming a no-op) is neglected; it contributes O(q^2)
    at a single position.
    """
    if not 0 < p <= 1:
        raise InvalidConfig("p must be in (0, 1]")
    if p == 1:
        return float(length + 1)
    q = 1 - p
    if q * 70 / 39 >= 1:
        return math.inf  # recovery random walk has nonnegative drift
    c_f = 1 / p
    c_p = (1 + q / (39 * p)) / (1 - 70 * q / 39)

    # E[n] = presses to advance from n matched characters to n+1
    e0 = (1 + q * (29 * c_p + c_f) / 39) / (1 - q)
    total = e0
    e_prev = e0
    for _ in range(1, length):
        e_n = (1 + q * ((30 * c_p + c_f) + e_prev) / 39) / (1 - q)
        total += e_n
        e_prev = e_n
    e_enter = (1 + q * (31 * c_p + e_prev) / 39) / (1 - q)
    return total + e_enter
