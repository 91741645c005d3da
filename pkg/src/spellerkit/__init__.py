"""SSVEP speller engine.

Subsystems: stimulus-coded keyboard layout, synthetic EEG trials and
preprocessing, filter-bank decoders, word/sentence suggesters, the speller
state machine, a pseudo-online copy-spelling simulator, and a socket session
service with a batch CLI.
"""

from . import errors
from .keyboard import KeyboardLayout, StimulusSpec, build_layout, key_for_char
from .signals import EegTrial, FilterSpec, SynthConfig, design_filter_bank, preprocess, synth_trial
from .decoders import (
    DecodeResult,
    DecoderModel,
    cca_corr,
    classify,
    evaluate_accuracy,
    fbdsp_train,
    fbecca_classify,
    fbscca_classify,
    fbtrca_train,
    make_ecca_model,
    make_scca_model,
)
from .suggest import (
    LlmConfig,
    OracleProfile,
    SuggestionRequest,
    SuggestionSet,
    TrieLexicon,
    mode_of,
)
from .session import SpellerSession, SpellerState, apply_key, replay
from .simulate import (
    Metrics,
    PolicyFlags,
    SimConfig,
    TimeModel,
    UtteranceResult,
    aggregate,
    analytic_naive_keystrokes,
    plan_next_key,
    simulate_utterance,
    trial_time,
)
from .dialogue import DialogueItem, dataset_stats, load_dataset, normalize_utterance

__version__ = "0.1.0"
