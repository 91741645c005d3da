from .base import (
    SuggestMode,
    SuggestionRequest,
    SuggestionSet,
    ScriptedSuggester,
    WORD_CHARS,
    mode_of,
)
from .trie import TrieLexicon, TrieSuggester, load_lexicon_tsv, trie_suggest
from .oracle import OracleProfile, OracleSuggester, oracle_suggest
from .llm import (
    FixtureStore,
    LlmConfig,
    LlmSuggester,
    build_prompt,
    llm_suggest,
    parse_suggestions,
)

__all__ = [
    "SuggestMode",
    "SuggestionRequest",
    "SuggestionSet",
    "ScriptedSuggester",
    "WORD_CHARS",
    "mode_of",
    "TrieLexicon",
    "TrieSuggester",
    "load_lexicon_tsv",
    "trie_suggest",
    "OracleProfile",
    "OracleSuggester",
    "oracle_suggest",
    "FixtureStore",
    "LlmConfig",
    "LlmSuggester",
    "build_prompt",
    "llm_suggest",
    "parse_suggestions",
]
