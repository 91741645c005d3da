"""Exception hierarchy shared across the speller engine."""


class SpellerError(Exception):
    """Base class for all engine errors."""


class UnsupportedCharacter(SpellerError):
    """Character has no literal key on the board."""


class InvalidConfig(SpellerError):
    """Synthesis or service configuration violates its invariants."""


class SampleRateTooLow(SpellerError):
    """Trial sample rate cannot be resampled to the working rate."""


class InvalidBandCount(SpellerError):
    """Requested filter-bank size places a band edge outside the passband."""


class ShapeMismatch(SpellerError):
    """Matrix operands disagree on sample count."""


class DegenerateInput(SpellerError):
    """Input has zero-variance rows; correlation is undefined."""


class ModelMismatch(SpellerError):
    """Decoder model does not match the requested algorithm."""


class MissingTemplates(SpellerError):
    """Template-based classifier invoked on a model without templates."""


class InsufficientTrainingData(SpellerError):
    """Too few classes or trials to fit spatial filters."""


class SingularScatter(SpellerError):
    """Scatter matrix remained singular after regularization."""


class SingularCovariance(SpellerError):
    """Covariance matrix remained singular after regularization."""


class EmptySet(SpellerError):
    """Operation requires a nonempty collection."""


class Unparseable(SpellerError):
    """Suggestion reply could not be parsed into the fixed 5+2 shape."""


class InconsistentState(SpellerError):
    """Current text is not a consistent partial spelling of the reference."""


class EmptySlotSelected(SpellerError):
    """A suggestion key was selected but its slot is empty."""


class AlreadyFinalized(SpellerError):
    """Session received input after the enter key."""


class StaleSuggestions(SpellerError):
    """Suggestion set was computed for a different speller state."""


class StuckState(SpellerError):
    """Planner found no legal action toward the reference."""


class NonTerminating(SpellerError):
    """Simulation exceeded the runaway keystroke guard."""


class SchemaError(SpellerError):
    """Dataset record does not match the dialogue schema."""


class UnsupportedUtterance(SpellerError):
    """Utterance contains characters with no key mapping."""
