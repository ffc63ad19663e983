"""Exception types raised across the toolchain.

Every failure mode that callers are expected to handle gets its own class so
pipelines can skip records (NoCopulaFound, NoValidNegative) or abort loudly
(NonFiniteLoss, MissingInstanceEmbedding) without string matching.
"""


class PersonaeError(Exception):
    """Base class for all toolchain errors."""


class NoCopulaFound(PersonaeError):
    """First sentence does not match the copular 'SUBJECT is/was a ...' pattern."""


class InfeasibleSpec(PersonaeError):
    """Synthetic corpus parameters cannot be satisfied."""


class EmptyVocabulary(PersonaeError):
    """No identity meets the document-frequency threshold."""


class DegenerateSplit(PersonaeError):
    """Train/test split produced an empty side."""


class NonFiniteLoss(PersonaeError):
    """Training loss became NaN or infinite; carries the offending step."""

    def __init__(self, message, epoch=None, step=None):
        super().__init__(message)
        self.epoch = epoch
        self.step = step


class NoValidNegative(PersonaeError):
    """Every other vocabulary identity co-occurs with the chosen positive."""


class MissingInstanceEmbedding(PersonaeError):
    """External provider has no vector for the requested instance id."""


class DimMismatch(PersonaeError):
    """Vector dimensions disagree."""


class UnknownPhrase(PersonaeError):
    """Phrase is not in the vocabulary / provider."""


class DegenerateDimension(PersonaeError):
    """Seed-pair differences average to the zero vector."""


class NoValidComparisons(PersonaeError):
    """The SD-exclusion rule removed every pairwise comparison."""
