"""Exception hierarchy.

``ValidationError`` subclasses indicate bad input data or configuration and
map to CLI exit code 2; everything else under ``SlateoptError`` maps to 1.
"""


class SlateoptError(Exception):
    """Base class for all package errors."""


class ValidationError(SlateoptError):
    """Invalid input data or configuration."""


# -- request / domain validation ------------------------------------------

class SlotMismatch(ValidationError):
    """Number of bid lists does not match the webpage's slot count."""


class DuplicateAdvertiserInSlot(ValidationError):
    """An advertiser appears more than once in one slot's bid list."""


class EmptySlotBids(ValidationError):
    """A slot has no bids."""


# -- text / clustering ------------------------------------------------------

class EmptyCorpus(ValidationError):
    """Vocabulary construction requires at least one document."""


class TooFewDistinctVectors(ValidationError):
    """k-means needs at least k distinct input vectors."""


class UnclusteredAd(ValidationError):
    """An ad has no topic assignment."""


# -- images / saliency -------------------------------------------------------

class SlotOutOfBounds(ValidationError):
    """Slot rectangle extends past the page snapshot."""


class DegenerateImage(ValidationError):
    """Image is too small for the barrier-distance transform."""


class UnsupportedFormat(ValidationError):
    """Image file is not a P2/P5 PGM with maxval 255."""


# -- metrics / selection ------------------------------------------------------

class UnknownAdvertiser(ValidationError):
    """The selected advertiser does not bid in this slot."""


class MissingMetricEntry(ValidationError):
    """A candidate row references an advertiser without metric entries."""


class BudgetExceeded(SlateoptError):
    """Joint-assignment enumeration would exceed the configured row budget."""


# -- training ----------------------------------------------------------------

class EmptyTraining(ValidationError):
    """Weight search requires a non-empty training set."""


class TooFewRequests(ValidationError):
    """Cross-validation needs at least as many requests as folds."""


# -- dataset IO ----------------------------------------------------------------

class ParseError(ValidationError):
    """Malformed dataset file; message carries file, line and field."""


class DanglingReference(ValidationError):
    """A record references an id that does not exist in the dataset."""


class ImageLoadError(ValidationError):
    """A referenced image file could not be read."""


class InvalidSpec(ValidationError):
    """Synthetic dataset specification is inconsistent."""
