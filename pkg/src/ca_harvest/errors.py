"""Exception types shared across the pipeline.

Every error raised on bad *data* (as opposed to programmer misuse) derives
from HarvestError so the CLI can map it to exit status 2.
"""


class HarvestError(Exception):
    """Base class for all pipeline data errors."""


class DataFormatError(HarvestError):
    """A record, label, or input file does not match its documented format."""


class StoreError(HarvestError):
    """An embedding-store file is malformed.

    Carries the byte offset at which the problem was detected.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class MissingDataError(HarvestError):
    """A required cross-referenced item (vector, sample, category) is absent."""


class DegenerateInputError(HarvestError):
    """Input is structurally valid but the operation is undefined on it.

    Examples: zero-token text for scoring, single-class threshold tuning,
    zero-norm vectors, constant rank vectors.
    """
