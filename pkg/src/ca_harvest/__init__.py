"""Harvesting expressions of collective-action participation from comments.

The package is organized as a batch pipeline: corpus curation
(`corpus`, `lexicon`), representation (`embeddings`), annotation
handling (`annotation`), layered classification (`pipeline`),
evaluation (`eval`), and community analytics (`analytics`). The
`ca-harvest` command line in `cli` wires these together; `kernels`
holds the text primitives with a compiled fast path.
"""

__version__ = "0.1.0"

from ca_harvest.errors import (
    DataFormatError,
    DegenerateInputError,
    HarvestError,
    MissingDataError,
    StoreError,
)
from ca_harvest.labels import ParticipationLabel

__all__ = [
    "DataFormatError",
    "DegenerateInputError",
    "HarvestError",
    "MissingDataError",
    "ParticipationLabel",
    "StoreError",
    "__version__",
]
