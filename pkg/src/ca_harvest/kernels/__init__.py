"""Text kernels with a compiled fast path.

The Cython extension is preferred when it imported cleanly; the pure
module is the fallback and the behavioral reference. Set
CA_HARVEST_PURE=1 to force the fallback (used by the parity tests and
the benchmark).
"""

from __future__ import annotations

import os

from ca_harvest.kernels import pytext

if os.environ.get("CA_HARVEST_PURE"):
    _impl = pytext
    BACKEND = "pure"
else:
    try:
        from ca_harvest.kernels import _ctext as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = pytext
        BACKEND = "pure"

token_spans = _impl.token_spans
tokenize = _impl.tokenize
count_matches = _impl.count_matches
split_sentences = _impl.split_sentences

__all__ = [
    "BACKEND",
    "count_matches",
    "split_sentences",
    "token_spans",
    "tokenize",
]
