"""Pure-Python text kernels.

Reference implementation of the four hot functions used by corpus
curation and dictionary scoring. The compiled backend in _ctext.pyx
mirrors these character for character; parity is enforced by tests.

Tokens are maximal runs of alphanumeric characters and apostrophes that
contain at least one alphanumeric. Spans always index the ORIGINAL
text; lowercasing happens per slice so spans never drift (whole-string
lower() can change length for some code points).
"""

from __future__ import annotations

from ca_harvest.kernels.common import ABBREVIATIONS, APOSTROPHE, TERMINATORS


def token_spans(text):
    """Return (start, end) index pairs of tokens in text."""
    spans = []
    n = len(text)
    i = 0
    while i < n:
        ch = text[i]
        if ch.isalnum() or ch == APOSTROPHE:
            j = i
            has_alnum = False
            while j < n and (text[j].isalnum() or text[j] == APOSTROPHE):
                if text[j] != APOSTROPHE:
                    has_alnum = True
                j += 1
            if has_alnum:
                spans.append((i, j))
            i = j
        else:
            i += 1
    return spans


def tokenize(text):
    """Lowercased token strings, in order."""
    return [text[a:b].lower() for a, b in token_spans(text)]


def count_matches(text, terms):
    """Number of token occurrences whose lowercase form is in terms."""
    count = 0
    for a, b in token_spans(text):
        if text[a:b].lower() in terms:
            count += 1
    return count


def _is_boundary(text, j):
    # A terminator run ending at j closes a sentence when it reaches
    # end-of-text or is followed by whitespace and then an uppercase
    # letter (trailing whitespace counts as end-of-text).
    n = len(text)
    if j >= n:
        return True
    if not text[j].isspace():
        return False
    k = j
    while k < n and text[k].isspace():
        k += 1
    if k >= n:
        return True
    return text[k].isupper()


def _is_abbreviation(text, run_start, run_end):
    w = run_start
    while w > 0:
        ch = text[w - 1]
        if ch.isalnum() or ch == APOSTROPHE or ch == ".":
            w -= 1
        else:
            break
    return text[w:run_end].lower() in ABBREVIATIONS


def split_sentences(text):
    """Return (start, end) spans of sentences, whitespace-trimmed."""
    spans = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        if text[i] in TERMINATORS:
            j = i + 1
            while j < n and text[j] in TERMINATORS:
                j += 1
            if _is_boundary(text, j) and not _is_abbreviation(text, i, j):
                s = start
                while s < j and text[s].isspace():
                    s += 1
                if s < j:
                    spans.append((s, j))
                start = j
            i = j
        else:
            i += 1
    s = start
    while s < n and text[s].isspace():
        s += 1
    e = n
    while e > s and text[e - 1].isspace():
        e -= 1
    if s < e:
        spans.append((s, e))
    return spans
