# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled text kernels.

Same contract as ca_harvest.kernels.pytext; see that module for the
rules. Keep the two in lockstep -- the parity tests diff them on
randomized and fixture inputs.
"""

from cpython.unicode cimport (
    Py_UNICODE_ISALNUM,
    Py_UNICODE_ISSPACE,
    Py_UNICODE_ISUPPER,
)

from ca_harvest.kernels.common import ABBREVIATIONS


cdef inline bint _is_token_char(Py_UCS4 ch):
    return Py_UNICODE_ISALNUM(ch) or ch == u"'"


cdef inline bint _is_terminator(Py_UCS4 ch):
    return ch == u"." or ch == u"!" or ch == u"?"


def token_spans(str text):
    """Return (start, end) index pairs of tokens in text."""
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t j
    cdef Py_UCS4 ch
    cdef bint has_alnum
    spans = []
    while i < n:
        ch = text[i]
        if _is_token_char(ch):
            j = i
            has_alnum = False
            while j < n:
                ch = text[j]
                if not _is_token_char(ch):
                    break
                if ch != u"'":
                    has_alnum = True
                j += 1
            if has_alnum:
                spans.append((i, j))
            i = j
        else:
            i += 1
    return spans


def tokenize(str text):
    """Lowercased token strings, in order."""
    return [text[a:b].lower() for a, b in token_spans(text)]


def count_matches(str text, terms):
    """Number of token occurrences whose lowercase form is in terms."""
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t j
    cdef Py_ssize_t count = 0
    cdef Py_UCS4 ch
    cdef bint has_alnum
    while i < n:
        ch = text[i]
        if _is_token_char(ch):
            j = i
            has_alnum = False
            while j < n:
                ch = text[j]
                if not _is_token_char(ch):
                    break
                if ch != u"'":
                    has_alnum = True
                j += 1
            if has_alnum and text[i:j].lower() in terms:
                count += 1
            i = j
        else:
            i += 1
    return count


cdef bint _is_boundary(str text, Py_ssize_t j):
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t k
    if j >= n:
        return True
    if not Py_UNICODE_ISSPACE(<Py_UCS4>text[j]):
        return False
    k = j
    while k < n and Py_UNICODE_ISSPACE(<Py_UCS4>text[k]):
        k += 1
    if k >= n:
        return True
    return Py_UNICODE_ISUPPER(<Py_UCS4>text[k])


cdef bint _is_abbreviation(str text, Py_ssize_t run_start, Py_ssize_t run_end):
    cdef Py_ssize_t w = run_start
    cdef Py_UCS4 ch
    while w > 0:
        ch = text[w - 1]
        if Py_UNICODE_ISALNUM(ch) or ch == u"'" or ch == u".":
            w -= 1
        else:
            break
    return text[w:run_end].lower() in ABBREVIATIONS


def split_sentences(str text):
    """Return (start, end) spans of sentences, whitespace-trimmed."""
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t start = 0
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t j, s, e
    spans = []
    while i < n:
        if _is_terminator(<Py_UCS4>text[i]):
            j = i + 1
            while j < n and _is_terminator(<Py_UCS4>text[j]):
                j += 1
            if _is_boundary(text, j) and not _is_abbreviation(text, i, j):
                s = start
                while s < j and Py_UNICODE_ISSPACE(<Py_UCS4>text[s]):
                    s += 1
                if s < j:
                    spans.append((s, j))
                start = j
            i = j
        else:
            i += 1
    s = start
    while s < n and Py_UNICODE_ISSPACE(<Py_UCS4>text[s]):
        s += 1
    e = n
    while e > s and Py_UNICODE_ISSPACE(<Py_UCS4>text[e - 1]):
        e -= 1
    if s < e:
        spans.append((s, e))
    return spans
