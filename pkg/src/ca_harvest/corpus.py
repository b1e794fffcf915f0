"""Corpus curation: comment parsing, sentence windows, the two-match
retention gate, and near-duplicate filtering.

A comment survives curation when its whole body contains at least two
lexicon term occurrences. The emitted snippet is the sentence with the
most term occurrences (earliest on ties) plus its immediate neighbors
where they exist.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Any, Iterator, Mapping

from ca_harvest import kernels
from ca_harvest.embeddings import cosine_similarity
from ca_harvest.errors import DataFormatError, MissingDataError
from ca_harvest.lexicon import Lexicon
from ca_harvest.records import dump_record, parse_line


@dataclass(frozen=True)
class Comment:
    id: str
    community: str
    thread_id: str
    author_id: str
    created_at: int
    body: str


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    term_count: int


@dataclass(frozen=True)
class Snippet:
    comment_id: str
    community: str
    thread_id: str
    author_id: str
    text: str
    anchor_index: int
    match_count: int


@dataclass
class IngestStats:
    lines: int = 0
    comments: int = 0
    malformed: int = 0
    duplicates: int = 0


def parse_comment_line(line: str) -> Comment | None:
    """One ingestion record, or None when the line is malformed."""
    record = parse_line(line)
    if record is None:
        return None
    comment_id = record.get("id")
    body = record.get("body")
    if not isinstance(comment_id, str) or not comment_id:
        return None
    if not isinstance(body, str) or not body.strip():
        return None
    community = record.get("community", "")
    thread_id = record.get("thread_id", "")
    author_id = record.get("author_id", "")
    created_at = record.get("created_at", 0)
    if not (
        isinstance(community, str)
        and isinstance(thread_id, str)
        and isinstance(author_id, str)
    ):
        return None
    if isinstance(created_at, bool) or not isinstance(created_at, int):
        return None
    return Comment(
        id=comment_id,
        community=community,
        thread_id=thread_id,
        author_id=author_id,
        created_at=created_at,
        body=body,
    )


def parse_comment_stream(
    stream: IO[str], stats: IngestStats | None = None
) -> Iterator[Comment]:
    """Yield well-formed comments in input order.

    Malformed lines and duplicate ids are counted on `stats` and
    skipped; a dirty dump never aborts the run.
    """
    if stats is None:
        stats = IngestStats()
    seen: set[str] = set()
    for line in stream:
        if not line.strip():
            continue
        stats.lines += 1
        comment = parse_comment_line(line)
        if comment is None:
            stats.malformed += 1
            continue
        if comment.id in seen:
            stats.duplicates += 1
            stats.malformed += 1
            continue
        seen.add(comment.id)
        stats.comments += 1
        yield comment


def split_sentences(text: str, terms: frozenset[str] = frozenset()) -> list[Sentence]:
    spans = kernels.split_sentences(text)
    sentences = []
    for index, (start, end) in enumerate(spans):
        chunk = text[start:end]
        count = kernels.count_matches(chunk, terms) if terms else 0
        sentences.append(Sentence(index=index, text=chunk, term_count=count))
    return sentences


def count_lexicon_matches(text: str, lexicon: Lexicon) -> int:
    return kernels.count_matches(text, lexicon.terms)


def extract_snippet(comment: Comment, lexicon: Lexicon) -> Snippet | None:
    """Apply the retention gate and cut the anchor sentence window.

    Returns None when the whole body has fewer than two term
    occurrences. match_count is that whole-body count, not a recount of
    the window.
    """
    sentences = split_sentences(comment.body, lexicon.terms)
    if not sentences:
        return None
    total = sum(sentence.term_count for sentence in sentences)
    if total < 2:
        return None
    anchor = max(sentences, key=lambda s: s.term_count)
    # max() keeps the earliest of tied sentences, which is the rule.
    lo = max(0, anchor.index - 1)
    hi = min(len(sentences) - 1, anchor.index + 1)
    window = " ".join(sentences[i].text for i in range(lo, hi + 1))
    return Snippet(
        comment_id=comment.id,
        community=comment.community,
        thread_id=comment.thread_id,
        author_id=comment.author_id,
        text=window,
        anchor_index=anchor.index,
        match_count=total,
    )


def filter_near_duplicates(
    snippets: list[Snippet], vectors: Mapping[str, Any], threshold: float
) -> list[Snippet]:
    """Greedy scan in input order; drop anything more similar than
    `threshold` to an already-kept snippet. Order-dependent by design,
    so this always runs single-threaded.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    kept: list[Snippet] = []
    kept_vectors: list[Any] = []
    for snippet in snippets:
        try:
            vec = vectors[snippet.comment_id]
        except KeyError:
            raise MissingDataError(
                f"no embedding vector for snippet {snippet.comment_id!r}"
            ) from None
        duplicate = False
        for other in kept_vectors:
            if cosine_similarity(vec, other) > threshold:
                duplicate = True
                break
        if not duplicate:
            kept.append(snippet)
            kept_vectors.append(vec)
    return kept


# Serialization. Key order is fixed so identical runs produce
# byte-identical files.

def comment_to_record(comment: Comment) -> dict[str, Any]:
    return {
        "id": comment.id,
        "community": comment.community,
        "thread_id": comment.thread_id,
        "author_id": comment.author_id,
        "body": comment.body,
        "created_at": comment.created_at,
    }


def snippet_to_record(snippet: Snippet) -> dict[str, Any]:
    return {
        "comment_id": snippet.comment_id,
        "community": snippet.community,
        "thread_id": snippet.thread_id,
        "author_id": snippet.author_id,
        "text": snippet.text,
        "anchor_index": snippet.anchor_index,
        "match_count": snippet.match_count,
    }


def snippet_to_line(snippet: Snippet) -> str:
    return dump_record(snippet_to_record(snippet))


def record_to_snippet(record: dict[str, Any]) -> Snippet:
    try:
        text = record["text"]
        comment_id = record["comment_id"]
    except KeyError as exc:
        raise DataFormatError(f"snippet record missing key {exc}") from None
    if not isinstance(comment_id, str) or not comment_id:
        raise DataFormatError("snippet record: comment_id must be a nonempty string")
    if not isinstance(text, str) or not text:
        raise DataFormatError("snippet record: text must be a nonempty string")
    anchor_index = record.get("anchor_index", 0)
    match_count = record.get("match_count", 0)
    if isinstance(anchor_index, bool) or not isinstance(anchor_index, int):
        raise DataFormatError("snippet record: anchor_index must be an integer")
    if isinstance(match_count, bool) or not isinstance(match_count, int):
        raise DataFormatError("snippet record: match_count must be an integer")
    context = {}
    for key in ("community", "thread_id", "author_id"):
        value = record.get(key, "")
        if not isinstance(value, str):
            raise DataFormatError(f"snippet record: {key} must be a string")
        context[key] = value
    return Snippet(
        comment_id=comment_id,
        text=text,
        anchor_index=anchor_index,
        match_count=match_count,
        **context,
    )
