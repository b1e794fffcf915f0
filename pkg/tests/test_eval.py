"""Evaluation: confusion metrics and keyword-ablation robustness."""

import logging
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ca_harvest.errors import DataFormatError, DegenerateInputError
from ca_harvest.eval import (
    PERTURBATION_MODES,
    ConfusionMatrix,
    PerturbationMode,
    confusion,
    format_report,
    perturb,
    report,
    report_to_records,
    robustness_report,
)
from ca_harvest.kernels import tokenize
from ca_harvest.lexicon import dictionary_score
from conftest import make_snippet

VOCAB = ["apple", "banana", "cloud", "river", "stone", "lantern"]


# ------------------------------------------------------------- metrics


def test_confusion_from_pairs():
    conf = confusion(["a", "a", "b"], ["a", "b", "b"])
    assert conf.labels == ["a", "b"]
    assert conf.counts == [[1, 1], [0, 1]]
    assert conf.total() == 3


def test_confusion_includes_prediction_only_labels():
    conf = confusion(["a", "a"], ["a", "b"])
    assert conf.labels == ["a", "b"]


def test_confusion_label_order_is_canonical_for_known_labels():
    conf = confusion(["execution", "none"], ["none", "call-to-action"])
    assert conf.labels == ["none", "call-to-action", "execution"]


def test_confusion_rejects_length_mismatch():
    with pytest.raises(DataFormatError):
        confusion(["a"], ["a", "b"])


def test_hand_computed_fixture():
    # gold-by-pred counts [[4, 1], [2, 3]]
    conf = ConfusionMatrix(labels=["a", "b"], counts=[[4, 1], [2, 3]])
    rep = report(conf)
    a, b = rep.per_class["a"], rep.per_class["b"]
    assert a.precision == pytest.approx(4 / 6, abs=1e-9)
    assert a.recall == pytest.approx(4 / 5, abs=1e-9)
    assert a.f1 == pytest.approx(8 / 11, abs=1e-9)
    assert b.precision == pytest.approx(3 / 4, abs=1e-9)
    assert b.recall == pytest.approx(3 / 5, abs=1e-9)
    assert b.f1 == pytest.approx(2 / 3, abs=1e-9)
    assert rep.macro[2] == pytest.approx((8 / 11 + 2 / 3) / 2, abs=1e-9)
    weighted_f1 = (5 * 8 / 11 + 5 * 2 / 3) / 10
    assert rep.weighted[2] == pytest.approx(weighted_f1, abs=1e-9)


def test_zero_denominator_conventions():
    # class b never appears in gold and is never predicted
    conf = ConfusionMatrix(labels=["a", "b"], counts=[[3, 0], [0, 0]])
    rep = report(conf)
    assert rep.per_class["b"] == rep.per_class["b"].__class__(0.0, 0.0, 0.0, 0)
    # absent-in-gold classes do not drag the averages down
    assert rep.macro[2] == 1.0
    assert rep.weighted[2] == 1.0


def random_confusion(rng, k):
    labels = [f"c{i}" for i in range(k)]
    counts = [[rng.randint(0, 12) for _ in range(k)] for _ in range(k)]
    return ConfusionMatrix(labels=labels, counts=counts)


def test_metric_identities_on_random_confusions():
    rng = random.Random(555)
    for _ in range(150):
        conf = random_confusion(rng, rng.randint(2, 6))
        rep = report(conf)
        present = [
            (label, row_total)
            for label, row in zip(conf.labels, conf.counts)
            if (row_total := sum(row)) > 0
        ]
        if not present:
            continue
        # macro is the unweighted mean over gold-present classes
        for i in (0, 1, 2):
            macro = sum(
                (rep.per_class[l].precision, rep.per_class[l].recall, rep.per_class[l].f1)[i]
                for l, _ in present
            ) / len(present)
            assert rep.macro[i] == pytest.approx(macro, abs=1e-9)
        # weighted weights by gold support
        total = sum(n for _, n in present)
        for i in (0, 1, 2):
            weighted = (
                sum(
                    n
                    * (rep.per_class[l].precision, rep.per_class[l].recall, rep.per_class[l].f1)[i]
                    for l, n in present
                )
                / total
            )
            assert rep.weighted[i] == pytest.approx(weighted, abs=1e-9)
        # support equals the gold row sum
        for label, n in present:
            assert rep.per_class[label].support == n


def test_report_records_and_table():
    conf = confusion(["a", "b"], ["a", "b"])
    rep = report(conf)
    records = report_to_records(rep)
    assert records[0]["type"] == "class"
    assert records[-1] == {
        "type": "average",
        "name": "weighted",
        "precision": 1.0,
        "recall": 1.0,
        "f1": 1.0,
    }
    table = format_report(rep)
    assert "macro avg" in table and "support" in table


# ------------------------------------------------------------- perturb


def mode(name, seed=0):
    return PerturbationMode(mode=name, seed=seed)


def test_mode_validation():
    with pytest.raises(ValueError):
        PerturbationMode(mode="scramble")


def test_remove_lexicon_strips_every_match(lexicon):
    text = "We march today and we PROTEST tomorrow"
    out = perturb(text, lexicon, mode("remove_lexicon"), sample_id="s")
    assert out == "We today and we tomorrow"
    assert all(t not in lexicon.terms for t in tokenize(out))


def test_remove_lexicon_leaves_score_at_zero(lexicon):
    text = "They organize the boycott and march"
    out = perturb(text, lexicon, mode("remove_lexicon"), sample_id="s")
    assert dictionary_score(out, lexicon) == 0.0


def test_zero_budget_returns_text_unchanged(lexicon):
    text = "Nothing relevant here, punctuation intact!"
    for name in PERTURBATION_MODES:
        out = perturb(text, lexicon, mode(name), vocabulary=VOCAB, sample_id="s")
        assert out == text


def test_replace_lexicon_draws_from_vocabulary(lexicon):
    text = "we march and protest loudly"
    out = perturb(text, lexicon, mode("replace_lexicon"), vocabulary=VOCAB, sample_id="s")
    tokens = tokenize(out)
    assert len(tokens) == 5
    assert tokens[0] == "we" and tokens[4] == "loudly"
    assert tokens[1] in VOCAB and tokens[3] in VOCAB
    assert dictionary_score(out, lexicon) == 0.0


def test_replace_modes_require_vocabulary(lexicon):
    with pytest.raises(ValueError):
        perturb("we march and protest", lexicon, mode("replace_lexicon"))


def test_remove_random_keeps_matches_and_budget(lexicon):
    text = "we march and protest loudly with friends"
    out = perturb(text, lexicon, mode("remove_random"), sample_id="s")
    tokens = tokenize(out)
    # budget is 2 (two lexicon tokens), so 5 tokens remain and the
    # lexicon tokens are untouched
    assert len(tokens) == 5
    assert "march" in tokens and "protest" in tokens


def test_remove_random_clamps_to_available(lexicon, caplog):
    text = "march protest boycott extra"
    with caplog.at_level(logging.WARNING):
        out = perturb(text, lexicon, mode("remove_random"), sample_id="s")
    assert tokenize(out) == ["march", "protest", "boycott"]
    assert any("clamp" in r.message or "budget" in r.message for r in caplog.records)


def test_replace_random_preserves_length(lexicon):
    text = "we march and protest loudly"
    out = perturb(text, lexicon, mode("replace_random"), vocabulary=VOCAB, sample_id="s")
    tokens = tokenize(out)
    assert len(tokens) == 5
    assert "march" in tokens and "protest" in tokens
    changed = [t for t in tokens if t in VOCAB]
    assert len(changed) == 2


def test_perturbation_is_deterministic(lexicon):
    text = "we march and protest loudly with many friends nearby"
    for name in PERTURBATION_MODES:
        a = perturb(text, lexicon, mode(name, seed=9), vocabulary=VOCAB, sample_id="s1")
        b = perturb(text, lexicon, mode(name, seed=9), vocabulary=VOCAB, sample_id="s1")
        assert a == b


def test_perturbation_varies_with_seed_and_sample(lexicon):
    text = "we march and protest loudly with many friends nearby today"
    outs = {
        perturb(text, lexicon, mode("remove_random", seed=s), sample_id=i)
        for s in range(6)
        for i in ("s1", "s2")
    }
    assert len(outs) > 1


@given(st.integers(0, 2**32 - 1))
def test_remove_lexicon_is_seed_independent(seed):
    from ca_harvest.lexicon import Lexicon

    lex = Lexicon(terms=frozenset({"march"}), name="x")
    text = "we march on"
    assert perturb(text, lex, mode("remove_lexicon", seed=seed), sample_id="s") == "we on"


# ------------------------------------------------------------- robustness


def test_robustness_report_shape(lexicon):
    snippets = [
        make_snippet("s1", "we march and protest"),
        make_snippet("s2", "march and boycott now"),
        make_snippet("s3", "nothing to see here"),
    ]
    classify = lambda text: dictionary_score(text, lexicon) >= 0.25 if tokenize(text) else False
    got = robustness_report(snippets, classify, lexicon, seed=3, vocabulary=VOCAB)
    assert list(got) == ["baseline"] + list(PERTURBATION_MODES)
    assert got["baseline"] == pytest.approx(2 / 3)
    assert got["remove_lexicon"] == 0.0


def test_robustness_report_empty_input(lexicon):
    with pytest.raises(DegenerateInputError):
        robustness_report([], lambda t: True, lexicon)


def test_robustness_report_unknown_mode(lexicon):
    with pytest.raises(DataFormatError):
        robustness_report(
            [make_snippet("s", "t")], lambda t: True, lexicon, modes=["shuffle"]
        )
