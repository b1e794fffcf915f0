"""Layered classification, class weights, the external adapter."""

import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ca_harvest.embeddings import compute_centroids, fallback_hash_embed
from ca_harvest.errors import (
    DataFormatError,
    DegenerateInputError,
    MissingDataError,
)
from ca_harvest.labels import ParticipationLabel as L
from ca_harvest.lexicon import ThresholdModel
from ca_harvest.pipeline import (
    CentroidStage,
    DictionaryStage,
    ExternalStage,
    Prediction,
    class_weights,
    load_external_predictions,
    prediction_to_record,
    run_direct,
    run_layered,
)
from conftest import make_snippet, unit


# ------------------------------------------------------------- Prediction


def test_prediction_enforces_stage_coupling():
    # impossible stage combinations are construction bugs, not data
    # problems, hence ValueError
    Prediction(sample_id="s", stage1=True, stage2=L.EXECUTION, scores=None)
    Prediction(sample_id="s", stage1=False, stage2=None, scores=None)
    with pytest.raises(ValueError):
        Prediction(sample_id="s", stage1=True, stage2=None, scores=None)
    with pytest.raises(ValueError):
        Prediction(sample_id="s", stage1=False, stage2=L.EXECUTION, scores=None)
    with pytest.raises(ValueError):
        Prediction(sample_id="s", stage1=True, stage2=L.NONE, scores=None)


def test_prediction_final_label():
    p = Prediction(sample_id="s", stage1=True, stage2=L.INTENTION, scores=None)
    assert p.final is L.INTENTION
    n = Prediction(sample_id="s", stage1=False, stage2=None, scores=None)
    assert n.final is L.NONE


# ------------------------------------------------------------- stages


def dict_stage(lexicon, tau=0.25):
    return DictionaryStage(
        lexicon, ThresholdModel(tau=tau, j_statistic=0.5, candidates_evaluated=1)
    )


def test_dictionary_stage_is_binary_only(lexicon):
    stage = dict_stage(lexicon)
    assert stage.binary_capable and not stage.multiclass_capable
    positive, _ = stage.binary(make_snippet("s", "we march and protest"))
    negative, _ = stage.binary(make_snippet("s", "we talk and talk and talk"))
    assert positive is True
    assert negative is False


def centroid_stage_fixture():
    centers = {
        "none": unit(1, 0, 0),
        "call-to-action": unit(0, 1, 0),
        "execution": unit(0, 0, 1),
    }
    model = compute_centroids([(v, name) for name, v in centers.items()])
    vectors = {
        "pos": unit(0, 1, 0.2),
        "neg": unit(1, 0.1, 0),
    }
    return CentroidStage(model, lambda s: vectors[s.comment_id]), centers


def test_centroid_stage_binary_and_level():
    stage, _ = centroid_stage_fixture()
    assert stage.binary_capable and stage.multiclass_capable
    assert stage.binary(make_snippet("pos", "t"))[0] is True
    assert stage.binary(make_snippet("neg", "t"))[0] is False
    assert stage.level(make_snippet("pos", "t")) is L.CALL_TO_ACTION


def test_centroid_stage_level_ignores_none_centroid():
    stage, _ = centroid_stage_fixture()
    # even a vector sitting on the none centroid gets a participation
    # level from stage 2
    stage2 = CentroidStage(stage.model, lambda s: unit(1, 0, 0.0001))
    assert stage2.level(make_snippet("x", "t")) in (L.CALL_TO_ACTION, L.EXECUTION)


def test_centroid_stage_without_level_classes():
    model = compute_centroids([(unit(1, 0), "none")])
    stage = CentroidStage(model, lambda s: unit(1, 0))
    with pytest.raises(DegenerateInputError):
        stage.level(make_snippet("x", "t"))


def external(lines, threshold=0.5):
    return ExternalStage(
        load_external_predictions(io.StringIO(lines)), threshold=threshold
    )


def test_external_stage_label_mode():
    stage = external('{"sample_id":"a","label":"execution"}\n')
    assert stage.binary(make_snippet("a", "t"))[0] is True
    assert stage.level(make_snippet("a", "t")) is L.EXECUTION


def test_external_stage_score_mode_uses_threshold():
    line = (
        '{"sample_id":"a","label":"none",'
        '"scores":{"participation":0.7}}\n'
    )
    # the participation score overrides the label for the binary gate
    assert external(line).binary(make_snippet("a", "t"))[0] is True
    assert external(line, threshold=0.71).binary(make_snippet("a", "t"))[0] is False


def test_external_stage_threshold_is_inclusive():
    line = '{"sample_id":"a","label":"none","scores":{"participation":0.5}}\n'
    assert external(line).binary(make_snippet("a", "t"))[0] is True


def test_external_stage_missing_sample():
    stage = external('{"sample_id":"a","label":"none"}\n')
    with pytest.raises(MissingDataError, match="ghost"):
        stage.binary(make_snippet("ghost", "t"))


def test_external_stage2_none_on_positive_is_an_error():
    stage = external('{"sample_id":"a","label":"none"}\n')
    with pytest.raises(DataFormatError, match="'a'"):
        stage.level(make_snippet("a", "t"))


# ------------------------------------------------------------- layering


class CountingStage:
    """stage2 wrapper that records which samples it was asked about."""

    multiclass_capable = True

    def __init__(self, label=L.EXECUTION):
        self.calls = []
        self._label = label

    def level(self, snippet):
        self.calls.append(snippet.comment_id)
        return self._label


class ScriptedBinary:
    binary_capable = True

    def __init__(self, decisions):
        self.decisions = decisions

    def binary(self, snippet):
        return self.decisions[snippet.comment_id], None


def test_run_layered_gates_stage2():
    snippets = [make_snippet(f"s{i}", "t") for i in range(6)]
    decisions = {f"s{i}": i % 2 == 0 for i in range(6)}
    stage2 = CountingStage()
    predictions = run_layered(snippets, ScriptedBinary(decisions), stage2)
    assert [p.sample_id for p in predictions] == [s.comment_id for s in snippets]
    for p in predictions:
        if decisions[p.sample_id]:
            assert p.final is L.EXECUTION
        else:
            assert p.final is L.NONE
    # stage2 saw exactly the positives, in order
    assert stage2.calls == ["s0", "s2", "s4"]


def test_run_layered_checks_capabilities(lexicon):
    stage2 = CountingStage()
    with pytest.raises(ValueError):
        run_layered([], stage2, stage2)  # stage2 cannot gate
    with pytest.raises(ValueError):
        run_layered([], ScriptedBinary({}), ScriptedBinary({}))


def test_run_direct():
    stage, _ = centroid_stage_fixture()
    predictions = run_direct([make_snippet("pos", "t"), make_snippet("neg", "t")], stage)
    assert predictions[0].final is L.CALL_TO_ACTION
    assert predictions[1].final is L.NONE
    assert predictions[1].stage1 is False


# ------------------------------------------------------------- weights


def test_class_weights_formula():
    weights = class_weights({"a": 10, "b": 30})
    assert weights == {"a": 2.0, "b": 2 / 3}


def test_class_weights_rejects_empty_and_zero():
    with pytest.raises(DegenerateInputError):
        class_weights({})
    with pytest.raises(DegenerateInputError, match="b"):
        class_weights({"a": 5, "b": 0})


@given(
    st.dictionaries(
        st.text(min_size=1, max_size=6),
        st.integers(min_value=1, max_value=10_000),
        min_size=1,
        max_size=8,
    )
)
def test_class_weights_identity(counts):
    weights = class_weights(counts)
    total = sum(counts.values())
    identity = sum(weights[c] * counts[c] for c in counts)
    assert identity == pytest.approx(len(counts) / 2 * total, abs=1e-9 * total)


# ------------------------------------------------------------- adapter file


def test_load_external_predictions_happy_path():
    raw = io.StringIO(
        '{"sample_id":"a","label":"execution"}\n'
        '{"sample_id":"b","label":"none","scores":{"none":0.9,"execution":0.1}}\n'
    )
    loaded = load_external_predictions(raw)
    assert loaded["a"] == (L.EXECUTION, None)
    assert loaded["b"][0] is L.NONE
    assert loaded["b"][1] == {"none": 0.9, "execution": 0.1}


@pytest.mark.parametrize(
    "line",
    [
        '{"label":"none"}',
        '{"sample_id":"","label":"none"}',
        '{"sample_id":"a","label":"nope"}',
        '{"sample_id":"a","label":"none","scores":{"mystery":1.0}}',
        '{"sample_id":"a","label":"none","scores":{"none":true}}',
        '{"sample_id":"a","label":"none","scores":"high"}',
    ],
)
def test_load_external_predictions_rejects(line):
    with pytest.raises(DataFormatError):
        load_external_predictions(io.StringIO(line + "\n"))


def test_load_external_predictions_rejects_duplicates():
    raw = io.StringIO(
        '{"sample_id":"a","label":"none"}\n{"sample_id":"a","label":"none"}\n'
    )
    with pytest.raises(DataFormatError, match="'a'"):
        load_external_predictions(raw)


def test_prediction_record_round_trip_shape():
    p = Prediction(
        sample_id="s", stage1=True, stage2=L.INTENTION, scores={"participation": 0.9}
    )
    record = prediction_to_record(p)
    assert record == {
        "sample_id": "s",
        "label": "intention",
        "scores": {"participation": 0.9},
    }
    n = Prediction(sample_id="s", stage1=False, stage2=None, scores=None)
    assert prediction_to_record(n) == {"sample_id": "s", "label": "none"}
