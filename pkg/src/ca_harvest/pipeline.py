"""The layered two-stage classification framework.

Stage 1 is a binary participation gate; stage 2 assigns the level and
is consulted only for stage-1 positives. Classifiers plug in behind a
small stage interface: the dictionary model (binary only), the
nearest-centroid model, and file-based external predictions from
models trained elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Any, Callable, Iterable, Mapping

import numpy as np

from ca_harvest.corpus import Snippet
from ca_harvest.embeddings import CentroidModel, classify_centroid
from ca_harvest.errors import DataFormatError, DegenerateInputError, MissingDataError
from ca_harvest.labels import (
    NAME_ORDER,
    ParticipationLabel,
    parse_label,
)
from ca_harvest.lexicon import (
    Lexicon,
    ThresholdModel,
    classify_dictionary,
    dictionary_score,
)
from ca_harvest.records import dump_record, iter_records


@dataclass(frozen=True)
class Prediction:
    sample_id: str
    stage1: bool
    stage2: ParticipationLabel | None = None
    scores: dict[str, float] | None = None

    def __post_init__(self):
        if self.stage1 and self.stage2 is None:
            raise ValueError("positive prediction without a stage-2 label")
        if not self.stage1 and self.stage2 is not None:
            raise ValueError("stage-2 label present on a negative prediction")
        if self.stage2 is ParticipationLabel.NONE:
            raise ValueError("stage-2 label cannot be 'none'")

    @property
    def final(self) -> ParticipationLabel:
        return self.stage2 if self.stage1 else ParticipationLabel.NONE


class DictionaryStage:
    """Threshold on the lexicon-match fraction. Binary only."""

    kind = "dictionary"
    binary_capable = True
    multiclass_capable = False

    def __init__(self, lexicon: Lexicon, model: ThresholdModel):
        self.lexicon = lexicon
        self.model = model

    def binary(self, snippet: Snippet) -> tuple[bool, dict[str, float] | None]:
        score = dictionary_score(snippet.text, self.lexicon)
        return classify_dictionary(score, self.model), None


class CentroidStage:
    """Nearest centroid over snippet embeddings.

    vector_source maps a snippet to its embedding; the CLI wires it to
    either a store lookup or the fallback embedder. In layered use the
    level step ignores any 'none' centroid the model may carry: the
    gate has already fired, and the level classes are the only valid
    outputs.
    """

    kind = "centroid"
    binary_capable = True
    multiclass_capable = True

    def __init__(
        self,
        model: CentroidModel,
        vector_source: Callable[[Snippet], np.ndarray],
    ):
        self.model = model
        self.vector_source = vector_source
        level_centroids = {
            label: centroid
            for label, centroid in model.centroids.items()
            if label != ParticipationLabel.NONE.value
        }
        self._level_model = CentroidModel(
            centroids=level_centroids,
            class_counts={
                label: model.class_counts[label] for label in level_centroids
            },
        )

    def binary(self, snippet: Snippet) -> tuple[bool, dict[str, float] | None]:
        label, _ = classify_centroid(self.vector_source(snippet), self.model)
        return label != ParticipationLabel.NONE.value, None

    def level(self, snippet: Snippet) -> ParticipationLabel:
        if not self._level_model.centroids:
            raise DegenerateInputError(
                "centroid model has no participation-level classes"
            )
        label, _ = classify_centroid(self.vector_source(snippet), self._level_model)
        return parse_label(label)

    def direct(self, snippet: Snippet) -> tuple[ParticipationLabel, dict[str, float] | None]:
        label, _ = classify_centroid(self.vector_source(snippet), self.model)
        return parse_label(label), None


class ExternalStage:
    """Adapter over a prediction file produced by an outside model."""

    kind = "external"
    binary_capable = True
    multiclass_capable = True

    def __init__(
        self,
        predictions: Mapping[str, tuple[ParticipationLabel, dict[str, float] | None]],
        threshold: float = 0.5,
    ):
        self.predictions = predictions
        self.threshold = threshold

    def _entry(self, snippet: Snippet):
        try:
            return self.predictions[snippet.comment_id]
        except KeyError:
            raise MissingDataError(
                f"no external prediction for sample {snippet.comment_id!r}"
            ) from None

    def binary(self, snippet: Snippet) -> tuple[bool, dict[str, float] | None]:
        label, scores = self._entry(snippet)
        if scores is not None and "participation" in scores:
            return scores["participation"] >= self.threshold, scores
        return label.is_participation, scores

    def level(self, snippet: Snippet) -> ParticipationLabel:
        label, _ = self._entry(snippet)
        if label is ParticipationLabel.NONE:
            raise DataFormatError(
                f"stage-2 prediction for {snippet.comment_id!r} is 'none' "
                "on a stage-1-positive sample"
            )
        return label

    def direct(self, snippet: Snippet) -> tuple[ParticipationLabel, dict[str, float] | None]:
        return self._entry(snippet)


def run_layered(
    snippets: Iterable[Snippet], stage1, stage2
) -> list[Prediction]:
    """Gate with stage1, assign levels with stage2 on positives only."""
    if not getattr(stage1, "binary_capable", False):
        raise ValueError(f"stage-1 classifier {stage1!r} is not binary-capable")
    if not getattr(stage2, "multiclass_capable", False):
        raise ValueError(f"stage-2 classifier {stage2!r} is not multiclass-capable")
    predictions = []
    for snippet in snippets:
        positive, scores = stage1.binary(snippet)
        if positive:
            level = stage2.level(snippet)
            predictions.append(
                Prediction(
                    sample_id=snippet.comment_id,
                    stage1=True,
                    stage2=level,
                    scores=scores,
                )
            )
        else:
            predictions.append(
                Prediction(sample_id=snippet.comment_id, stage1=False, scores=scores)
            )
    return predictions


def run_direct(snippets: Iterable[Snippet], classifier) -> list[Prediction]:
    """Single-stage five-way prediction; the binary view is derived."""
    if not getattr(classifier, "multiclass_capable", False):
        raise ValueError(f"classifier {classifier!r} is not multiclass-capable")
    predictions = []
    for snippet in snippets:
        label, scores = classifier.direct(snippet)
        predictions.append(
            Prediction(
                sample_id=snippet.comment_id,
                stage1=label.is_participation,
                stage2=label if label.is_participation else None,
                scores=scores,
            )
        )
    return predictions


def class_weights(counts: Mapping[Any, int]) -> dict[Any, float]:
    """w_c = total / (2 * n_c), the training-reweighting formula.

    Exported for external trainers; nothing in this package consumes
    the weights beyond writing them out.
    """
    if not counts:
        raise DegenerateInputError("class weights need at least one class")
    for label, count in counts.items():
        if count < 1:
            raise DegenerateInputError(
                f"class {str(label)!r} has count {count}; weights need every "
                "count >= 1"
            )
    total = sum(counts.values())
    return {label: total / (2 * count) for label, count in counts.items()}


def load_external_predictions(
    stream: IO[str],
) -> dict[str, tuple[ParticipationLabel, dict[str, float] | None]]:
    """Parse a prediction file: sample_id, label, optional scores."""
    predictions: dict[str, tuple[ParticipationLabel, dict[str, float] | None]] = {}
    for lineno, raw in iter_records(stream):
        try:
            sample_id = raw["sample_id"]
            label_name = raw["label"]
        except KeyError as exc:
            raise DataFormatError(
                f"line {lineno}: prediction missing key {exc}"
            ) from None
        if not isinstance(sample_id, str) or not sample_id:
            raise DataFormatError(f"line {lineno}: sample_id must be a nonempty string")
        if sample_id in predictions:
            raise DataFormatError(f"duplicate prediction for sample {sample_id!r}")
        try:
            label = parse_label(label_name)
        except DataFormatError as exc:
            raise DataFormatError(f"line {lineno}: {exc}") from None
        scores = raw.get("scores")
        if scores is not None:
            if not isinstance(scores, dict):
                raise DataFormatError(f"line {lineno}: scores must be an object")
            parsed: dict[str, float] = {}
            for key, value in scores.items():
                if key not in NAME_ORDER:
                    raise DataFormatError(
                        f"line {lineno}: unknown score label {key!r}"
                    )
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise DataFormatError(
                        f"line {lineno}: score for {key!r} is not a number"
                    )
                parsed[key] = float(value)
            scores = parsed
        predictions[sample_id] = (label, scores)
    return predictions


def prediction_to_record(prediction: Prediction) -> dict[str, Any]:
    record: dict[str, Any] = {
        "sample_id": prediction.sample_id,
        "label": prediction.final.value,
    }
    if prediction.scores is not None:
        record["scores"] = prediction.scores
    return record


def prediction_to_line(prediction: Prediction) -> str:
    return dump_record(prediction_to_record(prediction))
